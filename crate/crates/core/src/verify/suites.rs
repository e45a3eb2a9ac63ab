//! Named property suites. Each runs an exhaustive family of checks at a
//! given scale and stops at the first failing case, which (cases being
//! enumerated smallest first) is a minimal counterexample.
//!
//! Every suite also accepts a [`Fault`]: the corruption is applied to the
//! artefact under test in every case, and the suite is expected to fail.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expansion::{
    free_amalgam, incompatibility_set, replace_subpiece, subpieces, ExpandedContext, Status,
};
use crate::graphs::{is_connected, is_gaifman_connected};
use crate::hom::{embeddings_sorted, enumerate_homs, forbidden_hom, is_f_free, SearchConstraint};
use crate::io::structure_value;
use crate::morphism::{is_embedding, is_homomorphism};
use crate::ramsey::{
    partite_construction, rectified_structure, rectified_substructure, rectify, Construction,
    PartiteStructure,
};
use crate::signature::Signature;
use crate::structure::{sum, Structure};

use super::arrow::{verify_arrow, DEFAULT_BUDGET};
use super::enumerate::{all_structures, structures_up_to, trees_up_to};
use super::oracle::{expansion_diff, naive_rooted_hom};
use super::replay::replay;

pub const SUITES: &[&str] = &[
    "connectivity",
    "forbidden-singletons",
    "expansion-oracle",
    "hereditary",
    "subpiece-replacement",
    "free-amalgamation",
    "rectified-structure",
    "rectification",
    "rectified-substructure",
    "distinguished-copies",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Toggle one expansion mark.
    FlipTau,
    /// Remove one tuple.
    DeleteTuple,
    /// Reverse the order.
    BreakOrder,
}

impl Fault {
    pub fn apply(self, s: &Structure) -> Option<Structure> {
        match self {
            Fault::FlipTau => flip_tau(s),
            Fault::DeleteTuple => delete_tuple(s),
            Fault::BreakOrder => break_order(s),
        }
    }
}

/// Remove the first expansion mark, or add one if there is none.
pub fn flip_tau(s: &Structure) -> Option<Structure> {
    let ids: Vec<usize> = s.sig().expansion_ids().collect();
    if ids.is_empty() || s.is_empty() {
        return None;
    }
    let mut out = s.clone();
    for x in 0..s.len() {
        for &id in &ids {
            if s.contains(id, &[x]) {
                out.remove_tuple(id, &[x]);
                return Some(out);
            }
        }
    }
    out.add_tuple(ids[0], vec![0]).unwrap();
    Some(out)
}

/// Remove the first base tuple of arity at least two, else the first tuple.
pub fn delete_tuple(s: &Structure) -> Option<Structure> {
    let pick = s
        .tuples()
        .find(|(id, t)| !s.sig().symbol(*id).expansion && t.len() >= 2)
        .or_else(|| s.tuples().next())
        .map(|(id, t)| (id, t.clone()))?;
    let mut out = s.clone();
    out.remove_tuple(pick.0, &pick.1);
    Some(out)
}

/// Reverse the order of an ordered structure with at least two elements.
pub fn break_order(s: &Structure) -> Option<Structure> {
    let o = s.order()?;
    if o.len() < 2 {
        return None;
    }
    let mut out = s.clone();
    out.set_order(o.iter().rev().copied().collect()).unwrap();
    Some(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub scale: usize,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    pub runtime_ms: u64,
    pub colorings_checked: u64,
    pub cases: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

/// Default scale per suite.
pub fn default_scale(name: &str) -> usize {
    match name {
        "forbidden-singletons" | "subpiece-replacement" => 5,
        "rectified-structure" => 2,
        "rectification" | "rectified-substructure" | "distinguished-copies" => 40,
        _ => 3,
    }
}

/// Faults each suite is able to detect.
pub fn suite_faults(name: &str) -> &'static [Fault] {
    match name {
        "connectivity" | "subpiece-replacement" | "free-amalgamation" | "rectification" => {
            &[Fault::DeleteTuple]
        }
        "forbidden-singletons" | "expansion-oracle" | "hereditary" | "rectified-substructure" => {
            &[Fault::FlipTau]
        }
        "rectified-structure" => &[Fault::FlipTau, Fault::DeleteTuple, Fault::BreakOrder],
        "distinguished-copies" => &[Fault::DeleteTuple, Fault::BreakOrder],
        _ => &[],
    }
}

/// Outcome of a suite body.
struct Run {
    cases: u64,
    colorings: u64,
    failure: Option<Value>,
}

impl Run {
    fn new() -> Self {
        Run {
            cases: 0,
            colorings: 0,
            failure: None,
        }
    }

    /// Record a case; returns `true` when the suite should stop.
    fn case(&mut self, what: impl FnOnce() -> Value, failure: Option<String>) -> bool {
        self.cases += 1;
        if let Some(reason) = failure {
            let mut v = what();
            v["reason"] = Value::String(reason);
            self.failure = Some(v);
            return true;
        }
        false
    }
}

pub fn run_property_suite(name: &str, scale: usize, fault: Option<Fault>) -> Result<SuiteReport> {
    let start = Instant::now();
    let run = match name {
        "connectivity" => connectivity(scale, fault)?,
        "forbidden-singletons" => forbidden_singletons(scale, fault)?,
        "expansion-oracle" => expansion_oracle(scale, fault)?,
        "hereditary" => hereditary(scale, fault)?,
        "subpiece-replacement" => subpiece_replacement(scale, fault)?,
        "free-amalgamation" => free_amalgamation(scale, fault)?,
        "rectified-structure" => rectified_structures(scale, fault)?,
        "rectification" => rectification(scale, fault)?,
        "rectified-substructure" => rectified_substructures(scale, fault)?,
        "distinguished-copies" => distinguished(scale, fault)?,
        _ => return Err(Error::UnknownSuite(name.to_string())),
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        scale,
        status: if run.failure.is_none() {
            "pass"
        } else {
            "fail"
        }
        .into(),
        counterexample: run.failure,
        runtime_ms: start.elapsed().as_millis() as u64,
        colorings_checked: run.colorings,
        cases: run.cases,
        fault,
    })
}

fn corrupt(s: &Structure, fault: Option<Fault>) -> Structure {
    fault.and_then(|f| f.apply(s)).unwrap_or_else(|| s.clone())
}

fn sv(s: &Structure) -> Value {
    structure_value(s, None, None)
}

fn digraph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let mut s = Structure::with_size(Signature::base([("E", 2)]).unwrap(), n);
    for &(a, b) in edges {
        s.add_tuple(0, vec![a, b]).unwrap();
    }
    s
}

/// The context forbidding the directed path with two edges.
pub fn two_path_context() -> ExpandedContext {
    ExpandedContext::new(
        Signature::base([("E", 2)]).unwrap(),
        vec![digraph(3, &[(0, 1), (1, 2)])],
    )
    .expect("the 2-path is a tree")
}

/// Not a sum of two nonempty structures, by trying every split.
fn sum_indecomposable(a: &Structure) -> bool {
    let n = a.len();
    if n <= 1 {
        return true;
    }
    for mask in 1u32..(1 << (n - 1)) {
        let side = |x: usize| mask & (1 << x) != 0;
        if a.tuples()
            .all(|(_, t)| t.iter().all(|&x| side(x)) || t.iter().all(|&x| !side(x)))
        {
            return false;
        }
    }
    true
}

fn connectivity(scale: usize, fault: Option<Fault>) -> Result<Run> {
    let sig = Signature::base([("E", 2), ("U", 1)])?;
    let singles = all_structures(&sig, 1, true);
    let mut targets = Vec::new();
    for b in &singles {
        for c in &singles {
            targets.push(sum(&sig, &[b, c])?);
        }
    }
    let mut run = Run::new();
    for a in structures_up_to(&sig, scale, true) {
        let other = corrupt(&a, fault);
        let inc = is_connected(&a);
        let gai = is_gaifman_connected(&other);
        let dec = sum_indecomposable(&a);
        let mut failure = (inc != gai || inc != dec)
            .then(|| format!("incidence {inc}, gaifman {gai}, indecomposable {dec}"));
        if failure.is_none() && inc && !a.is_empty() {
            'outer: for (t, parts) in &targets {
                for h in enumerate_homs(&a, t, &SearchConstraint::homomorphism())? {
                    let left = h.iter().all(|y| parts[0].contains(y));
                    let right = h.iter().all(|y| parts[1].contains(y));
                    if !left && !right {
                        failure = Some(format!("homomorphism {h:?} into a sum splits"));
                        break 'outer;
                    }
                }
            }
        }
        if run.case(|| json!({ "structure": sv(&a) }), failure) {
            break;
        }
    }
    Ok(run)
}

fn tree_signature() -> Arc<Signature> {
    Signature::base([("E", 2), ("T", 3)]).unwrap()
}

fn forbidden_singletons(scale: usize, fault: Option<Fault>) -> Result<Run> {
    let sig = tree_signature();
    let mut run = Run::new();
    for f in trees_up_to(&sig, scale) {
        let ctx = ExpandedContext::new(sig.clone(), vec![f.clone()])?;
        for &(_, m, _) in ctx.singleton_sets() {
            let e = corrupt(&ctx.forbidden_singleton(0, m)?, fault);
            let v = ctx.is_in_c(&e, ctx.default_bound())?;
            let mut failure = None;
            if v.status != Status::NotInC {
                failure = Some(format!("E(F, m) judged {:?}", v.status));
            } else if !ctx.verify_certificate(&e, &v, ctx.default_bound())? {
                failure = Some("certificate does not re-verify".into());
            } else {
                // a larger structure admitting a homomorphism from E(F, m)
                let mut names = e.names().to_vec();
                names.push("extra".into());
                let mut big = Structure::new(e.sig().clone(), names)?;
                for (id, t) in e.tuples() {
                    big.add_tuple(id, t.clone())?;
                }
                big.add_tuple(0, vec![0, 1])?;
                let w = ctx.is_in_c(&big, ctx.default_bound())?;
                if w.status == Status::InC {
                    failure = Some("superstructure of E(F, m) judged a member".into());
                }
            }
            let cut = f.name(m).to_string();
            if run.case(
                || json!({ "tree": sv(&f), "cut": cut, "singleton": sv(&e) }),
                failure,
            ) {
                return Ok(run);
            }
        }
    }
    Ok(run)
}

fn f_free_digraphs(ctx: &ExpandedContext, max: usize) -> Result<Vec<Structure>> {
    let mut out = Vec::new();
    for a in structures_up_to(ctx.sigma(), max, true) {
        if is_f_free(&a, ctx.forbidden())? {
            out.push(a);
        }
    }
    Ok(out)
}

fn expansion_oracle(scale: usize, fault: Option<Fault>) -> Result<Run> {
    let ctx = two_path_context();
    let mut run = Run::new();
    for a in f_free_digraphs(&ctx, scale)? {
        let e = corrupt(&ctx.canonical_expansion(&a)?, fault);
        let diff = expansion_diff(&e, &ctx)?;
        let failure =
            (!diff.is_empty()).then(|| format!("{} differences, first {:?}", diff.len(), diff[0]));
        if run.case(
            || json!({ "structure": sv(&a), "expanded": sv(&e) }),
            failure,
        ) {
            break;
        }
    }
    Ok(run)
}

fn hereditary(scale: usize, fault: Option<Fault>) -> Result<Run> {
    let ctx = two_path_context();
    let bound = ctx.default_bound();
    let mut run = Run::new();
    for a in f_free_digraphs(&ctx, scale)? {
        let e = corrupt(&ctx.canonical_expansion(&a)?, fault);
        let v = ctx.is_in_c(&e, bound)?;
        let mut failure =
            (v.status != Status::InC).then(|| format!("canonical expansion judged {:?}", v.status));
        if failure.is_none() {
            // pieces mapping at x force the mark
            'marks: for (c, class) in ctx.classes().iter().enumerate() {
                for x in 0..e.len() {
                    let forced = class
                        .pieces
                        .iter()
                        .any(|&p| naive_rooted_hom(&ctx.pieces()[p].rooted, &e, x));
                    if forced && !e.contains(ctx.class_symbol(c), &[x]) {
                        failure = Some(format!(
                            "member lacks forced mark {} at {}",
                            class.id,
                            e.name(x)
                        ));
                        break 'marks;
                    }
                }
            }
        }
        if failure.is_none() {
            for mask in 0u32..(1 << e.len()) {
                let keep: Vec<usize> = (0..e.len()).filter(|&x| mask & (1 << x) != 0).collect();
                let sub = e.induced(&keep);
                let s = ctx.is_in_c(&sub, bound)?.status;
                if s != Status::InC {
                    failure = Some(format!("substructure on {keep:?} judged {s:?}"));
                    break;
                }
            }
        }
        if run.case(|| json!({ "structure": sv(&e) }), failure) {
            break;
        }
    }
    Ok(run)
}

fn subpiece_replacement(scale: usize, fault: Option<Fault>) -> Result<Run> {
    let sig = Signature::base([("E", 2)])?;
    let mut run = Run::new();
    for f in trees_up_to(&sig, scale) {
        let ctx = ExpandedContext::new(sig.clone(), vec![f.clone()])?;
        for (pi, piece) in ctx.pieces().iter().enumerate() {
            for sub in subpieces(&ctx, pi) {
                let class = ctx.pieces()[sub].class;
                for &with in &ctx.classes()[class].pieces {
                    let r = replace_subpiece(&ctx, pi, sub, with)?;
                    let mut result = r.result.clone();
                    result.structure = corrupt(&result.structure, fault);
                    let key: Vec<_> = incompatibility_set(&result, ctx.forbidden())
                        .into_keys()
                        .collect();
                    let failure = (key != ctx.classes()[piece.class].key)
                        .then(|| "replacement changed the incompatibility set".to_string());
                    let desc = || {
                        json!({ "tree": sv(&f), "piece": pi, "subpiece": sub, "with": with,
                                "result": structure_value(&result.structure, Some(result.root), None) })
                    };
                    if run.case(desc, failure) {
                        return Ok(run);
                    }
                }
            }
        }
    }
    Ok(run)
}

/// Expanded structures with at most `max` elements in the class, up to
/// isomorphism, smallest first.
pub fn small_members(ctx: &ExpandedContext, max: usize) -> Result<Vec<Structure>> {
    let sig = Arc::new(ctx.expanded_signature().with_order(false));
    let candidates = structures_up_to(&sig, max, true);
    let bound = ctx.default_bound();
    let verdicts: Vec<Result<bool>> = candidates
        .par_iter()
        .map(|s| {
            if forbidden_hom(&s.base_reduct(), ctx.forbidden())?.is_some() {
                return Ok(false);
            }
            Ok(ctx.is_in_c(s, bound)?.status == Status::InC)
        })
        .collect();
    let mut out = Vec::new();
    for (s, v) in candidates.into_iter().zip(verdicts) {
        if v? {
            out.push(s);
        }
    }
    Ok(out)
}

fn check_amalgam(
    ctx: &ExpandedContext,
    a: &Structure,
    b1: &Structure,
    b2: &Structure,
    f1: &[usize],
    f2: &[usize],
    fault: Option<Fault>,
) -> Result<Option<String>> {
    let am = free_amalgam(a, b1, b2, f1, f2, ctx, ctx.default_bound())?;
    let c = corrupt(&am.c, fault);
    if am.verdict.status != Status::InC {
        return Ok(Some(format!("amalgam judged {:?}", am.verdict.status)));
    }
    if c.len() != b1.len() + b2.len() - a.len() {
        return Ok(Some("domain is not the union".into()));
    }
    if !is_embedding(b1, &c, &am.g1) || !is_embedding(b2, &c, &am.g2) {
        return Ok(Some("side maps are not embeddings".into()));
    }
    if (0..a.len()).any(|x| am.g1[f1[x]] != am.g2[f2[x]]) {
        return Ok(Some("g1 f1 and g2 f2 differ".into()));
    }
    let mut union: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    for (b, g) in [(b1, &am.g1), (b2, &am.g2)] {
        for (id, t) in b.tuples() {
            union.insert((id, t.iter().map(|&x| g[x]).collect()));
        }
    }
    let have: BTreeSet<(usize, Vec<usize>)> = c.tuples().map(|(id, t)| (id, t.clone())).collect();
    if have != union {
        return Ok(Some("relations are not exactly the union".into()));
    }
    Ok(None)
}

fn free_amalgamation(scale: usize, fault: Option<Fault>) -> Result<Run> {
    let ctx = two_path_context();
    let members = small_members(&ctx, scale)?;
    let mut jobs: Vec<(usize, usize, usize)> = Vec::new();
    for (ai, a) in members.iter().enumerate() {
        for (i, b1) in members.iter().enumerate() {
            for (j, b2) in members.iter().enumerate() {
                if a.len() <= b1.len() && a.len() <= b2.len() {
                    jobs.push((ai, i, j));
                }
            }
        }
    }
    let results: Vec<Result<(u64, Option<Value>)>> = jobs
        .par_iter()
        .map(|&(ai, i, j)| {
            let (a, b1, b2) = (&members[ai], &members[i], &members[j]);
            let e1 = embeddings_sorted(a, b1)?;
            let e2 = embeddings_sorted(a, b2)?;
            let mut cases = 0;
            for f1 in &e1 {
                for f2 in &e2 {
                    cases += 1;
                    if let Some(reason) = check_amalgam(&ctx, a, b1, b2, f1, f2, fault)? {
                        let v = json!({ "base": sv(a), "left": sv(b1), "right": sv(b2),
                                        "f1": f1, "f2": f2, "reason": reason });
                        return Ok((cases, Some(v)));
                    }
                }
            }
            Ok((cases, None))
        })
        .collect();
    let mut run = Run::new();
    for r in results {
        let (cases, failure) = r?;
        run.cases += cases;
        if failure.is_some() && run.failure.is_none() {
            run.failure = failure;
        }
    }
    Ok(run)
}

/// Literal check of the rectification biconditional over every tuple of
/// elements, plus order preservation by the part map.
fn literal_rectified(x: &PartiteStructure) -> bool {
    let n = x.len();
    let ri = x.index.ranks().unwrap();
    if x.carrier
        .order()
        .unwrap()
        .windows(2)
        .any(|w| ri[x.parts[w[0]]] > ri[x.parts[w[1]]])
    {
        return false;
    }
    for id in 0..x.carrier.sig().len() {
        let k = x.carrier.sig().arity(id);
        for mut code in 0..n.pow(k as u32) {
            let mut t = vec![0; k];
            for v in t.iter_mut() {
                *v = code % n;
                code /= n;
            }
            let injective = t
                .iter()
                .enumerate()
                .all(|(i, &a)| t[..i].iter().all(|&b| a == b || x.parts[a] != x.parts[b]));
            let image: Vec<usize> = t.iter().map(|&a| x.parts[a]).collect();
            if x.carrier.contains(id, &t) != (injective && x.index.contains(id, &image)) {
                return false;
            }
        }
    }
    true
}

/// Ordered members with at most `max` elements, one per isomorphism type of
/// the ordered structure.
fn ordered_members(ctx: &ExpandedContext, max: usize) -> Result<Vec<Structure>> {
    let sig = Arc::new(ctx.expanded_signature().with_order(true));
    let mut out = Vec::new();
    for s in structures_up_to(&sig, max, true) {
        if forbidden_hom(&s.base_reduct(), ctx.forbidden())?.is_some() {
            continue;
        }
        if ctx.is_in_c(&s, ctx.default_bound())?.status == Status::InC {
            out.push(s);
        }
    }
    Ok(out)
}

fn rectified_structures(scale: usize, fault: Option<Fault>) -> Result<Run> {
    let ctx = two_path_context();
    let mut run = Run::new();
    for a in ordered_members(&ctx, 2)? {
        let n = a.len();
        for code in 0..scale.pow(n as u32) {
            let mut c = code;
            let sizes: Vec<usize> = (0..n)
                .map(|_| {
                    let s = c % scale + 1;
                    c /= scale;
                    s
                })
                .collect();
            let x = rectified_structure(&a, &sizes)?;
            let x = PartiteStructure {
                carrier: corrupt(&x.carrier, fault),
                ..x
            };
            let failure = check_rectified(&ctx, &a, &x)?;
            if run.case(
                || json!({ "a": sv(&a), "sizes": sizes, "x": sv(&x.carrier) }),
                failure,
            ) {
                return Ok(run);
            }
        }
    }
    Ok(run)
}

fn check_rectified(
    ctx: &ExpandedContext,
    a: &Structure,
    x: &PartiteStructure,
) -> Result<Option<String>> {
    if !literal_rectified(x) {
        return Ok(Some("biconditional or order fails".into()));
    }
    let v = ctx.is_in_c(&x.carrier, ctx.default_bound())?;
    if v.status != Status::InC {
        return Ok(Some(format!("rectified structure judged {:?}", v.status)));
    }
    if !is_homomorphism(&x.carrier, a, &x.parts) {
        return Ok(Some("part map is not a homomorphism".into()));
    }
    let parts: Vec<Vec<usize>> = (0..a.len()).map(|p| x.part(p)).collect();
    let total: usize = parts.iter().map(|p| p.len()).product();
    for mut code in 0..total {
        let section: Vec<usize> = parts
            .iter()
            .map(|p| {
                let y = p[code % p.len()];
                code /= p.len();
                y
            })
            .collect();
        if !is_embedding(a, &x.carrier, &section) {
            return Ok(Some(format!("section {section:?} is not an embedding")));
        }
    }
    if a.len() == 1
        && x.carrier
            .tuples()
            .any(|(_, t)| t.iter().any(|&y| y != t[0]))
    {
        return Ok(Some("one part but tuples join distinct elements".into()));
    }
    Ok(None)
}

/// Desk-scale constructions used by the partite suites.
pub fn sample_constructions(max_size: u64) -> Result<Vec<(ExpandedContext, Construction)>> {
    let mut out = Vec::new();

    // no forbidden trees: one point into two points, with P = B
    let sigma = Signature::base([("E", 2)])?;
    let ctx = ExpandedContext::new(sigma.clone(), Vec::new())?;
    let mut b = Structure::with_size(ctx.ordered_signature().clone(), 2);
    b.set_order(vec![0, 1])?;
    let a = b.induced(&[0]);
    let mut p = Structure::with_size(Arc::new(sigma.with_order(true)), 2);
    p.set_order(vec![0, 1])?;
    let con = partite_construction(&ctx, &a, &b, &p, 2, max_size)?;
    out.push((ctx, con));

    // forbidden 2-path: a marked head vertex, then a tail vertex, into an edge
    for end in [1, 0] {
        let ctx = two_path_context();
        let (_, b, p) = head_vertex_into_edge(&ctx)?;
        let a = b.induced(&[end]);
        let con = partite_construction(&ctx, &a, &b, &p, 2, max_size)?;
        out.push((ctx, con));
    }
    Ok(out)
}

/// The ordered expanded edge `B`, its head vertex `A` and the transitive
/// tournament on three vertices as `P`, in the 2-path context.
pub fn head_vertex_into_edge(ctx: &ExpandedContext) -> Result<(Structure, Structure, Structure)> {
    let mut b = ctx
        .canonical_expansion(&digraph(2, &[(0, 1)]))?
        .lift(ctx.ordered_signature())?;
    b.set_order(vec![0, 1])?;
    let a = b.induced(&[1]);
    let mut p = Structure::with_size(Arc::new(ctx.sigma().with_order(true)), 3);
    for (x, y) in [(0, 1), (0, 2), (1, 2)] {
        p.add_tuple(0, vec![x, y])?;
    }
    p.set_order(vec![0, 1, 2])?;
    Ok((a, b, p))
}

/// P-partite structures from the sample constructions: `C_0` and every stage,
/// at most `max` elements each.
fn partite_inputs(max: usize) -> Result<Vec<(usize, ExpandedContext, Vec<PartiteStructure>)>> {
    let mut out = Vec::new();
    for (i, (ctx, con)) in sample_constructions(100_000)?.into_iter().enumerate() {
        let mut stages = vec![con.c0.clone()];
        stages.extend(con.steps.iter().map(|s| s.c.clone()));
        stages.retain(|s| s.len() <= max);
        out.push((i, ctx, stages));
    }
    Ok(out)
}

/// Naive form of the rectification rule, over every tuple of elements.
fn naive_rectify_matches(c: &PartiteStructure, d: &PartiteStructure) -> bool {
    let n = c.len();
    let sig = c.carrier.sig();
    for id in sig.base_ids() {
        let k = sig.arity(id);
        for mut code in 0..n.pow(k as u32) {
            let mut t = vec![0; k];
            for v in t.iter_mut() {
                *v = code % n;
                code /= n;
            }
            let expected = if c.carrier.contains(id, &t) {
                true
            } else if k < 2 {
                false
            } else {
                let injective = t
                    .iter()
                    .enumerate()
                    .all(|(i, &a)| t[..i].iter().all(|&b| a == b || c.parts[a] != c.parts[b]));
                injective
                    && c.carrier.relation(id).iter().any(|y| {
                        y.iter().zip(&t).all(|(&u, &v)| {
                            c.parts[u] == c.parts[v] && c.tau_profile(u) == c.tau_profile(v)
                        })
                    })
            };
            if d.carrier.contains(id, &t) != expected {
                return false;
            }
        }
    }
    true
}

fn rectification(scale: usize, fault: Option<Fault>) -> Result<Run> {
    let mut run = Run::new();
    for (ci, ctx, stages) in partite_inputs(scale)? {
        for (si, c) in stages.iter().enumerate() {
            let d0 = rectify(c);
            let d = PartiteStructure {
                carrier: corrupt(&d0.carrier, fault),
                ..d0.clone()
            };
            let mut failure = None;
            if !c.is_p_partite() {
                failure = Some("input is not P-partite".to_string());
            } else if !naive_rectify_matches(c, &d) {
                failure = Some("differs from the naive rule".into());
            } else if !c.carrier.tuples().all(|(id, t)| d.carrier.contains(id, t)) {
                failure = Some("lost a tuple".into());
            } else if c.carrier.sig().len() != d.carrier.sig().len()
                || (0..c.carrier.sig().len())
                    .filter(|&id| c.carrier.sig().arity(id) == 1)
                    .any(|id| c.carrier.relation(id) != d.carrier.relation(id))
                || c.carrier.order() != d.carrier.order()
            {
                failure = Some("unary relations or order changed".into());
            } else if !d.satisfies_rectified_condition() || rectify(&d) != d {
                failure = Some("output not closed under lifts".into());
            } else if !d.is_p_partite() {
                failure = Some("output is not P-partite".into());
            } else {
                let v = ctx.is_in_c(&d.carrier, ctx.default_bound())?;
                if v.status != Status::InC {
                    failure = Some(format!("rectification judged {:?}", v.status));
                }
            }
            if run.case(
                || json!({ "construction": ci, "stage": si, "input": sv(&c.carrier) }),
                failure,
            ) {
                return Ok(run);
            }
        }
    }
    Ok(run)
}

fn rectified_substructures(scale: usize, fault: Option<Fault>) -> Result<Run> {
    let mut run = Run::new();
    for (ci, (_ctx, con)) in sample_constructions(100_000)?.into_iter().enumerate() {
        for step in &con.steps {
            let Some(built) = &step.built else { continue };
            if built.d.len() > scale {
                continue;
            }
            let (b0, keep) = rectified_substructure(&built.d, &con.a, &step.e_k)?;
            let b = PartiteStructure {
                carrier: corrupt(&b0.carrier, fault),
                ..b0.clone()
            };
            let a_tau = |x: usize| -> BTreeSet<usize> {
                con.a
                    .sig()
                    .expansion_ids()
                    .filter(|&id| con.a.contains(id, &[x]))
                    .collect()
            };
            let inv: HashMap<usize, usize> =
                step.e_k.iter().enumerate().map(|(x, &p)| (p, x)).collect();
            let naive: Vec<usize> = (0..built.d.len())
                .filter(|&y| {
                    inv.get(&built.d.parts[y])
                        .is_some_and(|&x| built.d.tau_profile(y) == a_tau(x))
                })
                .collect();
            let mut failure = None;
            if naive != keep {
                failure = Some("selected elements differ from the naive rule".to_string());
            } else if !b.is_rectified() {
                failure = Some("result is not rectified".into());
            } else if keep
                .iter()
                .zip(&b.parts)
                .any(|(&y, &x)| step.e_k[x] != built.d.parts[y])
            {
                failure = Some("part map is not the pulled-back part map".into());
            } else if b.carrier != built.d.carrier.induced(&keep) {
                failure = Some("result is not the induced substructure".into());
            }
            if run.case(
                || json!({ "construction": ci, "step": step.k, "b": sv(&b.carrier) }),
                failure,
            ) {
                return Ok(run);
            }
        }
    }
    Ok(run)
}

/// The stage that step `k`'s copy maps land in, given a possibly corrupted
/// final structure.
fn stage<'a>(con: &'a Construction, k: usize, last: &'a PartiteStructure) -> &'a PartiteStructure {
    if con.steps[k..].iter().all(|s| s.built.is_none()) {
        last
    } else {
        &con.steps[k - 1].c
    }
}

fn distinguished(scale: usize, fault: Option<Fault>) -> Result<Run> {
    let mut run = Run::new();
    for (ci, (ctx, con)) in sample_constructions(100_000)?.into_iter().enumerate() {
        if con.result.len() > scale {
            continue;
        }
        let last = PartiteStructure {
            carrier: corrupt(&con.result.carrier, fault),
            ..con.result.clone()
        };
        let mut failure = None;

        // copy maps of every step
        'steps: for step in &con.steps {
            let Some(built) = &step.built else { continue };
            let target = stage(&con, step.k, &last);
            let prev = if step.k == 1 {
                &con.c0
            } else {
                &con.steps[step.k - 2].c
            };
            for (g, l) in built.lambda.iter().enumerate() {
                if !is_embedding(&built.d.carrier, &target.carrier, l) {
                    failure = Some(format!(
                        "step {}: copy {g} is not an embedding of D",
                        step.k
                    ));
                } else if !is_homomorphism(&prev.carrier, &target.carrier, l) {
                    failure = Some(format!(
                        "step {}: copy {g} is not a homomorphism of C",
                        step.k
                    ));
                } else if (0..l.len()).any(|x| target.parts[l[x]] != built.d.parts[x]) {
                    failure = Some(format!("step {}: copy {g} moves parts", step.k));
                }
                if failure.is_some() {
                    break 'steps;
                }
            }
        }

        // chains: all first copies, all last copies, and replayed choices
        if failure.is_none() {
            let mut chains: Vec<Vec<usize>> = Vec::new();
            for pick_last in [false, true] {
                let choices: Vec<usize> = con
                    .steps
                    .iter()
                    .map(|s| {
                        s.built
                            .as_ref()
                            .map_or(0, |b| if pick_last { b.lambda.len() - 1 } else { 0 })
                    })
                    .collect();
                chains.push(compose_chain(&con, &choices));
            }
            let a_copies = embeddings_sorted(&con.a, &con.result.carrier)?;
            let index: HashMap<&[usize], usize> = a_copies
                .iter()
                .enumerate()
                .map(|(i, e)| (e.as_slice(), i))
                .collect();
            let chi = |m: &[usize]| index.get(m).map_or(0, |&i| (i % 2) as u64);
            let out = replay(&con, &chi)?;
            let choices: Vec<usize> = out.choices.iter().map(|c| c.unwrap_or(0)).collect();
            chains.push(compose_chain(&con, &choices));
            'chains: for h in &chains {
                for (f, c) in con.distinguished.iter().enumerate() {
                    let hc: Vec<usize> = c.iter().map(|&x| h[x]).collect();
                    if !is_embedding(&con.b, &last.carrier, &hc) {
                        failure = Some(format!("distinguished copy {f} is not an embedding"));
                        break 'chains;
                    }
                }
            }
            // a monochromatic distinguished copy is only promised when P arrows
            let psig = con.p.sig().clone();
            let b_star = con.b.ordered_base_reduct().lift(psig.clone())?;
            let a_star = con.a.ordered_base_reduct().lift(psig)?;
            let arrows = verify_arrow(&con.p, &b_star, &a_star, con.r, DEFAULT_BUDGET)?.verified();
            let sound = out.selections_monochromatic
                && out.fibres_constant
                && (out.copy.is_none() || out.embedding);
            if failure.is_none() && (!sound || (arrows && !out.ok())) {
                failure = Some(format!("replay failed: {out:?}"));
            }
        }
        if failure.is_none() {
            if !last.is_p_partite() {
                failure = Some("result is not P-partite".into());
            } else {
                let v = ctx.is_in_c(&last.carrier, ctx.default_bound())?;
                if v.status != Status::InC {
                    failure = Some(format!("result judged {:?}", v.status));
                }
            }
        }
        if run.case(
            || json!({ "construction": ci, "size": con.result.len() }),
            failure,
        ) {
            break;
        }
    }
    Ok(run)
}

/// `h = h_N ∘ ... ∘ h_1` for the given copy index per step.
pub fn compose_chain(con: &Construction, choices: &[usize]) -> Vec<usize> {
    let mut h: Vec<usize> = (0..con.c0.len()).collect();
    for (step, &g) in con.steps.iter().zip(choices) {
        if let Some(built) = &step.built {
            h = h.iter().map(|&x| built.lambda[g][x]).collect();
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(
            run_property_suite("nope", 1, None),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn faults_change_structures() {
        let ctx = two_path_context();
        let mut e = ctx
            .canonical_expansion(&digraph(2, &[(0, 1)]))
            .unwrap()
            .lift(ctx.ordered_signature())
            .unwrap();
        e.set_order(vec![0, 1]).unwrap();
        for f in [Fault::FlipTau, Fault::DeleteTuple, Fault::BreakOrder] {
            assert_ne!(f.apply(&e).unwrap(), e);
        }
    }
}

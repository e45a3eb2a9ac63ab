//! The partite construction: a structure `C` with `C -> (B)^A_r`, built from
//! a Ramsey partner `P -> (B*)^{A*}_r` of the base reducts.
//!
//! `C_0` is a disjoint union of copies of `B`, one over every copy of `B*` in
//! `P`. Step `k` handles the `k`-th copy `e_k` of `A*` in `P`: rectify
//! `C_{k-1}` to `D`, cut out the `A`-rectified part `B_k` over `e_k`, apply the
//! partite lemma to get `E_k`, and amalgamate one copy of `D` over every copy
//! of `B_k` in `E_k`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expansion::ExpandedContext;
use crate::hom::embeddings_sorted;
use crate::morphism::is_embedding;
use crate::structure::Structure;

use super::lemma::{binomial, lemma_levels, partite_lemma, PartiteLemma};
use super::partite::PartiteStructure;
use super::rectify::{rectified_substructure, rectify};

/// Default cap on the number of elements of any intermediate structure.
pub const DEFAULT_MAX_SIZE: u64 = 200_000;

/// Data of one amalgamation step.
#[derive(Clone, Debug)]
pub struct BuiltStep {
    /// The rectification `D_{k-1}` of the previous structure.
    pub d: PartiteStructure,
    /// Elements of `D_{k-1}` forming `B_k`, in `B_k`'s domain order.
    pub b_in_d: Vec<usize>,
    /// `B_k` and `E_k`.
    pub lemma: PartiteLemma,
    /// Copies of `B_k` in `E_k`, as maps into `E_k`.
    pub copies: Vec<Vec<usize>>,
    /// `lambda[g][x]`: image of `x` in `D_{k-1}` under the `g`-th copy.
    pub lambda: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct Step {
    pub k: usize,
    /// The copy `e_k: A* -> P` handled by this step.
    pub e_k: Vec<usize>,
    /// `None` when `A` has no partite embedding over `e_k` and `C_k = C_{k-1}`.
    pub built: Option<Box<BuiltStep>>,
    pub size: usize,
    /// `C_k`.
    pub c: PartiteStructure,
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub a: Structure,
    pub b: Structure,
    pub p: Structure,
    pub r: u64,
    /// Copies of `B*` in `P` in canonical order.
    pub b_star_copies: Vec<Vec<usize>>,
    /// Copies of `A*` in `P` in canonical order; step `k` handles entry `k - 1`.
    pub a_star_copies: Vec<Vec<usize>>,
    pub c0: PartiteStructure,
    /// `distinguished[i]`: the copy of `B` in `C_0` over the `i`-th copy of `B*`.
    pub distinguished: Vec<Vec<usize>>,
    pub steps: Vec<Step>,
    pub result: PartiteStructure,
}

/// `C_0`: one copy of `B` over every copy `f` of `B*` in `P`, ordered by
/// the part, then the copy, then the position in `B`.
pub fn build_c0(
    b: &Structure,
    p: &Structure,
    copies: &[Vec<usize>],
) -> Result<(PartiteStructure, Vec<Vec<usize>>)> {
    let rb = b
        .ranks()
        .ok_or_else(|| Error::NotPartite("B must be ordered".into()))?;
    let rp = p
        .ranks()
        .ok_or_else(|| Error::NotPartite("P must be ordered".into()))?;
    let mut names = Vec::new();
    let mut parts = Vec::new();
    let mut distinguished = Vec::new();
    for (i, f) in copies.iter().enumerate() {
        let mut c = Vec::with_capacity(b.len());
        for x in 0..b.len() {
            c.push(names.len());
            names.push(format!("f{i}[{}]", b.name(x)));
            parts.push(f[x]);
        }
        distinguished.push(c);
    }
    let mut carrier = Structure::new(b.sig().clone(), names)?;
    for c in &distinguished {
        for (id, t) in b.tuples() {
            carrier.add_tuple(id, t.iter().map(|&x| c[x]).collect())?;
        }
    }
    let mut order: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (i, c) in distinguished.iter().enumerate() {
        for x in 0..b.len() {
            order.push((rp[parts[c[x]]], i, rb[x], c[x]));
        }
    }
    order.sort_unstable();
    carrier.set_order(order.into_iter().map(|t| t.3).collect())?;
    Ok((
        PartiteStructure::new(carrier, parts, p.clone())?,
        distinguished,
    ))
}

/// All copies of a rectified `B` in a rectified `E` over the same index:
/// order-preserving injections of each part, in lexicographic order.
pub fn rectified_copies(b: &PartiteStructure, e: &PartiteStructure) -> Vec<Vec<usize>> {
    let idx = b.index.order().unwrap().to_vec();
    let b_parts: Vec<Vec<usize>> = idx.iter().map(|&p| b.part(p)).collect();
    let e_parts: Vec<Vec<usize>> = idx.iter().map(|&p| e.part(p)).collect();
    let combos: Vec<Vec<Vec<usize>>> = b_parts
        .iter()
        .zip(&e_parts)
        .map(|(bp, ep)| combinations(ep.len(), bp.len()))
        .collect();
    if combos.iter().any(|c| c.is_empty()) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; combos.len()];
    loop {
        let mut g = vec![usize::MAX; b.len()];
        for (i, c) in cur.iter().enumerate() {
            for (&x, &j) in b_parts[i].iter().zip(&combos[i][*c]) {
                g[x] = e_parts[i][j];
            }
        }
        out.push(g);
        let mut k = combos.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < combos[k].len() {
                break;
            }
            cur[k] = 0;
        }
    }
}

/// `k`-subsets of `0..n` as increasing vectors, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        while i > 0 && c[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// One step of the construction. Returns `C_k` and the step data, or `None`
/// for the data when the step is skipped.
pub fn partite_step(
    a: &Structure,
    c_prev: &PartiteStructure,
    e_k: &[usize],
    r: u64,
    k: usize,
    max_size: u64,
) -> Result<(PartiteStructure, Option<Box<BuiltStep>>)> {
    if c_prev.partite_embeddings(a, e_k)?.next().is_none() {
        log::debug!("step {k}: no partite copy of A over e_k, skipped");
        return Ok((c_prev.clone(), None));
    }
    let d = rectify(c_prev);
    let (b_k, b_in_d) = rectified_substructure(&d, a, e_k)?;

    let sizes = b_k.part_sizes();
    let b_sizes: Vec<usize> = a.order().unwrap().iter().map(|&p| sizes[p]).collect();
    let levels = lemma_levels(&b_sizes, r)?;
    let e_size: u64 = levels.iter().fold(0u64, |acc, l| acc.saturating_add(l.1));
    let copies: u128 = levels.iter().zip(&b_sizes).fold(1u128, |acc, (l, &b)| {
        acc.saturating_mul(binomial(l.1, b as u64))
    });
    let total = copies
        .saturating_mul((d.len() - b_k.len()) as u128)
        .saturating_add(e_size as u128);
    if total > max_size as u128 {
        return Err(Error::SizeLimitExceeded {
            step: k,
            size: total.min(u64::MAX as u128) as u64,
            limit: max_size,
        });
    }

    let lemma = partite_lemma(a, &b_k, r, max_size)?;
    let e = &lemma.e;
    let copies = rectified_copies(&b_k, e);
    let mut in_b = vec![usize::MAX; d.len()];
    for (i, &x) in b_in_d.iter().enumerate() {
        in_b[x] = i;
    }

    let mut names: Vec<String> = e
        .carrier
        .names()
        .iter()
        .map(|n| format!("E{k}[{n}]"))
        .collect();
    let mut parts: Vec<usize> = e.parts.iter().map(|&q| e_k[q]).collect();
    let mut key: Vec<(usize, usize)> = (0..e.len())
        .map(|y| (0, e.carrier.rank(y).unwrap()))
        .collect();
    let mut lambda = Vec::with_capacity(copies.len());
    for (j, g) in copies.iter().enumerate() {
        let mut l = vec![usize::MAX; d.len()];
        for x in 0..d.len() {
            if in_b[x] != usize::MAX {
                l[x] = g[in_b[x]];
            } else {
                l[x] = names.len();
                names.push(format!("L{k}.{j}[{}]", d.carrier.name(x)));
                parts.push(d.parts[x]);
                key.push((j + 1, d.carrier.rank(x).unwrap()));
            }
        }
        lambda.push(l);
    }
    let mut carrier = Structure::new(d.carrier.sig().clone(), names)?;
    for l in &lambda {
        for (id, t) in d.carrier.tuples() {
            carrier.add_tuple(id, t.iter().map(|&x| l[x]).collect())?;
        }
    }

    // topological order: parts by the index order; inside a part, the order of
    // E and of every copy of D, ties broken by `key`
    let n = carrier.len();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut chains: Vec<Vec<usize>> = vec![e.carrier.order().unwrap().to_vec()];
    for l in &lambda {
        chains.push(d.carrier.order().unwrap().iter().map(|&x| l[x]).collect());
    }
    for chain in &chains {
        for w in chain.windows(2) {
            if parts[w[0]] == parts[w[1]] {
                succ[w[0]].insert(w[1]);
            }
        }
    }
    let mut indeg = vec![0usize; n];
    for s in &succ {
        for &y in s {
            indeg[y] += 1;
        }
    }
    let mut order = Vec::with_capacity(n);
    for &p in c_prev.index.order().unwrap() {
        let mut ready: BTreeSet<((usize, usize), usize)> = (0..n)
            .filter(|&y| parts[y] == p && indeg[y] == 0)
            .map(|y| (key[y], y))
            .collect();
        while let Some((_, y)) = ready.pop_first() {
            order.push(y);
            for &z in &succ[y] {
                indeg[z] -= 1;
                if indeg[z] == 0 {
                    ready.insert((key[z], z));
                }
            }
        }
    }
    if order.len() != n {
        return Err(Error::NotPartite(format!(
            "step {k}: orders of the copies conflict"
        )));
    }
    carrier.set_order(order)?;
    let c_k = PartiteStructure::new(carrier, parts, c_prev.index.clone())?;
    log::debug!(
        "step {k}: |D| = {}, |B_k| = {}, |E_k| = {}, copies = {}, |C_k| = {}",
        d.len(),
        b_k.len(),
        e.len(),
        copies.len(),
        n
    );
    Ok((
        c_k,
        Some(Box::new(BuiltStep {
            d,
            b_in_d,
            lemma,
            copies,
            lambda,
        })),
    ))
}

/// Run the whole construction for ordered `A`, `B` in the expanded class and
/// an ordered base structure `P`.
pub fn partite_construction(
    ctx: &ExpandedContext,
    a: &Structure,
    b: &Structure,
    p: &Structure,
    r: u64,
    max_size: u64,
) -> Result<Construction> {
    let sig = ctx.ordered_signature();
    for (label, s) in [("A", a), ("B", b)] {
        if s.sig().as_ref() != sig.as_ref() || !s.is_ordered() {
            return Err(Error::SignatureMismatch(format!(
                "{label} must be an ordered expanded structure"
            )));
        }
        let v = ctx.is_in_c(s, ctx.default_bound())?;
        if !v.is_in() {
            return Err(Error::NotInClass(format!("{label}: {:?}", v.status)));
        }
    }
    let psig = Arc::new(ctx.sigma().with_order(true));
    if p.sig().as_ref() != psig.as_ref() || !p.is_ordered() {
        return Err(Error::SignatureMismatch(
            "P must be an ordered base structure".into(),
        ));
    }
    let a_star = a.ordered_base_reduct().lift(psig.clone())?;
    let b_star = b.ordered_base_reduct().lift(psig)?;
    let b_star_copies = embeddings_sorted(&b_star, p)?;
    let a_star_copies = embeddings_sorted(&a_star, p)?;
    let c0_size = (b_star_copies.len() * b.len()) as u64;
    if c0_size > max_size {
        return Err(Error::SizeLimitExceeded {
            step: 0,
            size: c0_size,
            limit: max_size,
        });
    }
    let (c0, distinguished) = build_c0(b, p, &b_star_copies)?;
    log::info!(
        "C_0: {} copies of B, {} elements; {} steps",
        b_star_copies.len(),
        c0.len(),
        a_star_copies.len()
    );
    let mut cur = c0.clone();
    let mut steps = Vec::with_capacity(a_star_copies.len());
    for (i, e_k) in a_star_copies.iter().enumerate() {
        let (next, built) = partite_step(a, &cur, e_k, r, i + 1, max_size)?;
        steps.push(Step {
            k: i + 1,
            e_k: e_k.clone(),
            built,
            size: next.len(),
            c: next.clone(),
        });
        cur = next;
    }
    Ok(Construction {
        a: a.clone(),
        b: b.clone(),
        p: p.clone(),
        r,
        b_star_copies,
        a_star_copies,
        c0,
        distinguished,
        steps,
        result: cur,
    })
}

impl Construction {
    /// The map `D_{k-1} -> C_k` of copy `g` at step `k`, or the identity for
    /// a skipped step.
    pub fn step_map(&self, k: usize, g: usize) -> Vec<usize> {
        let step = &self.steps[k - 1];
        match &step.built {
            Some(b) => b.lambda[g].clone(),
            None => (0..step.size).collect(),
        }
    }

    /// Every distinguished copy is an embedding of `B` into `C_0`.
    pub fn distinguished_are_embeddings(&self) -> bool {
        self.distinguished
            .iter()
            .all(|c| is_embedding(&self.b, &self.c0.carrier, c))
    }
}

//! Membership in the expanded class: one-element types, tuple traces and
//! canonization by gluing witnesses onto every element.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use serde::Serialize;

use super::{root_unaries, ExpandedContext};
use crate::error::{Error, Result};
use crate::hom::{exists_rooted_hom, find_hom, forbidden_hom, SearchConstraint};
use crate::morphism::is_embedding;
use crate::signature::SymbolId;
use crate::structure::{join, RootedStructure, Structure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    InC,
    NotInC,
    Unknown,
}

/// The isomorphism type of a one-element substructure: base symbols holding
/// the constant tuple, and the expansion classes marked.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementType {
    pub sigma: BTreeSet<SymbolId>,
    pub tau: BTreeSet<usize>,
}

impl ElementType {
    pub fn of(ctx: &ExpandedContext, a: &Structure, x: usize) -> Self {
        let sigma = a
            .constant_type(x)
            .into_iter()
            .filter(|&id| id < ctx.sigma().len())
            .collect();
        ElementType {
            sigma,
            tau: ctx.tau_of(a, x),
        }
    }

    /// The one-element base structure with this type's loops.
    pub fn base_structure(&self, ctx: &ExpandedContext) -> Structure {
        let mut s = Structure::new(ctx.sigma().clone(), vec!["x".into()]).unwrap();
        for &id in &self.sigma {
            s.add_tuple(id, vec![0; ctx.sigma().arity(id)]).unwrap();
        }
        s
    }

    /// The one-element expanded structure of this type.
    pub fn structure(&self, ctx: &ExpandedContext) -> Structure {
        let mut s = Structure::new(ctx.expanded_signature().clone(), vec!["x".into()]).unwrap();
        for &id in &self.sigma {
            s.add_tuple(id, vec![0; ctx.sigma().arity(id)]).unwrap();
        }
        for &c in &self.tau {
            s.add_tuple(ctx.class_symbol(c), vec![0]).unwrap();
        }
        s
    }
}

#[derive(Clone, Debug)]
pub enum Certificate {
    /// A canonical structure realizing the type at `element`.
    Witness {
        structure: Structure,
        element: usize,
    },
    /// A canonical superstructure of the input; input elements keep their names.
    Superstructure(Structure),
    /// `E(F, m)` maps into the element.
    ForbiddenSingleton { tree: usize, cut: usize },
    /// The element's base part already admits a forbidden tree.
    ForbiddenHom { tree: usize, map: Vec<usize> },
    /// A piece of `class` maps onto the element, which lacks that mark.
    MissingMark { class: usize, piece: usize },
    /// The complete family of candidate witnesses was tried without success.
    NoWitness { candidates: usize },
    /// Candidates larger than the bound were left untried.
    BoundExhausted { bound: usize, next_size: usize },
    Element {
        element: usize,
        verdict: Box<MembershipVerdict>,
    },
    Trace {
        symbol: SymbolId,
        tuple: Vec<usize>,
        verdict: Box<MembershipVerdict>,
    },
    /// The canonized trace is not canonical.
    NotCanonical(Structure),
}

#[derive(Clone, Debug)]
pub struct MembershipVerdict {
    pub status: Status,
    pub certificate: Certificate,
}

impl MembershipVerdict {
    pub(crate) fn witness(structure: Structure, element: usize) -> Self {
        MembershipVerdict {
            status: Status::InC,
            certificate: Certificate::Witness { structure, element },
        }
    }

    fn not_in(certificate: Certificate) -> Self {
        MembershipVerdict {
            status: Status::NotInC,
            certificate,
        }
    }

    pub fn is_in(&self) -> bool {
        self.status == Status::InC
    }
}

impl ExpandedContext {
    /// Default witness-size bound: twice the largest forbidden tree.
    pub fn default_bound(&self) -> usize {
        2 * self
            .forbidden()
            .iter()
            .map(|f| f.len())
            .max()
            .unwrap_or(1)
            .max(1)
    }

    /// Decide whether a one-element type occurs in a canonical structure.
    ///
    /// A witness must glue onto the element, for every marked class, some
    /// piece of that class; the join of those pieces then maps into it, so it
    /// is itself a witness whenever one exists. Trying all such joins decides
    /// the question; only joins larger than `bound` are skipped.
    pub fn element_verdict(&self, t: &ElementType, bound: usize) -> Result<MembershipVerdict> {
        if let Some(v) = self.registry.read().unwrap().get(t) {
            return Ok(v.clone());
        }
        let v = self.decide_element(t, bound)?;
        if v.status != Status::Unknown {
            let mut reg = self.registry.write().unwrap();
            reg.entry(t.clone()).or_insert_with(|| v.clone());
        }
        Ok(v)
    }

    fn decide_element(&self, t: &ElementType, bound: usize) -> Result<MembershipVerdict> {
        for (tree, cut, set) in self.singleton_sets() {
            if set.is_subset(&t.tau) {
                return Ok(MembershipVerdict::not_in(Certificate::ForbiddenSingleton {
                    tree: *tree,
                    cut: *cut,
                }));
            }
        }
        let x = t.base_structure(self);
        if let Some((tree, map)) = forbidden_hom(&x, self.forbidden())? {
            return Ok(MembershipVerdict::not_in(Certificate::ForbiddenHom {
                tree,
                map,
            }));
        }
        for (c, class) in self.classes().iter().enumerate() {
            if t.tau.contains(&c) {
                continue;
            }
            for &p in &class.representatives {
                if exists_rooted_hom(&self.pieces()[p].rooted, &x, 0)? {
                    return Ok(MembershipVerdict::not_in(Certificate::MissingMark {
                        class: c,
                        piece: p,
                    }));
                }
            }
        }

        let marked: Vec<usize> = t.tau.iter().copied().collect();
        let options: Vec<Vec<usize>> = marked
            .iter()
            .map(|&c| {
                self.classes()[c]
                    .representatives
                    .iter()
                    .copied()
                    .filter(|&p| root_unaries(&self.pieces()[p].rooted).is_subset(&t.sigma))
                    .collect()
            })
            .collect();
        if options.iter().any(|o| o.is_empty()) {
            return Ok(MembershipVerdict::not_in(Certificate::NoWitness {
                candidates: 0,
            }));
        }
        let mut combos: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut idx = vec![0usize; options.len()];
        loop {
            let choice: Vec<usize> = idx.iter().zip(&options).map(|(&i, o)| o[i]).collect();
            let size = 1 + choice
                .iter()
                .map(|&p| self.pieces()[p].rooted.structure.len() - 1)
                .sum::<usize>();
            combos.push((size, choice));
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
        combos.sort();

        let root = RootedStructure {
            structure: x,
            root: 0,
        };
        let mut tried = HashSet::new();
        for (size, choice) in &combos {
            if *size > bound {
                return Ok(MembershipVerdict {
                    status: Status::Unknown,
                    certificate: Certificate::BoundExhausted {
                        bound,
                        next_size: *size,
                    },
                });
            }
            let mut parts: Vec<&RootedStructure> = vec![&root];
            parts.extend(choice.iter().map(|&p| &self.pieces()[p].rooted));
            let (j, _) = join(self.sigma(), &parts)?;
            if !tried.insert(crate::canon::rooted_canonical_form(&j)) {
                continue;
            }
            if forbidden_hom(&j.structure, self.forbidden())?.is_some() {
                continue;
            }
            if self.marks_at(&j.structure, j.root)? == t.tau {
                let w = self.expand_unregistered(&j.structure)?;
                self.register_canonical(&w);
                return Ok(MembershipVerdict::witness(w, j.root));
            }
        }
        Ok(MembershipVerdict::not_in(Certificate::NoWitness {
            candidates: tried.len(),
        }))
    }

    fn element_types(&self, a: &Structure) -> Vec<ElementType> {
        (0..a.len()).map(|x| ElementType::of(self, a, x)).collect()
    }

    /// Membership of a structure over `σ ∪ τ` (the order, if any, is ignored):
    /// every one-element substructure and every tuple trace must be in the class.
    pub fn is_in_c(&self, a: &Structure, bound: usize) -> Result<MembershipVerdict> {
        self.check_expanded(a)?;
        let a = if a.is_ordered() {
            a.unordered()
        } else {
            a.clone()
        };
        let types = self.element_types(&a);
        let mut unknown: Option<MembershipVerdict> = None;
        let mut checked: HashSet<&ElementType> = HashSet::new();
        for (x, t) in types.iter().enumerate() {
            if !checked.insert(t) {
                continue;
            }
            let v = self.element_verdict(t, bound)?;
            match v.status {
                Status::InC => {}
                Status::NotInC => {
                    return Ok(MembershipVerdict::not_in(Certificate::Element {
                        element: x,
                        verdict: Box::new(v),
                    }))
                }
                Status::Unknown => {
                    unknown.get_or_insert(MembershipVerdict {
                        status: Status::Unknown,
                        certificate: Certificate::Element {
                            element: x,
                            verdict: Box::new(v),
                        },
                    });
                }
            }
        }
        let mut seen_traces = HashSet::new();
        for id in self.sigma().base_ids() {
            for t in a.relation(id) {
                let trace = super::tuple_trace(&a, id, t)?;
                let key = (id, self.element_types(&trace));
                if !seen_traces.insert(key.clone()) {
                    continue;
                }
                let v = self.trace_verdict(key, &trace, bound)?;
                match v.status {
                    Status::InC => {}
                    Status::NotInC => {
                        return Ok(MembershipVerdict::not_in(Certificate::Trace {
                            symbol: id,
                            tuple: t.clone(),
                            verdict: Box::new(v),
                        }))
                    }
                    Status::Unknown => {
                        unknown.get_or_insert(MembershipVerdict {
                            status: Status::Unknown,
                            certificate: Certificate::Trace {
                                symbol: id,
                                tuple: t.clone(),
                                verdict: Box::new(v),
                            },
                        });
                    }
                }
            }
        }
        if let Some(u) = unknown {
            return Ok(u);
        }
        Ok(MembershipVerdict {
            status: Status::InC,
            certificate: Certificate::Superstructure(self.canonize(&a, bound)?),
        })
    }

    fn trace_verdict(
        &self,
        key: (SymbolId, Vec<ElementType>),
        trace: &Structure,
        bound: usize,
    ) -> Result<MembershipVerdict> {
        if let Some(v) = self.trace_memo.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = self.decide_by_canonization(trace, bound)?;
        if v.status != Status::Unknown {
            self.trace_memo
                .write()
                .unwrap()
                .entry(key)
                .or_insert_with(|| v.clone());
        }
        Ok(v)
    }

    /// Membership decided by gluing witnesses onto every element and testing
    /// the result for canonicity. Exact whenever all element types resolve.
    pub fn decide_by_canonization(&self, a: &Structure, bound: usize) -> Result<MembershipVerdict> {
        self.check_expanded(a)?;
        let a = if a.is_ordered() {
            a.unordered()
        } else {
            a.clone()
        };
        let mut unknown = None;
        for x in 0..a.len() {
            let v = self.element_verdict(&ElementType::of(self, &a, x), bound)?;
            match v.status {
                Status::InC => {}
                Status::NotInC => {
                    return Ok(MembershipVerdict::not_in(Certificate::Element {
                        element: x,
                        verdict: Box::new(v),
                    }))
                }
                Status::Unknown => {
                    unknown.get_or_insert(MembershipVerdict {
                        status: Status::Unknown,
                        certificate: Certificate::Element {
                            element: x,
                            verdict: Box::new(v),
                        },
                    });
                }
            }
        }
        if let Some(u) = unknown {
            return Ok(u);
        }
        let s = self.canonize(&a, bound)?;
        if self.is_canonical(&s)? {
            Ok(MembershipVerdict {
                status: Status::InC,
                certificate: Certificate::Superstructure(s),
            })
        } else {
            Ok(MembershipVerdict::not_in(Certificate::NotCanonical(s)))
        }
    }

    /// Glue a canonical witness onto every element of `a`.
    ///
    /// Elements of `a` keep their names; glued elements are named
    /// `"{x}~{w}"`. The result is unordered.
    pub fn canonize(&self, a: &Structure, bound: usize) -> Result<Structure> {
        self.check_expanded(a)?;
        let a = if a.is_ordered() {
            a.unordered()
        } else {
            a.clone()
        };
        let mut names: Vec<String> = a.names().to_vec();
        let mut used: HashSet<String> = names.iter().cloned().collect();
        let mut glued: Vec<(Structure, usize, Vec<usize>)> = Vec::new();
        for x in 0..a.len() {
            let v = self.element_verdict(&ElementType::of(self, &a, x), bound)?;
            let Certificate::Witness { structure, element } = v.certificate else {
                return Err(Error::PremiseUnresolved(a.name(x).to_string()));
            };
            let mut map = vec![0; structure.len()];
            for y in 0..structure.len() {
                if y == element {
                    map[y] = x;
                    continue;
                }
                let mut n = format!("{}~{}", a.name(x), structure.name(y));
                while used.contains(&n) {
                    n.push('\'');
                }
                used.insert(n.clone());
                map[y] = names.len();
                names.push(n);
            }
            glued.push((structure, element, map));
        }
        let mut out = Structure::new(Arc::new(self.expanded_signature().with_order(false)), names)?;
        for (id, t) in a.tuples() {
            out.add_tuple(id, t.clone())?;
        }
        for (w, _, map) in &glued {
            for (id, t) in w.tuples() {
                out.add_tuple(id, t.iter().map(|&y| map[y]).collect())?;
            }
        }
        Ok(out)
    }

    /// Check a verdict's certificate against `a` without trusting the
    /// procedure that produced it.
    pub fn verify_certificate(
        &self,
        a: &Structure,
        v: &MembershipVerdict,
        bound: usize,
    ) -> Result<bool> {
        let a = if a.is_ordered() {
            a.unordered()
        } else {
            a.clone()
        };
        Ok(match (&v.status, &v.certificate) {
            (Status::InC, Certificate::Superstructure(s)) => {
                let map: Option<Vec<usize>> = a.names().iter().map(|n| s.index_of(n)).collect();
                match map {
                    Some(map) => is_embedding(&a, s, &map) && self.is_canonical(s)?,
                    None => false,
                }
            }
            (Status::InC, Certificate::Witness { structure, element }) => {
                a.len() == 1
                    && ElementType::of(self, &a, 0) == ElementType::of(self, structure, *element)
                    && self.is_canonical(structure)?
            }
            (Status::NotInC, Certificate::Element { element, verdict }) => {
                *element < a.len()
                    && self.verify_certificate(&a.induced(&[*element]), verdict, bound)?
            }
            (
                Status::NotInC,
                Certificate::Trace {
                    symbol,
                    tuple,
                    verdict,
                },
            ) => {
                a.contains(*symbol, tuple)
                    && self.verify_certificate(
                        &super::tuple_trace(&a, *symbol, tuple)?,
                        verdict,
                        bound,
                    )?
            }
            (Status::NotInC, Certificate::ForbiddenSingleton { tree, cut }) => {
                let e = self.forbidden_singleton(*tree, *cut)?;
                (0..a.len()).any(|x| {
                    find_hom(&e, &a, &SearchConstraint::default().pin(0, x))
                        .ok()
                        .flatten()
                        .is_some()
                })
            }
            (Status::NotInC, Certificate::ForbiddenHom { tree, map }) => {
                let f = &self.forbidden()[*tree];
                crate::morphism::is_homomorphism(f, &a.base_reduct(), map)
            }
            (Status::NotInC, Certificate::MissingMark { class, piece }) => {
                a.len() == 1
                    && !self.tau_of(&a, 0).contains(class)
                    && self.pieces()[*piece].class == *class
                    && exists_rooted_hom(&self.pieces()[*piece].rooted, &a.base_reduct(), 0)?
            }
            (Status::NotInC, Certificate::NoWitness { .. }) => {
                a.len() == 1
                    && self
                        .decide_element(&ElementType::of(self, &a, 0), bound)?
                        .status
                        == Status::NotInC
            }
            (Status::NotInC, Certificate::NotCanonical(s)) => {
                let map: Option<Vec<usize>> = a.names().iter().map(|n| s.index_of(n)).collect();
                map.is_some_and(|m| is_embedding(&a, s, &m)) && !self.is_canonical(s)?
            }
            (Status::Unknown, _) => true,
            _ => false,
        })
    }

    /// Number of element types with a recorded verdict.
    pub fn registry_size(&self) -> usize {
        self.registry.read().unwrap().len()
    }

    /// Known member types with their witness sizes, sorted.
    pub fn registry_entries(&self) -> Vec<(ElementType, Status, Option<usize>)> {
        let reg = self.registry.read().unwrap();
        let mut v: Vec<_> = reg
            .iter()
            .map(|(t, v)| {
                let size = match &v.certificate {
                    Certificate::Witness { structure, .. } => Some(structure.len()),
                    _ => None,
                };
                (t.clone(), v.status, size)
            })
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Signature;

    fn digraph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut s = Structure::with_size(Signature::base([("E", 2)]).unwrap(), n);
        for &(a, b) in edges {
            s.add_tuple(0, vec![a, b]).unwrap();
        }
        s
    }

    fn path_ctx() -> ExpandedContext {
        ExpandedContext::new(
            Signature::base([("E", 2)]).unwrap(),
            vec![digraph(3, &[(0, 1), (1, 2)])],
        )
        .unwrap()
    }

    /// Class index whose pieces have the root at the head of the edge.
    fn in_class(ctx: &ExpandedContext) -> usize {
        let p = ctx
            .pieces()
            .iter()
            .find(|p| {
                p.rooted
                    .structure
                    .contains(0, &[1 - p.rooted.root, p.rooted.root])
            })
            .unwrap();
        p.class
    }

    #[test]
    fn canonical_edge_is_member() {
        let ctx = path_ctx();
        let e = ctx.canonical_expansion(&digraph(2, &[(0, 1)])).unwrap();
        let v = ctx.is_in_c(&e, 6).unwrap();
        assert_eq!(v.status, Status::InC);
        assert!(ctx.verify_certificate(&e, &v, 6).unwrap());
    }

    #[test]
    fn both_marks_rejected_by_singleton() {
        let ctx = path_ctx();
        let t = ElementType {
            sigma: BTreeSet::new(),
            tau: [0, 1].into(),
        };
        let s = t.structure(&ctx);
        let v = ctx.is_in_c(&s, 6).unwrap();
        assert_eq!(v.status, Status::NotInC);
        match &v.certificate {
            Certificate::Element { verdict, .. } => {
                assert!(matches!(
                    verdict.certificate,
                    Certificate::ForbiddenSingleton { tree: 0, cut: 1 }
                ))
            }
            c => panic!("{c:?}"),
        }
        assert!(ctx.verify_certificate(&s, &v, 6).unwrap());
    }

    #[test]
    fn wrong_side_mark_rejected() {
        let ctx = path_ctx();
        let mut a = digraph(2, &[(0, 1)])
            .lift(ctx.expanded_signature().clone())
            .unwrap();
        a.add_tuple(ctx.class_symbol(in_class(&ctx)), vec![0])
            .unwrap();
        let v = ctx.is_in_c(&a, 4).unwrap();
        assert_eq!(v.status, Status::NotInC);
        assert!(ctx.verify_certificate(&a, &v, 4).unwrap());
        assert_eq!(
            ctx.decide_by_canonization(&a, 4).unwrap().status,
            Status::NotInC
        );
    }

    #[test]
    fn canonize_single_marked_vertex() {
        let ctx = path_ctx();
        let t = ElementType {
            sigma: BTreeSet::new(),
            tau: [in_class(&ctx)].into(),
        };
        let c = ctx.canonize(&t.structure(&ctx), 2).unwrap();
        assert_eq!(c.len(), 2);
        assert!(ctx.is_canonical(&c).unwrap());
        let bad = ElementType {
            sigma: BTreeSet::new(),
            tau: [0, 1].into(),
        };
        assert!(matches!(
            ctx.canonize(&bad.structure(&ctx), 6),
            Err(Error::PremiseUnresolved(_))
        ));
    }

    #[test]
    fn tight_bound_gives_unknown() {
        let ctx = path_ctx();
        let t = ElementType {
            sigma: BTreeSet::new(),
            tau: [0].into(),
        };
        assert_eq!(ctx.decide_element(&t, 1).unwrap().status, Status::Unknown);
        assert_eq!(ctx.decide_element(&t, 2).unwrap().status, Status::InC);
    }
}

//! Backtracking search for homomorphisms and embeddings.
//!
//! The source may use a subset of the target's symbols (matched by name), so
//! a base structure can be mapped into an expanded one without taking a
//! reduct first. Embedding search needs identical symbol lists.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graphs::gaifman_graph;
use crate::signature::SymbolId;
use crate::structure::{RootedStructure, Structure};

#[derive(Clone, Debug, Default)]
pub struct SearchConstraint {
    /// `(source, target)` pairs the map must contain.
    pub pins: Vec<(usize, usize)>,
    pub require_injective: bool,
    /// Preimages of target tuples among the image must be source tuples.
    pub reflect_relations: bool,
    /// Preserve the order when both sides are ordered (strictly when injective).
    pub respect_order: bool,
    /// Optional allowed targets per source element.
    pub candidates: Option<Vec<Vec<usize>>>,
}

impl SearchConstraint {
    pub fn homomorphism() -> Self {
        SearchConstraint {
            respect_order: true,
            ..Default::default()
        }
    }

    pub fn embedding() -> Self {
        SearchConstraint {
            require_injective: true,
            reflect_relations: true,
            respect_order: true,
            ..Default::default()
        }
    }

    pub fn pin(mut self, source: usize, target: usize) -> Self {
        self.pins.push((source, target));
        self
    }

    pub fn with_candidates(mut self, candidates: Vec<Vec<usize>>) -> Self {
        self.candidates = Some(candidates);
        self
    }
}

/// Lazy stream of maps `dom A -> dom B`, in a deterministic order.
pub struct HomSearch<'a> {
    a: &'a Structure,
    b: &'a Structure,
    /// Source symbol id -> target symbol id.
    sym_map: Vec<SymbolId>,
    vars: Vec<usize>,
    cands: Vec<Vec<usize>>,
    /// Source tuples whose last variable is assigned at each depth.
    checks: Vec<Vec<(SymbolId, Vec<usize>)>>,
    /// Target tuples by element, for reflection.
    target_occ: Option<Vec<Vec<(SymbolId, Vec<usize>)>>>,
    injective: bool,
    strict: bool,
    ordered: bool,
    map: Vec<usize>,
    inv: Vec<usize>,
    cursor: Vec<usize>,
    assigned: Vec<bool>,
    depth: usize,
    done: bool,
    buf: Vec<usize>,
}

const UNSET: usize = usize::MAX;

impl<'a> HomSearch<'a> {
    pub fn new(a: &'a Structure, b: &'a Structure, c: &SearchConstraint) -> Result<Self> {
        let mut sym_map = Vec::with_capacity(a.sig().len());
        for s in a.sig().symbols() {
            match b.sig().lookup(&s.name) {
                Some(t) if b.sig().arity(t) == s.arity => sym_map.push(t),
                _ => {
                    return Err(Error::SignatureMismatch(format!(
                        "symbol `{}` missing from target",
                        s.name
                    )))
                }
            }
        }
        if c.reflect_relations && a.sig().symbols() != b.sig().symbols() {
            return Err(Error::SignatureMismatch(
                "embedding search needs identical signatures".into(),
            ));
        }
        let n = a.len();
        let injective = c.require_injective || c.reflect_relations;
        for &(x, y) in &c.pins {
            if x >= n {
                return Err(Error::UnknownElement(format!("#{x}")));
            }
            if y >= b.len() {
                return Err(Error::UnknownElement(format!("#{y}")));
            }
        }

        // unary compatibility, via constant tuples
        let a_types: Vec<BTreeSet<SymbolId>> = (0..n)
            .map(|x| a.constant_type(x).into_iter().map(|s| sym_map[s]).collect())
            .collect();
        let b_types: Vec<BTreeSet<SymbolId>> = (0..b.len())
            .map(|y| b.constant_type(y).into_iter().collect())
            .collect();
        let mut cands: Vec<Vec<usize>> = (0..n)
            .map(|x| {
                let base: Box<dyn Iterator<Item = usize>> = match &c.candidates {
                    Some(cs) => Box::new(cs[x].iter().copied()),
                    None => Box::new(0..b.len()),
                };
                base.filter(|&y| {
                    if c.reflect_relations {
                        a_types[x] == b_types[y]
                    } else {
                        a_types[x].is_subset(&b_types[y])
                    }
                })
                .collect()
            })
            .collect();
        for &(x, y) in &c.pins {
            let keep = cands[x].contains(&y);
            cands[x] = if keep { vec![y] } else { Vec::new() };
        }

        // variable order: pins, then most constrained over the Gaifman graph
        let adj = gaifman_graph(&a.unordered());
        let mut vars: Vec<usize> = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        for &(x, _) in &c.pins {
            if !placed[x] {
                placed[x] = true;
                vars.push(x);
            }
        }
        while vars.len() < n {
            let next = (0..n)
                .filter(|&x| !placed[x])
                .max_by_key(|&x| {
                    let linked = adj[x].iter().filter(|&&y| placed[y]).count();
                    (
                        linked,
                        adj[x].len(),
                        std::cmp::Reverse(cands[x].len()),
                        std::cmp::Reverse(x),
                    )
                })
                .unwrap();
            placed[next] = true;
            vars.push(next);
        }
        let mut pos = vec![0; n];
        for (i, &x) in vars.iter().enumerate() {
            pos[x] = i;
        }
        let mut checks = vec![Vec::new(); n];
        for (id, t) in a.tuples() {
            let last = t.iter().map(|&x| pos[x]).max().unwrap();
            checks[last].push((sym_map[id], t.clone()));
        }

        let target_occ = c.reflect_relations.then(|| {
            let mut occ = vec![Vec::new(); b.len()];
            for (id, t) in b.tuples() {
                let mut es = t.clone();
                es.sort_unstable();
                es.dedup();
                for y in es {
                    occ[y].push((id, t.clone()));
                }
            }
            occ
        });

        Ok(HomSearch {
            a,
            b,
            sym_map,
            vars,
            cands,
            checks,
            target_occ,
            injective,
            strict: injective,
            ordered: c.respect_order && a.is_ordered() && b.is_ordered(),
            map: vec![UNSET; n],
            inv: vec![UNSET; b.len()],
            cursor: vec![0; n],
            assigned: vec![false; n],
            depth: 0,
            done: false,
            buf: Vec::new(),
        })
    }

    fn try_assign(&mut self, d: usize, x: usize, y: usize) -> bool {
        if self.injective && self.inv[y] != UNSET {
            return false;
        }
        self.map[x] = y;
        let ok = self.consistent(d, x, y);
        if ok {
            if self.injective {
                self.inv[y] = x;
            }
        } else {
            self.map[x] = UNSET;
        }
        ok
    }

    fn consistent(&mut self, d: usize, x: usize, y: usize) -> bool {
        for (id, t) in &self.checks[d] {
            self.buf.clear();
            self.buf.extend(t.iter().map(|&u| self.map[u]));
            if !self.b.contains(*id, &self.buf) {
                return false;
            }
        }
        if self.ordered {
            let ra = self.a.ranks().unwrap();
            let rb = self.b.ranks().unwrap();
            for &u in &self.vars[..d] {
                let fu = self.map[u];
                let ok = match ra[u].cmp(&ra[x]) {
                    std::cmp::Ordering::Less => {
                        if self.strict {
                            rb[fu] < rb[y]
                        } else {
                            rb[fu] <= rb[y]
                        }
                    }
                    std::cmp::Ordering::Greater => {
                        if self.strict {
                            rb[fu] > rb[y]
                        } else {
                            rb[fu] >= rb[y]
                        }
                    }
                    std::cmp::Ordering::Equal => true,
                };
                if !ok {
                    return false;
                }
            }
        }
        if let Some(occ) = &self.target_occ {
            for (id, t) in &occ[y] {
                let mut pre = Vec::with_capacity(t.len());
                let mut all = true;
                for &z in t {
                    let p = if z == y { x } else { self.inv[z] };
                    if p == UNSET {
                        all = false;
                        break;
                    }
                    pre.push(p);
                }
                if all && !self.a.contains(*id, &pre) {
                    return false;
                }
            }
        }
        true
    }

    fn unassign(&mut self, x: usize) {
        let y = self.map[x];
        if self.injective && y != UNSET {
            self.inv[y] = UNSET;
        }
        self.map[x] = UNSET;
    }

    /// Symbol correspondence used by the search.
    pub fn symbol_map(&self) -> &[SymbolId] {
        &self.sym_map
    }
}

impl Iterator for HomSearch<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let n = self.vars.len();
        if n == 0 {
            self.done = true;
            return Some(Vec::new());
        }
        loop {
            let d = self.depth;
            let x = self.vars[d];
            if self.assigned[d] {
                self.unassign(x);
                self.assigned[d] = false;
            }
            let mut found = false;
            while self.cursor[d] < self.cands[x].len() {
                let y = self.cands[x][self.cursor[d]];
                self.cursor[d] += 1;
                if self.try_assign(d, x, y) {
                    found = true;
                    break;
                }
            }
            if found {
                self.assigned[d] = true;
                if d + 1 == n {
                    return Some(self.map.clone());
                }
                self.depth += 1;
                self.cursor[self.depth] = 0;
            } else {
                self.cursor[d] = 0;
                if d == 0 {
                    self.done = true;
                    return None;
                }
                self.depth -= 1;
            }
        }
    }
}

pub fn enumerate_homs<'a>(
    a: &'a Structure,
    b: &'a Structure,
    c: &SearchConstraint,
) -> Result<HomSearch<'a>> {
    HomSearch::new(a, b, c)
}

/// The set `binom(B, A)` of embeddings of `a` into `b`.
pub fn enumerate_embeddings<'a>(a: &'a Structure, b: &'a Structure) -> Result<HomSearch<'a>> {
    HomSearch::new(a, b, &SearchConstraint::embedding())
}

/// All embeddings, sorted lexicographically by map.
pub fn embeddings_sorted(a: &Structure, b: &Structure) -> Result<Vec<Vec<usize>>> {
    let mut v: Vec<Vec<usize>> = enumerate_embeddings(a, b)?.collect();
    v.sort_unstable();
    Ok(v)
}

pub fn find_hom(a: &Structure, b: &Structure, c: &SearchConstraint) -> Result<Option<Vec<usize>>> {
    Ok(HomSearch::new(a, b, c)?.next())
}

/// A homomorphism of `m` into `a` sending the root to `x`.
pub fn exists_rooted_hom(m: &RootedStructure, a: &Structure, x: usize) -> Result<bool> {
    if x >= a.len() {
        return Err(Error::UnknownElement(format!("#{x}")));
    }
    let c = SearchConstraint {
        pins: vec![(m.root, x)],
        ..Default::default()
    };
    Ok(find_hom(&m.structure, a, &c)?.is_some())
}

/// First member of `forbidden` (by index) admitting a homomorphism into `a`,
/// with the map. The order of `a` is ignored.
pub fn forbidden_hom(
    a: &Structure,
    forbidden: &[Structure],
) -> Result<Option<(usize, Vec<usize>)>> {
    for (i, f) in forbidden.iter().enumerate() {
        if let Some(h) = find_hom(f, a, &SearchConstraint::default())? {
            return Ok(Some((i, h)));
        }
    }
    Ok(None)
}

pub fn is_f_free(a: &Structure, forbidden: &[Structure]) -> Result<bool> {
    Ok(forbidden_hom(a, forbidden)?.is_none())
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

    fn homs(a: &Structure, b: &Structure) -> usize {
        enumerate_homs(a, b, &SearchConstraint::homomorphism())
            .unwrap()
            .count()
    }

    #[test]
    fn hom_counts() {
        let b = digraph(3, &[(0, 1), (1, 2)]);
        assert_eq!(homs(&digraph(1, &[]), &b), 3);
        assert_eq!(
            homs(&digraph(3, &[(0, 1), (1, 2)]), &digraph(2, &[(0, 1)])),
            0
        );
        assert_eq!(homs(&digraph(2, &[(0, 1)]), &b), 2);
        assert_eq!(homs(&digraph(0, &[]), &b), 1);
        assert_eq!(homs(&digraph(1, &[]), &digraph(0, &[])), 0);
    }

    #[test]
    fn ordered_embeddings() {
        let sig =
            std::sync::Arc::new(Signature::new([("E", 2)], Vec::<&str>::new(), true).unwrap());
        let a = Structure::with_size(sig.clone(), 2);
        let b = Structure::with_size(sig, 3);
        assert_eq!(enumerate_embeddings(&a, &b).unwrap().count(), 3);
        assert_eq!(enumerate_embeddings(&b, &b).unwrap().count(), 1);
    }

    #[test]
    fn missing_relation_blocks_embedding() {
        assert_eq!(
            enumerate_embeddings(&digraph(2, &[(0, 1)]), &digraph(3, &[]))
                .unwrap()
                .count(),
            0
        );
    }

    #[test]
    fn rooted_homs() {
        let edge = digraph(2, &[(0, 1)]);
        let into = RootedStructure::new(edge.clone(), 1).unwrap();
        let out = RootedStructure::new(edge.clone(), 0).unwrap();
        assert!(exists_rooted_hom(&into, &edge, 1).unwrap());
        assert!(!exists_rooted_hom(&into, &edge, 0).unwrap());
        assert!(exists_rooted_hom(&out, &edge, 0).unwrap());
        let point = RootedStructure::new(digraph(1, &[]), 0).unwrap();
        assert!(exists_rooted_hom(&point, &edge, 0).unwrap());
    }

    #[test]
    fn f_freeness() {
        let path = vec![digraph(3, &[(0, 1), (1, 2)])];
        assert!(is_f_free(&digraph(2, &[(0, 1)]), &path).unwrap());
        let w = forbidden_hom(&path[0], &path).unwrap().unwrap();
        assert_eq!(w, (0, vec![0, 1, 2]));
        assert!(!is_f_free(&digraph(3, &[(0, 1), (1, 2), (2, 0)]), &path).unwrap());
    }

    #[test]
    fn pins_filter() {
        let b = digraph(3, &[(0, 1), (1, 2), (0, 2)]);
        let a = digraph(2, &[(0, 1)]);
        let all: Vec<_> = enumerate_homs(&a, &b, &SearchConstraint::default())
            .unwrap()
            .collect();
        let pinned: Vec<_> = enumerate_homs(&a, &b, &SearchConstraint::default().pin(0, 0))
            .unwrap()
            .collect();
        let filtered: Vec<_> = all.into_iter().filter(|m| m[0] == 0).collect();
        assert_eq!(pinned, filtered);
    }
}

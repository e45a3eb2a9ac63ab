//! Structures split into parts: `A`-rectified structures and `P`-partite
//! structures, with the checks that define them.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::hom::{HomSearch, SearchConstraint};
use crate::signature::SymbolId;
use crate::structure::Structure;

/// A structure with a part map `ι` into an index structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartiteStructure {
    pub carrier: Structure,
    /// `parts[x]` is `ι(x)`, an element of `index`.
    pub parts: Vec<usize>,
    pub index: Structure,
}

impl PartiteStructure {
    pub fn new(carrier: Structure, parts: Vec<usize>, index: Structure) -> Result<Self> {
        if parts.len() != carrier.len() {
            return Err(Error::NotPartite(
                "part map does not cover the domain".into(),
            ));
        }
        if let Some(&p) = parts.iter().find(|&&p| p >= index.len()) {
            return Err(Error::NotPartite(format!(
                "part #{p} outside the index structure"
            )));
        }
        if !carrier.is_ordered() || !index.is_ordered() {
            return Err(Error::NotPartite("partite structures are ordered".into()));
        }
        Ok(PartiteStructure {
            carrier,
            parts,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    /// Elements of part `p`, in the carrier's order.
    pub fn part(&self, p: usize) -> Vec<usize> {
        self.carrier
            .order()
            .unwrap()
            .iter()
            .copied()
            .filter(|&x| self.parts[x] == p)
            .collect()
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.index.len()];
        for &p in &self.parts {
            s[p] += 1;
        }
        s
    }

    /// Expansion symbols holding at `x`.
    pub fn tau_profile(&self, x: usize) -> BTreeSet<SymbolId> {
        self.carrier
            .sig()
            .expansion_ids()
            .filter(|&id| self.carrier.contains(id, &[x]))
            .collect()
    }

    fn order_respected(&self) -> bool {
        let ri = self.index.ranks().unwrap();
        self.carrier
            .order()
            .unwrap()
            .windows(2)
            .all(|w| ri[self.parts[w[0]]] <= ri[self.parts[w[1]]])
    }

    fn injective_on(&self, t: &[usize]) -> bool {
        t.iter().enumerate().all(|(i, &x)| {
            t[..i]
                .iter()
                .all(|&y| y == x || self.parts[y] != self.parts[x])
        })
    }

    /// The biconditional defining `A`-rectified structures: a tuple is present
    /// iff `ι` is injective on it and its image is an `A`-tuple. The index
    /// must use the carrier's symbols.
    pub fn is_rectified(&self) -> bool {
        if self.carrier.sig().symbols() != self.index.sig().symbols() || !self.order_respected() {
            return false;
        }
        let sizes = self.part_sizes();
        for id in 0..self.carrier.sig().len() {
            for t in self.carrier.relation(id) {
                let image: Vec<usize> = t.iter().map(|&x| self.parts[x]).collect();
                if !self.injective_on(t) || !self.index.contains(id, &image) {
                    return false;
                }
            }
            // every lift of every index tuple must be present
            let expected: u128 = self
                .index
                .relation(id)
                .iter()
                .map(|t| {
                    let distinct: BTreeSet<usize> = t.iter().copied().collect();
                    distinct.iter().map(|&p| sizes[p] as u128).product::<u128>()
                })
                .sum();
            if expected != self.carrier.relation(id).len() as u128 {
                return false;
            }
        }
        true
    }

    fn base_symbol_map(&self) -> Option<Vec<Option<SymbolId>>> {
        let sig = self.carrier.sig();
        let map: Vec<Option<SymbolId>> = (0..sig.len())
            .map(|id| {
                if sig.symbol(id).expansion {
                    None
                } else {
                    self.index.sig().lookup(&sig.symbol(id).name)
                }
            })
            .collect();
        let covered = sig.base_ids().all(|id| map[id].is_some());
        covered.then_some(map)
    }

    /// The structural conditions of a `P`-partite structure: `ι` is a
    /// homomorphism of the base-and-order reduct, injective on base tuples,
    /// and exact on one-element substructures. Membership of the carrier in
    /// the class is checked separately.
    pub fn is_p_partite(&self) -> bool {
        let Some(map) = self.base_symbol_map() else {
            return false;
        };
        if !self.order_respected() {
            return false;
        }
        for (id, t) in self.carrier.tuples() {
            let Some(pid) = map[id] else { continue };
            let image: Vec<usize> = t.iter().map(|&x| self.parts[x]).collect();
            if !self.injective_on(t) || !self.index.contains(pid, &image) {
                return false;
            }
        }
        (0..self.len()).all(|x| {
            let p = self.parts[x];
            self.carrier.sig().base_ids().all(|id| {
                let k = self.carrier.sig().arity(id);
                self.carrier.contains(id, &vec![x; k])
                    == self.index.contains(map[id].unwrap(), &vec![p; k])
            })
        })
    }

    /// `ι` is an embedding of the base-and-order reduct into the index.
    pub fn is_transversal(&self) -> bool {
        if !self.is_p_partite() {
            return false;
        }
        let distinct: BTreeSet<usize> = self.parts.iter().copied().collect();
        if distinct.len() != self.len() {
            return false;
        }
        let map = self.base_symbol_map().unwrap();
        let mut inv = vec![usize::MAX; self.index.len()];
        for (x, &p) in self.parts.iter().enumerate() {
            inv[p] = x;
        }
        for id in self.carrier.sig().base_ids() {
            for t in self.index.relation(map[id].unwrap()) {
                if t.iter().all(|&p| inv[p] != usize::MAX) {
                    let pre: Vec<usize> = t.iter().map(|&p| inv[p]).collect();
                    if !self.carrier.contains(id, &pre) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Every lift of a base tuple to elements with the same parts and the
    /// same expansion profiles is present.
    pub fn satisfies_rectified_condition(&self) -> bool {
        let groups = self.profile_groups();
        for id in self.carrier.sig().base_ids() {
            if self.carrier.sig().arity(id) < 2 {
                continue;
            }
            for t in self.carrier.relation(id) {
                let mut ok = true;
                for_each_lift(self, &groups, t, &mut |x| {
                    if !self.carrier.contains(id, x) {
                        ok = false;
                    }
                });
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// Elements grouped by `(part, expansion profile)`, each in domain order.
    pub(crate) fn profile_groups(&self) -> HashMap<(usize, BTreeSet<SymbolId>), Vec<usize>> {
        let mut g: HashMap<(usize, BTreeSet<SymbolId>), Vec<usize>> = HashMap::new();
        for x in 0..self.len() {
            g.entry((self.parts[x], self.tau_profile(x)))
                .or_default()
                .push(x);
        }
        g
    }

    /// Embeddings of `(a, ι_a)` into `self` commuting with the part maps.
    pub fn partite_embeddings<'a>(
        &'a self,
        a: &'a Structure,
        a_parts: &[usize],
    ) -> Result<HomSearch<'a>> {
        let cands: Vec<Vec<usize>> = a_parts
            .iter()
            .map(|&p| (0..self.len()).filter(|&y| self.parts[y] == p).collect())
            .collect();
        HomSearch::new(
            a,
            &self.carrier,
            &SearchConstraint::embedding().with_candidates(cands),
        )
    }
}

/// Call `f` on every tuple obtained from `t` by replacing each entry with an
/// element of the same part and expansion profile, one choice per distinct
/// entry.
pub(crate) fn for_each_lift(
    s: &PartiteStructure,
    groups: &HashMap<(usize, BTreeSet<SymbolId>), Vec<usize>>,
    t: &[usize],
    f: &mut dyn FnMut(&[usize]),
) {
    let mut distinct: Vec<usize> = t.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let options: Vec<&Vec<usize>> = distinct
        .iter()
        .map(|&x| &groups[&(s.parts[x], s.tau_profile(x))])
        .collect();
    let pos: Vec<usize> = t
        .iter()
        .map(|x| distinct.binary_search(x).unwrap())
        .collect();
    let mut idx = vec![0usize; distinct.len()];
    let mut buf = vec![0usize; t.len()];
    loop {
        for (i, &p) in pos.iter().enumerate() {
            buf[i] = options[p][idx[p]];
        }
        f(&buf);
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
            return;
        }
    }
}

/// The `A`-rectified structure with `sizes[a]` elements in part `a`.
///
/// Element `j` (from 1) of part `a` is named `"{a}#{j}"`; parts follow the
/// order of `A`, elements within a part by `j`.
pub fn rectified_structure(a: &Structure, sizes: &[usize]) -> Result<PartiteStructure> {
    if !a.is_ordered() {
        return Err(Error::NotRectified(
            "index structure must be ordered".into(),
        ));
    }
    if sizes.len() != a.len() {
        return Err(Error::NotRectified(format!(
            "{} part sizes for {} parts",
            sizes.len(),
            a.len()
        )));
    }
    let mut names = Vec::new();
    let mut parts = Vec::new();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); a.len()];
    for &p in a.order().unwrap() {
        for j in 1..=sizes[p] {
            members[p].push(names.len());
            names.push(format!("{}#{}", a.name(p), j));
            parts.push(p);
        }
    }
    let n = names.len();
    let mut x = Structure::new(a.sig().clone(), names)?;
    x.set_order((0..n).collect())?;
    for (id, t) in a.tuples() {
        let mut distinct: Vec<usize> = t.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.iter().any(|&p| members[p].is_empty()) {
            continue;
        }
        let pos: Vec<usize> = t
            .iter()
            .map(|p| distinct.binary_search(p).unwrap())
            .collect();
        let mut idx = vec![0usize; distinct.len()];
        loop {
            let tuple: Vec<usize> = pos.iter().map(|&i| members[distinct[i]][idx[i]]).collect();
            x.add_tuple(id, tuple)?;
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < members[distinct[k]].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    PartiteStructure::new(x, parts, a.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::isomorphic;
    use crate::signature::Signature;
    use std::sync::Arc;

    fn ordered_edge() -> Structure {
        let sig = Arc::new(Signature::new([("E", 2)], ["S0", "S1"], true).unwrap());
        let mut a = Structure::new(sig, vec!["a".into(), "b".into()]).unwrap();
        a.add_tuple(0, vec![0, 1]).unwrap();
        a.add_tuple(1, vec![0]).unwrap();
        a.add_tuple(2, vec![1]).unwrap();
        a.set_order(vec![0, 1]).unwrap();
        a
    }

    #[test]
    fn unit_sizes_give_a_copy() {
        let a = ordered_edge();
        let x = rectified_structure(&a, &[1, 1]).unwrap();
        assert!(isomorphic(&x.carrier, &a).is_some());
        assert!(x.is_rectified());
    }

    #[test]
    fn sizes_two_one() {
        let a = ordered_edge();
        let x = rectified_structure(&a, &[2, 1]).unwrap();
        assert_eq!(x.len(), 3);
        assert_eq!(x.carrier.relation(0).len(), 2);
        assert!(x.is_rectified());
    }

    #[test]
    fn one_element_index_gives_disjoint_copies() {
        let sig = Arc::new(Signature::new([("E", 2)], ["S0"], true).unwrap());
        let mut a = Structure::with_size(sig, 1);
        a.add_tuple(1, vec![0]).unwrap();
        a.set_order(vec![0]).unwrap();
        let x = rectified_structure(&a, &[4]).unwrap();
        assert_eq!(x.len(), 4);
        assert!(x.carrier.relation(0).is_empty());
        assert_eq!(x.carrier.relation(1).len(), 4);
        assert!(x.parts.iter().all(|&p| p == 0));
    }

    #[test]
    fn missing_tuple_breaks_rectification() {
        let a = ordered_edge();
        let mut x = rectified_structure(&a, &[2, 2]).unwrap();
        let t = x.carrier.relation(0).iter().next().unwrap().clone();
        x.carrier.remove_tuple(0, &t);
        assert!(!x.is_rectified());
    }
}

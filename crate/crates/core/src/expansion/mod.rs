//! Cuts and pieces of forbidden trees, piece equivalence, the unary
//! expansion signature and the canonical expansion of `F`-free structures.

mod amalgam;
mod membership;
mod subpiece;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

pub use amalgam::{free_amalgam, Amalgam};
pub use membership::{Certificate, ElementType, MembershipVerdict, Status};
pub use subpiece::{replace_subpiece, subpieces, Replacement};

use crate::canon::{rooted_canonical_form, CanonicalForm};
use crate::error::{Error, Result};
use crate::graphs::{components_within, gaifman_graph, is_tree};
use crate::hom::{exists_rooted_hom, forbidden_hom};
use crate::signature::{Signature, SymbolId};
use crate::structure::{join, RootedStructure, Structure};

/// A piece `(M, m)` of a forbidden tree, cut off at `cut`.
#[derive(Clone, Debug)]
pub struct Piece {
    pub rooted: RootedStructure,
    /// Index of the tree in the forbidden list.
    pub tree: usize,
    /// The cut, as an element of that tree.
    pub cut: usize,
    /// Index of the piece's equivalence class.
    pub class: usize,
}

/// One equivalence class of pieces, giving one expansion symbol.
#[derive(Clone, Debug)]
pub struct PieceClass {
    pub id: String,
    /// Indices into [`ExpandedContext::pieces`].
    pub pieces: Vec<usize>,
    /// Pieces of the class pairwise non-isomorphic as rooted structures.
    pub representatives: Vec<usize>,
    /// Sorted fingerprints of the incompatibility set.
    pub key: Vec<CanonicalForm>,
}

/// A finite set of forbidden trees with everything derived from it.
pub struct ExpandedContext {
    sigma: Arc<Signature>,
    expanded: Arc<Signature>,
    forbidden: Vec<Structure>,
    pieces: Vec<Piece>,
    classes: Vec<PieceClass>,
    /// Expansion sets of `E(F, m)`, with their origin.
    singletons: Vec<(usize, usize, BTreeSet<usize>)>,
    pub(crate) registry: RwLock<HashMap<ElementType, MembershipVerdict>>,
    pub(crate) trace_memo: RwLock<HashMap<(SymbolId, Vec<ElementType>), MembershipVerdict>>,
}

impl std::fmt::Debug for ExpandedContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExpandedContext")
            .field("sigma", &self.sigma)
            .field("forbidden", &self.forbidden)
            .field(
                "classes",
                &self.classes.iter().map(|c| &c.id).collect::<Vec<_>>(),
            )
            .finish()
    }
}

/// Elements lying in at least two tuples of arity greater than one.
///
/// Unary tuples are ignored: they hang off a single element and never split
/// the tree.
pub fn cuts(f: &Structure) -> Result<Vec<usize>> {
    if !is_tree(f) {
        return Err(Error::NotATree(0));
    }
    Ok(cuts_unchecked(f))
}

fn cuts_unchecked(f: &Structure) -> Vec<usize> {
    let mut count = vec![0usize; f.len()];
    for id in f.sig().base_ids() {
        if f.sig().arity(id) < 2 {
            continue;
        }
        for t in f.relation(id) {
            let mut es = t.clone();
            es.sort_unstable();
            es.dedup();
            for x in es {
                count[x] += 1;
            }
        }
    }
    (0..f.len()).filter(|&x| count[x] >= 2).collect()
}

/// The pieces of `f` at the cut `m`, one per Gaifman component of `f - m`,
/// ordered by least element.
pub fn pieces(f: &Structure, m: usize) -> Result<Vec<RootedStructure>> {
    if !is_tree(f) {
        return Err(Error::NotATree(0));
    }
    if m >= f.len() || !cuts_unchecked(f).contains(&m) {
        let name = if m < f.len() {
            f.name(m).to_string()
        } else {
            format!("#{m}")
        };
        return Err(Error::NotACut(name));
    }
    Ok(pieces_unchecked(f, m))
}

fn pieces_unchecked(f: &Structure, m: usize) -> Vec<RootedStructure> {
    let adj = gaifman_graph(f);
    let mut alive = vec![true; f.len()];
    alive[m] = false;
    components_within(&adj, &alive)
        .into_iter()
        .map(|mut d| {
            d.push(m);
            let s = f.induced(&d);
            let root = s.index_of(f.name(m)).unwrap();
            RootedStructure { structure: s, root }
        })
        .collect()
}

fn unary_ids(sig: &Signature) -> Vec<SymbolId> {
    sig.base_ids().filter(|&id| sig.arity(id) == 1).collect()
}

fn root_unaries(r: &RootedStructure) -> BTreeSet<SymbolId> {
    unary_ids(r.structure.sig())
        .into_iter()
        .filter(|&id| r.structure.contains(id, &[r.root]))
        .collect()
}

fn with_root_unaries(r: &RootedStructure, set: &BTreeSet<SymbolId>) -> RootedStructure {
    let mut s = r.structure.clone();
    for id in unary_ids(r.structure.sig()) {
        s.remove_tuple(id, &[r.root]);
        if set.contains(&id) {
            s.add_tuple(id, vec![r.root]).unwrap();
        }
    }
    RootedStructure {
        structure: s,
        root: r.root,
    }
}

/// All rooted `(B, b)` such that `(M, m) ⊕ (B, b)` is isomorphic to a member
/// of `forbidden`, up to rooted isomorphism, keyed by fingerprint.
pub fn incompatibility_set(
    m: &RootedStructure,
    forbidden: &[Structure],
) -> BTreeMap<CanonicalForm, RootedStructure> {
    let mut out = BTreeMap::new();
    let msize = m.structure.len();
    let m_unary = root_unaries(m);
    for f in forbidden {
        if f.len() < msize {
            continue;
        }
        let adj = gaifman_graph(f);
        for v in 0..f.len() {
            let mut alive = vec![true; f.len()];
            alive[v] = false;
            let comps = components_within(&adj, &alive);
            let v_unary = {
                let ids = unary_ids(f.sig());
                ids.into_iter()
                    .filter(|&id| f.contains(id, &[v]))
                    .collect::<BTreeSet<_>>()
            };
            if !m_unary.is_subset(&v_unary) {
                continue;
            }
            let target = rooted_canonical_form(&with_root_unaries(m, &v_unary));
            for mask in 0u64..(1u64 << comps.len()) {
                let size: usize = (0..comps.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| comps[i].len())
                    .sum();
                if size + 1 != msize {
                    continue;
                }
                let (mut inside, mut rest) = (vec![v], vec![v]);
                for (i, c) in comps.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        inside.extend(c);
                    } else {
                        rest.extend(c);
                    }
                }
                let x = f.induced(&inside);
                let xr = RootedStructure {
                    root: x.index_of(f.name(v)).unwrap(),
                    structure: x,
                };
                if rooted_canonical_form(&xr) != target {
                    continue;
                }
                let y = f.induced(&rest);
                let yr = RootedStructure {
                    root: y.index_of(f.name(v)).unwrap(),
                    structure: y,
                };
                // the complement must supply whatever the root of M lacks
                let need: Vec<SymbolId> = v_unary.difference(&m_unary).copied().collect();
                let optional: Vec<SymbolId> = m_unary.iter().copied().collect();
                for sub in 0u64..(1u64 << optional.len()) {
                    let mut set: BTreeSet<SymbolId> = need.iter().copied().collect();
                    for (i, &id) in optional.iter().enumerate() {
                        if sub >> i & 1 == 1 {
                            set.insert(id);
                        }
                    }
                    let variant = with_root_unaries(&yr, &set);
                    out.entry(rooted_canonical_form(&variant))
                        .or_insert(variant);
                }
            }
        }
    }
    out
}

impl ExpandedContext {
    /// Compute pieces, classes and the expansion symbols for `forbidden`.
    pub fn new(sigma: Arc<Signature>, forbidden: Vec<Structure>) -> Result<Self> {
        if sigma.is_ordered() || sigma.expansion_ids().next().is_some() {
            return Err(Error::InvalidSignature(
                "base signature must be unordered without expansion symbols".into(),
            ));
        }
        let mut trees = Vec::with_capacity(forbidden.len());
        for (i, f) in forbidden.into_iter().enumerate() {
            let f = if f.sig().as_ref() == sigma.as_ref() {
                f
            } else if f.sig().symbols() == sigma.symbols() {
                f.unordered()
            } else {
                return Err(Error::SignatureMismatch(format!(
                    "forbidden structure #{i} uses another signature"
                )));
            };
            if !is_tree(&f) {
                return Err(Error::NotATree(i));
            }
            trees.push(f);
        }

        let mut raw: Vec<(RootedStructure, usize, usize)> = Vec::new();
        for (i, f) in trees.iter().enumerate() {
            for m in cuts_unchecked(f) {
                for p in pieces_unchecked(f, m) {
                    raw.push((p, i, m));
                }
            }
        }
        let keys: Vec<Vec<CanonicalForm>> = raw
            .iter()
            .map(|(p, _, _)| incompatibility_set(p, &trees).into_keys().collect())
            .collect();
        let mut distinct: Vec<&Vec<CanonicalForm>> = keys.iter().collect();
        distinct.sort();
        distinct.dedup();
        let class_of = |k: &Vec<CanonicalForm>| distinct.binary_search(&k).unwrap();

        let mut classes: Vec<PieceClass> = distinct
            .iter()
            .enumerate()
            .map(|(i, k)| PieceClass {
                id: format!("S{i}"),
                pieces: Vec::new(),
                representatives: Vec::new(),
                key: (*k).clone(),
            })
            .collect();
        let mut pieces = Vec::with_capacity(raw.len());
        let mut seen: Vec<BTreeSet<CanonicalForm>> = vec![BTreeSet::new(); classes.len()];
        for (idx, ((p, tree, cut), key)) in raw.into_iter().zip(&keys).enumerate() {
            let class = class_of(key);
            classes[class].pieces.push(idx);
            if seen[class].insert(rooted_canonical_form(&p)) {
                classes[class].representatives.push(idx);
            }
            pieces.push(Piece {
                rooted: p,
                tree,
                cut,
                class,
            });
        }

        let mut singletons = Vec::new();
        for (i, f) in trees.iter().enumerate() {
            for m in cuts_unchecked(f) {
                let set: BTreeSet<usize> = pieces
                    .iter()
                    .filter(|p| p.tree == i && p.cut == m)
                    .map(|p| p.class)
                    .collect();
                singletons.push((i, m, set));
            }
        }

        let expanded = Arc::new(sigma.expand(classes.iter().map(|c| c.id.clone()))?);
        log::debug!(
            "context: {} trees, {} pieces, {} classes",
            trees.len(),
            pieces.len(),
            classes.len()
        );
        Ok(ExpandedContext {
            sigma,
            expanded,
            forbidden: trees,
            pieces,
            classes,
            singletons,
            registry: RwLock::new(HashMap::new()),
            trace_memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn sigma(&self) -> &Arc<Signature> {
        &self.sigma
    }

    /// `σ ∪ τ`, unordered.
    pub fn expanded_signature(&self) -> &Arc<Signature> {
        &self.expanded
    }

    /// `σ ∪ τ` with the order symbol.
    pub fn ordered_signature(&self) -> Arc<Signature> {
        Arc::new(self.expanded.with_order(true))
    }

    pub fn forbidden(&self) -> &[Structure] {
        &self.forbidden
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn classes(&self) -> &[PieceClass] {
        &self.classes
    }

    /// Symbol id of the expansion symbol of class `c`.
    pub fn class_symbol(&self, c: usize) -> SymbolId {
        self.sigma.len() + c
    }

    pub fn tau_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.id.clone()).collect()
    }

    /// `(tree, cut, class set)` for every cut of every forbidden tree.
    pub fn singleton_sets(&self) -> &[(usize, usize, BTreeSet<usize>)] {
        &self.singletons
    }

    /// The one-element structure `E(F, m)`: no base tuples, expansion marks for
    /// the classes of the pieces of `F` at `m`.
    pub fn forbidden_singleton(&self, tree: usize, m: usize) -> Result<Structure> {
        let f = self
            .forbidden
            .get(tree)
            .ok_or_else(|| Error::UnknownElement(format!("tree #{tree}")))?;
        if m >= f.len() {
            return Err(Error::UnknownElement(format!("#{m}")));
        }
        let Some((_, _, set)) = self
            .singletons
            .iter()
            .find(|(t, c, _)| *t == tree && *c == m)
        else {
            return Err(Error::NotACut(f.name(m).to_string()));
        };
        let mut e = Structure::new(self.expanded.clone(), vec!["1".into()])?;
        for &c in set {
            e.add_tuple(self.class_symbol(c), vec![0])?;
        }
        Ok(e)
    }

    /// Check that `a` uses exactly `σ ∪ τ` (ordered or not).
    pub fn check_expanded(&self, a: &Structure) -> Result<()> {
        if a.sig().symbols() != self.expanded.symbols() {
            return Err(Error::SignatureMismatch(
                "structure is not over the expanded signature".into(),
            ));
        }
        Ok(())
    }

    fn check_base(&self, a: &Structure) -> Result<()> {
        if a.sig().symbols() != self.sigma.symbols() {
            return Err(Error::SignatureMismatch(
                "structure is not over the base signature".into(),
            ));
        }
        Ok(())
    }

    /// Classes of pieces admitting a rooted homomorphism into `a` at `x`.
    pub fn marks_at(&self, a: &Structure, x: usize) -> Result<BTreeSet<usize>> {
        let mut out = BTreeSet::new();
        for (c, class) in self.classes.iter().enumerate() {
            for &p in &class.representatives {
                if exists_rooted_hom(&self.pieces[p].rooted, a, x)? {
                    out.insert(c);
                    break;
                }
            }
        }
        Ok(out)
    }

    /// The canonical expansion of an `F`-free structure over `σ` (the order is
    /// kept). Its element types are recorded as known members.
    pub fn canonical_expansion(&self, a: &Structure) -> Result<Structure> {
        let e = self.expand_unregistered(a)?;
        self.register_canonical(&e);
        Ok(e)
    }

    pub(crate) fn expand_unregistered(&self, a: &Structure) -> Result<Structure> {
        self.check_base(a)?;
        if let Some((tree, map)) = forbidden_hom(a, &self.forbidden)? {
            return Err(Error::NotFFree { tree, map });
        }
        let sig = Arc::new(self.expanded.with_order(a.is_ordered()));
        let mut e = a.lift(sig)?;
        for x in 0..a.len() {
            for c in self.marks_at(a, x)? {
                e.add_tuple(self.class_symbol(c), vec![x])?;
            }
        }
        Ok(e)
    }

    /// Whether `a` (over `σ ∪ τ`) is canonical: `F`-free with exactly the
    /// marks of its canonical expansion.
    pub fn is_canonical(&self, a: &Structure) -> Result<bool> {
        self.check_expanded(a)?;
        let base = a.base_reduct();
        if forbidden_hom(&base, &self.forbidden)?.is_some() {
            return Ok(false);
        }
        for x in 0..a.len() {
            if self.marks_at(&base, x)? != self.tau_of(a, x) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Expansion classes marked at `x`.
    pub fn tau_of(&self, a: &Structure, x: usize) -> BTreeSet<usize> {
        (0..self.classes.len())
            .filter(|&c| a.contains(self.class_symbol(c), &[x]))
            .collect()
    }

    /// Record every element type of a canonical structure as a member,
    /// keeping the smallest witness.
    pub fn register_canonical(&self, e: &Structure) {
        let e = if e.is_ordered() {
            e.unordered()
        } else {
            e.clone()
        };
        let mut reg = self.registry.write().unwrap();
        for x in 0..e.len() {
            let t = ElementType::of(self, &e, x);
            let better = match reg.get(&t) {
                Some(MembershipVerdict {
                    certificate: Certificate::Witness { structure, .. },
                    ..
                }) => structure.len() > e.len(),
                Some(_) => false,
                None => true,
            };
            if better {
                reg.insert(t, MembershipVerdict::witness(e.clone(), x));
            }
        }
    }
}

/// The tuple trace of `t ∈ R^A`: positions `1..k`, the single `R`-tuple,
/// and every unary relation (base or expansion) copied per position.
pub fn tuple_trace(a: &Structure, symbol: SymbolId, t: &[usize]) -> Result<Structure> {
    if symbol >= a.sig().len() {
        return Err(Error::UnknownSymbol(format!("#{symbol}")));
    }
    if !a.contains(symbol, t) {
        return Err(Error::TupleNotPresent {
            symbol: a.sig().symbol(symbol).name.clone(),
            tuple: t
                .iter()
                .map(|&x| {
                    if x < a.len() {
                        a.name(x).to_string()
                    } else {
                        format!("#{x}")
                    }
                })
                .collect(),
        });
    }
    let sig = Arc::new(a.sig().with_order(false));
    let k = t.len();
    let mut tr = Structure::new(sig.clone(), (1..=k).map(|i| i.to_string()).collect())?;
    tr.add_tuple(symbol, (0..k).collect())?;
    for id in 0..sig.len() {
        if sig.arity(id) != 1 {
            continue;
        }
        for (j, &x) in t.iter().enumerate() {
            if a.contains(id, &[x]) {
                tr.add_tuple(id, vec![j])?;
            }
        }
    }
    Ok(tr)
}

/// `⊕` of rooted structures, returning just the rooted result.
pub fn join_all(sig: &Arc<Signature>, parts: &[&RootedStructure]) -> Result<RootedStructure> {
    Ok(join(sig, parts)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::rooted_isomorphic;

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

    #[test]
    fn cuts_of_small_trees() {
        assert_eq!(cuts(&digraph(3, &[(0, 1), (1, 2)])).unwrap(), vec![1]);
        assert!(cuts(&digraph(2, &[(0, 1)])).unwrap().is_empty());
        assert_eq!(
            cuts(&digraph(4, &[(0, 1), (0, 2), (0, 3)])).unwrap(),
            vec![0]
        );
        assert!(matches!(
            cuts(&digraph(1, &[(0, 0)])),
            Err(Error::NotATree(_))
        ));
    }

    #[test]
    fn pieces_of_path_and_in_star() {
        let path = digraph(3, &[(0, 1), (1, 2)]);
        let ps = pieces(&path, 1).unwrap();
        assert_eq!(ps.len(), 2);
        assert!(matches!(pieces(&path, 0), Err(Error::NotACut(_))));
        let star = digraph(3, &[(0, 1), (2, 1)]);
        let ps = pieces(&star, 1).unwrap();
        assert!(rooted_isomorphic(&ps[0], &ps[1]).is_some());
    }

    #[test]
    fn incompatibility_of_path_pieces() {
        let path = digraph(3, &[(0, 1), (1, 2)]);
        let ps = pieces(&path, 1).unwrap();
        for (i, p) in ps.iter().enumerate() {
            let inc = incompatibility_set(p, std::slice::from_ref(&path));
            assert_eq!(inc.len(), 1);
            let other = inc.values().next().unwrap();
            assert!(rooted_isomorphic(other, &ps[1 - i]).is_some());
        }
    }

    #[test]
    fn class_counts() {
        assert_eq!(path_ctx().classes().len(), 2);
        let sig = Signature::base([("E", 2)]).unwrap();
        let star = ExpandedContext::new(sig.clone(), vec![digraph(3, &[(0, 1), (2, 1)])]).unwrap();
        assert_eq!(star.classes().len(), 1);
        let edge = ExpandedContext::new(sig.clone(), vec![digraph(2, &[(0, 1)])]).unwrap();
        assert!(edge.classes().is_empty());
        assert!(matches!(
            ExpandedContext::new(sig, vec![digraph(2, &[(0, 1)]), digraph(1, &[(0, 0)])]),
            Err(Error::NotATree(1))
        ));
    }

    #[test]
    fn expansion_of_edge_and_isolated_points() {
        let ctx = path_ctx();
        let e = ctx.canonical_expansion(&digraph(2, &[(0, 1)])).unwrap();
        let (ta, tb) = (ctx.tau_of(&e, 0), ctx.tau_of(&e, 1));
        assert_eq!(ta.len(), 1);
        assert_eq!(tb.len(), 1);
        assert_ne!(ta, tb);
        let iso = ctx.canonical_expansion(&digraph(2, &[])).unwrap();
        assert!(ctx.tau_of(&iso, 0).is_empty() && ctx.tau_of(&iso, 1).is_empty());
        assert!(ctx
            .canonical_expansion(&digraph(0, &[]))
            .unwrap()
            .is_empty());
        assert!(matches!(
            ctx.canonical_expansion(&digraph(3, &[(0, 1), (1, 2)])),
            Err(Error::NotFFree { tree: 0, .. })
        ));
    }

    #[test]
    fn singletons_of_path_and_star() {
        let ctx = path_ctx();
        let e = ctx.forbidden_singleton(0, 1).unwrap();
        assert_eq!(ctx.tau_of(&e, 0).len(), 2);
        assert!(e.relation(0).is_empty());
        assert!(matches!(
            ctx.forbidden_singleton(0, 0),
            Err(Error::NotACut(_))
        ));
    }

    #[test]
    fn trace_of_unary_tuple() {
        let sig = Arc::new(Signature::new([("U", 1), ("V", 1)], ["S"], false).unwrap());
        let mut a = Structure::with_size(sig, 1);
        a.add_tuple(0, vec![0]).unwrap();
        a.add_tuple(2, vec![0]).unwrap();
        let t = tuple_trace(&a, 0, &[0]).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.contains(0, &[0]) && t.contains(2, &[0]) && !t.contains(1, &[0]));
        assert!(matches!(
            tuple_trace(&a, 1, &[0]),
            Err(Error::TupleNotPresent { .. })
        ));
    }
}

//! Finite relational structures and the constructions on them: substructures,
//! reducts, sums, factor structures and joins of rooted structures.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::signature::{Signature, SymbolId};

/// Name of the order symbol when reducts are requested by symbol name.
pub const ORDER_SYMBOL: &str = "⪯";

/// A tuple of element indices.
pub type Tuple = Vec<usize>;

/// One problem found while validating a raw structure description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    ArityMismatch {
        symbol: String,
        tuple: Vec<String>,
        arity: usize,
    },
    UnknownElement {
        element: String,
        context: String,
    },
    UnknownSymbol(String),
    InvalidOrder(String),
    DuplicateElement(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ArityMismatch {
                symbol,
                tuple,
                arity,
            } => {
                write!(
                    f,
                    "ArityMismatch: {symbol}{tuple:?} has length {} but arity {arity}",
                    tuple.len()
                )
            }
            Violation::UnknownElement { element, context } => {
                write!(f, "UnknownElement: `{element}` in {context}")
            }
            Violation::UnknownSymbol(s) => write!(f, "UnknownSymbol: `{s}`"),
            Violation::InvalidOrder(s) => write!(f, "InvalidOrder: {s}"),
            Violation::DuplicateElement(s) => write!(f, "DuplicateElement: `{s}`"),
        }
    }
}

/// Untyped structure description, as read from a file.
#[derive(Clone, Debug, Default)]
pub struct RawStructure {
    pub domain: Vec<String>,
    pub relations: BTreeMap<String, Vec<Vec<String>>>,
    pub order: Option<Vec<String>>,
}

/// A finite structure over a [`Signature`].
///
/// Elements are indices `0..len()` carrying unique names. Every relation is a
/// sorted set of tuples, so two structures with the same names in the same
/// domain order are equal iff they are syntactically equal.
#[derive(Clone)]
pub struct Structure {
    sig: Arc<Signature>,
    names: Vec<String>,
    lookup: HashMap<String, usize>,
    relations: Vec<BTreeSet<Tuple>>,
    /// Elements listed from least to greatest.
    order: Option<Vec<usize>>,
    rank: Option<Vec<usize>>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.sig == other.sig
            && self.names == other.names
            && self.relations == other.relations
            && self.order == other.order
    }
}

impl Eq for Structure {}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{dom {:?}", self.names)?;
        for (id, rel) in self.relations.iter().enumerate() {
            if rel.is_empty() {
                continue;
            }
            let tuples: Vec<Vec<&str>> = rel
                .iter()
                .map(|t| t.iter().map(|&x| self.names[x].as_str()).collect())
                .collect();
            write!(f, ", {}={:?}", self.sig.symbol(id).name, tuples)?;
        }
        if let Some(order) = &self.order {
            let o: Vec<&str> = order.iter().map(|&x| self.names[x].as_str()).collect();
            write!(f, ", ⪯={o:?}")?;
        }
        write!(f, "}}")
    }
}

impl Structure {
    /// A structure with the given domain and no tuples. Ordered signatures get
    /// the domain order as their linear order.
    pub fn new(sig: Arc<Signature>, names: Vec<String>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if lookup.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidStructure(vec![Violation::DuplicateElement(
                    n.clone(),
                )]));
            }
        }
        let n = names.len();
        let (order, rank) = if sig.is_ordered() {
            (Some((0..n).collect()), Some((0..n).collect()))
        } else {
            (None, None)
        };
        let relations = vec![BTreeSet::new(); sig.len()];
        Ok(Structure {
            sig,
            names,
            lookup,
            relations,
            order,
            rank,
        })
    }

    pub fn empty(sig: Arc<Signature>) -> Self {
        Self::new(sig, Vec::new()).expect("empty domain has no duplicates")
    }

    /// Domain of `n` elements named `0..n`.
    pub fn with_size(sig: Arc<Signature>, n: usize) -> Self {
        Self::new(sig, (0..n).map(|i| i.to_string()).collect()).expect("distinct names")
    }

    /// Check a raw description against `sig`, collecting every violation.
    pub fn validate(raw: &RawStructure, sig: Arc<Signature>) -> Result<Self> {
        let mut violations = Vec::new();
        let mut lookup = HashMap::new();
        for (i, n) in raw.domain.iter().enumerate() {
            if lookup.insert(n.as_str(), i).is_some() {
                violations.push(Violation::DuplicateElement(n.clone()));
            }
        }
        let mut relations = vec![BTreeSet::new(); sig.len()];
        for (sym, tuples) in &raw.relations {
            let Some(id) = sig.lookup(sym) else {
                violations.push(Violation::UnknownSymbol(sym.clone()));
                continue;
            };
            let arity = sig.arity(id);
            for t in tuples {
                if t.len() != arity {
                    violations.push(Violation::ArityMismatch {
                        symbol: sym.clone(),
                        tuple: t.clone(),
                        arity,
                    });
                    continue;
                }
                let mut idx = Vec::with_capacity(arity);
                for e in t {
                    match lookup.get(e.as_str()) {
                        Some(&i) => idx.push(i),
                        None => violations.push(Violation::UnknownElement {
                            element: e.clone(),
                            context: format!("{sym}{t:?}"),
                        }),
                    }
                }
                if idx.len() == arity {
                    relations[id].insert(idx);
                }
            }
        }
        let n = raw.domain.len();
        let mut order = None;
        match (&raw.order, sig.is_ordered()) {
            (Some(o), _) => {
                let mut seq = Vec::with_capacity(o.len());
                let mut seen = vec![false; n];
                let mut ok = true;
                for e in o {
                    match lookup.get(e.as_str()) {
                        Some(&i) if !seen[i] => {
                            seen[i] = true;
                            seq.push(i);
                        }
                        Some(_) => {
                            violations.push(Violation::InvalidOrder(format!("`{e}` listed twice")));
                            ok = false;
                        }
                        None => {
                            violations.push(Violation::UnknownElement {
                                element: e.clone(),
                                context: "order".into(),
                            });
                            ok = false;
                        }
                    }
                }
                if ok && seq.len() != n {
                    violations.push(Violation::InvalidOrder(format!(
                        "order lists {} of {} elements",
                        seq.len(),
                        n
                    )));
                }
                order = Some(seq);
            }
            (None, true) => violations.push(Violation::InvalidOrder(
                "ordered signature but no order".into(),
            )),
            (None, false) => {}
        }
        if !violations.is_empty() {
            return Err(Error::InvalidStructure(violations));
        }
        let sig = if order.is_some() && !sig.is_ordered() {
            Arc::new(sig.with_order(true))
        } else {
            sig
        };
        let mut s = Structure::new(sig, raw.domain.clone())?;
        s.relations = relations;
        if let Some(o) = order {
            s.set_order(o)?;
        }
        Ok(s)
    }

    pub fn to_raw(&self) -> RawStructure {
        let mut relations = BTreeMap::new();
        for (id, rel) in self.relations.iter().enumerate() {
            let tuples = rel
                .iter()
                .map(|t| t.iter().map(|&x| self.names[x].clone()).collect())
                .collect();
            relations.insert(self.sig.symbol(id).name.clone(), tuples);
        }
        RawStructure {
            domain: self.names.clone(),
            relations,
            order: self
                .order
                .as_ref()
                .map(|o| o.iter().map(|&x| self.names[x].clone()).collect()),
        }
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn element(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn relation(&self, id: SymbolId) -> &BTreeSet<Tuple> {
        &self.relations[id]
    }

    pub fn relations(&self) -> &[BTreeSet<Tuple>] {
        &self.relations
    }

    pub fn contains(&self, id: SymbolId, tuple: &[usize]) -> bool {
        self.relations[id].contains(tuple)
    }

    /// Total number of tuples over the given symbols.
    pub fn tuple_count(&self, ids: impl IntoIterator<Item = SymbolId>) -> usize {
        ids.into_iter().map(|id| self.relations[id].len()).sum()
    }

    pub fn is_ordered(&self) -> bool {
        self.order.is_some()
    }

    /// Elements from least to greatest, if ordered.
    pub fn order(&self) -> Option<&[usize]> {
        self.order.as_deref()
    }

    pub fn rank(&self, x: usize) -> Option<usize> {
        self.rank.as_ref().map(|r| r[x])
    }

    pub fn ranks(&self) -> Option<&[usize]> {
        self.rank.as_deref()
    }

    pub fn add_tuple(&mut self, id: SymbolId, tuple: Tuple) -> Result<bool> {
        if id >= self.sig.len() {
            return Err(Error::UnknownSymbol(format!("#{id}")));
        }
        if tuple.len() != self.sig.arity(id) {
            return Err(Error::InvalidStructure(vec![Violation::ArityMismatch {
                symbol: self.sig.symbol(id).name.clone(),
                tuple: tuple.iter().map(|x| x.to_string()).collect(),
                arity: self.sig.arity(id),
            }]));
        }
        if let Some(&x) = tuple.iter().find(|&&x| x >= self.len()) {
            return Err(Error::UnknownElement(format!("#{x}")));
        }
        Ok(self.relations[id].insert(tuple))
    }

    pub fn add_tuple_by_name(&mut self, symbol: &str, tuple: &[&str]) -> Result<bool> {
        let id = self
            .sig
            .lookup(symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.into()))?;
        let t = tuple
            .iter()
            .map(|n| self.element(n))
            .collect::<Result<Vec<_>>>()?;
        self.add_tuple(id, t)
    }

    pub fn remove_tuple(&mut self, id: SymbolId, tuple: &[usize]) -> bool {
        self.relations[id].remove(tuple)
    }

    /// Install a linear order given as elements from least to greatest.
    pub fn set_order(&mut self, order: Vec<usize>) -> Result<()> {
        let n = self.len();
        let mut rank = vec![usize::MAX; n];
        for (r, &x) in order.iter().enumerate() {
            if x >= n || rank[x] != usize::MAX {
                return Err(Error::InvalidStructure(vec![Violation::InvalidOrder(
                    "order is not a permutation of the domain".into(),
                )]));
            }
            rank[x] = r;
        }
        if order.len() != n {
            return Err(Error::InvalidStructure(vec![Violation::InvalidOrder(
                "order does not cover the domain".into(),
            )]));
        }
        if !self.sig.is_ordered() {
            self.sig = Arc::new(self.sig.with_order(true));
        }
        self.order = Some(order);
        self.rank = Some(rank);
        Ok(())
    }

    /// `x ⪯ y` in the linear order (`None` when unordered).
    pub fn precedes(&self, x: usize, y: usize) -> Option<bool> {
        self.rank.as_ref().map(|r| r[x] <= r[y])
    }

    /// Symbols whose constant tuple `(x, …, x)` is present; the complete
    /// description of the one-element substructure at `x`.
    pub fn constant_type(&self, x: usize) -> Vec<SymbolId> {
        (0..self.sig.len())
            .filter(|&id| {
                let k = self.sig.arity(id);
                self.relations[id].contains(&vec![x; k][..])
            })
            .collect()
    }

    /// Substructure induced by `elems`, kept in the original domain order.
    pub fn induced(&self, elems: &[usize]) -> Structure {
        let mut keep: Vec<usize> = elems.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut map = vec![usize::MAX; self.len()];
        for (i, &x) in keep.iter().enumerate() {
            map[x] = i;
        }
        let names = keep.iter().map(|&x| self.names[x].clone()).collect();
        let mut s = Structure::new(self.sig.clone(), names).expect("names stay distinct");
        for (id, rel) in self.relations.iter().enumerate() {
            for t in rel {
                if t.iter().all(|&x| map[x] != usize::MAX) {
                    s.relations[id].insert(t.iter().map(|&x| map[x]).collect());
                }
            }
        }
        if let Some(order) = &self.order {
            let o = order
                .iter()
                .filter(|&&x| map[x] != usize::MAX)
                .map(|&x| map[x])
                .collect();
            s.set_order(o).expect("restricted order is a permutation");
        }
        s
    }

    /// Substructure induced by the named elements.
    pub fn induced_by_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Structure> {
        let idx = names
            .iter()
            .map(|n| self.element(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.induced(&idx))
    }

    /// Keep only the given symbols (and the order iff `keep_order`).
    pub fn reduct(&self, keep: &BTreeSet<SymbolId>, keep_order: bool) -> Structure {
        let keep_order = keep_order && self.is_ordered();
        let sig = Arc::new(self.sig.restrict(keep, keep_order));
        let mut s = Structure::new(sig, self.names.clone()).expect("same names");
        s.relations = self
            .relations
            .iter()
            .enumerate()
            .filter(|(i, _)| keep.contains(i))
            .map(|(_, r)| r.clone())
            .collect();
        if keep_order {
            s.set_order(self.order.clone().unwrap())
                .expect("same order");
        }
        s
    }

    /// Reduct to the named symbols; [`ORDER_SYMBOL`] keeps the order.
    pub fn reduct_by_names<S: AsRef<str>>(&self, keep: &[S]) -> Result<Structure> {
        let mut ids = BTreeSet::new();
        let mut order = false;
        for k in keep {
            let k = k.as_ref();
            if k == ORDER_SYMBOL {
                order = true;
                continue;
            }
            ids.insert(
                self.sig
                    .lookup(k)
                    .ok_or_else(|| Error::UnknownSymbol(k.into()))?,
            );
        }
        Ok(self.reduct(&ids, order))
    }

    /// The unordered reduct to the base symbols.
    pub fn base_reduct(&self) -> Structure {
        let keep = self.sig.base_ids().collect();
        self.reduct(&keep, false)
    }

    /// Drop the expansion symbols, keep the order.
    pub fn ordered_base_reduct(&self) -> Structure {
        let keep = self.sig.base_ids().collect();
        self.reduct(&keep, true)
    }

    /// Drop the order.
    pub fn unordered(&self) -> Structure {
        let keep = (0..self.sig.len()).collect();
        self.reduct(&keep, false)
    }

    /// Same structure over a signature with identical symbols; used to move a
    /// base structure into an expanded signature with empty expansion relations.
    pub fn lift(&self, sig: Arc<Signature>) -> Result<Structure> {
        let mut s = Structure::new(sig.clone(), self.names.clone())?;
        for (id, rel) in self.relations.iter().enumerate() {
            let name = &self.sig.symbol(id).name;
            let target = sig
                .lookup(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            if sig.arity(target) != self.sig.arity(id) {
                return Err(Error::SignatureMismatch(format!(
                    "arity of `{name}` differs"
                )));
            }
            s.relations[target] = rel.clone();
        }
        match (&self.order, sig.is_ordered()) {
            (Some(o), true) => s.set_order(o.clone())?,
            (None, true) => {}
            (Some(_), false) => s.order_drop(),
            (None, false) => {}
        }
        Ok(s)
    }

    fn order_drop(&mut self) {
        self.order = None;
        self.rank = None;
    }

    /// Rename all elements; names must stay distinct.
    pub fn rename(&self, names: Vec<String>) -> Result<Structure> {
        if names.len() != self.len() {
            return Err(Error::Format("rename needs one name per element".into()));
        }
        let mut s = Structure::new(self.sig.clone(), names)?;
        s.relations = self.relations.clone();
        if let Some(o) = &self.order {
            s.set_order(o.clone())?;
        }
        Ok(s)
    }

    /// Relabel the elements by `perm` (element `x` becomes `perm[x]`), keeping names.
    pub fn permute(&self, perm: &[usize]) -> Structure {
        let n = self.len();
        let mut names = vec![String::new(); n];
        for x in 0..n {
            names[perm[x]] = self.names[x].clone();
        }
        let mut s = Structure::new(self.sig.clone(), names).expect("permuted names distinct");
        for (id, rel) in self.relations.iter().enumerate() {
            s.relations[id] = rel
                .iter()
                .map(|t| t.iter().map(|&x| perm[x]).collect())
                .collect();
        }
        if let Some(o) = &self.order {
            s.set_order(o.iter().map(|&x| perm[x]).collect())
                .expect("permutation");
        }
        s
    }

    /// Iterate over every tuple of every symbol.
    pub fn tuples(&self) -> impl Iterator<Item = (SymbolId, &Tuple)> + '_ {
        self.relations
            .iter()
            .enumerate()
            .flat_map(|(id, rel)| rel.iter().map(move |t| (id, t)))
    }
}

/// A structure with a distinguished root element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedStructure {
    pub structure: Structure,
    pub root: usize,
}

impl RootedStructure {
    pub fn new(structure: Structure, root: usize) -> Result<Self> {
        if root >= structure.len() {
            return Err(Error::UnknownElement(format!("#{root}")));
        }
        Ok(RootedStructure { structure, root })
    }
}

/// A partition of the domain `0..n` into nonempty blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    n: usize,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &x in b {
                if x >= n {
                    return Err(Error::InvalidPartition(format!(
                        "element #{x} outside the domain"
                    )));
                }
                if seen[x] {
                    return Err(Error::InvalidPartition(format!(
                        "element #{x} in two blocks"
                    )));
                }
                seen[x] = true;
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("element #{x} not covered")));
        }
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        Ok(Partition { blocks, n })
    }

    pub fn discrete(n: usize) -> Self {
        Partition {
            blocks: (0..n).map(|x| vec![x]).collect(),
            n,
        }
    }

    /// Partition generated by identifying the given pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::InvalidPartition("pair outside the domain".into()));
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..n {
            let r = find(&mut parent, x);
            blocks.entry(r).or_default().push(x);
        }
        Partition::new(n, blocks.into_values().collect())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn domain_size(&self) -> usize {
        self.n
    }
}

/// Disjoint union; element `x` of part `i` is named `"i:x"`.
///
/// Returns the sum and, for every part, the map from its elements into the
/// sum. The result is ordered (parts concatenated in sequence) iff all parts
/// are ordered.
pub fn sum(sig: &Arc<Signature>, parts: &[&Structure]) -> Result<(Structure, Vec<Vec<usize>>)> {
    for p in parts {
        if p.sig().as_ref() != &sig.with_order(p.is_ordered()) {
            return Err(Error::SignatureMismatch(
                "summands over different signatures".into(),
            ));
        }
    }
    let ordered = !parts.is_empty() && parts.iter().all(|p| p.is_ordered());
    let sig = Arc::new(sig.with_order(ordered));
    let mut names = Vec::new();
    let mut injections = Vec::with_capacity(parts.len());
    for (i, p) in parts.iter().enumerate() {
        let base = names.len();
        injections.push((0..p.len()).map(|x| base + x).collect::<Vec<_>>());
        names.extend(p.names().iter().map(|n| format!("{i}:{n}")));
    }
    let mut s = Structure::new(sig, names)?;
    for (p, inj) in parts.iter().zip(&injections) {
        for (id, t) in p.tuples() {
            s.relations[id].insert(t.iter().map(|&x| inj[x]).collect());
        }
    }
    if ordered {
        let order = parts
            .iter()
            .zip(&injections)
            .flat_map(|(p, inj)| p.order().unwrap().iter().map(move |&x| inj[x]))
            .collect();
        s.set_order(order)?;
    }
    Ok((s, injections))
}

/// Factor structure `A/∼`. Each block is named after its first member; the
/// order (if any) is dropped.
pub fn factor(a: &Structure, p: &Partition) -> Result<(Structure, Vec<usize>)> {
    if p.domain_size() != a.len() {
        return Err(Error::InvalidPartition(format!(
            "partition of {} elements for a structure of {}",
            p.domain_size(),
            a.len()
        )));
    }
    let mut block_of = vec![0; a.len()];
    for (b, block) in p.blocks().iter().enumerate() {
        for &x in block {
            block_of[x] = b;
        }
    }
    let names = p
        .blocks()
        .iter()
        .map(|b| a.name(b[0]).to_string())
        .collect();
    let sig = Arc::new(a.sig().with_order(false));
    let mut s = Structure::new(sig, names)?;
    for (id, t) in a.tuples() {
        s.relations[id].insert(t.iter().map(|&x| block_of[x]).collect());
    }
    Ok((s, block_of))
}

/// Join of rooted structures: their sum with all roots identified.
pub fn join(
    sig: &Arc<Signature>,
    parts: &[&RootedStructure],
) -> Result<(RootedStructure, Vec<Vec<usize>>)> {
    if parts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let structures: Vec<&Structure> = parts.iter().map(|p| &p.structure).collect();
    let (s, inj) = sum(sig, &structures)?;
    let roots: Vec<usize> = parts.iter().zip(&inj).map(|(p, i)| i[p.root]).collect();
    let pairs: Vec<(usize, usize)> = roots.iter().map(|&r| (roots[0], r)).collect();
    let partition = Partition::from_pairs(s.len(), &pairs)?;
    let (f, block_of) = factor(&s, &partition)?;
    let root = block_of[roots[0]];
    let maps = inj
        .iter()
        .map(|i| i.iter().map(|&x| block_of[x]).collect())
        .collect();
    Ok((RootedStructure { structure: f, root }, maps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digraph() -> Arc<Signature> {
        Signature::base([("E", 2)]).unwrap()
    }

    fn raw(domain: &[&str], rels: &[(&str, &[&[&str]])], order: Option<&[&str]>) -> RawStructure {
        RawStructure {
            domain: domain.iter().map(|s| s.to_string()).collect(),
            relations: rels
                .iter()
                .map(|(k, ts)| {
                    (
                        k.to_string(),
                        ts.iter()
                            .map(|t| t.iter().map(|s| s.to_string()).collect())
                            .collect(),
                    )
                })
                .collect(),
            order: order.map(|o| o.iter().map(|s| s.to_string()).collect()),
        }
    }

    #[test]
    fn validate_minimal_digraph() {
        let s = Structure::validate(&raw(&["a", "b"], &[("E", &[&["a", "b"]])], None), digraph())
            .unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains(0, &[0, 1]));
    }

    #[test]
    fn validate_unknown_element() {
        let err = Structure::validate(&raw(&["a"], &[("E", &[&["a", "b"]])], None), digraph())
            .unwrap_err();
        match err {
            Error::InvalidStructure(v) => assert!(
                matches!(&v[0], Violation::UnknownElement { element, .. } if element == "b")
            ),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn validate_partial_order_rejected() {
        let err = Structure::validate(&raw(&["a", "b"], &[], Some(&["a"])), digraph()).unwrap_err();
        match err {
            Error::InvalidStructure(v) => assert!(matches!(v[0], Violation::InvalidOrder(_))),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn validate_collects_arity_and_symbol_errors() {
        let err = Structure::validate(
            &raw(&["a"], &[("E", &[&["a"]]), ("Q", &[])], None),
            digraph(),
        )
        .unwrap_err();
        match err {
            Error::InvalidStructure(v) => {
                assert_eq!(v.len(), 2);
                assert!(v
                    .iter()
                    .any(|x| matches!(x, Violation::ArityMismatch { .. })));
                assert!(v
                    .iter()
                    .any(|x| matches!(x, Violation::UnknownSymbol(s) if s == "Q")));
            }
            e => panic!("{e}"),
        }
    }

    fn quaternary() -> Structure {
        let sig = Arc::new(Signature::new([("R", 4), ("R'", 2)], ["D", "O"], false).unwrap());
        Structure::validate(
            &raw(
                &["a", "b", "c"],
                &[
                    ("R", &[&["a", "b", "b", "c"]]),
                    ("R'", &[&["a", "c"]]),
                    ("D", &[&["a"], &["b"]]),
                    ("O", &[&["c"]]),
                ],
                None,
            ),
            sig,
        )
        .unwrap()
    }

    #[test]
    fn induced_full_and_empty() {
        let a = quaternary();
        assert_eq!(a.induced(&[0, 1, 2]), a);
        let e = a.induced(&[]);
        assert!(e.is_empty());
        assert!(e.relations().iter().all(|r| r.is_empty()));
    }

    #[test]
    fn induced_quaternary_on_a_c() {
        let a = quaternary();
        let s = a.induced_by_names(&["a", "c"]).unwrap();
        let sig = s.sig().clone();
        assert!(s.relation(sig.lookup("R").unwrap()).is_empty());
        assert_eq!(
            s.relation(sig.lookup("R'").unwrap())
                .iter()
                .collect::<Vec<_>>(),
            [&vec![0, 1]]
        );
        assert_eq!(
            s.relation(sig.lookup("D").unwrap())
                .iter()
                .collect::<Vec<_>>(),
            [&vec![0]]
        );
        assert_eq!(
            s.relation(sig.lookup("O").unwrap())
                .iter()
                .collect::<Vec<_>>(),
            [&vec![1]]
        );
        assert!(matches!(
            a.induced_by_names(&["z"]),
            Err(Error::UnknownElement(_))
        ));
    }

    #[test]
    fn reduct_variants() {
        let a = quaternary();
        assert_eq!(a.reduct_by_names(&["R", "R'", "D", "O"]).unwrap(), a);
        let base = a.base_reduct();
        assert_eq!(base.sig().len(), 2);
        let bare = a.reduct_by_names::<&str>(&[]).unwrap();
        assert_eq!(bare.len(), 3);
        assert!(bare.sig().is_empty());
        assert!(matches!(
            a.reduct_by_names(&["X"]),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn sum_counts_and_empty() {
        let sig = digraph();
        let (e, _) = sum(&sig, &[]).unwrap();
        assert!(e.is_empty());
        let mut a = Structure::with_size(sig.clone(), 2);
        a.add_tuple(0, vec![0, 1]).unwrap();
        let mut b = Structure::with_size(sig.clone(), 3);
        b.add_tuple(0, vec![0, 1]).unwrap();
        b.add_tuple(0, vec![1, 2]).unwrap();
        let (s, inj) = sum(&sig, &[&a, &b]).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.relation(0).len(), 3);
        assert_eq!(s.name(inj[1][0]), "1:0");
    }

    #[test]
    fn factor_identity_and_collapse() {
        let sig = digraph();
        let mut a = Structure::with_size(sig, 3);
        a.add_tuple(0, vec![0, 1]).unwrap();
        let (f, _) = factor(&a, &Partition::discrete(3)).unwrap();
        assert_eq!(f, a);
        let (g, _) = factor(&a, &Partition::new(3, vec![vec![0, 1, 2]]).unwrap()).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.contains(0, &[0, 0]));
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn join_of_two_edge_pieces_is_rooted_path() {
        let sig = digraph();
        let p = Structure::validate(
            &raw(&["p", "q"], &[("E", &[&["p", "q"]])], None),
            sig.clone(),
        )
        .unwrap();
        let q = Structure::validate(
            &raw(&["q", "r"], &[("E", &[&["q", "r"]])], None),
            sig.clone(),
        )
        .unwrap();
        let rp = RootedStructure::new(p, 1).unwrap();
        let rq = RootedStructure::new(q, 0).unwrap();
        let (j, _) = join(&sig, &[&rp, &rq]).unwrap();
        assert_eq!(j.structure.len(), 3);
        assert_eq!(j.structure.relation(0).len(), 2);
        let root = j.root;
        // root has one in- and one out-edge
        assert!(j.structure.relation(0).iter().any(|t| t[1] == root));
        assert!(j.structure.relation(0).iter().any(|t| t[0] == root));
        assert!(matches!(join(&sig, &[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn ordered_validation_and_restriction() {
        let s = Structure::validate(
            &raw(&["a", "b", "c"], &[], Some(&["c", "a", "b"])),
            digraph(),
        )
        .unwrap();
        assert_eq!(s.rank(2), Some(0));
        let t = s.induced(&[0, 2]);
        assert_eq!(t.order(), Some(&[1, 0][..]));
    }
}

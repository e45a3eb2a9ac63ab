//! Maps between structures and direct (non-searching) checks of the
//! homomorphism, embedding and isomorphism conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::Structure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphismKind {
    Homomorphism,
    Embedding,
    Isomorphism,
}

/// A map `dom A -> dom B` by element index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Morphism {
    pub map: Vec<usize>,
    pub kind: MorphismKind,
}

impl Morphism {
    pub fn new(map: Vec<usize>, kind: MorphismKind) -> Self {
        Morphism { map, kind }
    }

    pub fn identity(n: usize, kind: MorphismKind) -> Self {
        Morphism {
            map: (0..n).collect(),
            kind,
        }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Morphism) -> Morphism {
        let kind = match (self.kind, other.kind) {
            (MorphismKind::Homomorphism, _) | (_, MorphismKind::Homomorphism) => {
                MorphismKind::Homomorphism
            }
            (MorphismKind::Isomorphism, MorphismKind::Isomorphism) => MorphismKind::Isomorphism,
            _ => MorphismKind::Embedding,
        };
        Morphism {
            map: self.map.iter().map(|&x| other.map[x]).collect(),
            kind,
        }
    }

    /// Render as `name -> name` pairs.
    pub fn named(&self, a: &Structure, b: &Structure) -> Vec<(String, String)> {
        self.map
            .iter()
            .enumerate()
            .map(|(x, &y)| (a.name(x).to_string(), b.name(y).to_string()))
            .collect()
    }
}

/// Both structures use the same relation symbols (the order flag may differ).
pub fn check_compatible(a: &Structure, b: &Structure) -> Result<()> {
    if a.sig().symbols() != b.sig().symbols() {
        return Err(Error::SignatureMismatch(format!(
            "{:?} vs {:?}",
            a.sig()
                .symbols()
                .iter()
                .map(|s| &s.name)
                .collect::<Vec<_>>(),
            b.sig()
                .symbols()
                .iter()
                .map(|s| &s.name)
                .collect::<Vec<_>>()
        )));
    }
    Ok(())
}

fn well_formed(a: &Structure, b: &Structure, map: &[usize]) -> bool {
    map.len() == a.len()
        && map.iter().all(|&y| y < b.len())
        && a.sig().symbols() == b.sig().symbols()
}

/// Every tuple maps to a tuple; order preserved (non-strictly) when both
/// sides are ordered.
pub fn is_homomorphism(a: &Structure, b: &Structure, map: &[usize]) -> bool {
    if !well_formed(a, b, map) {
        return false;
    }
    let image_ok = a
        .tuples()
        .all(|(id, t)| b.contains(id, &t.iter().map(|&x| map[x]).collect::<Vec<_>>()));
    if !image_ok {
        return false;
    }
    match (a.order(), b.ranks()) {
        (Some(order), Some(rank)) => order.windows(2).all(|w| rank[map[w[0]]] <= rank[map[w[1]]]),
        _ => true,
    }
}

/// Injective, preserves and reflects every relation and the order.
pub fn is_embedding(a: &Structure, b: &Structure, map: &[usize]) -> bool {
    if !is_homomorphism(a, b, map) {
        return false;
    }
    let mut inv = vec![usize::MAX; b.len()];
    for (x, &y) in map.iter().enumerate() {
        if inv[y] != usize::MAX {
            return false;
        }
        inv[y] = x;
    }
    for (id, t) in b.tuples() {
        if t.iter().all(|&y| inv[y] != usize::MAX) {
            let pre: Vec<usize> = t.iter().map(|&y| inv[y]).collect();
            if !a.contains(id, &pre) {
                return false;
            }
        }
    }
    match (a.order(), b.ranks()) {
        (Some(order), Some(rank)) => order.windows(2).all(|w| rank[map[w[0]]] < rank[map[w[1]]]),
        (None, None) => true,
        _ => a.is_ordered() == b.is_ordered(),
    }
}

pub fn is_isomorphism(a: &Structure, b: &Structure, map: &[usize]) -> bool {
    a.len() == b.len() && is_embedding(a, b, map)
}

/// Check `map` against `kind`.
pub fn check(a: &Structure, b: &Structure, m: &Morphism) -> bool {
    match m.kind {
        MorphismKind::Homomorphism => is_homomorphism(a, b, &m.map),
        MorphismKind::Embedding => is_embedding(a, b, &m.map),
        MorphismKind::Isomorphism => is_isomorphism(a, b, &m.map),
    }
}

//! Rectification of `P`-partite structures and rectified substructures.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::structure::Structure;

use super::partite::{for_each_lift, PartiteStructure};

/// Close the base relations of arity at least two under replacing entries by
/// elements with the same part and the same expansion profile. Unary
/// relations, the expansion and the order are unchanged.
pub fn rectify(c: &PartiteStructure) -> PartiteStructure {
    let groups = c.profile_groups();
    let mut d = c.carrier.clone();
    let sig = c.carrier.sig().clone();
    for id in sig.base_ids() {
        if sig.arity(id) < 2 {
            continue;
        }
        let tuples: Vec<Vec<usize>> = c.carrier.relation(id).iter().cloned().collect();
        let mut seen = BTreeSet::new();
        for t in tuples {
            let key: Vec<(usize, BTreeSet<usize>)> =
                t.iter().map(|&x| (c.parts[x], c.tau_profile(x))).collect();
            if !seen.insert(key) {
                continue;
            }
            for_each_lift(c, &groups, &t, &mut |x| {
                d.add_tuple(id, x.to_vec())
                    .expect("lift stays in the domain");
            });
        }
    }
    PartiteStructure {
        carrier: d,
        parts: c.parts.clone(),
        index: c.index.clone(),
    }
}

/// The `A`-rectified substructure of a rectified `D` over the embedding
/// `e: A* -> P`: the elements lying over `e[A]` whose expansion profile
/// matches the corresponding element of `A`.
pub fn rectified_substructure(
    d: &PartiteStructure,
    a: &Structure,
    e: &[usize],
) -> Result<(PartiteStructure, Vec<usize>)> {
    if !d.satisfies_rectified_condition() {
        return Err(Error::NotRectified(
            "input is not closed under lifts".into(),
        ));
    }
    if e.len() != a.len() {
        return Err(Error::NotEmbedding("map does not cover A".into()));
    }
    if d.partite_embeddings(a, e)?.next().is_none() {
        return Err(Error::NoEmbedding);
    }
    let mut inv = vec![usize::MAX; d.index.len()];
    for (x, &p) in e.iter().enumerate() {
        inv[p] = x;
    }
    let keep: Vec<usize> = (0..d.len())
        .filter(|&y| {
            let x = inv[d.parts[y]];
            x != usize::MAX
                && d.tau_profile(y)
                    == a.sig()
                        .expansion_ids()
                        .filter(|&id| a.contains(id, &[x]))
                        .collect()
        })
        .collect();
    let carrier = d.carrier.induced(&keep);
    let parts: Vec<usize> = keep.iter().map(|&y| inv[d.parts[y]]).collect();
    let b = PartiteStructure::new(carrier, parts, a.clone())?;
    if !b.is_rectified() {
        return Err(Error::NotRectified("restriction is not rectified".into()));
    }
    Ok((b, keep))
}

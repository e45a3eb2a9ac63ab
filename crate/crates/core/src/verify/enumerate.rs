//! Small exhaustive corpora: all structures on few elements, trees.

use std::collections::HashSet;
use std::sync::Arc;

use crate::canon::canonical_form;
use crate::graphs::is_tree;
use crate::signature::{Signature, SymbolId};
use crate::structure::Structure;

/// Every possible tuple of every symbol on `n` elements.
fn all_tuples(sig: &Signature, n: usize) -> Vec<(SymbolId, Vec<usize>)> {
    let mut out = Vec::new();
    for id in 0..sig.len() {
        let k = sig.arity(id);
        let total = n.pow(k as u32);
        for mut code in 0..total {
            let mut t = vec![0; k];
            for x in t.iter_mut() {
                *x = code % n;
                code /= n;
            }
            out.push((id, t));
        }
    }
    out
}

/// All structures over `sig` with exactly `n` elements, in a fixed order.
/// With `up_to_iso`, one representative per isomorphism class.
pub fn all_structures(sig: &Arc<Signature>, n: usize, up_to_iso: bool) -> Vec<Structure> {
    let tuples = if n == 0 {
        Vec::new()
    } else {
        all_tuples(sig, n)
    };
    assert!(tuples.len() < 24, "too many candidate tuples");
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << tuples.len()) {
        let mut s = Structure::with_size(sig.clone(), n);
        for (i, (id, t)) in tuples.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s.add_tuple(*id, t.clone()).unwrap();
            }
        }
        if sig.is_ordered() {
            s.set_order((0..n).collect()).unwrap();
        }
        if !up_to_iso || seen.insert(canonical_form(&s)) {
            out.push(s);
        }
    }
    out
}

/// All structures with at most `max` elements, smallest first.
pub fn structures_up_to(sig: &Arc<Signature>, max: usize, up_to_iso: bool) -> Vec<Structure> {
    (0..=max)
        .flat_map(|n| all_structures(sig, n, up_to_iso))
        .collect()
}

/// Trees over `sig` with at most `max` elements, up to isomorphism, grown by
/// attaching one tuple at a time through exactly one existing element.
/// Unary symbols are not used.
pub fn trees_up_to(sig: &Arc<Signature>, max: usize) -> Vec<Structure> {
    let mut seen = HashSet::new();
    let mut frontier = vec![Structure::with_size(sig.clone(), 1)];
    let mut out = Vec::new();
    seen.insert(canonical_form(&frontier[0]));
    while let Some(t) = frontier.pop() {
        let n = t.len();
        out.push(t.clone());
        for id in 0..sig.len() {
            let k = sig.arity(id);
            if k < 2 || n + k - 1 > max {
                continue;
            }
            for anchor in 0..n {
                for pos in 0..k {
                    let mut names: Vec<String> = t.names().to_vec();
                    let mut tuple = Vec::with_capacity(k);
                    for i in 0..k {
                        if i == pos {
                            tuple.push(anchor);
                        } else {
                            tuple.push(names.len());
                            names.push(names.len().to_string());
                        }
                    }
                    let mut s = Structure::new(sig.clone(), names).unwrap();
                    for (sid, u) in t.tuples() {
                        s.add_tuple(sid, u.clone()).unwrap();
                    }
                    s.add_tuple(id, tuple).unwrap();
                    debug_assert!(is_tree(&s));
                    if seen.insert(canonical_form(&s)) {
                        frontier.push(s);
                    }
                }
            }
        }
    }
    out.sort_by_key(|s| (s.len(), s.tuple_count(0..sig.len())));
    out
}

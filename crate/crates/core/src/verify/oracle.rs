//! Naive re-derivations used as independent oracles: rooted homomorphisms by
//! enumerating every map, the canonical expansion from them, and class
//! membership by searching all small base structures.

use serde::Serialize;

use crate::error::Result;
use crate::expansion::ExpandedContext;
use crate::hom::{find_hom, is_f_free, SearchConstraint};
use crate::structure::{RootedStructure, Structure};

use super::enumerate::structures_up_to;

/// Whether some map `M -> A` sending the root to `x` preserves every tuple of
/// `M`. Tries all `|A|^|M|` maps.
pub fn naive_rooted_hom(m: &RootedStructure, a: &Structure, x: usize) -> bool {
    let ms = &m.structure;
    let n = ms.len();
    let k = a.len();
    if k == 0 {
        return n == 0;
    }
    let ids: Vec<Option<usize>> = (0..ms.sig().len())
        .map(|id| a.sig().lookup(&ms.sig().symbol(id).name))
        .collect();
    let total = (k as u64).pow(n as u32);
    'maps: for code in 0..total {
        let mut c = code;
        let mut f = vec![0; n];
        for v in f.iter_mut() {
            *v = (c % k as u64) as usize;
            c /= k as u64;
        }
        if f[m.root] != x {
            continue;
        }
        for (id, t) in ms.tuples() {
            let Some(target) = ids[id] else {
                continue 'maps;
            };
            let image: Vec<usize> = t.iter().map(|&y| f[y]).collect();
            if !a.contains(target, &image) {
                continue 'maps;
            }
        }
        return true;
    }
    false
}

/// The canonical expansion computed from [`naive_rooted_hom`] over every
/// piece of every class.
pub fn naive_expansion(a: &Structure, ctx: &ExpandedContext) -> Result<Structure> {
    let base = a.base_reduct().lift(ctx.sigma().clone())?;
    let mut out = base.lift(ctx.expanded_signature().clone())?;
    for (c, class) in ctx.classes().iter().enumerate() {
        let sym = ctx.class_symbol(c);
        for x in 0..base.len() {
            if class
                .pieces
                .iter()
                .any(|&p| naive_rooted_hom(&ctx.pieces()[p].rooted, &base, x))
            {
                out.add_tuple(sym, vec![x])?;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpansionDiff {
    pub element: String,
    pub symbol: String,
    pub oracle: bool,
    pub found: bool,
}

/// Differences between the expansion symbols of `expanded` and the naive
/// expansion of its base reduct.
pub fn expansion_diff(expanded: &Structure, ctx: &ExpandedContext) -> Result<Vec<ExpansionDiff>> {
    let naive = naive_expansion(expanded, ctx)?;
    let mut out = Vec::new();
    for c in 0..ctx.classes().len() {
        let sym = ctx.class_symbol(c);
        let name = &ctx.classes()[c].id;
        let found_id = expanded.sig().lookup(name);
        for x in 0..expanded.len() {
            let oracle = naive.contains(sym, &[x]);
            let found = found_id.is_some_and(|id| expanded.contains(id, &[x]));
            if oracle != found {
                out.push(ExpansionDiff {
                    element: expanded.name(x).to_string(),
                    symbol: name.clone(),
                    oracle,
                    found,
                });
            }
        }
    }
    Ok(out)
}

/// Expand `a` with the library and diff it against the naive oracle.
pub fn check_expansion_oracle(a: &Structure, ctx: &ExpandedContext) -> Result<Vec<ExpansionDiff>> {
    expansion_diff(&ctx.canonical_expansion(a)?, ctx)
}

/// Membership by brute force: `a` (unordered) embeds into the naive
/// canonical expansion of some F-free base structure with at most `max`
/// elements. Returns the witness if found.
pub fn brute_membership(
    a: &Structure,
    ctx: &ExpandedContext,
    max: usize,
) -> Result<Option<Structure>> {
    let a = a.unordered();
    for w in structures_up_to(ctx.sigma(), max, true) {
        if w.len() < a.len() || !is_f_free(&w, ctx.forbidden())? {
            continue;
        }
        let e = naive_expansion(&w, ctx)?;
        if find_hom(&a, &e, &SearchConstraint::embedding())?.is_some() {
            return Ok(Some(e));
        }
    }
    Ok(None)
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

    #[test]
    fn naive_agrees_on_edge() {
        let ctx = ExpandedContext::new(
            Signature::base([("E", 2)]).unwrap(),
            vec![digraph(3, &[(0, 1), (1, 2)])],
        )
        .unwrap();
        assert!(check_expansion_oracle(&digraph(2, &[(0, 1)]), &ctx)
            .unwrap()
            .is_empty());
        let mut e = ctx.canonical_expansion(&digraph(2, &[(0, 1)])).unwrap();
        let s0 = ctx.class_symbol(0);
        let t = e.relation(s0).iter().next().unwrap().clone();
        e.remove_tuple(s0, &t);
        assert_eq!(expansion_diff(&e, &ctx).unwrap().len(), 1);
    }
}

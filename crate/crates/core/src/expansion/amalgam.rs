//! Free amalgamation over a common substructure.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::{ExpandedContext, MembershipVerdict, Status};
use crate::error::{Error, Result};
use crate::morphism::is_embedding;
use crate::structure::Structure;

/// `C` with embeddings `g1: B1 -> C`, `g2: B2 -> C` agreeing on `A`.
#[derive(Clone, Debug)]
pub struct Amalgam {
    pub c: Structure,
    pub g1: Vec<usize>,
    pub g2: Vec<usize>,
    pub verdict: MembershipVerdict,
}

/// Glue `b1` and `b2` along the images of `f1`, `f2` with no other
/// identifications and relations exactly the union.
///
/// Elements of `b1` are named `"0:x"`, the rest of `b2` `"1:y"`. When all three
/// structures are ordered the result carries a linear extension of both
/// orders (least-index first among incomparable elements).
pub fn free_amalgam(
    a: &Structure,
    b1: &Structure,
    b2: &Structure,
    f1: &[usize],
    f2: &[usize],
    ctx: &ExpandedContext,
    bound: usize,
) -> Result<Amalgam> {
    for s in [a, b1, b2] {
        ctx.check_expanded(s)?;
    }
    if !is_embedding(a, b1, f1) {
        return Err(Error::NotEmbedding("left map".into()));
    }
    if !is_embedding(a, b2, f2) {
        return Err(Error::NotEmbedding("right map".into()));
    }
    for (label, s) in [("base", a), ("left", b1), ("right", b2)] {
        let v = ctx.is_in_c(s, bound)?;
        if v.status == Status::NotInC {
            return Err(Error::NotInClass(format!("{label} structure")));
        }
    }

    let ordered = a.is_ordered() && b1.is_ordered() && b2.is_ordered();
    let mut names: Vec<String> = b1.names().iter().map(|n| format!("0:{n}")).collect();
    let g1: Vec<usize> = (0..b1.len()).collect();
    let mut g2 = vec![usize::MAX; b2.len()];
    for (x, &y) in f2.iter().enumerate() {
        g2[y] = g1[f1[x]];
    }
    for (y, slot) in g2.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = names.len();
            names.push(format!("1:{}", b2.name(y)));
        }
    }
    let sig = Arc::new(ctx.expanded_signature().with_order(false));
    let mut c = Structure::new(sig, names)?;
    for (id, t) in b1.tuples() {
        c.add_tuple(id, t.iter().map(|&x| g1[x]).collect())?;
    }
    for (id, t) in b2.tuples() {
        c.add_tuple(id, t.iter().map(|&y| g2[y]).collect())?;
    }
    if ordered {
        let n = c.len();
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        let mut indeg = vec![0usize; n];
        for (order, g) in [(b1.order().unwrap(), &g1), (b2.order().unwrap(), &g2)] {
            for w in order.windows(2) {
                if succ[g[w[0]]].insert(g[w[1]]) {
                    indeg[g[w[1]]] += 1;
                }
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&x| indeg[x] == 0).collect();
        let mut seq = Vec::with_capacity(n);
        while let Some(x) = ready.pop_first() {
            seq.push(x);
            for &y in &succ[x] {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    ready.insert(y);
                }
            }
        }
        if seq.len() != n {
            return Err(Error::NotEmbedding(
                "orders of the two sides conflict".into(),
            ));
        }
        c.set_order(seq)?;
    }
    let verdict = ctx.is_in_c(&c, bound)?;
    match verdict.status {
        Status::NotInC => {
            return Err(Error::MembershipFailure(format!(
                "amalgam rejected: {:?}",
                verdict.certificate
            )))
        }
        Status::Unknown => log::warn!("amalgam membership unresolved at bound {bound}"),
        Status::InC => {}
    }
    Ok(Amalgam { c, g1, g2, verdict })
}

//! Replacing a subpiece by an equivalent piece. Used only to check that the
//! result is again a piece equivalent to the original.

use std::collections::BTreeSet;

use super::ExpandedContext;
use crate::error::{Error, Result};
use crate::structure::{join, RootedStructure};

#[derive(Clone, Debug)]
pub struct Replacement {
    pub piece: usize,
    pub subpiece: usize,
    pub with: usize,
    pub result: RootedStructure,
}

/// Pieces of the same tree contained in `piece` that do not swallow its root.
pub fn subpieces(ctx: &ExpandedContext, piece: usize) -> Vec<usize> {
    let p = &ctx.pieces()[piece];
    let names: BTreeSet<&str> = p
        .rooted
        .structure
        .names()
        .iter()
        .map(|s| s.as_str())
        .collect();
    let root = p.rooted.structure.name(p.rooted.root);
    ctx.pieces()
        .iter()
        .enumerate()
        .filter(|(i, q)| {
            if *i == piece || q.tree != p.tree {
                return false;
            }
            let s = &q.rooted.structure;
            let inside = s.names().iter().all(|n| names.contains(n.as_str()));
            let keeps_root = s.index_of(root).is_none_or(|r| r == q.rooted.root);
            inside && keeps_root
        })
        .map(|(i, _)| i)
        .collect()
}

/// Cut `subpiece` out of `piece` (keeping its root) and glue `with` there.
pub fn replace_subpiece(
    ctx: &ExpandedContext,
    piece: usize,
    subpiece: usize,
    with: usize,
) -> Result<Replacement> {
    if !subpieces(ctx, piece).contains(&subpiece) {
        return Err(Error::NotACut(format!(
            "piece #{subpiece} is not a subpiece of piece #{piece}"
        )));
    }
    let m = &ctx.pieces()[piece].rooted;
    let sub = &ctx.pieces()[subpiece].rooted;
    let glue = sub.structure.name(sub.root);
    let drop: BTreeSet<&str> = sub
        .structure
        .names()
        .iter()
        .map(|s| s.as_str())
        .filter(|&n| n != glue)
        .collect();
    let keep: Vec<usize> = (0..m.structure.len())
        .filter(|&x| !drop.contains(m.structure.name(x)))
        .collect();
    let rest = m.structure.induced(&keep);
    let rest_glue = rest.index_of(glue).expect("glue point kept");
    let rest_root = rest.index_of(m.structure.name(m.root)).expect("root kept");
    let left = RootedStructure {
        structure: rest,
        root: rest_glue,
    };
    let right = &ctx.pieces()[with].rooted;
    let (j, maps) = join(ctx.sigma(), &[&left, right])?;
    let result = RootedStructure {
        root: maps[0][rest_root],
        structure: j.structure,
    };
    Ok(Replacement {
        piece,
        subpiece,
        with,
        result,
    })
}

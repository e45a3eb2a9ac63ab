//! Search for a small ordered base structure `P` with `P -> (B*)^{A*}_r`.
//!
//! Candidates on `n` points are unions of copies of `B*` placed on `|B*|`-subsets
//! of `0..n` (order preserved). The union over all subsets comes first; when
//! there are at most [`MAX_FAMILY`] subsets, smaller families follow, largest
//! first, up to isomorphism. Every candidate is arrow-checked exhaustively.

use std::collections::HashSet;

use crate::canon::canonical_form;
use crate::error::{Error, Result};
use crate::structure::Structure;
use crate::verify::arrow::{arrow_check, ArrowInstance, ArrowReport};

use super::construction::combinations;

pub const MAX_FAMILY: usize = 12;

#[derive(Clone, Debug)]
pub struct Partner {
    pub p: Structure,
    pub report: ArrowReport,
    pub candidates_tried: usize,
}

fn place(b: &Structure, n: usize, family: &[&Vec<usize>]) -> Result<Structure> {
    let mut p = Structure::with_size(b.sig().clone(), n);
    let order = b.order().unwrap();
    for s in family {
        let mut map = vec![0; b.len()];
        for (i, &x) in order.iter().enumerate() {
            map[x] = s[i];
        }
        for (id, t) in b.tuples() {
            p.add_tuple(id, t.iter().map(|&x| map[x]).collect())?;
        }
    }
    p.set_order((0..n).collect())?;
    Ok(p)
}

/// The first candidate, by size, that passes the arrow check.
pub fn find_partner_p(
    a: &Structure,
    b: &Structure,
    r: u64,
    budget: u64,
    max_size: usize,
) -> Result<Partner> {
    if !a.is_ordered() || !b.is_ordered() {
        return Err(Error::NotPartite("A* and B* must be ordered".into()));
    }
    let mut tried = 0;
    let mut checked = 0u64;
    for n in b.len()..=max_size {
        let subsets = combinations(n, b.len());
        let mut families: Vec<Vec<usize>> = vec![(0..subsets.len()).collect()];
        if subsets.len() <= MAX_FAMILY {
            let m = subsets.len();
            let mut masks: Vec<u32> = (1..(1u32 << m) - 1).collect();
            masks.sort_by_key(|&x| (std::cmp::Reverse(x.count_ones()), x));
            families.extend(
                masks
                    .into_iter()
                    .map(|mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect()),
            );
        }
        let mut seen = HashSet::new();
        for fam in families {
            let chosen: Vec<&Vec<usize>> = fam.iter().map(|&i| &subsets[i]).collect();
            let p = place(b, n, &chosen)?;
            if !seen.insert(canonical_form(&p)) {
                continue;
            }
            tried += 1;
            let inst = ArrowInstance::new(&p, b, a)?;
            let report = arrow_check(&inst, r, budget);
            checked += report.colorings_checked;
            log::debug!("partner candidate n={n} #{tried}: {}", report.status());
            if report.verified() {
                return Ok(Partner {
                    p,
                    report,
                    candidates_tried: tried,
                });
            }
        }
    }
    Err(Error::PartnerSearchExhausted {
        size: max_size,
        colorings: checked,
    })
}

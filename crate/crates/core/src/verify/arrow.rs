//! Exhaustive check of `C -> (B)^A_r`.
//!
//! Colourings of the copies of `A` in `C` are enumerated in colexicographic
//! order: colouring `i` gives copy `j` the `j`-th base-`r` digit of `i`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::hom::{embeddings_sorted, HomSearch, SearchConstraint};
use crate::ramsey::PartiteStructure;
use crate::structure::Structure;

/// Default cap on the number of colourings enumerated.
pub const DEFAULT_BUDGET: u64 = 1 << 24;
/// Witnesses are stored only up to this many colourings.
pub const WITNESS_LIMIT: u64 = 1 << 22;

const CHUNK: u64 = 1 << 14;

/// Copies of `A` in `C` and, for each copy of `B`, the copies of `A` inside it.
#[derive(Clone, Debug)]
pub struct ArrowInstance {
    pub a_copies: Vec<Vec<usize>>,
    pub b_copies: Vec<Vec<usize>>,
    /// `inside[g]`: indices into `a_copies` of the copies of `A` within `b_copies[g]`.
    pub inside: Vec<Vec<usize>>,
}

impl ArrowInstance {
    /// All embeddings, in canonical order.
    pub fn new(c: &Structure, b: &Structure, a: &Structure) -> Result<Self> {
        let a_copies = embeddings_sorted(a, c)?;
        let b_copies = embeddings_sorted(b, c)?;
        let a_in_b = embeddings_sorted(a, b)?;
        Ok(Self::assemble(a_copies, b_copies, &a_in_b))
    }

    /// Embeddings commuting with the part maps; `a_parts` maps `A` into the
    /// common index.
    pub fn partite(
        c: &PartiteStructure,
        b: &PartiteStructure,
        a: &Structure,
        a_parts: &[usize],
    ) -> Result<Self> {
        let mut a_copies: Vec<Vec<usize>> = c.partite_embeddings(a, a_parts)?.collect();
        a_copies.sort();
        let mut b_copies: Vec<Vec<usize>> = c.partite_embeddings(&b.carrier, &b.parts)?.collect();
        b_copies.sort();
        let cands: Vec<Vec<usize>> = a_parts
            .iter()
            .map(|&p| (0..b.len()).filter(|&y| b.parts[y] == p).collect())
            .collect();
        let a_in_b: Vec<Vec<usize>> = HomSearch::new(
            a,
            &b.carrier,
            &SearchConstraint::embedding().with_candidates(cands),
        )?
        .collect();
        Ok(Self::assemble(a_copies, b_copies, &a_in_b))
    }

    pub fn assemble(
        a_copies: Vec<Vec<usize>>,
        b_copies: Vec<Vec<usize>>,
        a_in_b: &[Vec<usize>],
    ) -> Self {
        let index: std::collections::HashMap<&[usize], usize> = a_copies
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_slice(), i))
            .collect();
        let inside = b_copies
            .iter()
            .map(|g| {
                let mut v: Vec<usize> = a_in_b
                    .iter()
                    .map(|e| {
                        let comp: Vec<usize> = e.iter().map(|&x| g[x]).collect();
                        index[comp.as_slice()]
                    })
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        ArrowInstance {
            a_copies,
            b_copies,
            inside,
        }
    }

    /// `r^n` for `n` copies of `A`, if it fits.
    pub fn colourings(&self, r: u64) -> Option<u64> {
        let n = u32::try_from(self.a_copies.len()).ok()?;
        r.checked_pow(n)
    }

    /// Index of the first monochromatic copy of `B` under `colour`.
    pub fn monochromatic_copy(&self, colour: &[u64]) -> Option<usize> {
        self.inside
            .iter()
            .position(|ins| ins.windows(2).all(|w| colour[w[0]] == colour[w[1]]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ArrowOutcome {
    Verified {
        /// Per colouring, the index of a monochromatic copy of `B`.
        #[serde(skip)]
        witnesses: Option<Vec<u32>>,
    },
    Refuted {
        index: u64,
        colouring: Vec<u64>,
    },
    Infeasible {
        /// `n log2 r`.
        log2_colourings: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ArrowReport {
    #[serde(flatten)]
    pub outcome: ArrowOutcome,
    pub r: u64,
    pub a_copies: usize,
    pub b_copies: usize,
    pub colorings_checked: u64,
    pub runtime_ms: u64,
}

impl ArrowReport {
    pub fn verified(&self) -> bool {
        matches!(self.outcome, ArrowOutcome::Verified { .. })
    }

    pub fn refuted(&self) -> bool {
        matches!(self.outcome, ArrowOutcome::Refuted { .. })
    }

    pub fn status(&self) -> &'static str {
        match self.outcome {
            ArrowOutcome::Verified { .. } => "verified",
            ArrowOutcome::Refuted { .. } => "refuted",
            ArrowOutcome::Infeasible { .. } => "infeasible",
        }
    }
}

/// Base-`r` digits of `i`, one per copy of `A`.
pub fn decode(mut i: u64, r: u64, n: usize) -> Vec<u64> {
    let mut d = vec![0; n];
    for x in d.iter_mut() {
        *x = i % r;
        i /= r;
    }
    d
}

/// Enumerate every `r`-colouring of the copies of `A`, up to `budget`
/// colourings.
pub fn arrow_check(inst: &ArrowInstance, r: u64, budget: u64) -> ArrowReport {
    let start = Instant::now();
    let n = inst.a_copies.len();
    let report = |outcome, checked| ArrowReport {
        outcome,
        r,
        a_copies: n,
        b_copies: inst.b_copies.len(),
        colorings_checked: checked,
        runtime_ms: start.elapsed().as_millis() as u64,
    };
    let total = match inst.colourings(r) {
        Some(t) if t <= budget && r > 0 => t,
        _ => {
            let log2 = n as f64 * (r.max(1) as f64).log2();
            return report(
                ArrowOutcome::Infeasible {
                    log2_colourings: log2,
                },
                0,
            );
        }
    };
    let keep_witnesses = total <= WITNESS_LIMIT;
    let best = AtomicU64::new(u64::MAX);
    let chunks = total.div_ceil(CHUNK);
    let masks: Option<Vec<u64>> = (r == 2 && n <= 64).then(|| {
        inst.inside
            .iter()
            .map(|ins| ins.iter().fold(0u64, |m, &j| m | (1 << j)))
            .collect()
    });

    let results: Vec<(Option<u64>, Vec<u32>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let mut wit = Vec::new();
            if lo > best.load(Ordering::Relaxed) {
                return (None, wit);
            }
            if let Some(masks) = &masks {
                for i in lo..hi {
                    match masks.iter().position(|&m| i & m == 0 || i & m == m) {
                        Some(g) if keep_witnesses => wit.push(g as u32),
                        Some(_) => {}
                        None => {
                            best.fetch_min(i, Ordering::Relaxed);
                            return (Some(i), wit);
                        }
                    }
                }
            } else {
                let mut digits = decode(lo, r, n);
                for i in lo..hi {
                    match inst.monochromatic_copy(&digits) {
                        Some(g) if keep_witnesses => wit.push(g as u32),
                        Some(_) => {}
                        None => {
                            best.fetch_min(i, Ordering::Relaxed);
                            return (Some(i), wit);
                        }
                    }
                    for d in digits.iter_mut() {
                        *d += 1;
                        if *d < r {
                            break;
                        }
                        *d = 0;
                    }
                }
            }
            (None, wit)
        })
        .collect();

    if let Some(i) = results.iter().filter_map(|r| r.0).min() {
        return report(
            ArrowOutcome::Refuted {
                index: i,
                colouring: decode(i, r, n),
            },
            i + 1,
        );
    }
    let witnesses = keep_witnesses.then(|| results.into_iter().flat_map(|r| r.1).collect());
    report(ArrowOutcome::Verified { witnesses }, total)
}

/// Check stored witnesses without searching: every colouring's recorded copy
/// must be monochromatic.
pub fn reverify(inst: &ArrowInstance, r: u64, witnesses: &[u32]) -> bool {
    let n = inst.a_copies.len();
    if inst.colourings(r) != Some(witnesses.len() as u64) {
        return false;
    }
    witnesses.par_iter().enumerate().all(|(i, &g)| {
        let digits = decode(i as u64, r, n);
        inst.inside
            .get(g as usize)
            .is_some_and(|ins| ins.windows(2).all(|w| digits[w[0]] == digits[w[1]]))
    })
}

/// Build the instance and run the check.
pub fn verify_arrow(
    c: &Structure,
    b: &Structure,
    a: &Structure,
    r: u64,
    budget: u64,
) -> Result<ArrowReport> {
    let inst = ArrowInstance::new(c, b, a)?;
    Ok(arrow_check(&inst, r, budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Signature;
    use std::sync::Arc;

    fn ordered(n: usize, edges: &[(usize, usize)]) -> Structure {
        let sig = Arc::new(Signature::new([("E", 2)], Vec::<&str>::new(), true).unwrap());
        let mut s = Structure::with_size(sig, n);
        for &(a, b) in edges {
            s.add_tuple(0, vec![a, b]).unwrap();
        }
        s.set_order((0..n).collect()).unwrap();
        s
    }

    #[test]
    fn pigeonhole_points() {
        let a = ordered(1, &[]);
        let b = ordered(2, &[]);
        let r3 = verify_arrow(&ordered(3, &[]), &b, &a, 2, DEFAULT_BUDGET).unwrap();
        assert!(r3.verified());
        assert_eq!(r3.colorings_checked, 8);
        let r2 = verify_arrow(&ordered(2, &[]), &b, &a, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(
            r2.outcome,
            ArrowOutcome::Refuted {
                index: 1,
                colouring: vec![1, 0]
            }
        );
    }

    #[test]
    fn general_path_matches_mask_path() {
        let a = ordered(1, &[]);
        let b = ordered(2, &[(0, 1)]);
        let c = ordered(3, &[(0, 1), (0, 2), (1, 2)]);
        let inst = ArrowInstance::new(&c, &b, &a).unwrap();
        let fast = arrow_check(&inst, 2, DEFAULT_BUDGET);
        assert!(fast.verified());
        let slow = arrow_check(&inst, 3, DEFAULT_BUDGET);
        assert!(slow.refuted());
        if let ArrowOutcome::Verified { witnesses: Some(w) } = &fast.outcome {
            assert!(reverify(&inst, 2, w));
        } else {
            panic!("witnesses expected");
        }
    }

    #[test]
    fn budget_gives_infeasible() {
        let a = ordered(1, &[]);
        let b = ordered(2, &[]);
        let rep = verify_arrow(&ordered(30, &[]), &b, &a, 2, 1 << 20).unwrap();
        assert!(matches!(rep.outcome, ArrowOutcome::Infeasible { .. }));
    }

    #[test]
    fn fewer_colours_stay_verified() {
        let a = ordered(1, &[]);
        let b = ordered(2, &[]);
        let c = ordered(4, &[]);
        let inst = ArrowInstance::new(&c, &b, &a).unwrap();
        let three = arrow_check(&inst, 3, DEFAULT_BUDGET);
        assert!(three.verified());
        if let ArrowOutcome::Verified { witnesses: Some(w) } = &three.outcome {
            assert!(reverify(&inst, 3, w));
        }
        for r in 1..3 {
            assert!(arrow_check(&inst, r, DEFAULT_BUDGET).verified());
        }
        assert!(arrow_check(&inst, 4, DEFAULT_BUDGET).refuted());
    }
}

//! The partite lemma: for an ordered `A` and an `A`-rectified `B` there is an
//! `A`-rectified `E` such that every colouring of the sections of `E` has a
//! monochromatic copy of `B`.
//!
//! Parts are eliminated from the least one up. With `b` elements of `B` in the
//! least part, `E` gets `k = r(b - 1) + 1` elements there, and the remaining
//! parts are handled recursively with `r^k` colours (a colour of a section of
//! the remaining parts records the colours of its `k` extensions).

use crate::error::{Error, Result};
use crate::structure::Structure;

use super::partite::{rectified_structure, PartiteStructure};

/// One eliminated part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    /// Element of `A` indexing the part.
    pub part: usize,
    pub b_size: usize,
    /// Number of colours in play when this part is eliminated.
    pub colours: u64,
    pub e_size: u64,
}

/// Part sizes of `E`, from the sizes of `B`'s parts in increasing order.
pub fn lemma_levels(b_sizes: &[usize], r: u64) -> Result<Vec<(u64, u64)>> {
    if r == 0 {
        return Err(Error::ColourOverflow(
            "at least one colour is needed".into(),
        ));
    }
    let mut out = Vec::with_capacity(b_sizes.len());
    let mut colours = r;
    for (i, &b) in b_sizes.iter().enumerate() {
        let k = if b == 0 {
            0
        } else {
            colours
                .checked_mul(b as u64 - 1)
                .and_then(|x| x.checked_add(1))
                .ok_or_else(|| Error::ColourOverflow(format!("part size at level {i}")))?
        };
        out.push((colours, k));
        if i + 1 < b_sizes.len() {
            let k32 = u32::try_from(k)
                .map_err(|_| Error::ColourOverflow(format!("exponent {k} at level {i}")))?;
            colours = colours.checked_pow(k32).ok_or_else(|| {
                Error::ColourOverflow(format!("{colours}^{k} colours at level {}", i + 1))
            })?;
        }
    }
    Ok(out)
}

/// The structure `E` together with the data needed to find monochromatic
/// copies constructively.
#[derive(Clone, Debug)]
pub struct PartiteLemma {
    pub a: Structure,
    pub b: PartiteStructure,
    pub r: u64,
    pub levels: Vec<Level>,
    pub e: PartiteStructure,
}

/// A copy of `B` in `E` and the colour of all its sections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    /// Element of `B` -> element of `E`.
    pub copy: Vec<usize>,
    pub colour: u64,
}

/// Build `E` for `(A, B, r)`, refusing if it would exceed `max_size` elements.
pub fn partite_lemma(
    a: &Structure,
    b: &PartiteStructure,
    r: u64,
    max_size: u64,
) -> Result<PartiteLemma> {
    if !a.is_ordered() {
        return Err(Error::NotRectified(
            "index structure must be ordered".into(),
        ));
    }
    if b.index != *a || !b.is_rectified() {
        return Err(Error::NotRectified("B is not rectified over A".into()));
    }
    let order = a.order().unwrap();
    let sizes = b.part_sizes();
    let b_sizes: Vec<usize> = order.iter().map(|&p| sizes[p]).collect();
    let raw = lemma_levels(&b_sizes, r)?;
    let total = raw.iter().try_fold(0u64, |acc, &(_, k)| acc.checked_add(k));
    let total = total.ok_or_else(|| Error::ColourOverflow("total size".into()))?;
    if total > max_size {
        return Err(Error::SizeLimitExceeded {
            step: 0,
            size: total,
            limit: max_size,
        });
    }
    let levels: Vec<Level> = order
        .iter()
        .zip(&raw)
        .map(|(&p, &(colours, k))| Level {
            part: p,
            b_size: sizes[p],
            colours,
            e_size: k,
        })
        .collect();
    let mut e_sizes = vec![0usize; a.len()];
    for l in &levels {
        e_sizes[l.part] = l.e_size as usize;
    }
    let e = rectified_structure(a, &e_sizes)?;
    Ok(PartiteLemma {
        a: a.clone(),
        b: b.clone(),
        r,
        levels,
        e,
    })
}

impl PartiteLemma {
    /// A copy of `B` on which `chi` is constant. `chi` receives a section of
    /// `E` as a map from elements of `A` to elements of `E` and must return a
    /// colour below `r`.
    pub fn select(&self, chi: &mut dyn FnMut(&[usize]) -> u64) -> Selection {
        let members: Vec<Vec<usize>> = self.levels.iter().map(|l| self.e.part(l.part)).collect();
        let mut section = vec![usize::MAX; self.a.len()];
        let (chosen, colour) = select_rec(&self.levels, &members, self.r, &mut section, chi);
        let mut copy = vec![usize::MAX; self.b.len()];
        for (l, picks) in self.levels.iter().zip(&chosen) {
            for (x, &y) in self.b.part(l.part).iter().zip(picks) {
                copy[*x] = y;
            }
        }
        Selection { copy, colour }
    }

    /// Copies of `B` in `E`: order-preserving injections within each part.
    pub fn copy_count(&self) -> u128 {
        self.levels.iter().fold(1u128, |acc, l| {
            acc.saturating_mul(binomial(l.e_size, l.b_size as u64))
        })
    }
}

/// `n choose k`, saturating at `u128::MAX`.
pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i + 1) as u128,
            None => return u128::MAX,
        }
    }
    acc
}

fn select_rec(
    levels: &[Level],
    members: &[Vec<usize>],
    r: u64,
    section: &mut [usize],
    chi: &mut dyn FnMut(&[usize]) -> u64,
) -> (Vec<Vec<usize>>, u64) {
    let level = &levels[0];
    let own = &members[0];
    let colour_of: Vec<u64> = if levels.len() == 1 {
        own.iter()
            .map(|&m| {
                section[level.part] = m;
                let c = chi(section);
                assert!(c < r, "colour {c} out of range");
                c
            })
            .collect()
    } else {
        // colour vectors of the remaining parts, digit `c` for member `c`
        let part = level.part;
        let own = own.clone();
        let mut lifted = |s: &[usize]| -> u64 {
            let mut buf = s.to_vec();
            let mut v = 0u64;
            let mut w = 1u64;
            for &m in &own {
                buf[part] = m;
                let c = chi(&buf);
                assert!(c < r, "colour {c} out of range");
                v += c * w;
                w = w.wrapping_mul(r);
            }
            v
        };
        let (rest, v) = select_rec(
            &levels[1..],
            &members[1..],
            levels[1].colours,
            section,
            &mut lifted,
        );
        let digits: Vec<u64> = (0..own.len() as u32).map(|c| (v / r.pow(c)) % r).collect();
        let (picks, colour) = own_choice(&members[0], &digits, level.b_size, r);
        let mut all = vec![picks];
        all.extend(rest);
        return (all, colour);
    };
    let (picks, colour) = own_choice(own, &colour_of, level.b_size, r);
    (vec![picks], colour)
}

/// The first `b` members of the least colour class with at least `b` members.
fn own_choice(members: &[usize], colours: &[u64], b: usize, r: u64) -> (Vec<usize>, u64) {
    if b == 0 {
        return (Vec::new(), 0);
    }
    for c in 0..r {
        let class: Vec<usize> = members
            .iter()
            .zip(colours)
            .filter(|(_, &k)| k == c)
            .map(|(&m, _)| m)
            .collect();
        if class.len() >= b {
            return (class[..b].to_vec(), c);
        }
    }
    unreachable!("pigeonhole guarantees a large colour class")
}

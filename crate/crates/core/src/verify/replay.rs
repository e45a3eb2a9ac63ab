//! Replaying the construction for a single colouring: pick a monochromatic
//! copy of `B_k` in every `E_k` from the last step down, compose the chosen
//! copy maps into `h: C_0 -> C_N`, then find a copy of `B*` in `P` whose
//! distinguished copy of `B` is monochromatic under `h`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::Result;
use crate::hom::{embeddings_sorted, HomSearch, SearchConstraint};
use crate::morphism::is_embedding;
use crate::ramsey::Construction;

#[derive(Clone, Debug, Serialize)]
pub struct ReplayOutcome {
    /// Chosen copy index per step (`None` for skipped steps).
    pub choices: Vec<Option<usize>>,
    /// Every chosen copy of `B_k` was monochromatic under the induced colouring.
    pub selections_monochromatic: bool,
    /// Copies of `A` in `C_0` over the same copy of `A*` got the same colour.
    pub fibres_constant: bool,
    /// Index of the copy of `B*` used, if one was monochromatic.
    pub f: Option<usize>,
    /// The copy of `B` in `C_N`.
    pub copy: Option<Vec<usize>>,
    pub colour: Option<u64>,
    pub embedding: bool,
}

impl ReplayOutcome {
    pub fn ok(&self) -> bool {
        self.selections_monochromatic
            && self.fibres_constant
            && self.copy.is_some()
            && self.embedding
    }
}

/// Replay for a colouring `chi` of the copies of `A` in `C_N`.
pub fn replay(con: &Construction, chi: &dyn Fn(&[usize]) -> u64) -> Result<ReplayOutcome> {
    let mut chain: Vec<usize> = (0..con.result.len()).collect();
    let mut choices = vec![None; con.steps.len()];
    let mut selections_monochromatic = true;
    for step in con.steps.iter().rev() {
        let Some(built) = &step.built else { continue };
        let lemma = &built.lemma;
        let mut chi_k = |q: &[usize]| chi(&q.iter().map(|&y| chain[y]).collect::<Vec<_>>());
        let sel = lemma.select(&mut chi_k);

        // sections of the chosen copy all take the selected colour
        let cands: Vec<Vec<usize>> = (0..lemma.a.len())
            .map(|p| {
                (0..lemma.b.len())
                    .filter(|&y| lemma.b.parts[y] == p)
                    .collect()
            })
            .collect();
        let search = HomSearch::new(
            &lemma.a,
            &lemma.b.carrier,
            &SearchConstraint::embedding().with_candidates(cands),
        )?;
        for s in search {
            let q: Vec<usize> = s.iter().map(|&x| sel.copy[x]).collect();
            if chi_k(&q) != sel.colour {
                selections_monochromatic = false;
            }
        }

        let g = built
            .copies
            .iter()
            .position(|c| *c == sel.copy)
            .expect("selection is one of the copies");
        choices[step.k - 1] = Some(g);
        chain = built.lambda[g].iter().map(|&y| chain[y]).collect();
    }

    // colour of each copy of A in C_0, grouped by its copy of A* in P
    let compose = |m: &[usize]| -> Vec<usize> { m.iter().map(|&x| chain[x]).collect() };
    let mut fibre: HashMap<Vec<usize>, u64> = HashMap::new();
    let mut fibres_constant = true;
    for d in embeddings_sorted(&con.a, &con.c0.carrier)? {
        let e: Vec<usize> = d.iter().map(|&x| con.c0.parts[x]).collect();
        let c = chi(&compose(&d));
        if *fibre.entry(e).or_insert(c) != c {
            fibres_constant = false;
        }
    }

    let a_in_b = embeddings_sorted(&con.a, &con.b)?;
    let mut out = ReplayOutcome {
        choices,
        selections_monochromatic,
        fibres_constant,
        f: None,
        copy: None,
        colour: None,
        embedding: false,
    };
    for (i, c) in con.distinguished.iter().enumerate() {
        let h: Vec<usize> = compose(c);
        let colours: Vec<u64> = a_in_b
            .iter()
            .map(|e| chi(&e.iter().map(|&x| h[x]).collect::<Vec<_>>()))
            .collect();
        if colours.windows(2).all(|w| w[0] == w[1]) {
            out.embedding = is_embedding(&con.b, &con.result.carrier, &h);
            out.f = Some(i);
            out.colour = colours.first().copied();
            out.copy = Some(h);
            break;
        }
    }
    Ok(out)
}

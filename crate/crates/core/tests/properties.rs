//! Randomized invariants.

use std::collections::BTreeSet;

use proptest::prelude::*;

use treeramsey::canon::{canonical_form, isomorphic};
use treeramsey::expansion::free_amalgam;
use treeramsey::hom::{embeddings_sorted, is_f_free};
use treeramsey::io::{parse_structure, structure_to_string};
use treeramsey::morphism::is_embedding;
use treeramsey::ramsey::{rectify, PartiteStructure};
use treeramsey::verify::arrow::decode;
use treeramsey::verify::expansion_diff;
use treeramsey::verify::suites::two_path_context;
use treeramsey::{Signature, Structure};

fn digraph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let mut s = Structure::with_size(Signature::base([("E", 2)]).unwrap(), n);
    for &(a, b) in edges {
        s.add_tuple(0, vec![a % n, b % n]).unwrap();
    }
    s
}

fn arb_digraph(max: usize) -> impl Strategy<Value = Structure> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..=n * 2).prop_map(move |edges| digraph(n, &edges))
    })
}

fn arb_perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_ignores_labels((s, perm) in arb_digraph(5).prop_flat_map(|s| {
        let n = s.len();
        (Just(s), arb_perm(n))
    })) {
        let t = s.permute(&perm);
        prop_assert_eq!(canonical_form(&s), canonical_form(&t));
        let iso = isomorphic(&s, &t).expect("isomorphic");
        prop_assert!(is_embedding(&s, &t, &iso.map));
    }

    #[test]
    fn expansion_matches_naive_oracle(s in arb_digraph(4)) {
        let ctx = two_path_context();
        prop_assume!(is_f_free(&s, ctx.forbidden()).unwrap());
        let e = ctx.canonical_expansion(&s).unwrap();
        prop_assert!(expansion_diff(&e, &ctx).unwrap().is_empty());
        prop_assert!(ctx.is_in_c(&e, ctx.default_bound()).unwrap().is_in());
    }

    #[test]
    fn structure_files_round_trip(s in arb_digraph(5)) {
        let text = structure_to_string(&s);
        prop_assert_eq!(parse_structure(&text).unwrap().structure, s);
    }

    #[test]
    fn colouring_index_decodes(i in 0u64..(1 << 20), r in 2u64..5) {
        let n = 20;
        let digits = decode(i % r.pow(8), r, n);
        prop_assert_eq!(digits.len(), n);
        prop_assert!(digits.iter().all(|&d| d < r));
        let back = digits.iter().rev().fold(0u64, |acc, &d| acc * r + d);
        prop_assert_eq!(back, i % r.pow(8));
    }

    #[test]
    fn amalgam_is_union_of_sides(a in arb_digraph(3), b in arb_digraph(3)) {
        let ctx = two_path_context();
        prop_assume!(is_f_free(&a, ctx.forbidden()).unwrap() && is_f_free(&b, ctx.forbidden()).unwrap());
        let ea = ctx.canonical_expansion(&a).unwrap();
        let eb = ctx.canonical_expansion(&b).unwrap();
        // glue along a single common vertex when types agree
        let base = ea.induced(&[0]);
        let into_b = embeddings_sorted(&base, &eb).unwrap();
        prop_assume!(!into_b.is_empty());
        let am = free_amalgam(&base, &ea, &eb, &[0], &into_b[0], &ctx, ctx.default_bound()).unwrap();
        prop_assert_eq!(am.c.len(), ea.len() + eb.len() - 1);
        let mut union = BTreeSet::new();
        for (s, g) in [(&ea, &am.g1), (&eb, &am.g2)] {
            for (id, t) in s.tuples() {
                union.insert((id, t.iter().map(|&x| g[x]).collect::<Vec<_>>()));
            }
        }
        let have: BTreeSet<_> = am.c.tuples().map(|(id, t)| (id, t.clone())).collect();
        prop_assert_eq!(have, union);
        prop_assert!(am.verdict.is_in());
    }

    #[test]
    fn rectify_is_idempotent_and_grows(edges in proptest::collection::vec((0usize..4, 0usize..4), 0..6)) {
        // index: ordered two-point structure with an edge; carrier parts alternate
        let osig = std::sync::Arc::new(Signature::base([("E", 2)]).unwrap().with_order(true));
        let mut index = Structure::with_size(osig.clone(), 2);
        index.add_tuple(0, vec![0, 1]).unwrap();
        index.set_order(vec![0, 1]).unwrap();
        let mut carrier = Structure::with_size(osig, 4);
        for (x, y) in edges {
            if x % 2 == 0 && y % 2 == 1 {
                carrier.add_tuple(0, vec![x, y]).unwrap();
            }
        }
        carrier.set_order(vec![0, 2, 1, 3]).unwrap();
        let c = PartiteStructure::new(carrier, vec![0, 1, 0, 1], index).unwrap();
        let d = rectify(&c);
        prop_assert!(c.carrier.tuples().all(|(id, t)| d.carrier.contains(id, t)));
        prop_assert_eq!(rectify(&d), d.clone());
        prop_assert!(d.satisfies_rectified_condition());
    }
}

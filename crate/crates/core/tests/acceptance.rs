//! Acceptance criteria. Prints one `PASS`/`FAIL` line per criterion with its
//! time limit and exits non-zero if any fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use treeramsey::expansion::tuple_trace;
use treeramsey::hom::embeddings_sorted;
use treeramsey::morphism::is_embedding;
use treeramsey::ramsey::{lemma_levels, partite_construction, partite_lemma, rectified_structure};
use treeramsey::verify::suites::{
    default_scale, head_vertex_into_edge, suite_faults, two_path_context, SUITES,
};
use treeramsey::verify::{
    arrow_check, replay, run_property_suite, ArrowInstance, ArrowOutcome, DEFAULT_BUDGET,
};
use treeramsey::{Signature, Structure};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, Box<dyn Fn() -> Check>);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1_tuple_trace() -> Check {
    let sig = Arc::new(
        Signature::new(
            [("R", 4), ("R'", 2), ("⋄", 1), ("⊙", 1)],
            Vec::<&str>::new(),
            false,
        )
        .unwrap(),
    );
    let names = ["a", "b", "c"].map(String::from).to_vec();
    let mut a = Structure::new(sig.clone(), names).unwrap();
    a.add_tuple_by_name("R", &["a", "b", "b", "c"]).unwrap();
    a.add_tuple_by_name("R'", &["a", "c"]).unwrap();
    for x in ["a", "b"] {
        a.add_tuple_by_name("⋄", &[x]).unwrap();
    }
    a.add_tuple_by_name("⊙", &["c"]).unwrap();

    let r = sig.lookup("R").unwrap();
    let t = tuple_trace(&a, r, &[0, 1, 1, 2]).map_err(|e| e.to_string())?;

    let mut expected =
        Structure::new(sig, ["1", "2", "3", "4"].map(String::from).to_vec()).unwrap();
    expected
        .add_tuple_by_name("R", &["1", "2", "3", "4"])
        .unwrap();
    for x in ["1", "2", "3"] {
        expected.add_tuple_by_name("⋄", &[x]).unwrap();
    }
    expected.add_tuple_by_name("⊙", &["4"]).unwrap();
    ensure(t == expected, format!("trace differs: {:?}", t.to_raw()))?;
    Ok("dom {1,2,3,4}, R={(1,2,3,4)}, R'=∅, ⋄={1,2,3}, ⊙={4}".into())
}

fn ordered_points(n: usize) -> Structure {
    let sig = Arc::new(Signature::new([("E", 2)], Vec::<&str>::new(), true).unwrap());
    let mut s = Structure::with_size(sig, n);
    s.set_order((0..n).collect()).unwrap();
    s
}

fn c2_lemma_one_part() -> Check {
    let a = ordered_points(1);
    let b = rectified_structure(&a, &[3]).map_err(|e| e.to_string())?;
    let lemma = partite_lemma(&a, &b, 2, 1 << 20).map_err(|e| e.to_string())?;
    // r (|B| - 1) + 1
    let expected = 2 * (3 - 1) + 1;
    ensure(
        lemma.e.len() == expected,
        format!("|E| = {}", lemma.e.len()),
    )?;
    let inst = ArrowInstance::partite(&lemma.e, &b, &a, &[0]).map_err(|e| e.to_string())?;
    let report = arrow_check(&inst, 2, DEFAULT_BUDGET);
    ensure(report.verified(), format!("arrow {}", report.status()))?;
    ensure(
        report.colorings_checked == 32,
        format!("{} colourings", report.colorings_checked),
    )?;
    // independent pigeonhole count over the 32 colourings of 5 points
    ensure(
        (0u32..32).all(|m| m.count_ones().max(5 - m.count_ones()) >= 3),
        "pigeonhole",
    )?;
    Ok(format!(
        "|E| = 5, verified over {} colourings",
        report.colorings_checked
    ))
}

fn c3_lemma_two_parts() -> Check {
    let r = 2u64;
    let (b1, b2) = (2u64, 2u64);
    let levels = lemma_levels(&[b1 as usize, b2 as usize], r).map_err(|e| e.to_string())?;
    // first part: k = r (b - 1) + 1; second part sees r^k colours
    let k = r * (b1 - 1) + 1;
    let colours = r.pow(k as u32);
    let k2 = colours * (b2 - 1) + 1;
    ensure(
        levels == vec![(r, k), (colours, k2)],
        format!("levels {levels:?}"),
    )?;
    ensure(k == 3 && colours == 8, "k = 3, r^k = 8")?;

    let a = ordered_points(2);
    let b = rectified_structure(&a, &[2, 2]).map_err(|e| e.to_string())?;
    let lemma = partite_lemma(&a, &b, r, 1 << 20).map_err(|e| e.to_string())?;
    let sizes = lemma.e.part_sizes();
    ensure(
        sizes == vec![k as usize, k2 as usize],
        format!("part sizes {sizes:?}"),
    )?;
    let inst = ArrowInstance::partite(&lemma.e, &b, &a, &[0, 1]).map_err(|e| e.to_string())?;
    let n = inst.a_copies.len();
    let report = arrow_check(&inst, r, DEFAULT_BUDGET);
    if n <= 24 {
        ensure(report.verified(), format!("arrow {}", report.status()))?;
        Ok(format!("k = 3, r^k = 8, |E| = {:?}, verified", sizes))
    } else {
        ensure(
            matches!(report.outcome, ArrowOutcome::Infeasible { .. }),
            "expected infeasible",
        )?;
        Ok(format!("k = 3, r^k = 8, |E| parts {sizes:?}; {n} copies of A, arrow infeasible (2^{n} colourings)"))
    }
}

fn suite_check(name: &str, scale: usize) -> Check {
    let rep = run_property_suite(name, scale, None).map_err(|e| e.to_string())?;
    ensure(rep.passed(), format!("{name}: {:?}", rep.counterexample))?;
    Ok(format!("{name} at scale {scale}: {} cases", rep.cases))
}

fn c8_end_to_end() -> Check {
    let ctx = two_path_context();
    let (a, b, p) = head_vertex_into_edge(&ctx).map_err(|e| e.to_string())?;
    ensure(ctx.tau_of(&a, 0).len() == 1, "A carries one mark")?;
    let con = partite_construction(&ctx, &a, &b, &p, 2, 100_000).map_err(|e| e.to_string())?;
    let c = &con.result;
    let v = ctx
        .is_in_c(&c.carrier, ctx.default_bound())
        .map_err(|e| e.to_string())?;
    ensure(v.is_in(), "C is not in the class")?;
    ensure(
        ctx.verify_certificate(&c.carrier, &v, ctx.default_bound())
            .map_err(|e| e.to_string())?,
        "membership certificate",
    )?;

    // every choice of copies along the chain
    let built: Vec<usize> = con
        .steps
        .iter()
        .map(|s| s.built.as_ref().map_or(1, |b| b.lambda.len()))
        .collect();
    let total: usize = built.iter().product();
    for mut code in 0..total {
        let mut h: Vec<usize> = (0..con.c0.len()).collect();
        for (step, &n) in con.steps.iter().zip(&built) {
            let g = code % n;
            code /= n;
            if let Some(bs) = &step.built {
                h = h.iter().map(|&x| bs.lambda[g][x]).collect();
            }
        }
        for cf in &con.distinguished {
            let hc: Vec<usize> = cf.iter().map(|&x| h[x]).collect();
            ensure(
                is_embedding(&b, &c.carrier, &hc),
                "h c_f is not an embedding",
            )?;
        }
    }

    let a_copies = embeddings_sorted(&a, &c.carrier).map_err(|e| e.to_string())?;
    let n = a_copies.len();
    let mut detail = format!("|C| = {}, {} chains of copy maps checked", c.len(), total);
    if n < 64 && (1u64 << n) <= DEFAULT_BUDGET {
        let inst = ArrowInstance::new(&c.carrier, &b, &a).map_err(|e| e.to_string())?;
        let rep = arrow_check(&inst, 2, DEFAULT_BUDGET);
        ensure(rep.verified(), format!("arrow on C {}", rep.status()))?;
        detail += &format!(", arrow verified over {} colourings", rep.colorings_checked);
    }
    // replay every colouring when few enough, otherwise a fixed sample
    let index: HashMap<Vec<usize>, usize> = a_copies
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect();
    let count = if n <= 16 { 1u64 << n } else { 1 << 16 };
    for m in 0..count {
        let mask = if n <= 16 {
            m
        } else {
            m.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        };
        let chi = |e: &[usize]| (mask >> (index[e] % 64)) & 1;
        let out = replay(&con, &chi).map_err(|e| e.to_string())?;
        ensure(
            out.ok(),
            format!("replay failed for colouring {m}: {out:?}"),
        )?;
    }
    detail += &format!(", replay passed on {count} colourings");
    Ok(detail)
}

fn c9_negative_controls() -> Check {
    let mut detected = 0;
    let mut total = 0;
    for name in SUITES {
        let scale = default_scale(name);
        let clean = run_property_suite(name, scale, None).map_err(|e| e.to_string())?;
        ensure(clean.passed(), format!("{name} fails without a fault"))?;
        let faults = suite_faults(name);
        ensure(!faults.is_empty(), format!("{name} has no fault"))?;
        for &f in faults {
            total += 1;
            let rep = run_property_suite(name, scale, Some(f)).map_err(|e| e.to_string())?;
            if rep.passed() {
                return Err(format!("{name} misses {f:?}"));
            }
            detected += 1;
        }
    }
    Ok(format!(
        "{detected}/{total} injected faults detected across {} suites",
        SUITES.len()
    ))
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (
            "1 tuple trace",
            Duration::from_secs(1),
            Box::new(c1_tuple_trace),
        ),
        (
            "2 partite lemma, one part",
            Duration::from_secs(5),
            Box::new(c2_lemma_one_part),
        ),
        (
            "3 partite lemma, two parts",
            Duration::from_secs(300),
            Box::new(c3_lemma_two_parts),
        ),
        (
            "4 expansion oracle",
            Duration::from_secs(60),
            Box::new(|| suite_check("expansion-oracle", 3)),
        ),
        (
            "5 forbidden singletons",
            Duration::from_secs(120),
            Box::new(|| suite_check("forbidden-singletons", 5)),
        ),
        (
            "6 free amalgamation",
            Duration::from_secs(300),
            Box::new(|| suite_check("free-amalgamation", 3)),
        ),
        (
            "7 connectivity notions",
            Duration::from_secs(60),
            Box::new(|| suite_check("connectivity", 3)),
        ),
        (
            "8 end-to-end construction",
            Duration::from_secs(600),
            Box::new(c8_end_to_end),
        ),
        (
            "9 negative controls",
            Duration::from_secs(600),
            Box::new(c9_negative_controls),
        ),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the time limit")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.3}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}

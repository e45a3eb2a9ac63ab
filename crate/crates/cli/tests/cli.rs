//! End-to-end runs of the binary. Each verb's output is compared with a
//! golden file (timings stripped) and cross-checked against the library's
//! brute-force oracles. Set `UPDATE_GOLDEN=1` to rewrite the golden files.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use treeramsey::expansion::ExpandedContext;
use treeramsey::io::{parse_context, parse_structure};
use treeramsey::verify::{brute_membership, naive_expansion};
use treeramsey::Structure;

fn dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join(sub)
}

fn fixture(name: &str) -> String {
    dir("fixtures").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_treeramsey"))
        .arg("--quiet")
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("runtime_ms");
            m.values_mut().for_each(strip_timings);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

/// Run, require exit 0 and compare with the golden file.
fn golden(name: &str, args: &[&str]) -> Value {
    let (code, out) = run(args);
    assert_eq!(code, 0, "{name}: {out}");
    let path = dir("golden").join(name);
    if name.ends_with(".dot") {
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::create_dir_all(dir("golden")).unwrap();
            std::fs::write(&path, &out).unwrap();
        }
        let expected =
            std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {name}"));
        assert_eq!(out, expected, "{name} differs from golden");
        return Value::String(out);
    }
    let mut v: Value = serde_json::from_str(&out).unwrap();
    strip_timings(&mut v);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(dir("golden")).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap() + "\n").unwrap();
    }
    let expected: Value = serde_json::from_str(
        &std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {name}")),
    )
    .unwrap();
    assert_eq!(v, expected, "{name} differs from golden");
    v
}

fn domain_error(args: &[&str]) -> String {
    let (code, out) = run(args);
    assert_eq!(code, 1, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

fn ctx() -> ExpandedContext {
    parse_context(&std::fs::read_to_string(fixture("two_path.json")).unwrap()).unwrap()
}

fn structure(v: &Value) -> Structure {
    parse_structure(&v.to_string()).unwrap().structure
}

fn load(name: &str) -> Structure {
    parse_structure(&std::fs::read_to_string(fixture(name)).unwrap())
        .unwrap()
        .structure
}

#[test]
fn pieces_of_two_path() {
    let v = golden(
        "pieces.json",
        &["pieces", "--forest", &fixture("two_path.json")],
    );
    assert_eq!(v["pieces"].as_array().unwrap().len(), 2);
    assert_eq!(v["classes"].as_array().unwrap().len(), 2);
}

#[test]
fn expand_matches_naive_oracle() {
    let v = golden(
        "expand_edge.json",
        &[
            "expand",
            "--forbid",
            &fixture("two_path.json"),
            "--input",
            &fixture("edge.json"),
        ],
    );
    let e = structure(&v);
    let ctx = ctx();
    let naive = naive_expansion(&e, &ctx).unwrap();
    assert_eq!(naive.relation(ctx.class_symbol(0)).len(), 1);
    for c in 0..2 {
        let sym = ctx.class_symbol(c);
        let id = e.sig().lookup(&ctx.classes()[c].id).unwrap();
        assert_eq!(naive.relation(sym), e.relation(id));
    }
    // tree given as a structure file behaves like the context file
    let (code, again) = run(&[
        "expand",
        "--forbid",
        &fixture("two_path_tree.json"),
        "--input",
        &fixture("edge.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<Value>(&again).unwrap(), v);
}

#[test]
fn member_agrees_with_brute_force() {
    let ctx = ctx();
    for (file, golden_name, expected) in [
        ("edge_expanded.json", "member_edge.json", true),
        ("bad_marks.json", "member_bad.json", false),
    ] {
        let v = golden(
            golden_name,
            &[
                "member",
                "--forbid",
                &fixture("two_path.json"),
                "--input",
                &fixture(file),
            ],
        );
        let a = load(file).lift(ctx.expanded_signature().clone()).unwrap();
        let oracle = brute_membership(&a, &ctx, 4).unwrap().is_some();
        assert_eq!(oracle, expected);
        assert_eq!(v["status"] == "InC", expected, "{file}");
    }
}

#[test]
fn canonize_gives_naive_canonical_superstructure() {
    let v = golden(
        "canonize_edge.json",
        &[
            "canonize",
            "--forbid",
            &fixture("two_path.json"),
            "--input",
            &fixture("edge_expanded.json"),
            "--bound",
            "6",
        ],
    );
    let s = structure(&v);
    let ctx = ctx();
    let s = s.lift(ctx.expanded_signature().clone()).unwrap();
    assert_eq!(naive_expansion(&s, &ctx).unwrap(), s);
    let input = load("edge_expanded.json")
        .lift(ctx.expanded_signature().clone())
        .unwrap();
    let a = s.element("a").unwrap();
    let b = s.element("b").unwrap();
    assert_eq!(s.induced(&[a, b]), input);
}

#[test]
fn amalgamate_is_free() {
    let v = golden(
        "amalgam.json",
        &[
            "amalgamate",
            "--base",
            &fixture("tail_expanded.json"),
            "--left",
            &fixture("edge_expanded.json"),
            "--right",
            &fixture("edge_expanded_2.json"),
            "--embed-left",
            "x:a",
            "--embed-right",
            "x:c",
            "--forbid",
            &fixture("two_path.json"),
        ],
    );
    let c = structure(&v["amalgam"]);
    assert_eq!(c.len(), 3);
    assert_eq!(v["g_left"]["a"], v["g_right"]["c"]);
    assert_eq!(c.relation(c.sig().lookup("E").unwrap()).len(), 2);
    let ctx = ctx();
    let c = c.lift(ctx.expanded_signature().clone()).unwrap();
    assert!(brute_membership(&c, &ctx, 3).unwrap().is_some());
    assert_eq!(v["membership"]["status"], "InC");
}

#[test]
fn partite_lemma_one_point() {
    let v = golden(
        "partite_lemma.json",
        &[
            "partite-lemma",
            "--a",
            &fixture("point.json"),
            "--b",
            &fixture("three_points.json"),
            "--parts",
            "u:x,v:x,w:x",
            "-r",
            "2",
        ],
    );
    // r (|B| - 1) + 1
    assert_eq!(v["e"]["domain"].as_array().unwrap().len(), 5);
    // any 2-colouring of 5 points has 3 of one colour
    assert!((0u32..32).all(|m| m.count_ones() >= 3 || 5 - m.count_ones() >= 3));
    assert_eq!(v["arrow"]["status"], "verified");
    assert_eq!(v["arrow"]["colorings_checked"], 32);
}

#[test]
fn verify_arrow_triangle() {
    let v = golden(
        "arrow_tt3.json",
        &[
            "verify-arrow",
            "--c",
            &fixture("tt3.json"),
            "--b",
            &fixture("edge_plain_ordered.json"),
            "--a",
            &fixture("point.json"),
            "-r",
            "2",
        ],
    );
    // every 2-colouring of a triangle's vertices has a monochromatic edge
    let edges = [(0, 1), (0, 2), (1, 2)];
    assert!((0u32..8).all(|m| edges.iter().any(|&(x, y)| (m >> x) & 1 == (m >> y) & 1)));
    assert_eq!(v["status"], "verified");

    let (code, out) = run(&[
        "verify-arrow",
        "--c",
        &fixture("edge_plain_ordered.json"),
        "--b",
        &fixture("edge_plain_ordered.json"),
        "--a",
        &fixture("point.json"),
        "-r",
        "2",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "refuted");
}

#[test]
fn construct_with_and_without_p() {
    let args = [
        "construct",
        "--forbid",
        &fixture("two_path.json"),
        "--a",
        &fixture("head_ordered.json"),
        "--b",
        &fixture("edge_ordered.json"),
        "-r",
        "2",
    ];
    let searched = golden("construct.json", &args);
    assert_eq!(searched["p"]["domain"].as_array().unwrap().len(), 3);
    let mut with_p = args.to_vec();
    let tt3 = fixture("tt3.json");
    with_p.extend(["--p", &tt3]);
    let (code, out) = run(&with_p);
    assert_eq!(code, 0);
    let given: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(given["result"], searched["result"]);

    let ctx = ctx();
    let c = structure(&searched["result"])
        .lift(ctx.expanded_signature().clone())
        .unwrap();
    assert!(ctx.is_in_c(&c, ctx.default_bound()).unwrap().is_in());
    assert_eq!(searched["steps"].as_array().unwrap().len(), 3);
}

#[test]
fn suite_reports() {
    let v = golden(
        "suite_oracle.json",
        &["suite", "--name", "expansion-oracle", "--scale", "3"],
    );
    assert_eq!(v["status"], "pass");
    let v = golden(
        "suite_oracle_fault.json",
        &[
            "suite",
            "--name",
            "expansion-oracle",
            "--scale",
            "3",
            "--fault",
            "flip-tau",
        ],
    );
    assert_eq!(v["status"], "fail");
    assert!(v["counterexample"].is_object());
    assert_eq!(domain_error(&["suite", "--name", "nope"]), "UnknownSuite");
}

#[test]
fn viz_graphs() {
    let Value::String(dot) = golden(
        "quaternary_incidence.dot",
        &[
            "viz",
            "--input",
            &fixture("quaternary.json"),
            "--graph",
            "incidence",
        ],
    ) else {
        unreachable!()
    };
    assert_eq!(dot.matches("shape=circle").count(), 3);
    assert_eq!(dot.matches("shape=box").count(), 2);
    assert_eq!(dot.matches(" -- ").count(), 6);
    assert!(dot.contains("\"R#0\"") && dot.contains("\"R'#0\""));

    let Value::String(dot) = golden(
        "path_gaifman.dot",
        &[
            "viz",
            "--input",
            &fixture("two_path_tree.json"),
            "--graph",
            "gaifman",
        ],
    ) else {
        unreachable!()
    };
    assert!(dot.contains("e0 -- e1;") && dot.contains("e1 -- e2;"));
    assert_eq!(dot.matches(" -- ").count(), 2);

    golden(
        "partite.dot",
        &[
            "viz",
            "--input",
            &fixture("partite_c.json"),
            "--graph",
            "partite",
        ],
    );
    assert_eq!(
        domain_error(&[
            "viz",
            "--input",
            &fixture("edge.json"),
            "--graph",
            "partite"
        ]),
        "MissingParts"
    );
}

#[test]
fn domain_errors_exit_one() {
    assert_eq!(
        domain_error(&["pieces", "--forest", &fixture("forest.json")]),
        "NotATree"
    );
    assert_eq!(
        domain_error(&[
            "expand",
            "--forbid",
            &fixture("two_path.json"),
            "--input",
            &fixture("v2.json")
        ]),
        "UnsupportedVersion"
    );
    assert_eq!(
        domain_error(&[
            "expand",
            "--forbid",
            &fixture("two_path.json"),
            "--input",
            &fixture("path.json")
        ]),
        "NotFFree"
    );
    assert_eq!(
        domain_error(&["pieces", "--forest", "/nonexistent.json"]),
        "Io"
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bogus"]).0, 2);
    assert_eq!(run(&["pieces"]).0, 2);
    assert_eq!(run(&["pieces", "--forest", "x", "--unknown"]).0, 2);
    assert_eq!(
        run(&[
            "verify-arrow",
            "--c",
            "x",
            "--b",
            "y",
            "--a",
            "z",
            "-r",
            "two"
        ])
        .0,
        2
    );
}

#[test]
fn identical_inputs_identical_output() {
    let args = [
        "expand",
        "--forbid",
        &fixture("two_path.json"),
        "--input",
        &fixture("edge.json"),
    ];
    let args: Vec<&str> = args.iter().map(|s| s.as_ref()).collect();
    assert_eq!(run(&args), run(&args));
}

#[test]
fn fixtures_round_trip() {
    for entry in std::fs::read_dir(dir("fixtures")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let Ok(l) = parse_structure(&text) else {
            continue;
        };
        let back = treeramsey::io::structure_value(&l.structure, l.root, l.parts.as_deref());
        let again = parse_structure(&back.to_string()).unwrap();
        assert_eq!(again.structure, l.structure, "{}", path.display());
    }
}

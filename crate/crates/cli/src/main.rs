//! `treeramsey` command line tool. Results go to stdout as JSON (DOT for
//! `viz`), logs to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use treeramsey::dot::{emit_dot, GraphKind};
use treeramsey::expansion::{
    free_amalgam, tuple_trace, Certificate, ExpandedContext, MembershipVerdict,
};
use treeramsey::io::{
    parse_context_parts, parse_map, parse_structure, resolve_map, structure_value, Loaded,
};
use treeramsey::ramsey::{
    find_partner_p, partite_construction, partite_lemma, Construction, PartiteStructure,
    DEFAULT_MAX_SIZE,
};
use treeramsey::verify::{
    arrow_check, run_property_suite, verify_arrow, ArrowInstance, Fault, DEFAULT_BUDGET,
};
use treeramsey::{Error, Signature, Structure};

#[derive(Parser)]
#[command(
    name = "treeramsey",
    version,
    about = "Forbidden tree classes, canonical expansions and Ramsey witnesses"
)]
struct Cli {
    /// Suppress log output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the pieces of the forbidden trees and their classes.
    Pieces {
        #[arg(long)]
        forest: PathBuf,
    },
    /// Canonical expansion of a structure.
    Expand {
        #[arg(long, num_args = 1.., required = true)]
        forbid: Vec<PathBuf>,
        #[arg(long)]
        input: PathBuf,
    },
    /// Decide membership of an expanded structure in the class.
    Member {
        #[arg(long, num_args = 1.., required = true)]
        forbid: Vec<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// A canonical superstructure of a member.
    Canonize {
        #[arg(long, num_args = 1.., required = true)]
        forbid: Vec<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Free amalgam of two structures over a common substructure.
    Amalgamate {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long = "embed-left")]
        embed_left: String,
        #[arg(long = "embed-right")]
        embed_right: String,
        /// Forbidden trees; without them the class is unrestricted.
        #[arg(long, num_args = 1..)]
        forbid: Vec<PathBuf>,
    },
    /// Build the witness `E` for a rectified structure.
    PartiteLemma {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Part map `b-element:a-element,...`.
        #[arg(long)]
        parts: String,
        #[arg(short = 'r')]
        r: u64,
    },
    /// Run the partite construction.
    Construct {
        #[arg(long, num_args = 1.., required = true)]
        forbid: Vec<PathBuf>,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(short = 'r')]
        r: u64,
        /// Ordered base structure with `P -> (B*)^{A*}_r`; searched for when absent.
        #[arg(long)]
        p: Option<PathBuf>,
        #[arg(long = "max-size")]
        max_size: Option<u64>,
    },
    /// Exhaustive check of `C -> (B)^A_r`.
    VerifyArrow {
        #[arg(long)]
        c: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(short = 'r')]
        r: u64,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run a named property suite.
    Suite {
        #[arg(long)]
        name: String,
        #[arg(long)]
        scale: Option<usize>,
        /// Inject a corruption: flip-tau, delete-tuple or break-order.
        #[arg(long)]
        fault: Option<String>,
    },
    /// DOT rendering of a structure.
    Viz {
        #[arg(long)]
        input: PathBuf,
        /// incidence, gaifman or partite.
        #[arg(long)]
        graph: String,
    },
}

/// Errors reported as a JSON object with exit code 1.
struct Failure {
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

type Out = std::result::Result<String, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        kind: "Io".into(),
        message: format!("{}: {e}", path.display()),
    })
}

fn load(path: &Path) -> std::result::Result<Loaded, Failure> {
    Ok(parse_structure(&read(path)?)?)
}

/// Forbidden trees from context files or single-tree structure files.
fn load_forbidden(
    paths: &[PathBuf],
) -> std::result::Result<(Arc<Signature>, Vec<Structure>), Failure> {
    let mut sigma: Option<Arc<Signature>> = None;
    let mut trees = Vec::new();
    for path in paths {
        let text = read(path)?;
        let value: Value = serde_json::from_str(&text).map_err(Error::from)?;
        let (sig, mut found) = if value.get("sigma").is_some() {
            parse_context_parts(&text)?
        } else {
            let l = parse_structure(&text)?;
            let s = l.structure;
            if s.is_ordered() || s.sig().expansion_ids().next().is_some() {
                return Err(
                    Error::SignatureMismatch("forbidden trees are base structures".into()).into(),
                );
            }
            (s.sig().clone(), vec![s])
        };
        match &sigma {
            None => sigma = Some(sig),
            Some(s0) if **s0 == *sig => {}
            Some(_) => {
                return Err(Error::SignatureMismatch(format!(
                    "{} uses another signature",
                    path.display()
                ))
                .into())
            }
        }
        trees.append(&mut found);
    }
    let sigma = sigma.ok_or(Error::EmptyInput)?;
    let trees = trees
        .into_iter()
        .map(|t| t.lift(sigma.clone()))
        .collect::<treeramsey::Result<Vec<_>>>()?;
    Ok((sigma, trees))
}

fn context(paths: &[PathBuf]) -> std::result::Result<ExpandedContext, Failure> {
    let (sigma, trees) = load_forbidden(paths)?;
    Ok(ExpandedContext::new(sigma, trees)?)
}

/// Move `s` into the context's expanded signature, ordered or not as `s` is.
fn expanded(ctx: &ExpandedContext, s: &Structure) -> treeramsey::Result<Structure> {
    if s.is_ordered() {
        s.lift(ctx.ordered_signature())
    } else {
        s.lift(ctx.expanded_signature().clone())
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes")
}

fn sv(s: &Structure) -> Value {
    structure_value(s, None, None)
}

fn partite_value(x: &PartiteStructure) -> Value {
    let names: Vec<String> = x
        .parts
        .iter()
        .map(|&p| x.index.name(p).to_string())
        .collect();
    structure_value(&x.carrier, None, Some(&names))
}

fn certificate_value(ctx: &ExpandedContext, a: &Structure, c: &Certificate) -> Value {
    match c {
        Certificate::Witness { structure, element } => json!({
            "kind": "Witness", "structure": sv(structure), "element": structure.name(*element),
        }),
        Certificate::Superstructure(s) => json!({ "kind": "Superstructure", "structure": sv(s) }),
        Certificate::ForbiddenSingleton { tree, cut } => json!({
            "kind": "ForbiddenSingleton", "tree": tree, "cut": ctx.forbidden()[*tree].name(*cut),
        }),
        Certificate::ForbiddenHom { tree, map } => json!({
            "kind": "ForbiddenHom", "tree": tree,
            "map": map.iter().map(|&x| a.name(x)).collect::<Vec<_>>(),
        }),
        Certificate::MissingMark { class, piece } => json!({
            "kind": "MissingMark", "class": ctx.classes()[*class].id, "piece": piece,
        }),
        Certificate::NoWitness { candidates } => {
            json!({ "kind": "NoWitness", "candidates": candidates })
        }
        Certificate::BoundExhausted { bound, next_size } => {
            json!({ "kind": "BoundExhausted", "bound": bound, "next_size": next_size })
        }
        Certificate::Element { element, verdict } => json!({
            "kind": "Element", "element": a.name(*element), "verdict": verdict_value(ctx, &a.induced(&[*element]), verdict),
        }),
        Certificate::Trace {
            symbol,
            tuple,
            verdict,
        } => json!({
            "kind": "Trace", "symbol": a.sig().symbol(*symbol).name,
            "tuple": tuple.iter().map(|&x| a.name(x)).collect::<Vec<_>>(),
            "verdict": match tuple_trace(a, *symbol, tuple) {
                Ok(t) => verdict_value(ctx, &t, verdict),
                Err(_) => json!({ "status": verdict.status }),
            },
        }),
        Certificate::NotCanonical(s) => json!({ "kind": "NotCanonical", "structure": sv(s) }),
    }
}

fn verdict_value(ctx: &ExpandedContext, a: &Structure, v: &MembershipVerdict) -> Value {
    json!({ "status": v.status, "certificate": certificate_value(ctx, a, &v.certificate) })
}

fn pieces(forest: &Path) -> Out {
    let ctx = context(&[forest.to_path_buf()])?;
    let pieces: Vec<Value> = ctx
        .pieces()
        .iter()
        .map(|p| {
            json!({
                "tree": p.tree,
                "cut": ctx.forbidden()[p.tree].name(p.cut),
                "class": ctx.classes()[p.class].id,
                "piece": structure_value(&p.rooted.structure, Some(p.rooted.root), None),
            })
        })
        .collect();
    let classes: Vec<Value> = ctx
        .classes()
        .iter()
        .map(|c| json!({ "id": c.id, "pieces": c.pieces, "representatives": c.representatives }))
        .collect();
    Ok(pretty(&json!({ "pieces": pieces, "classes": classes })))
}

fn expand(forbid: &[PathBuf], input: &Path) -> Out {
    let ctx = context(forbid)?;
    let a = load(input)?.structure;
    let base = if a.is_ordered() {
        a.lift(Arc::new(ctx.sigma().with_order(true)))?
    } else {
        a.lift(ctx.sigma().clone())?
    };
    let e = ctx.canonical_expansion(&base)?;
    let e = if a.is_ordered() {
        e.lift(ctx.ordered_signature())?
    } else {
        e
    };
    Ok(pretty(&sv(&e)))
}

fn member(forbid: &[PathBuf], input: &Path, bound: Option<usize>) -> Out {
    let ctx = context(forbid)?;
    let a = expanded(&ctx, &load(input)?.structure)?;
    let v = ctx.is_in_c(&a, bound.unwrap_or_else(|| ctx.default_bound()))?;
    Ok(pretty(&verdict_value(&ctx, &a, &v)))
}

fn canonize(forbid: &[PathBuf], input: &Path, bound: Option<usize>) -> Out {
    let ctx = context(forbid)?;
    let a = expanded(&ctx, &load(input)?.structure)?;
    Ok(pretty(&sv(&ctx.canonize(
        &a,
        bound.unwrap_or_else(|| ctx.default_bound()),
    )?)))
}

fn amalgamate(
    base: &Path,
    left: &Path,
    right: &Path,
    el: &str,
    er: &str,
    forbid: &[PathBuf],
) -> Out {
    let a0 = load(base)?.structure;
    let ctx = if forbid.is_empty() {
        let sig = a0.sig();
        let sigma = Signature::base(
            sig.base_ids()
                .map(|id| (sig.symbol(id).name.clone(), sig.arity(id))),
        )?;
        ExpandedContext::new(sigma, Vec::new())?
    } else {
        context(forbid)?
    };
    let a = expanded(&ctx, &a0)?;
    let b1 = expanded(&ctx, &load(left)?.structure)?;
    let b2 = expanded(&ctx, &load(right)?.structure)?;
    let f1 = resolve_map(&parse_map(el)?, &a, &b1)?;
    let f2 = resolve_map(&parse_map(er)?, &a, &b2)?;
    let am = free_amalgam(&a, &b1, &b2, &f1, &f2, &ctx, ctx.default_bound())?;
    let names = |g: &[usize], from: &Structure| -> Value {
        from.names()
            .iter()
            .zip(g)
            .map(|(n, &y)| (n.clone(), Value::String(am.c.name(y).to_string())))
            .collect()
    };
    Ok(pretty(&json!({
        "amalgam": sv(&am.c),
        "g_left": names(&am.g1, &b1),
        "g_right": names(&am.g2, &b2),
        "membership": verdict_value(&ctx, &am.c, &am.verdict),
    })))
}

fn partite_lemma_cmd(a_path: &Path, b_path: &Path, parts: &str, r: u64) -> Out {
    let b = load(b_path)?.structure;
    let a = load(a_path)?.structure.lift(b.sig().clone())?;
    let map = resolve_map(&parse_map(parts)?, &b, &a)?;
    let b = PartiteStructure::new(b, map, a.clone())?;
    let lemma = partite_lemma(&a, &b, r, DEFAULT_MAX_SIZE)?;
    let a_parts: Vec<usize> = (0..a.len()).collect();
    let inst = ArrowInstance::partite(&lemma.e, &b, &a, &a_parts)?;
    let report = arrow_check(&inst, r, DEFAULT_BUDGET);
    let levels: Vec<Value> = lemma
        .levels
        .iter()
        .map(|l| json!({ "part": a.name(l.part), "b_size": l.b_size, "colours": l.colours, "e_size": l.e_size }))
        .collect();
    Ok(pretty(&json!({
        "levels": levels,
        "e": partite_value(&lemma.e),
        "copies": lemma.copy_count().to_string(),
        "arrow": report,
    })))
}

fn construction_value(con: &Construction, partner: Option<Value>) -> Value {
    let p_names = |m: &[usize]| -> Vec<&str> { m.iter().map(|&x| con.p.name(x)).collect() };
    let steps: Vec<Value> = con
        .steps
        .iter()
        .map(|s| match &s.built {
            None => json!({ "k": s.k, "e_k": p_names(&s.e_k), "skipped": true, "size": s.size }),
            Some(b) => json!({
                "k": s.k, "e_k": p_names(&s.e_k), "skipped": false, "size": s.size,
                "d_size": b.d.len(), "b_k_size": b.lemma.b.len(), "e_size": b.lemma.e.len(),
                "copies": b.copies.len(),
            }),
        })
        .collect();
    let distinguished: Vec<Vec<&str>> = con
        .distinguished
        .iter()
        .map(|c| c.iter().map(|&x| con.c0.carrier.name(x)).collect())
        .collect();
    let mut v = json!({
        "p": sv(&con.p),
        "r": con.r,
        "b_star_copies": con.b_star_copies.len(),
        "a_star_copies": con.a_star_copies.len(),
        "c0": partite_value(&con.c0),
        "distinguished": distinguished,
        "steps": steps,
        "result": partite_value(&con.result),
    });
    if let Some(p) = partner {
        v["partner"] = p;
    }
    v
}

fn construct(
    forbid: &[PathBuf],
    a: &Path,
    b: &Path,
    r: u64,
    p: Option<&Path>,
    max_size: Option<u64>,
) -> Out {
    let ctx = context(forbid)?;
    let osig = ctx.ordered_signature();
    let a = load(a)?.structure.lift(osig.clone())?;
    let b = load(b)?.structure.lift(osig)?;
    let psig = Arc::new(ctx.sigma().with_order(true));
    let (p, partner) = match p {
        Some(path) => (load(path)?.structure.lift(psig)?, None),
        None => {
            let a_star = a.ordered_base_reduct().lift(psig.clone())?;
            let b_star = b.ordered_base_reduct().lift(psig)?;
            let found = find_partner_p(&a_star, &b_star, r, DEFAULT_BUDGET, b_star.len() + 6)?;
            log::info!(
                "P found with {} elements after {} candidates",
                found.p.len(),
                found.candidates_tried
            );
            let report = serde_json::to_value(&found.report).expect("report serializes");
            (
                found.p,
                Some(json!({ "candidates_tried": found.candidates_tried, "arrow": report })),
            )
        }
    };
    let con = partite_construction(&ctx, &a, &b, &p, r, max_size.unwrap_or(DEFAULT_MAX_SIZE))?;
    Ok(pretty(&construction_value(&con, partner)))
}

fn verify_arrow_cmd(c: &Path, b: &Path, a: &Path, r: u64, budget: Option<u64>) -> Out {
    let c = load(c)?.structure;
    let b = load(b)?.structure.lift(c.sig().clone())?;
    let a = load(a)?.structure.lift(c.sig().clone())?;
    let report = verify_arrow(&c, &b, &a, r, budget.unwrap_or(DEFAULT_BUDGET))?;
    Ok(pretty(
        &serde_json::to_value(&report).expect("report serializes"),
    ))
}

fn suite(name: &str, scale: Option<usize>, fault: Option<&str>) -> Out {
    let fault = match fault {
        None => None,
        Some(f) => Some(
            serde_json::from_value::<Fault>(Value::String(f.to_string()))
                .map_err(|_| Error::Format(format!("unknown fault `{f}`")))?,
        ),
    };
    let scale = scale.unwrap_or_else(|| treeramsey::verify::suites::default_scale(name));
    let report = run_property_suite(name, scale, fault)?;
    Ok(pretty(
        &serde_json::to_value(&report).expect("report serializes"),
    ))
}

fn viz(input: &Path, graph: &str) -> Out {
    let kind: GraphKind = graph.parse()?;
    let l = load(input)?;
    let dot = match l.parts {
        Some(names) => {
            // index elements in order of first appearance
            let mut index: Vec<String> = Vec::new();
            for n in &names {
                if !index.contains(n) {
                    index.push(n.clone());
                }
            }
            let map: Vec<usize> = names
                .iter()
                .map(|n| index.iter().position(|m| m == n).unwrap())
                .collect();
            emit_dot(&l.structure, kind, Some((&map, &index)))?
        }
        None => emit_dot(&l.structure, kind, None)?,
    };
    Ok(dot.trim_end().to_string())
}

/// Write to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn run(cli: Cli) -> Out {
    match cli.command {
        Command::Pieces { forest } => pieces(&forest),
        Command::Expand { forbid, input } => expand(&forbid, &input),
        Command::Member {
            forbid,
            input,
            bound,
        } => member(&forbid, &input, bound),
        Command::Canonize {
            forbid,
            input,
            bound,
        } => canonize(&forbid, &input, bound),
        Command::Amalgamate {
            base,
            left,
            right,
            embed_left,
            embed_right,
            forbid,
        } => amalgamate(&base, &left, &right, &embed_left, &embed_right, &forbid),
        Command::PartiteLemma { a, b, parts, r } => partite_lemma_cmd(&a, &b, &parts, r),
        Command::Construct {
            forbid,
            a,
            b,
            r,
            p,
            max_size,
        } => construct(&forbid, &a, &b, r, p.as_deref(), max_size),
        Command::VerifyArrow { c, b, a, r, budget } => verify_arrow_cmd(&c, &b, &a, r, budget),
        Command::Suite { name, scale, fault } => suite(&name, scale, fault.as_deref()),
        Command::Viz { input, graph } => viz(&input, &graph),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut logger = env_logger::Builder::new();
    logger.filter_level(if cli.quiet {
        log::LevelFilter::Off
    } else {
        log::LevelFilter::Info
    });
    if !cli.quiet {
        logger.parse_default_env();
    }
    logger.target(env_logger::Target::Stderr).init();

    match run(cli) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(f) => {
            emit(&pretty(
                &json!({ "error": { "kind": f.kind, "message": f.message } }),
            ));
            ExitCode::from(1)
        }
    }
}

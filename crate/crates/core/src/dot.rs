//! Graphviz DOT export.
//!
//! Unary memberships are shown in element labels; tuples of higher arity
//! become box nodes (incidence) or edges (Gaifman).

use std::fmt::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graphs::gaifman_graph;
use crate::structure::Structure;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Incidence,
    Gaifman,
    Partite,
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "incidence" => Ok(GraphKind::Incidence),
            "gaifman" => Ok(GraphKind::Gaifman),
            "partite" => Ok(GraphKind::Partite),
            _ => Err(Error::Format(format!("unknown graph kind `{s}`"))),
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn element_label(a: &Structure, x: usize) -> String {
    let marks: Vec<&str> = (0..a.sig().len())
        .filter(|&id| a.sig().arity(id) == 1 && a.contains(id, &[x]))
        .map(|id| a.sig().symbol(id).name.as_str())
        .collect();
    if marks.is_empty() {
        a.name(x).to_string()
    } else {
        format!("{} [{}]", a.name(x), marks.join(","))
    }
}

fn element_node(out: &mut String, a: &Structure, x: usize, indent: &str) {
    writeln!(
        out,
        "{indent}e{x} [shape=circle, label={}];",
        quote(&element_label(a, x))
    )
    .unwrap();
}

/// Tuples of arity at least two, numbered per symbol from 0.
fn wide_tuples(a: &Structure) -> Vec<(String, &Vec<usize>)> {
    let mut out = Vec::new();
    for id in 0..a.sig().len() {
        if a.sig().arity(id) < 2 {
            continue;
        }
        let name = &a.sig().symbol(id).name;
        for (i, t) in a.relation(id).iter().enumerate() {
            out.push((format!("{name}#{i}"), t));
        }
    }
    out
}

/// Render `a` as DOT. `parts` gives the index element of every element and
/// is required for [`GraphKind::Partite`]; clusters follow the order of `index_names`.
pub fn emit_dot(
    a: &Structure,
    kind: GraphKind,
    parts: Option<(&[usize], &[String])>,
) -> Result<String> {
    let mut out = String::new();
    match kind {
        GraphKind::Incidence => {
            out.push_str("graph incidence {\n");
            for x in 0..a.len() {
                element_node(&mut out, a, x, "  ");
            }
            for (i, (label, t)) in wide_tuples(a).into_iter().enumerate() {
                writeln!(out, "  t{i} [shape=box, label={}];", quote(&label)).unwrap();
                for (pos, &x) in t.iter().enumerate() {
                    writeln!(out, "  t{i} -- e{x} [label=\"{pos}\"];").unwrap();
                }
            }
        }
        GraphKind::Gaifman | GraphKind::Partite => {
            out.push_str(if kind == GraphKind::Gaifman {
                "graph gaifman {\n"
            } else {
                "graph partite {\n"
            });
            if kind == GraphKind::Partite {
                let (map, index_names) = parts.ok_or(Error::MissingParts)?;
                if map.len() != a.len() {
                    return Err(Error::MissingParts);
                }
                for (p, name) in index_names.iter().enumerate() {
                    writeln!(out, "  subgraph cluster_{p} {{").unwrap();
                    writeln!(out, "    label={};", quote(name)).unwrap();
                    for x in (0..a.len()).filter(|&x| map[x] == p) {
                        element_node(&mut out, a, x, "    ");
                    }
                    out.push_str("  }\n");
                }
            } else {
                for x in 0..a.len() {
                    element_node(&mut out, a, x, "  ");
                }
            }
            for (x, ns) in gaifman_graph(a).iter().enumerate() {
                for &y in ns.iter().filter(|&&y| y > x) {
                    writeln!(out, "  e{x} -- e{y};").unwrap();
                }
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Signature;

    #[test]
    fn empty_structure() {
        let a = Structure::with_size(Signature::base([("E", 2)]).unwrap(), 0);
        assert_eq!(
            emit_dot(&a, GraphKind::Incidence, None).unwrap(),
            "graph incidence {\n}\n"
        );
    }

    #[test]
    fn partite_needs_parts() {
        let a = Structure::with_size(Signature::base([("E", 2)]).unwrap(), 1);
        assert!(matches!(
            emit_dot(&a, GraphKind::Partite, None),
            Err(Error::MissingParts)
        ));
        let names = vec!["p".to_string()];
        let dot = emit_dot(&a, GraphKind::Partite, Some((&[0], &names))).unwrap();
        assert!(dot.contains("subgraph cluster_0"));
    }
}

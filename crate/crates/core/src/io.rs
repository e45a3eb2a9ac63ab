//! JSON file formats for structures and contexts.
//!
//! A structure file looks like
//!
//! ```json
//! {"v": 1, "signature": {"E": 2}, "tau": ["S0", "S1"],
//!  "domain": ["a", "b"], "relations": {"E": [["a", "b"]], "S0": [["a"]]},
//!  "order": ["a", "b"]}
//! ```
//!
//! with optional `"root"` (an element name) and `"parts"` (element name ->
//! index element name). A context file holds the base signature and the
//! forbidden trees: `{"v": 1, "sigma": {...}, "forbidden": [{"domain": [...],
//! "relations": {...}}]}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::expansion::ExpandedContext;
use crate::signature::Signature;
use crate::structure::{RawStructure, Structure};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    v: u64,
    signature: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tau: Vec<String>,
    domain: Vec<String>,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parts: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeEntry {
    domain: Vec<String>,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextFile {
    v: u64,
    sigma: BTreeMap<String, usize>,
    forbidden: Vec<TreeEntry>,
}

/// A structure read from a file with its optional extras.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub structure: Structure,
    pub root: Option<usize>,
    /// Name of the index element of every element, in domain order.
    pub parts: Option<Vec<String>>,
}

fn check_version(text: &str) -> Result<()> {
    let v: Value = serde_json::from_str(text)?;
    match v.get("v").and_then(Value::as_u64) {
        Some(FORMAT_VERSION) => Ok(()),
        Some(other) => Err(Error::UnsupportedVersion(other)),
        None => Err(Error::Format("missing version field \"v\"".into())),
    }
}

pub fn parse_structure(text: &str) -> Result<Loaded> {
    check_version(text)?;
    let f: StructureFile = serde_json::from_str(text)?;
    let sig = Arc::new(Signature::new(
        f.signature.clone(),
        f.tau.clone(),
        f.order.is_some(),
    )?);
    let raw = RawStructure {
        domain: f.domain,
        relations: f.relations,
        order: f.order,
    };
    let structure = Structure::validate(&raw, sig)?;
    let root = f.root.map(|r| structure.element(&r)).transpose()?;
    let parts = match f.parts {
        None => None,
        Some(map) => {
            let mut out = Vec::with_capacity(structure.len());
            for name in structure.names() {
                out.push(
                    map.get(name)
                        .cloned()
                        .ok_or_else(|| Error::Format(format!("no part for `{name}`")))?,
                );
            }
            if map.len() != structure.len() {
                return Err(Error::Format("parts map names unknown elements".into()));
            }
            Some(out)
        }
    };
    Ok(Loaded {
        structure,
        root,
        parts,
    })
}

fn to_file(s: &Structure, root: Option<usize>, parts: Option<&[String]>) -> StructureFile {
    let sig = s.sig();
    let raw = s.to_raw();
    StructureFile {
        v: FORMAT_VERSION,
        signature: sig
            .base_ids()
            .map(|id| (sig.symbol(id).name.clone(), sig.arity(id)))
            .collect(),
        tau: sig
            .expansion_ids()
            .map(|id| sig.symbol(id).name.clone())
            .collect(),
        domain: raw.domain,
        relations: raw.relations,
        order: raw.order,
        root: root.map(|r| s.name(r).to_string()),
        parts: parts.map(|p| s.names().iter().cloned().zip(p.iter().cloned()).collect()),
    }
}

pub fn structure_value(s: &Structure, root: Option<usize>, parts: Option<&[String]>) -> Value {
    serde_json::to_value(to_file(s, root, parts)).expect("structure serializes")
}

pub fn structure_to_string(s: &Structure) -> String {
    serde_json::to_string_pretty(&to_file(s, None, None)).expect("structure serializes")
}

/// Base signature and forbidden trees.
pub fn parse_context_parts(text: &str) -> Result<(Arc<Signature>, Vec<Structure>)> {
    check_version(text)?;
    let f: ContextFile = serde_json::from_str(text)?;
    let sigma = Signature::base(f.sigma)?;
    let forbidden = f
        .forbidden
        .into_iter()
        .map(|t| {
            Structure::validate(
                &RawStructure {
                    domain: t.domain,
                    relations: t.relations,
                    order: None,
                },
                sigma.clone(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sigma, forbidden))
}

pub fn parse_context(text: &str) -> Result<ExpandedContext> {
    let (sigma, forbidden) = parse_context_parts(text)?;
    ExpandedContext::new(sigma, forbidden)
}

pub fn context_value(sigma: &Signature, forbidden: &[Structure]) -> Value {
    let f = ContextFile {
        v: FORMAT_VERSION,
        sigma: sigma
            .base_ids()
            .map(|id| (sigma.symbol(id).name.clone(), sigma.arity(id)))
            .collect(),
        forbidden: forbidden
            .iter()
            .map(|s| {
                let raw = s.to_raw();
                TreeEntry {
                    domain: raw.domain,
                    relations: raw.relations,
                }
            })
            .collect(),
    };
    serde_json::to_value(f).expect("context serializes")
}

/// Parse `a:x,b:y` into pairs.
pub fn parse_map(text: &str) -> Result<Vec<(String, String)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (l, r) = pair
                .split_once(':')
                .or_else(|| pair.split_once("->"))
                .ok_or_else(|| Error::Format(format!("map entry `{pair}` is not `from:to`")))?;
            Ok((l.trim().to_string(), r.trim().to_string()))
        })
        .collect()
}

/// A map between two structures given by element names; every element of
/// `from` must be covered.
pub fn resolve_map(
    pairs: &[(String, String)],
    from: &Structure,
    to: &Structure,
) -> Result<Vec<usize>> {
    let mut map = vec![usize::MAX; from.len()];
    for (l, r) in pairs {
        map[from.element(l)?] = to.element(r)?;
    }
    if let Some(x) = map.iter().position(|&y| y == usize::MAX) {
        return Err(Error::Format(format!(
            "map does not cover `{}`",
            from.name(x)
        )));
    }
    Ok(map)
}

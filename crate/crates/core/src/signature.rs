//! Relational signatures split into a base part and a unary expansion part.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of a relation symbol inside its [`Signature`].
pub type SymbolId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
    /// `true` for the unary symbols added by the canonical expansion.
    pub expansion: bool,
}

/// A finite relational signature, optionally carrying the order symbol.
///
/// Base symbols come first, sorted by name; expansion symbols follow in the
/// order they were given. Symbol ids are positions in this list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
    ordered: bool,
}

impl Signature {
    pub fn new<S: Into<String>>(
        base: impl IntoIterator<Item = (S, usize)>,
        expansion: impl IntoIterator<Item = S>,
        ordered: bool,
    ) -> Result<Self> {
        let mut base: Vec<(String, usize)> = base.into_iter().map(|(n, a)| (n.into(), a)).collect();
        base.sort();
        let mut symbols: Vec<Symbol> = base
            .into_iter()
            .map(|(name, arity)| Symbol {
                name,
                arity,
                expansion: false,
            })
            .collect();
        for name in expansion {
            symbols.push(Symbol {
                name: name.into(),
                arity: 1,
                expansion: true,
            });
        }
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if s.arity == 0 {
                return Err(Error::InvalidSignature(format!(
                    "symbol `{}` has arity 0",
                    s.name
                )));
            }
            if s.name.is_empty() {
                return Err(Error::InvalidSignature("empty symbol name".into()));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::InvalidSignature(format!(
                    "duplicate symbol `{}`",
                    s.name
                )));
            }
        }
        Ok(Signature { symbols, ordered })
    }

    /// A base-only, unordered signature.
    pub fn base<S: Into<String>>(
        symbols: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::new(
            symbols,
            std::iter::empty::<S>(),
            false,
        )?))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id]
    }

    pub fn arity(&self, id: SymbolId) -> usize {
        self.symbols[id].arity
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn base_ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.expansion)
            .map(|(i, _)| i)
    }

    pub fn expansion_ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| s.expansion)
            .map(|(i, _)| i)
    }

    pub fn base_len(&self) -> usize {
        self.symbols.iter().filter(|s| !s.expansion).count()
    }

    /// The base part alone, unordered.
    pub fn base_part(&self) -> Signature {
        Signature {
            symbols: self
                .symbols
                .iter()
                .filter(|s| !s.expansion)
                .cloned()
                .collect(),
            ordered: false,
        }
    }

    /// Same symbols, with or without the order symbol.
    pub fn with_order(&self, ordered: bool) -> Signature {
        Signature {
            symbols: self.symbols.clone(),
            ordered,
        }
    }

    /// Append unary expansion symbols.
    pub fn expand<S: Into<String>>(&self, names: impl IntoIterator<Item = S>) -> Result<Signature> {
        let base = self
            .symbols
            .iter()
            .filter(|s| !s.expansion)
            .map(|s| (s.name.clone(), s.arity));
        let expansion = self
            .symbols
            .iter()
            .filter(|s| s.expansion)
            .map(|s| s.name.clone())
            .chain(names.into_iter().map(Into::into));
        Signature::new(base, expansion, self.ordered)
    }

    /// Keep only the named symbols; the order survives iff `keep_order`.
    pub fn restrict(&self, keep: &BTreeSet<SymbolId>, keep_order: bool) -> Signature {
        Signature {
            symbols: self
                .symbols
                .iter()
                .enumerate()
                .filter(|(i, _)| keep.contains(i))
                .map(|(_, s)| s.clone())
                .collect(),
            ordered: keep_order,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_symbols_sorted_and_expansion_appended() {
        let sig = Signature::new([("R", 2), ("A", 1)], ["S0"], false).unwrap();
        let names: Vec<_> = sig.symbols().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["A", "R", "S0"]);
        assert_eq!(sig.base_ids().collect::<Vec<_>>(), [0, 1]);
        assert_eq!(sig.expansion_ids().collect::<Vec<_>>(), [2]);
    }

    #[test]
    fn rejects_duplicates_and_zero_arity() {
        assert!(Signature::new([("R", 2)], ["R"], false).is_err());
        assert!(Signature::new([("R", 0)], Vec::<&str>::new(), false).is_err());
    }
}

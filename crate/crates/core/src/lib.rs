//! Finite relational structures with forbidden homomorphic images of trees.
//!
//! The crate computes the canonical unary expansion of a class `Forbh(F)` for
//! a finite set `F` of relational trees, decides membership in the expanded
//! class, builds free amalgams, and runs the partite construction that yields
//! Ramsey witnesses for the ordered expanded class. Exhaustive brute-force
//! oracles in [`verify`] check each construction at small scale.

pub mod canon;
pub mod dot;
pub mod error;
pub mod expansion;
pub mod graphs;
pub mod hom;
pub mod io;
pub mod morphism;
pub mod ramsey;
pub mod signature;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
pub use signature::{Signature, Symbol, SymbolId};
pub use structure::{Partition, RawStructure, RootedStructure, Structure};

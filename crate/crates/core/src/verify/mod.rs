//! Brute-force oracles: exhaustive arrow checking, naive re-derivations of
//! the expansion and of membership, construction replay, and the property
//! suites with fault injection.

pub mod arrow;
pub mod enumerate;
pub mod oracle;
pub mod replay;
pub mod suites;

pub use arrow::{
    arrow_check, reverify, verify_arrow, ArrowInstance, ArrowOutcome, ArrowReport, DEFAULT_BUDGET,
};
pub use oracle::{
    brute_membership, check_expansion_oracle, expansion_diff, naive_expansion, ExpansionDiff,
};
pub use replay::{replay, ReplayOutcome};
pub use suites::{run_property_suite, suite_faults, Fault, SuiteReport, SUITES};

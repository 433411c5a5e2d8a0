//! Indeterminate-length quantum codes.
//!
//! Codewords sit in zero-extended form (zef) at the start of a fixed
//! register of `l_max` qubits. This crate builds such codes and their length
//! observable, checks the quantum Kraft-McMillan inequality and the
//! prefix-free condition, condenses strings of codewords (directly as an
//! isometry, and step by step on a reversible pointer machine), and runs the
//! truncation-based compression experiments and entropy/length identities.

pub mod bits;
pub mod codes;
pub mod compress;
pub mod condense;
pub mod error;
pub mod lengths;
pub mod machine;
pub mod qstate;
pub mod random;

pub use bits::BitString;
pub use error::{Error, Result};
pub use qstate::{DensityMatrix, SparseState};

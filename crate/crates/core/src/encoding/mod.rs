//! Propositional encoding of bounded resilient supervisor synthesis.

pub mod cnf;
pub mod constraints;
pub mod formula;
pub mod varmap;

use thiserror::Error;

use crate::supervision::ModelError;

pub use cnf::{define, emit_dimacs, emit_qdimacs, parse_dimacs, to_cnf, Cnf, Counter, FreshVars, Qbf, Quantifier};
pub use constraints::{allocate_vars, Encoder};
pub use formula::{Formula, Var};
pub use varmap::{VarDesc, VarMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodingError {
    #[error("variable {0} has no value")]
    Unassigned(Var),
    #[error("DIMACS line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
    #[error("bounds must be positive, got n = {n}, m = {m}")]
    BadBounds { n: usize, m: usize },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

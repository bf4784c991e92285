//! SAT backend, model decoding, attacker search and synthesis loops.

pub mod bmc;
pub mod decode;
pub mod instance;
pub mod sat;
pub mod synth;

use thiserror::Error;

use crate::encoding::EncodingError;
use crate::supervision::ModelError;

pub use bmc::{bmc_depth, find_attacker, AttackSearch, SearchMethod};
pub use decode::{decode_attacker, decode_supervisor};
pub use instance::SynthesisInstance;
pub use sat::{sat_solve, SatConfig, SatError, SatResult, SolverKind};
pub use synth::{
    bound_schedule, synthesize_cegis, synthesize_direct, verify_supervisor, BoundStats, Method, SynthesisOptions,
    SynthesisOutcome, Verification,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot decode model: {0}")]
    Decode(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("covert attacker semantics are only supported for checking a fixed attacker")]
    CovertUnsupported,
    #[error("no verified candidate after {iterations} iterations ({counterexamples} counterexamples)")]
    IterationLimit { iterations: usize, counterexamples: usize },
}

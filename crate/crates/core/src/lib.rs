//! Synthesis of supervisors that stay safe under actuator attacks.

pub mod attack;
pub mod automata;
pub mod cli;
pub mod encoding;
pub mod format;
pub mod solve;
pub mod supervision;

//! SMT-LIB emission, external solver runs and model parsing.

mod model;
mod smtlib;
mod solver;
mod validity;

pub use model::{parse_model, symmetrize, Model, ModelError};
pub use smtlib::{emit_smtlib, smt_sort};
pub use solver::{run_solver, solve_system, SolverConfig, SolverResult, Verdict, SOLVER_ENV, Z3_ARGS};
pub use validity::{check_valid, check_valid_batch, counter_model, recheck_model, RecheckReport, Validity};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("cannot emit `{0}`: only pure data formulas can be sent to a solver")]
    Unsupported(String),
    #[error("solver executable `{0}` not found")]
    SolverMissing(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("solver failed: {0}")]
    Solver(String),
}

impl From<std::io::Error> for BackendError {
    fn from(e: std::io::Error) -> Self {
        BackendError::Io(e.to_string())
    }
}

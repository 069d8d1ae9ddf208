//! Ashcroft invariants read back from solutions, and their independent checks.

mod assemble;
mod explicit;
mod export;
mod triples;

pub use assemble::{assemble_invariant, AshcroftInvariant, Entry};
pub use explicit::{
    check_invariant_explicit, explicit_reach, explicit_reach_within, Condition, ExplicitVerdict, Reach, StateSpace,
    DEFAULT_MAX_STATES,
};
pub use export::{export_sexp, export_text, import_sexp, read_invariant};
pub use triples::{
    basis_programs, check_family, check_triple, check_triples, hoare_triples, Counterexample, FamilyCheck,
    FamilyFailure, FamilyOptions, FamilyVerdict, HoareTriple, TripleKind, TripleVerdict,
};

use thiserror::Error;

use crate::backend::BackendError;
use crate::logic::LogicError;
use crate::program::ProgramError;
use crate::symmetry::SymmetryError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("incomplete model: no definition for `{0}`")]
    MissingPredicate(String),
    #[error("tuple ({0}) has no enumerated type")]
    UntypedTuple(String),
    #[error("field `{0}` is not boolean; explicit exploration needs boolean data")]
    NonBoolean(String),
    #[error("more than {0} states")]
    BudgetExceeded(usize),
    #[error("invariant file: {0}")]
    Import(String),
    #[error("invariant was built for `{found}`, not `{expected}`")]
    SpecMismatch { expected: String, found: String },
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

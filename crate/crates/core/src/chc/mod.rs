//! Constrained Horn clause encodings of invariant existence.

mod encode;
mod indicator;
mod reduce;
mod system;

pub use encode::{encode_family, encode_single, predicate_for, EncodeOptions, Encoding};
pub use indicator::{
    closure_members, distinct_process_basis, opn_classes, select_dpg, select_opn, validate_chi, ChiViolation,
};
pub use reduce::{canonical_args, symmetry_clauses, symmetry_reduce};
pub use system::{Atom, ChcSystem, Clause, ClauseKind, Head, Predicate, Slot};

use thiserror::Error;

use crate::logic::LogicError;
use crate::program::ProgramError;
use crate::symmetry::SymmetryError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChcError {
    #[error("invariant width must be at least 1")]
    ZeroWidth,
    #[error("selected types do not cover the closure: {0}")]
    IncompleteIndicator(ChiViolation),
    #[error("process/resource modeling rules violated by {0}")]
    ModelingRules(String),
    #[error("error tuple ({0}) is not generated by distinct processes")]
    ErrorNotCovered(String),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

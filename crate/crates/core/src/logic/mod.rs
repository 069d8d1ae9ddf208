//! Finite first-order structures, node terms and data formulas.

mod data;
pub(crate) mod structure;
mod term;

pub use data::{CmpOp, Expr, FieldRef, GlobalState, Sort, Value, Var, VarNamer};
pub(crate) use structure::tuples as structure_tuples;
pub use structure::{FnId, Node, PredId, Structure, StructureBuilder, Symbol, Vocabulary};
pub use term::{NodeFormula, NodeTerm};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("duplicate symbol `{0}` in vocabulary")]
    DuplicateSymbol(String),
    #[error("predicate `{0}` must have arity at least 1")]
    NullaryPredicate(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{name}` expects {expected} arguments, got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("node {0} is outside the universe")]
    NodeOutOfRange(Node),
    #[error("function `{0}` is not total")]
    PartialFunction(String),
    #[error("node variable nu{0} is not bound")]
    UnboundNodeVar(usize),
    #[error("variable `{0}` is unbound")]
    UnboundVar(String),
    #[error("field `{field}` does not exist on node {node}")]
    UnknownField { node: String, field: String },
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("formula is already primed")]
    AlreadyPrimed,
    #[error("unresolved node term in data formula; instantiate it first")]
    Unresolved,
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
}

//! Neighbourhoods, local isomorphisms, canonical labeling and quantifier-free types.

mod canon;
mod closure;
mod iso;
mod types;

pub use canon::{canonical_form, iso_from_forms, CanonicalForm};
pub use closure::{generated_nodes, generated_substructure, Substructure};
pub use iso::{automorphisms, find_embedding, find_local_isomorphism, isomorphic, locally_isomorphic, LocalIso};
pub use types::{defining_formula, representative_terms, type_key, QfType, TypeTable, Witness};

use thiserror::Error;

use crate::logic::LogicError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("type width must be at least 1")]
    ZeroWidth,
    #[error("tuple has width {got}, table has width {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("tuple realizes a type missing from the enumeration; enumeration bounds are too small")]
    UnknownType,
    #[error("neighbourhood is not generated by its marks")]
    NotGenerated,
    #[error(transparent)]
    Logic(#[from] LogicError),
}

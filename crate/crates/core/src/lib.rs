//! Inference of Ashcroft invariants for parameterized programs whose
//! topologies are locally symmetric.

pub mod backend;
pub mod chc;
pub mod invariant;
pub mod logic;
pub mod parse;
pub mod pipeline;
pub mod program;
pub mod sexp;
pub mod suite;
pub mod symmetry;

//! Benchmark programs shipped with the library.

use std::sync::Arc;

use crate::program::{ProgramError, ProgramSpec};

/// A bundled benchmark.
#[derive(Clone, Copy, Debug)]
pub struct Benchmark {
    pub name: &'static str,
    pub source: &'static str,
    /// Invariant width the benchmark is meant to be solved at.
    pub width: usize,
    /// Whether an error state is reachable.
    pub buggy: bool,
    /// Whether every field is boolean, so instances can be explored explicitly.
    pub boolean: bool,
}

impl Benchmark {
    pub fn load(&self) -> Result<Arc<ProgramSpec>, ProgramError> {
        Ok(Arc::new(ProgramSpec::parse(self.source)?))
    }
}

macro_rules! bench {
    ($name:literal, $file:literal, $k:expr, $buggy:expr, $boolean:expr) => {
        Benchmark {
            name: $name,
            source: include_str!(concat!("../suite/", $file)),
            width: $k,
            buggy: $buggy,
            boolean: $boolean,
        }
    };
}

/// All bundled benchmarks, each correct version followed by its bug variant.
pub fn bundled() -> Vec<Benchmark> {
    vec![
        bench!("simple-pipeline", "simple_pipeline.loc", 1, false, false),
        bench!("simple-pipeline-bug", "simple_pipeline_bug.loc", 1, true, false),
        bench!("ring-swap", "ring_swap.loc", 1, false, false),
        bench!("ring-swap-bug", "ring_swap_bug.loc", 1, true, false),
        bench!("ring-token", "ring_token.loc", 2, false, true),
        bench!("ring-token-bug", "ring_token_bug.loc", 2, true, true),
        bench!("star-mutex", "star_mutex.loc", 2, false, true),
        bench!("star-mutex-bug", "star_mutex_bug.loc", 2, true, true),
        bench!("line-token", "line_token.loc", 2, false, true),
        bench!("line-token-bug", "line_token_bug.loc", 2, true, true),
        bench!("star-counter", "star_counter.loc", 2, false, false),
    ]
}

/// Looks a bundled benchmark up by name.
pub fn find(name: &str) -> Option<Benchmark> {
    bundled().into_iter().find(|b| b.name == name)
}

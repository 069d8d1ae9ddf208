//! Encode, solve, recheck and read back an invariant.

use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::backend::{
    recheck_model, solve_system, symmetrize, BackendError, Model, RecheckReport, SolverConfig, Verdict,
};
use crate::chc::{encode_family, ChcError, EncodeOptions, Encoding};
use crate::invariant::{assemble_invariant, AshcroftInvariant, InvariantError};
use crate::program::ProgramSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error(transparent)]
    Chc(#[from] ChcError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

#[derive(Clone, Debug)]
pub enum Outcome {
    /// An invariant whose model passed the recheck on every clause.
    Sat(Box<AshcroftInvariant>),
    Unsat,
    /// No definite answer, or a sat answer without a checked model.
    Unknown(String),
    Timeout,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Sat(_) => "sat",
            Outcome::Unsat => "unsat",
            Outcome::Unknown(_) => "unknown",
            Outcome::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub encoding: Encoding,
    pub outcome: Outcome,
    /// Recheck of the accepted model against the unreduced system.
    pub recheck: Option<RecheckReport>,
    /// Whether the model had to be symmetrized to pass the recheck.
    pub symmetrized: bool,
    pub gen_time: Duration,
    pub solve_time: Duration,
    pub check_time: Duration,
    /// Raw solver output.
    pub transcript: String,
}

impl SolveReport {
    /// `predicates/clauses` of the solved system.
    pub fn size(&self) -> String {
        format!(
            "{}/{}",
            self.encoding.system.predicates.len(),
            self.encoding.system.clauses.len()
        )
    }
}

/// Runs the whole pipeline. A sat answer is accepted only if its model, or
/// failing that its symmetrized model, validates every clause of the
/// unreduced system.
pub fn solve_family(
    spec: &Arc<ProgramSpec>,
    k: usize,
    options: EncodeOptions,
    cfg: &SolverConfig,
) -> Result<SolveReport, PipelineError> {
    let start = Instant::now();
    let encoding = encode_family(spec, k, options)?;
    let gen_time = start.elapsed();
    tracing::debug!(
        spec = %spec.name,
        k,
        encoding = %options.label(),
        predicates = encoding.system.predicates.len(),
        clauses = encoding.system.clauses.len(),
        "encoded"
    );
    let res = solve_system(&encoding.system, cfg)?;
    tracing::debug!(verdict = %res.verdict, elapsed = ?res.elapsed, "solver finished");
    let mut report = SolveReport {
        outcome: Outcome::Unknown(String::new()),
        recheck: None,
        symmetrized: false,
        gen_time,
        solve_time: res.elapsed,
        check_time: Duration::ZERO,
        transcript: res.transcript.clone(),
        encoding,
    };
    report.outcome = match res.verdict {
        Verdict::Unsat => Outcome::Unsat,
        Verdict::Timeout => Outcome::Timeout,
        Verdict::Unknown => Outcome::Unknown("solver returned unknown".into()),
        Verdict::Error => return Err(BackendError::Solver(res.transcript.trim().to_string()).into()),
        Verdict::Sat => match res.model {
            None => Outcome::Unknown(res.model_issue.unwrap_or_else(|| "no model".into())),
            Some(model) => {
                let start = Instant::now();
                let out = accept_model(&mut report, model, cfg)?;
                report.check_time = start.elapsed();
                out
            }
        },
    };
    Ok(report)
}

fn accept_model(report: &mut SolveReport, model: Model, cfg: &SolverConfig) -> Result<Outcome, PipelineError> {
    let enc = &report.encoding;
    let rep = recheck_model(&enc.unreduced, &model, cfg)?;
    if rep.passed() {
        report.recheck = Some(rep);
        return Ok(Outcome::Sat(Box::new(assemble_invariant(enc, &model)?)));
    }
    let mut sym = model.clone();
    for p in &enc.system.predicates {
        if let Some(d) = sym.defs.get(&p.name).cloned() {
            sym.defs.insert(p.name.clone(), symmetrize(p, &d));
        }
    }
    tracing::debug!(
        failed = rep.failed.len(),
        "model failed the recheck, trying its symmetrization"
    );
    let rep2 = recheck_model(&enc.unreduced, &sym, cfg)?;
    if rep2.passed() {
        report.recheck = Some(rep2);
        report.symmetrized = true;
        return Ok(Outcome::Sat(Box::new(assemble_invariant(enc, &sym)?)));
    }
    let why = format!(
        "model failed the recheck on {} clause(s), {} undetermined",
        rep.failed.len(),
        rep.undetermined.len()
    );
    report.recheck = Some(rep);
    Ok(Outcome::Unknown(why))
}

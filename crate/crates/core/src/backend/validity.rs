use std::collections::BTreeMap;
use std::fmt::Write;

use crate::chc::{ChcSystem, Head};
use crate::logic::{Expr, Value};
use crate::sexp::{parse_all, SexpKind};

use super::model::Model;
use super::smtlib::{check_pure, smt_sort};
use super::solver::{run_raw, SolverConfig};
use super::BackendError;

/// Outcome of a validity query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid,
    /// The solver gave no definite answer.
    Undetermined(String),
}

const CHUNK: usize = 100;

fn declarations(e: &Expr) -> String {
    let mut out = String::new();
    for v in e.free_vars() {
        writeln!(out, "(declare-const {} {})", v.name, smt_sort(v.sort)).unwrap();
    }
    out
}

/// Decides validity of each formula with one solver process per chunk of
/// queries.
pub fn check_valid_batch(formulas: &[Expr], cfg: &SolverConfig) -> Result<Vec<Validity>, BackendError> {
    let mut out = vec![Validity::Undetermined("not checked".into()); formulas.len()];
    let mut pending = Vec::new();
    for (i, f) in formulas.iter().enumerate() {
        check_pure(f)?;
        let s = f.simplify();
        if s.is_true() {
            out[i] = Validity::Valid;
        } else {
            pending.push((i, s));
        }
    }
    for chunk in pending.chunks(CHUNK) {
        let mut script = String::from("(set-logic ALL)\n");
        for (i, f) in chunk {
            script.push_str("(push 1)\n");
            script.push_str(&declarations(f));
            writeln!(script, "(assert (not {f}))\n(echo \"q{i}\")\n(check-sat)\n(pop 1)").unwrap();
        }
        let raw = run_raw(&script, cfg)?;
        let mut current: Option<usize> = None;
        for line in raw.stdout.lines().map(str::trim) {
            if let Some(i) = line.strip_prefix('q').and_then(|n| n.parse::<usize>().ok()) {
                current = Some(i);
                continue;
            }
            let Some(i) = current.take() else { continue };
            out[i] = match line {
                "unsat" => Validity::Valid,
                "sat" => Validity::Invalid,
                "unknown" => Validity::Undetermined("solver returned unknown".into()),
                other => Validity::Undetermined(other.to_string()),
            };
        }
        for (i, _) in chunk {
            if out[*i] == Validity::Undetermined("not checked".into()) {
                out[*i] = Validity::Undetermined(if raw.timed_out {
                    "timeout".into()
                } else {
                    format!("no answer: {}", raw.stderr.trim())
                });
            }
        }
    }
    Ok(out)
}

pub fn check_valid(formula: &Expr, cfg: &SolverConfig) -> Result<Validity, BackendError> {
    Ok(check_valid_batch(std::slice::from_ref(formula), cfg)?.remove(0))
}

fn parse_value(s: &crate::sexp::Sexp) -> Option<Value> {
    match &s.kind {
        SexpKind::Atom(a) if a == "true" => Some(Value::Bool(true)),
        SexpKind::Atom(a) if a == "false" => Some(Value::Bool(false)),
        SexpKind::Atom(a) => a.parse::<i64>().ok().map(Value::Int),
        SexpKind::List(l) if l.len() == 2 && l[0].atom() == Some("-") => match parse_value(&l[1])? {
            Value::Int(n) => Some(Value::Int(-n)),
            _ => None,
        },
        _ => None,
    }
}

/// Values of the free variables falsifying `formula`, or `None` if the
/// solver reports it valid or gives no answer.
pub fn counter_model(formula: &Expr, cfg: &SolverConfig) -> Result<Option<BTreeMap<String, Value>>, BackendError> {
    check_pure(formula)?;
    let vars = formula.free_vars();
    let mut script = String::from("(set-logic ALL)\n");
    script.push_str(&declarations(formula));
    writeln!(script, "(assert (not {formula}))\n(check-sat)").unwrap();
    if !vars.is_empty() {
        let names: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
        writeln!(script, "(get-value ({}))", names.join(" ")).unwrap();
    }
    let raw = run_raw(&script, cfg)?;
    let mut lines = raw.stdout.splitn(2, '\n');
    if lines.next().map(str::trim) != Some("sat") {
        return Ok(None);
    }
    let mut values = BTreeMap::new();
    let rest = lines.next().unwrap_or("");
    let forms = parse_all(rest).map_err(|e| BackendError::Solver(e.to_string()))?;
    for f in &forms {
        for pair in f.list().unwrap_or(&[]) {
            let Some(l) = pair.list().filter(|l| l.len() == 2) else {
                continue;
            };
            if let (Some(n), Some(v)) = (l[0].atom(), parse_value(&l[1])) {
                values.insert(n.to_string(), v);
            }
        }
    }
    Ok(Some(values))
}

/// Per-clause outcome of substituting a model into a system.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RecheckReport {
    pub checked: usize,
    /// Indices of clauses the model violates.
    pub failed: Vec<usize>,
    /// Indices of clauses with no definite answer.
    pub undetermined: Vec<usize>,
}

impl RecheckReport {
    pub fn passed(&self) -> bool {
        self.failed.is_empty() && self.undetermined.is_empty()
    }
}

/// Substitutes the model into every clause and checks each is valid.
pub fn recheck_model(system: &ChcSystem, model: &Model, cfg: &SolverConfig) -> Result<RecheckReport, BackendError> {
    let mut formulas = Vec::with_capacity(system.clauses.len());
    let mut missing = Vec::new();
    for (i, c) in system.clauses.iter().enumerate() {
        let apply = |a: &crate::chc::Atom| {
            let args: Vec<Expr> = a.args.iter().map(Expr::var).collect();
            model.apply(&system.predicates[a.pred], &args)
        };
        let mut premises = Vec::new();
        let mut complete = true;
        for a in &c.body {
            match apply(a) {
                Some(e) => premises.push(e),
                None => complete = false,
            }
        }
        premises.push(c.constraint.clone());
        let head = match &c.head {
            Head::False => Some(Expr::Bool(false)),
            Head::Atom(a) => apply(a),
        };
        match head {
            Some(h) if complete => formulas.push(Expr::implies(Expr::and(premises), h)),
            _ => {
                missing.push(i);
                formulas.push(Expr::Bool(true));
            }
        }
    }
    let verdicts = check_valid_batch(&formulas, cfg)?;
    let mut report = RecheckReport {
        checked: formulas.len(),
        ..Default::default()
    };
    for (i, v) in verdicts.into_iter().enumerate() {
        if missing.contains(&i) {
            report.undetermined.push(i);
            continue;
        }
        match v {
            Validity::Valid => {}
            Validity::Invalid => report.failed.push(i),
            Validity::Undetermined(_) => report.undetermined.push(i),
        }
    }
    Ok(report)
}

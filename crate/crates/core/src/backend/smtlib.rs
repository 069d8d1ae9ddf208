use std::fmt::Write;

use crate::chc::{Atom, ChcSystem, Head};
use crate::logic::{Expr, Sort};

use super::BackendError;

pub fn smt_sort(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::Bool => "Bool",
    }
}

/// Rejects formulas that still mention node-level constructs.
pub(crate) fn check_pure(e: &Expr) -> Result<(), BackendError> {
    let mut bad = None;
    e.visit(&mut |x| {
        if bad.is_none() && matches!(x, Expr::Field(_) | Expr::Node(_)) {
            bad = Some(x.to_string());
        }
    });
    match bad {
        Some(b) => Err(BackendError::Unsupported(b)),
        None => Ok(()),
    }
}

fn atom_text(system: &ChcSystem, a: &Atom) -> String {
    let name = &system.predicates[a.pred].name;
    if a.args.is_empty() {
        return name.clone();
    }
    let args: Vec<&str> = a.args.iter().map(|v| v.name.as_str()).collect();
    format!("({} {})", name, args.join(" "))
}

/// Renders the system as an SMT-LIB HORN script ending in
/// `(check-sat)` and `(get-model)`. The output depends only on the system.
pub fn emit_smtlib(system: &ChcSystem) -> Result<String, BackendError> {
    let mut out = String::from("(set-logic HORN)\n");
    if system.predicates.is_empty() && system.clauses.is_empty() {
        out.push_str("(check-sat)\n");
        return Ok(out);
    }
    for p in &system.predicates {
        let sorts: Vec<&str> = p.slots.iter().map(|s| smt_sort(s.sort)).collect();
        writeln!(out, "(declare-fun {} ({}) Bool)", p.name, sorts.join(" ")).unwrap();
    }
    for c in &system.clauses {
        check_pure(&c.constraint)?;
        let mut premises: Vec<String> = c.body.iter().map(|a| atom_text(system, a)).collect();
        if !c.constraint.is_true() {
            premises.push(c.constraint.to_string());
        }
        let head = match &c.head {
            Head::False => "false".to_string(),
            Head::Atom(a) => atom_text(system, a),
        };
        let matrix = match premises.len() {
            0 => head,
            1 => format!("(=> {} {})", premises[0], head),
            _ => format!("(=> (and {}) {})", premises.join(" "), head),
        };
        writeln!(out, "; {} {}", c.kind, c.origin.replace('\n', " ")).unwrap();
        let vars = c.vars();
        if vars.is_empty() {
            writeln!(out, "(assert {matrix})").unwrap();
        } else {
            let decls: Vec<String> = vars
                .iter()
                .map(|v| format!("({} {})", v.name, smt_sort(v.sort)))
                .collect();
            writeln!(out, "(assert (forall ({}) {}))", decls.join(" "), matrix).unwrap();
        }
    }
    out.push_str("(check-sat)\n(get-model)\n");
    Ok(out)
}

use std::collections::BTreeSet;

use crate::logic::Var;

use super::system::{Atom, ChcSystem, Clause, ClauseKind, Head, Predicate};

/// The least argument list, comparing variable names, among the images of
/// `args` under the predicate's symmetries.
pub fn canonical_args(pred: &Predicate, args: &[Var]) -> Vec<Var> {
    let mut best = args.to_vec();
    for perm in &pred.symmetries {
        let cand = pred.permute(args, perm);
        if cand.iter().map(|v| &v.name).lt(best.iter().map(|v| &v.name)) {
            best = cand;
        }
    }
    best
}

fn canonical_atom(preds: &[Predicate], a: &Atom) -> Atom {
    Atom {
        pred: a.pred,
        args: canonical_args(&preds[a.pred], &a.args),
    }
}

/// Clauses `Inv(x) => Inv(pi x)` for every non-trivial symmetry `pi` of
/// every predicate. Solutions of a reduced system extended with these are
/// symmetric, hence also solve the unreduced system.
pub fn symmetry_clauses(predicates: &[Predicate]) -> Vec<Clause> {
    let mut out = Vec::new();
    for (i, p) in predicates.iter().enumerate() {
        let args: Vec<Var> = p
            .slots
            .iter()
            .enumerate()
            .map(|(j, s)| Var::new(format!("y_{j}"), s.sort))
            .collect();
        for perm in p.symmetries.iter().skip(1) {
            let image = p.permute(&args, perm);
            if image == args {
                continue;
            }
            out.push(Clause {
                kind: ClauseKind::Symmetry,
                body: vec![Atom {
                    pred: i,
                    args: args.clone(),
                }],
                constraint: crate::logic::Expr::Bool(true),
                head: Head::Atom(Atom { pred: i, args: image }),
                origin: format!("{} under {:?}", p.name, perm),
            });
        }
    }
    out
}

/// Rewrites every atom to its canonical argument order, merges atoms that
/// became equal, drops clauses whose head occurs in their body and removes
/// duplicate clauses. Symmetry clauses are kept as they are.
pub fn symmetry_reduce(system: &ChcSystem) -> ChcSystem {
    let preds = &system.predicates;
    let mut out = ChcSystem {
        predicates: preds.clone(),
        clauses: Vec::with_capacity(system.clauses.len()),
    };
    for c in &system.clauses {
        let mut c = c.clone();
        if c.kind == ClauseKind::Symmetry {
            out.clauses.push(c);
            continue;
        }
        c.body = c.body.iter().map(|a| canonical_atom(preds, a)).collect();
        if let Head::Atom(h) = &c.head {
            c.head = Head::Atom(canonical_atom(preds, h));
        }
        c.normalize();
        if let Head::Atom(h) = &c.head {
            let body: BTreeSet<&Atom> = c.body.iter().collect();
            if body.contains(h) {
                continue;
            }
        }
        out.clauses.push(c);
    }
    out.dedup();
    out
}

#![allow(dead_code)]

pub mod props;

use std::collections::{BTreeSet, HashMap};

use locus_core::backend::SolverConfig;
use locus_core::chc::{canonical_args, Atom, ChcSystem, Clause, ClauseKind, Head, Predicate};
use locus_core::logic::{Expr, Node, Sort, Structure, Var};

/// The configured solver, if it can be run.
pub fn solver() -> Option<SolverConfig> {
    let cfg = SolverConfig::from_env().with_timeout(std::time::Duration::from_secs(120));
    if cfg.available() {
        Some(cfg)
    } else {
        eprintln!("skipping: solver {} not found", cfg.executable.display());
        None
    }
}

fn node_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix("xp_").or_else(|| name.strip_prefix("x_"))?;
    rest.split('_').next()?.parse().ok()
}

fn rename_var(v: &Var, perm: &HashMap<usize, usize>) -> Var {
    let Some(i) = node_index(&v.name) else { return v.clone() };
    let (prefix, rest) = v.name.split_once('_').unwrap();
    let field = rest.split_once('_').map_or("", |(_, f)| f);
    Var::new(format!("{prefix}_{}_{field}", perm[&i]), v.sort)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// A rendering of `c` that is invariant under renaming nodes and, with
/// `sym`, under the declared symmetries of each predicate.
pub fn canonical_clause(c: &Clause, preds: &[Predicate], sym: bool) -> String {
    let nodes: Vec<usize> = c
        .vars()
        .iter()
        .filter_map(|v| node_index(&v.name))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut best: Option<String> = None;
    for p in permutations(&nodes) {
        let perm: HashMap<usize, usize> = nodes.iter().copied().zip(p).collect();
        let atom = |a: &Atom| {
            let args: Vec<Var> = a.args.iter().map(|v| rename_var(v, &perm)).collect();
            let args = if sym {
                canonical_args(&preds[a.pred], &args)
            } else {
                args
            };
            Atom { pred: a.pred, args }
        };
        let map: HashMap<String, Expr> = c
            .vars()
            .iter()
            .map(|v| (v.name.clone(), Expr::Var(rename_var(v, &perm))))
            .collect();
        let mut r = Clause {
            kind: c.kind,
            body: c.body.iter().map(atom).collect(),
            constraint: c.constraint.subst_vars(&map),
            head: match &c.head {
                Head::False => Head::False,
                Head::Atom(a) => Head::Atom(atom(a)),
            },
            origin: String::new(),
        };
        r.normalize();
        let text = format!("{} {}", r.kind, r.canonical_text(preds));
        if best.as_ref().is_none_or(|b| text < *b) {
            best = Some(text);
        }
    }
    best.unwrap_or_default()
}

pub fn canonical_set(clauses: &[Clause], preds: &[Predicate], sym: bool) -> BTreeSet<String> {
    clauses.iter().map(|c| canonical_clause(c, preds, sym)).collect()
}

/// Body atoms that are images of another body atom under a non-trivial
/// symmetry of their predicate.
pub fn symmetric_body_pairs(system: &ChcSystem) -> usize {
    let mut n = 0;
    for c in &system.clauses {
        for a in &c.body {
            let p = &system.predicates[a.pred];
            for perm in p.symmetries.iter().skip(1) {
                let image = p.permute(&a.args, perm);
                if image != a.args && c.body.iter().any(|b| b.pred == a.pred && b.args == image) {
                    n += 1;
                }
            }
        }
    }
    n / 2
}

/// The star clauses for the distinct-pair predicate, numbered as in the
/// classic presentation: node 0 is the hub, nodes 1..3 are processes, and
/// `Inv(x0, x1, x2)` is `Inv_r(x_1_cs, x_2_cs, x_0_lock)` in argument order.
/// With `gray`, the bodies also carry the mirrored atoms.
pub fn star_oracle(pred: usize, gray: bool) -> Vec<Clause> {
    let var = |i: usize, primed: bool| {
        let field = if i == 0 { "lock" } else { "cs" };
        Var::new(format!("{}_{i}_{field}", if primed { "xp" } else { "x" }), Sort::Bool)
    };
    let e = |i: usize, primed: bool| Expr::Var(var(i, primed));
    let inv = |a: (usize, bool), b: (usize, bool), c: (usize, bool)| Atom {
        pred,
        args: vec![var(b.0, b.1), var(c.0, c.1), var(a.0, a.1)],
    };
    let cur = |i: usize| (i, false);
    let next = |i: usize| (i, true);
    let step = |i: usize| {
        Expr::or([
            Expr::and([Expr::not(e(0, false)), e(0, true), e(i, true)]),
            Expr::and([e(i, false), Expr::not(e(0, true)), Expr::not(e(i, true))]),
        ])
    };
    let body = |plain: Vec<Atom>, mirrored: Vec<Atom>| {
        let mut out = plain;
        if gray {
            out.extend(mirrored);
        }
        out
    };
    let pair = |i: usize, j: usize| inv(cur(0), cur(i), cur(j));
    let clause = |kind, body, constraint, head| Clause {
        kind,
        body,
        constraint,
        head,
        origin: String::new(),
    };
    vec![
        clause(
            ClauseKind::Init,
            Vec::new(),
            Expr::and([Expr::not(e(0, false)), Expr::not(e(1, false)), Expr::not(e(2, false))]),
            Head::Atom(pair(1, 2)),
        ),
        clause(
            ClauseKind::Step,
            body(vec![pair(1, 2)], vec![pair(2, 1)]),
            step(1),
            Head::Atom(inv(next(0), next(1), cur(2))),
        ),
        clause(
            ClauseKind::Step,
            body(vec![pair(1, 2)], vec![pair(2, 1)]),
            step(2),
            Head::Atom(inv(next(0), cur(1), next(2))),
        ),
        clause(
            ClauseKind::Step,
            body(
                vec![pair(1, 2), pair(3, 2), pair(1, 3)],
                vec![pair(2, 1), pair(2, 3), pair(3, 1)],
            ),
            step(3),
            Head::Atom(inv(next(0), cur(1), cur(2))),
        ),
        clause(
            ClauseKind::Error,
            body(vec![pair(1, 2)], vec![pair(2, 1)]),
            Expr::and([e(1, false), e(2, false)]),
            Head::False,
        ),
    ]
}

/// `(nu = l(nu) = r(nu) = b) /\ nu != e /\ (e = l(e) = r(e)) /\ ~isProc(nu) /\ ~isProc(e)`
pub fn alpha_1(s: &Structure, v: Node) -> bool {
    let voc = s.vocab();
    let f = |name: &str, x: Node| s.apply(voc.function(name).unwrap(), &[x]);
    let c = |name: &str| s.constant(voc.function(name).unwrap());
    let is_proc = |x: Node| s.holds(voc.predicate("isProc").unwrap(), &[x]);
    let (b, e) = (c("b"), c("e"));
    v == f("l", v)
        && v == f("r", v)
        && v == b
        && v != e
        && e == f("l", e)
        && e == f("r", e)
        && !is_proc(v)
        && !is_proc(e)
}

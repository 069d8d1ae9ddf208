//! Solved invariants against the basis check, the explicit-state oracle and
//! single triples. Skipped when no solver is installed.

mod common;

use std::sync::Arc;

use common::solver;
use locus_core::backend::SolverConfig;
use locus_core::chc::EncodeOptions;
use locus_core::invariant::{
    check_family, check_invariant_explicit, check_triple, explicit_reach, export_sexp, export_text, hoare_triples,
    read_invariant, AshcroftInvariant, Condition, ExplicitVerdict, FamilyOptions, FamilyVerdict, Reach, TripleKind,
    TripleVerdict, DEFAULT_MAX_STATES,
};
use locus_core::logic::Expr;
use locus_core::pipeline::{solve_family, Outcome};
use locus_core::program::{attach_program, family_types, ConcreteProgram, ProgramSpec};
use locus_core::suite;

fn load(name: &str) -> (Arc<ProgramSpec>, usize) {
    let b = suite::find(name).unwrap();
    (b.load().unwrap(), b.width)
}

fn member(spec: &Arc<ProgramSpec>, n: usize) -> ConcreteProgram {
    attach_program(spec.clone(), Arc::new(spec.family.instantiate(n).unwrap())).unwrap()
}

fn solved(name: &str, o: EncodeOptions, cfg: &SolverConfig) -> AshcroftInvariant {
    let (spec, k) = load(name);
    let r = solve_family(&spec, k, o, cfg).unwrap();
    match r.outcome {
        Outcome::Sat(inv) => {
            assert!(r.recheck.as_ref().unwrap().passed());
            *inv
        }
        other => panic!("{name} {}: {}", o.label(), other.label()),
    }
}

fn trivial(name: &str) -> AshcroftInvariant {
    let (spec, k) = load(name);
    let types = Arc::new(family_types(&spec.family, k).unwrap());
    AshcroftInvariant::trivial(spec, types)
}

fn with_phi(inv: &AshcroftInvariant, phi: Expr) -> AshcroftInvariant {
    let mut out = inv.clone();
    for e in &mut out.entries {
        e.phi = phi.clone();
    }
    out
}

fn explicit(inv: &AshcroftInvariant, n: usize) -> ExplicitVerdict {
    check_invariant_explicit(inv, &member(&inv.spec, n), DEFAULT_MAX_STATES).unwrap()
}

#[test]
fn solved_invariants_pass_both_checks() {
    let Some(cfg) = solver() else { return };
    let cases = [
        ("star-mutex", EncodeOptions::all()),
        ("star-mutex", EncodeOptions::baseline()),
        ("ring-swap", EncodeOptions::baseline()),
        ("simple-pipeline", EncodeOptions::all()),
        ("line-token", EncodeOptions::all()),
    ];
    for (name, o) in cases {
        let inv = solved(name, o, &cfg);
        let fc = check_family(&inv, FamilyOptions { instances: true }, &cfg).unwrap();
        assert_eq!(fc.verdict, FamilyVerdict::Invariant, "{name} {}", o.label());
        assert!(fc.triples > 0 && !fc.members.is_empty());
        if suite::find(name).unwrap().boolean {
            for n in 3..=5 {
                assert!(
                    matches!(explicit(&inv, n), ExplicitVerdict::Invariant { .. }),
                    "{name} {} n={n}",
                    o.label()
                );
            }
        }
    }
}

#[test]
fn trivial_invariant_is_unsafe() {
    let Some(cfg) = solver() else { return };
    let inv = trivial("star-mutex");
    let fc = check_family(&inv, FamilyOptions::default(), &cfg).unwrap();
    let FamilyVerdict::NotInvariant(fail) = fc.verdict else {
        panic!("{:?}", fc.verdict)
    };
    assert!(fail.triple.starts_with("safe"), "{}", fail.triple);
    assert!(fail.counterexample.is_some());
    match explicit(&inv, 3) {
        ExplicitVerdict::Fails { condition, tuple, .. } => {
            assert_eq!(condition, Condition::Safety);
            assert_eq!(tuple.len(), 2);
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn false_invariant_fails_initialization() {
    let Some(cfg) = solver() else { return };
    let inv = with_phi(&trivial("star-mutex"), Expr::Bool(false));
    assert!(matches!(
        explicit(&inv, 3),
        ExplicitVerdict::Fails {
            condition: Condition::Initialization,
            ..
        }
    ));
    let fc = check_family(&inv, FamilyOptions::default(), &cfg).unwrap();
    let FamilyVerdict::NotInvariant(fail) = fc.verdict else {
        panic!("{:?}", fc.verdict)
    };
    assert!(fail.triple.starts_with("init"), "{}", fail.triple);
}

#[test]
fn mutated_invariants_fail() {
    let Some(cfg) = solver() else { return };
    let inv = solved("star-mutex", EncodeOptions::baseline(), &cfg);
    let negated = {
        let mut m = inv.clone();
        for e in &mut m.entries {
            e.phi = Expr::not(e.phi.clone());
        }
        m
    };
    for bad in [with_phi(&inv, Expr::Bool(true)), negated] {
        let fc = check_family(&bad, FamilyOptions::default(), &cfg).unwrap();
        assert!(matches!(fc.verdict, FamilyVerdict::NotInvariant(_)), "{:?}", fc.verdict);
        assert!(matches!(explicit(&bad, 3), ExplicitVerdict::Fails { .. }));
    }
}

#[test]
fn explicit_reach_finds_the_injected_bug() {
    let (spec, _) = load("ring-token");
    match explicit_reach(&member(&spec, 3), DEFAULT_MAX_STATES).unwrap() {
        Reach::Safe { states } => assert!(states > 1),
        r => panic!("{r:?}"),
    }
    let (bug, _) = load("ring-token-bug");
    match explicit_reach(&member(&bug, 3), DEFAULT_MAX_STATES).unwrap() {
        Reach::Unsafe { trace, error_at } => {
            assert_eq!(trace[0].0, None);
            assert!(trace[1..].iter().all(|(v, _)| v.is_some()));
            assert_eq!(error_at.len(), 2);
        }
        r => panic!("{r:?}"),
    }
}

#[test]
fn single_triples() {
    let Some(cfg) = solver() else { return };
    let inv = solved("star-mutex", EncodeOptions::all(), &cfg);
    let prog = member(&inv.spec, 3);
    let triples = hoare_triples(&prog, &inv).unwrap();
    for kind in [TripleKind::Init, TripleKind::Cont, TripleKind::Safe] {
        assert!(triples.iter().any(|t| t.kind == kind));
    }
    for t in triples.iter().filter(|t| t.kind == TripleKind::Safe).take(3) {
        assert_eq!(
            check_triple(t, &prog, &cfg).unwrap(),
            TripleVerdict::Valid,
            "{}",
            t.describe(&prog.topology)
        );
    }

    let weak = trivial("star-mutex");
    let triples = hoare_triples(&prog, &weak).unwrap();
    let verdicts: Vec<TripleVerdict> = triples
        .iter()
        .filter(|t| t.kind == TripleKind::Safe)
        .map(|t| check_triple(t, &prog, &cfg).unwrap())
        .collect();
    assert!(verdicts.contains(&TripleVerdict::Valid));
    let cex = verdicts
        .iter()
        .find_map(|v| match v {
            TripleVerdict::Invalid(Some(c)) => Some(c),
            _ => None,
        })
        .expect("an unsafe state pair");
    assert!(cex.post.is_none());
    assert!(!cex.render(&prog.topology).is_empty());
}

#[test]
fn export_round_trip() {
    let Some(cfg) = solver() else { return };
    for (name, o) in [
        ("star-mutex", EncodeOptions::all()),
        ("ring-swap", EncodeOptions::baseline()),
    ] {
        let inv = solved(name, o, &cfg);
        let back = read_invariant(&export_sexp(&inv), inv.spec.clone()).unwrap();
        // entries equal to `true` are not written, so only formulas survive
        let formulas = |i: &AshcroftInvariant| {
            i.entries
                .iter()
                .map(|e| (e.pred.clone(), e.phi.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(formulas(&back), formulas(&inv), "{name}");
        assert_eq!(back.options, inv.options);
        assert_eq!(export_text(&back), export_text(&inv));
    }
    let (spec, _) = load("star-mutex");
    let other = read_invariant(&export_sexp(&trivial("ring-swap")), spec);
    assert!(other.is_err());
}

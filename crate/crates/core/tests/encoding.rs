mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{canonical_set, star_oracle, symmetric_body_pairs};
use locus_core::backend::emit_smtlib;
use locus_core::chc::{
    closure_members, encode_family, encode_single, symmetry_reduce, validate_chi, ChcError, ClauseKind, EncodeOptions,
};
use locus_core::logic::Sort;
use locus_core::program::{attach_program, family_types};
use locus_core::suite;

fn dpg() -> EncodeOptions {
    EncodeOptions {
        dpg: true,
        ..EncodeOptions::baseline()
    }
}

fn size(sys: &locus_core::chc::ChcSystem) -> String {
    format!("{}/{}", sys.predicates.len(), sys.clauses.len())
}

#[test]
fn star_predicate_layout() {
    let spec = suite::find("star-mutex").unwrap().load().unwrap();
    let enc = encode_family(&spec, 2, EncodeOptions::all()).unwrap();
    assert_eq!(enc.system.predicates.len(), 1);
    let p = &enc.system.predicates[0];
    let slots: Vec<(usize, &str, Sort)> = p.slots.iter().map(|s| (s.pos, s.field.as_str(), s.sort)).collect();
    assert_eq!(
        slots,
        [(0, "cs", Sort::Bool), (1, "cs", Sort::Bool), (2, "lock", Sort::Bool)]
    );
    assert_eq!(p.symmetries, vec![vec![0, 1, 2], vec![1, 0, 2]]);
}

#[test]
fn star_dpg_matches_full_clause_set() {
    let spec = suite::find("star-mutex").unwrap().load().unwrap();
    let enc = encode_family(&spec, 2, dpg()).unwrap();
    let sys = &enc.system;
    assert_eq!(size(sys), "1/5");
    let oracle = star_oracle(0, true);
    assert_eq!(
        canonical_set(&sys.clauses, &sys.predicates, false),
        canonical_set(&oracle, &sys.predicates, false)
    );
    assert_eq!(symmetric_body_pairs(sys), 1 + 1 + 3 + 1);
}

#[test]
fn star_symmetry_reduction_drops_mirrored_atoms() {
    let spec = suite::find("star-mutex").unwrap().load().unwrap();
    let enc = encode_family(&spec, 2, EncodeOptions::all()).unwrap();
    let sys = &enc.system;
    assert_eq!(size(sys), "1/5");
    assert_eq!(sys.count(ClauseKind::Symmetry), 1);
    assert_eq!(symmetric_body_pairs(sys), 0);
    let reduced: Vec<_> = sys
        .clauses
        .iter()
        .filter(|c| c.kind != ClauseKind::Symmetry)
        .cloned()
        .collect();
    assert_eq!(reduced.len(), 4);
    let pruned = star_oracle(0, false);
    assert_eq!(
        canonical_set(&reduced, &sys.predicates, true),
        canonical_set(&pruned, &sys.predicates, true)
    );
    // the two single-mover steps are mirror images of each other
    assert_eq!(canonical_set(&pruned, &sys.predicates, true).len(), 4);
    assert_eq!(canonical_set(&pruned, &sys.predicates, false).len(), 5);
}

#[test]
fn star_baseline_keeps_mirrored_atoms() {
    let spec = suite::find("star-mutex").unwrap().load().unwrap();
    let enc = encode_family(&spec, 2, EncodeOptions::baseline()).unwrap();
    assert_eq!(size(&enc.system), "5/16");
    assert!(symmetric_body_pairs(&enc.system) > 0);
}

#[test]
fn frozen_sizes() {
    let cases = [
        ("simple-pipeline", EncodeOptions::baseline(), "6/36"),
        ("ring-swap", EncodeOptions::baseline(), "2/10"),
        ("star-mutex", EncodeOptions::all(), "1/5"),
        ("star-counter", EncodeOptions::all(), "1/5"),
    ];
    for (name, o, expect) in cases {
        let b = suite::find(name).unwrap();
        let enc = encode_family(&b.load().unwrap(), b.width, o).unwrap();
        assert_eq!(size(&enc.system), expect, "{name} {}", o.label());
    }
}

#[test]
fn predicates_are_the_selected_types() {
    for b in suite::bundled() {
        let spec = b.load().unwrap();
        let types = family_types(&spec.family, b.width).unwrap();
        for label in ["baseline", "opn", "dpg", "opn+dpg", "opn+dpg+sym"] {
            let o = EncodeOptions::from_label(label).unwrap();
            let enc = encode_family(&spec, b.width, o).unwrap();
            let selected = enc.chi.iter().filter(|&&c| c).count();
            assert_eq!(enc.system.predicates.len(), selected, "{} {label}", b.name);
            if label == "baseline" {
                assert_eq!(selected, types.len(), "{}", b.name);
            }
        }
    }
}

#[test]
fn reduction_is_idempotent_and_clauses_are_distinct() {
    for b in suite::bundled() {
        let spec = b.load().unwrap();
        for o in [EncodeOptions::baseline(), dpg(), EncodeOptions::all()] {
            let enc = encode_family(&spec, b.width, o).unwrap();
            let once = symmetry_reduce(&enc.unreduced);
            assert_eq!(symmetry_reduce(&once), once, "{} {}", b.name, o.label());
            let texts: BTreeSet<String> = enc
                .system
                .clauses
                .iter()
                .map(|c| {
                    let mut c = c.clone();
                    c.normalize();
                    c.canonical_text(&enc.system.predicates)
                })
                .collect();
            assert_eq!(texts.len(), enc.system.clauses.len(), "{} {}", b.name, o.label());
        }
    }
}

#[test]
fn indicator_validation() {
    let b = suite::find("simple-pipeline").unwrap();
    let spec = b.load().unwrap();
    let enc = encode_family(&spec, 1, EncodeOptions::from_label("opn").unwrap()).unwrap();
    let next = family_types(&spec.family, 2).unwrap();
    let members = closure_members(&spec.family, &next, 1, false).unwrap();
    assert_eq!(validate_chi(&enc.chi, &enc.types, &members).unwrap(), None);
    let all = vec![true; enc.types.len()];
    assert_eq!(validate_chi(&all, &enc.types, &members).unwrap(), None);
    let none = vec![false; enc.types.len()];
    assert!(validate_chi(&none, &enc.types, &members).unwrap().is_some());
}

#[test]
fn zero_width_is_rejected() {
    let spec = suite::find("star-mutex").unwrap().load().unwrap();
    assert!(matches!(
        encode_family(&spec, 0, EncodeOptions::all()),
        Err(ChcError::ZeroWidth)
    ));
}

#[test]
fn single_program_encoding() {
    let spec = suite::find("star-mutex").unwrap().load().unwrap();
    let types = family_types(&spec.family, 2).unwrap();
    let prog = attach_program(spec.clone(), Arc::new(spec.family.instantiate(2).unwrap())).unwrap();
    let sys = encode_single(&prog, &types).unwrap();
    assert_eq!(sys.predicates.len(), types.len());
    let pair = sys.predicates.iter().find(|p| p.rep_terms.len() == 3).unwrap();
    assert_eq!(pair.arity(), 3);
    assert!(sys.count(ClauseKind::Step) > 0);
    // one query per ordered pair of distinct processes
    assert_eq!(sys.count(ClauseKind::Error), 2);

    let mut idle = (*spec).clone();
    for k in &mut idle.kinds {
        k.trans = None;
    }
    let idle = Arc::new(idle);
    let prog = attach_program(idle.clone(), Arc::new(idle.family.instantiate(2).unwrap())).unwrap();
    let sys = encode_single(&prog, &types).unwrap();
    assert_eq!(sys.count(ClauseKind::Step), 0);
    assert!(sys.count(ClauseKind::Init) > 0 && sys.count(ClauseKind::Error) > 0);
    let enc = encode_family(&idle, 2, EncodeOptions::all()).unwrap();
    assert_eq!(enc.system.count(ClauseKind::Step), 0);
}

#[test]
fn smtlib_script_shape() {
    let spec = suite::find("star-mutex").unwrap().load().unwrap();
    let enc = encode_family(&spec, 2, EncodeOptions::all()).unwrap();
    let script = emit_smtlib(&enc.system).unwrap();
    assert!(script.starts_with("(set-logic HORN)\n"));
    let decls: Vec<&str> = script.lines().filter(|l| l.starts_with("(declare-fun")).collect();
    assert_eq!(decls, ["(declare-fun Inv_4 (Bool Bool Bool) Bool)"]);
    assert_eq!(script.lines().filter(|l| l.starts_with("(assert")).count(), 5);
    assert!(script.trim_end().ends_with("(check-sat)\n(get-model)"));
    let again = emit_smtlib(&encode_family(&spec, 2, EncodeOptions::all()).unwrap().system).unwrap();
    assert_eq!(script, again);

    let empty = emit_smtlib(&locus_core::chc::ChcSystem::default()).unwrap();
    assert_eq!(empty.lines().filter(|l| l.starts_with("(assert")).count(), 0);
    assert!(empty.contains("(check-sat)"));
}

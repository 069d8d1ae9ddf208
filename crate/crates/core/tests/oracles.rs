//! Hand-computed values for structures, neighbourhoods, types and programs.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::alpha_1;
use locus_core::logic::{Expr, Node, NodeFormula, NodeTerm, Structure};
use locus_core::program::{
    attach_program, check_bounds_stable, check_extensible, check_modeling_rules, family_types, validate_symmetry,
    Extensibility, FamilyDescriptor, Topology,
};
use locus_core::suite;
use locus_core::symmetry::{
    automorphisms, canonical_form, find_local_isomorphism, generated_substructure, isomorphic, type_key,
};

fn family(t: Topology, min: usize) -> FamilyDescriptor {
    FamilyDescriptor::new(t, min).unwrap()
}

fn line(n: usize) -> Structure {
    family(Topology::Line { hub: false }, 1).instantiate(n).unwrap()
}

fn star(n: usize) -> Structure {
    family(Topology::Star, 1).instantiate(n).unwrap()
}

fn labels(s: &Structure, nodes: impl IntoIterator<Item = Node>) -> BTreeSet<String> {
    nodes.into_iter().map(|v| s.label(v).to_string()).collect()
}

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn node(s: &Structure, label: &str) -> Node {
    s.node_by_label(label).unwrap()
}

#[test]
fn neighbourhoods_include_constants() {
    let s = star(4);
    let sub = generated_substructure(&s, &[1]);
    assert_eq!(labels(&s, sub.inclusion.iter().copied()), set(&["0", "1"]));

    let s = line(5);
    let sub = generated_substructure(&s, &[node(&s, "v2"), node(&s, "v3")]);
    assert_eq!(
        labels(&s, sub.inclusion.iter().copied()),
        set(&["v2", "v3", "s1", "s2", "s3", "s0", "s5"])
    );

    let all: Vec<Node> = s.nodes().collect();
    assert_eq!(generated_substructure(&s, &all).structure.len(), s.len());
}

#[test]
fn local_isomorphisms() {
    let (a, b) = (star(3), star(5));
    let iso = find_local_isomorphism(&a, &[1], &b, &[4]).unwrap();
    let mut pairs = iso.pairs.clone();
    pairs.sort();
    assert_eq!(pairs, vec![(0, 0), (1, 4)]);

    let s = line(5);
    let v1 = node(&s, "v1");
    let v3 = node(&s, "v3");
    assert!(find_local_isomorphism(&s, &[v1], &s, &[v3]).is_none());
    let id = find_local_isomorphism(&s, &[v3], &s, &[v3]).unwrap();
    assert!(id.pairs.iter().all(|(x, y)| x == y));
}

#[test]
fn automorphism_counts() {
    let s = star(2);
    assert_eq!(automorphisms(&s, &[]).len(), 2);
    let all: Vec<Node> = s.nodes().collect();
    assert_eq!(automorphisms(&s, &all).len(), 1);

    let l = line(5);
    let sub = generated_substructure(&l, &[node(&l, "v3")]);
    assert_eq!(sub.structure.len(), 5);
    assert_eq!(automorphisms(&sub.structure, &sub.marks).len(), 1);
}

#[test]
fn canonical_keys() {
    assert_eq!(type_key(&star(3), &[1]), type_key(&star(7), &[5]));
    let s = line(5);
    assert_ne!(type_key(&s, &[node(&s, "v1")]), type_key(&s, &[node(&s, "v3")]));
    let s = star(3);
    for f in automorphisms(&s, &[]) {
        assert_eq!(canonical_form(&s, &[1, 2]).key, canonical_form(&s, &[f[1], f[2]]).key);
    }
}

#[test]
fn type_counts() {
    let pipeline = suite::find("simple-pipeline").unwrap().load().unwrap();
    assert_eq!(family_types(&pipeline.family, 1).unwrap().len(), 6);
    assert_eq!(family_types(&family(Topology::Star, 2), 1).unwrap().len(), 2);
    assert_eq!(
        family_types(&family(Topology::Ring { marked: false }, 3), 1)
            .unwrap()
            .len(),
        2
    );
    // ordered pairs over processes: repeated, distinct; plus the hub in either slot
    assert_eq!(family_types(&family(Topology::Star, 2), 2).unwrap().len(), 5);
}

#[test]
fn defining_formulas_match_hand_formulas() {
    let pipeline = suite::find("simple-pipeline").unwrap().load().unwrap();
    let types = family_types(&pipeline.family, 1).unwrap();
    let s3 = pipeline.family.instantiate(3).unwrap();
    let t1 = types.classify(&s3, &[node(&s3, "s0")]).unwrap();
    let interior = types.classify(&s3, &[node(&s3, "v2")]).unwrap();
    for n in 3..=8 {
        let s = pipeline.family.instantiate(n).unwrap();
        for v in s.nodes() {
            assert_eq!(
                types.get(t1).alpha.eval(&s, &[v]).unwrap(),
                alpha_1(&s, v),
                "LINE({n}) {}",
                s.label(v)
            );
            let label = s.label(v);
            let expect = (2..n).any(|i| label == format!("v{i}"));
            assert_eq!(
                types.get(interior).alpha.eval(&s, &[v]).unwrap(),
                expect,
                "LINE({n}) {label}"
            );
        }
    }
}

#[test]
fn representative_terms() {
    let star_types = family_types(&family(Topology::Star, 2), 2).unwrap();
    let s = star(2);
    let pair = star_types.get(star_types.classify(&s, &[1, 2]).unwrap());
    assert_eq!(pair.n_reps(), 3);
    let shown: Vec<String> = pair
        .rep_terms
        .iter()
        .map(|t| t.display(s.vocab()).to_string())
        .collect();
    assert_eq!(shown, ["nu1", "nu2", "g"]);
    let star1 = family_types(&family(Topology::Star, 2), 1).unwrap();
    let proc = star1.get(star1.classify(&s, &[1]).unwrap());
    let shown: Vec<String> = proc
        .rep_terms
        .iter()
        .map(|t| t.display(s.vocab()).to_string())
        .collect();
    assert_eq!(shown, ["nu1", "g"]);

    // the second circle of a pipeline: nu, its two squares, and both ends
    let pipeline = suite::find("simple-pipeline").unwrap().load().unwrap();
    let types = family_types(&pipeline.family, 1).unwrap();
    let s3 = pipeline.family.instantiate(3).unwrap();
    let t = types.get(types.classify(&s3, &[node(&s3, "v2")]).unwrap());
    assert_eq!(t.n_reps(), 5);
    let t = types.get(types.classify(&s3, &[node(&s3, "v1")]).unwrap());
    assert_eq!(t.n_reps(), 4);
    for t in types.iter() {
        let nodes: BTreeSet<Node> = t
            .rep_terms
            .iter()
            .map(|r| r.eval(&t.witness.structure, &t.witness.tuple).unwrap())
            .collect();
        assert_eq!(nodes.len(), t.n_reps(), "repetition-free");
        assert_eq!(
            nodes,
            t.neighbourhood.inclusion.iter().copied().collect::<BTreeSet<_>>()
        );
    }
}

#[test]
fn classify_node_formulas() {
    let pipeline = suite::find("simple-pipeline").unwrap().load().unwrap();
    let types = family_types(&pipeline.family, 1).unwrap();
    let voc = &pipeline.family.vocab;
    let nu = NodeTerm::Var(0);
    let l_nu = NodeTerm::app(voc.function("l").unwrap(), vec![nu.clone()]);
    let b = NodeTerm::app(voc.function("b").unwrap(), vec![]);
    let phi = NodeFormula::Not(Box::new(NodeFormula::And(vec![
        NodeFormula::Pred(voc.predicate("isProc").unwrap(), vec![nu]),
        NodeFormula::Not(Box::new(NodeFormula::Eq(l_nu, b))),
    ])));
    let s3 = pipeline.family.instantiate(3).unwrap();
    let expect: BTreeSet<usize> = ["s0", "s1", "s3", "v1"]
        .iter()
        .map(|l| types.classify(&s3, &[node(&s3, l)]).unwrap())
        .collect();
    assert_eq!(expect.len(), 4);
    assert_eq!(types.classify_node_formula(&phi).unwrap(), expect);
    assert_eq!(types.classify_node_formula(&NodeFormula::Const(true)).unwrap().len(), 6);

    let star_types = family_types(&family(Topology::Star, 2), 2).unwrap();
    let eq = NodeFormula::Eq(NodeTerm::Var(0), NodeTerm::Var(1));
    let got = star_types.classify_node_formula(&eq).unwrap();
    let expect: BTreeSet<usize> = star_types
        .iter()
        .filter(|t| t.witness.tuple[0] == t.witness.tuple[1])
        .map(|t| t.id)
        .collect();
    assert_eq!(got, expect);
    assert_eq!(got.len(), 2);
}

#[test]
fn instances() {
    let s = star(2);
    assert_eq!(s.len(), 3);
    assert_eq!(s.constant(s.vocab().function("g").unwrap()), 0);

    let l = line(1);
    assert_eq!(l.len(), 3);
    let voc = l.vocab();
    assert_ne!(
        l.constant(voc.function("b").unwrap()),
        l.constant(voc.function("e").unwrap())
    );

    let r = family(Topology::Ring { marked: false }, 2).instantiate(3).unwrap();
    assert_eq!(r.len(), 6);
    let (lf, rf) = (r.vocab().function("l").unwrap(), r.vocab().function("r").unwrap());
    for i in 0..3 {
        let c = node(&r, &format!("c{i}"));
        assert_eq!(r.label(r.apply(lf, &[c])), format!("s{i}"));
        assert_eq!(r.label(r.apply(rf, &[c])), format!("s{}", (i + 1) % 3));
    }
    let again = family(Topology::Ring { marked: false }, 2).instantiate(3).unwrap();
    assert!(isomorphic(&r, &again));
}

#[test]
fn attached_star_program() {
    let spec = suite::find("star-mutex").unwrap().load().unwrap();
    let prog = attach_program(spec.clone(), Arc::new(spec.family.instantiate(3).unwrap())).unwrap();
    assert_eq!(prog.processes(), vec![1, 2, 3]);
    for v in 1..=3 {
        let t = prog.transition(v).unwrap().unwrap();
        let touched: BTreeSet<Node> = t
            .relation
            .fields()
            .iter()
            .map(|r| match r.node {
                NodeTerm::Param(u) => u,
                _ => panic!("unbound node term"),
            })
            .collect();
        assert_eq!(touched, BTreeSet::from([0, v]));
    }
    assert!(prog.transition(0).unwrap().is_none());

    let small = attach_program(spec.clone(), Arc::new(spec.family.instantiate(2).unwrap())).unwrap();
    let all: BTreeSet<Node> = small.topology.nodes().collect();
    let g = small
        .global_transition(1, &all)
        .unwrap()
        .display_in(&small.topology)
        .to_string();
    assert!(g.contains("(= (mu' @2 cs) (mu @2 cs))"), "{g}");
    let own = small.global_transition(1, &small.neighbourhood(&[1])).unwrap();
    assert_eq!(own, Expr::and([small.transition(1).unwrap().unwrap().relation]));

    let sub = prog.neighbourhood(&[1, 2]);
    let (restricted, _) = prog.subprogram(&sub).unwrap();
    assert!(isomorphic(&restricted.topology, &small.topology));
}

#[test]
fn bounds_are_stable() {
    let line = family(Topology::Line { hub: false }, 1);
    let r = check_bounds_stable(&line, 2).unwrap();
    assert!(r.stable, "{r:?}");
    assert_eq!(r.bounds, vec![1, 2, 3, 4, 5]);
    assert_eq!(r.extended, vec![1, 2, 3, 4, 5, 6, 7]);
}

#[test]
fn suite_programs_are_well_formed() {
    for b in suite::bundled() {
        let spec = b.load().unwrap();
        let samples: Vec<usize> = (spec.family.min_index..spec.family.min_index + 3).collect();
        assert!(validate_symmetry(&spec, &samples).unwrap().is_empty(), "{}", b.name);
        assert!(
            check_modeling_rules(&spec.family, &samples).unwrap().is_empty(),
            "{}",
            b.name
        );
        assert!(
            !matches!(check_extensible(&spec, &samples).unwrap(), Extensibility::Fails { .. }),
            "{}",
            b.name
        );
    }
}

#[test]
fn smuggled_node_constant_breaks_symmetry() {
    let base = suite::find("star-mutex").unwrap().load().unwrap();
    let mut spec = (*base).clone();
    let kind = spec.kinds.iter_mut().find(|k| k.witness_label == "1").unwrap();
    let t = kind.trans.take().unwrap();
    kind.trans = Some(Expr::and([t, Expr::field(false, NodeTerm::Param(1), "cs")]));
    let spec = Arc::new(spec);
    assert!(validate_symmetry(&base, &[2, 3]).unwrap().is_empty());
    assert!(!matches!(validate_symmetry(&spec, &[2, 3]), Ok(v) if v.is_empty()));
}

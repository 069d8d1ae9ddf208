//! Property checks shared by the property tests and the acceptance run.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use locus_core::chc::{encode_family, symmetry_reduce, ChcSystem, EncodeOptions, Encoding};
use locus_core::logic::{Node, NodeFormula, NodeTerm, Structure, StructureBuilder, Vocabulary};
use locus_core::program::{attach_program, ConcreteProgram};
use locus_core::suite;
use locus_core::symmetry::{
    automorphisms, canonical_form, generated_nodes, generated_substructure, iso_from_forms, locally_isomorphic,
    type_key,
};

pub const CASES: u32 = 1000;

/// Every property, by name.
pub type Property = fn(u32) -> Result<(), String>;

pub const ALL: [(&str, Property); 8] = [
    (
        "canonical_key_is_isomorphism_invariant",
        canonical_key_is_isomorphism_invariant,
    ),
    (
        "evaluation_is_isomorphism_invariant",
        evaluation_is_isomorphism_invariant,
    ),
    ("equal_keys_iff_locally_isomorphic", equal_keys_iff_locally_isomorphic),
    ("automorphisms_form_a_group", automorphisms_form_a_group),
    ("generated_substructures_are_closed", generated_substructures_are_closed),
    ("predicates_count_selected_types", predicates_count_selected_types),
    ("symmetry_reduce_is_idempotent", symmetry_reduce_is_idempotent),
    ("restriction_composes", restriction_composes),
];

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn vocab() -> Arc<Vocabulary> {
    static V: OnceLock<Arc<Vocabulary>> = OnceLock::new();
    V.get_or_init(|| Arc::new(Vocabulary::new(&[("c", 0), ("f", 1), ("g", 1)], &[("p", 1), ("q", 2)]).unwrap()))
        .clone()
}

/// Function and predicate tables of a structure over `vocab()`.
#[derive(Clone, Debug)]
struct Tables {
    n: usize,
    c: Node,
    f: Vec<Node>,
    g: Vec<Node>,
    p: Vec<bool>,
    q: Vec<bool>,
}

impl Tables {
    fn build(&self) -> Structure {
        let mut b = StructureBuilder::new(vocab(), (0..self.n).map(|i| format!("n{i}")).collect());
        b.set_fn("c", &[], self.c).unwrap();
        for i in 0..self.n {
            b.set_fn("f", &[i], self.f[i]).unwrap();
            b.set_fn("g", &[i], self.g[i]).unwrap();
            b.set_pred("p", &[i], self.p[i]).unwrap();
            for j in 0..self.n {
                b.set_pred("q", &[i, j], self.q[i * self.n + j]).unwrap();
            }
        }
        b.build().unwrap()
    }

    /// The copy in which node `i` is renamed `pi[i]`.
    fn permuted(&self, pi: &[Node]) -> Tables {
        let n = self.n;
        let mut t = Tables {
            n,
            c: pi[self.c],
            f: vec![0; n],
            g: vec![0; n],
            p: vec![false; n],
            q: vec![false; n * n],
        };
        for i in 0..n {
            t.f[pi[i]] = pi[self.f[i]];
            t.g[pi[i]] = pi[self.g[i]];
            t.p[pi[i]] = self.p[i];
            for j in 0..n {
                t.q[pi[i] * n + pi[j]] = self.q[i * n + j];
            }
        }
        t
    }
}

fn tables() -> impl Strategy<Value = Tables> {
    (1usize..=6).prop_flat_map(|n| {
        (
            Just(n),
            0..n,
            prop::collection::vec(0..n, n),
            prop::collection::vec(0..n, n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(prop::bool::weighted(0.2), n * n),
        )
            .prop_map(|(n, c, f, g, p, q)| Tables { n, c, f, g, p, q })
    })
}

/// Tables, a permutation of their nodes and a marked tuple.
fn permuted_case() -> impl Strategy<Value = (Tables, Vec<Node>, Vec<Node>)> {
    tables().prop_flat_map(|t| {
        let n = t.n;
        (
            Just(t),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            prop::collection::vec(0..n, 0..=2),
        )
    })
}

fn term() -> impl Strategy<Value = NodeTerm> {
    let v = vocab();
    let (c, f, g) = (
        v.function("c").unwrap(),
        v.function("f").unwrap(),
        v.function("g").unwrap(),
    );
    let leaf = prop_oneof![(0usize..2).prop_map(NodeTerm::Var), Just(NodeTerm::App(c, Vec::new())),];
    leaf.prop_recursive(3, 8, 1, move |inner| {
        prop_oneof![
            inner.clone().prop_map(move |t| NodeTerm::App(f, vec![t])),
            inner.prop_map(move |t| NodeTerm::App(g, vec![t])),
        ]
    })
}

fn formula() -> impl Strategy<Value = NodeFormula> {
    let v = vocab();
    let (p, q) = (v.predicate("p").unwrap(), v.predicate("q").unwrap());
    let atom = prop_oneof![
        (term(), term()).prop_map(|(a, b)| NodeFormula::Eq(a, b)),
        term().prop_map(move |a| NodeFormula::Pred(p, vec![a])),
        (term(), term()).prop_map(move |(a, b)| NodeFormula::Pred(q, vec![a, b])),
        any::<bool>().prop_map(NodeFormula::Const),
    ];
    atom.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| NodeFormula::Not(Box::new(x))),
            prop::collection::vec(inner.clone(), 0..3).prop_map(NodeFormula::And),
            prop::collection::vec(inner, 0..3).prop_map(NodeFormula::Or),
        ]
    })
}

fn is_isomorphism(a: &Structure, b: &Structure, map: &[Node]) -> bool {
    let voc = a.vocab();
    let injective = map.iter().collect::<BTreeSet<_>>().len() == a.len() && a.len() == b.len();
    injective
        && voc.functions().iter().enumerate().all(|(i, sym)| {
            let f = locus_core::logic::FnId(i);
            match sym.arity {
                0 => map[a.constant(f)] == b.constant(f),
                _ => a.nodes().all(|v| map[a.apply(f, &[v])] == b.apply(f, &[map[v]])),
            }
        })
        && voc.predicates().iter().enumerate().all(|(i, sym)| {
            let p = locus_core::logic::PredId(i);
            match sym.arity {
                1 => a.nodes().all(|v| a.holds(p, &[v]) == b.holds(p, &[map[v]])),
                _ => a
                    .nodes()
                    .all(|v| a.nodes().all(|w| a.holds(p, &[v, w]) == b.holds(p, &[map[v], map[w]]))),
            }
        })
}

pub fn canonical_key_is_isomorphism_invariant(cases: u32) -> Result<(), String> {
    run(cases, (permuted_case(),), |((t, pi, marks),)| {
        let (a, b) = (t.build(), t.permuted(&pi).build());
        let moved: Vec<Node> = marks.iter().map(|&v| pi[v]).collect();
        let fa = canonical_form(&a, &marks);
        let fb = canonical_form(&b, &moved);
        prop_assert_eq!(&fa.key, &fb.key);
        prop_assert_eq!(type_key(&a, &marks), type_key(&b, &moved));
        let map = iso_from_forms(&fa, &fb).expect("equal keys give an isomorphism");
        prop_assert!(is_isomorphism(&a, &b, &map));
        prop_assert!(marks.iter().zip(&moved).all(|(&u, &v)| map[u] == v));
        Ok(())
    })
}

pub fn evaluation_is_isomorphism_invariant(cases: u32) -> Result<(), String> {
    run(
        cases,
        (permuted_case(), formula(), prop::collection::vec(0usize..6, 2)),
        |((t, pi, _m), phi, env)| {
            let (a, b) = (t.build(), t.permuted(&pi).build());
            let env: Vec<Node> = env.iter().map(|&v| v % t.n).collect();
            let moved: Vec<Node> = env.iter().map(|&v| pi[v]).collect();
            prop_assert_eq!(phi.eval(&a, &env).unwrap(), phi.eval(&b, &moved).unwrap());
            Ok(())
        },
    )
}

pub fn equal_keys_iff_locally_isomorphic(cases: u32) -> Result<(), String> {
    // half of the pairs compare a structure with a permuted copy of itself
    let second = (permuted_case(), tables(), any::<bool>());
    run(
        cases,
        (tables(), second, prop::collection::vec(0usize..6, 1..=2)),
        |(s, ((c, pi, _), t, copy), u)| {
            let (s, t) = if copy { (c.clone(), c.permuted(&pi)) } else { (s, t) };
            let (a, b) = (s.build(), t.build());
            let u: Vec<Node> = u.iter().map(|&x| x % s.n).collect();
            let v: Vec<Node> = if copy {
                u.iter().map(|&x| pi[x]).collect()
            } else {
                u.iter().map(|&x| x % t.n).collect()
            };
            let same = type_key(&a, &u) == type_key(&b, &v);
            prop_assert_eq!(same, locally_isomorphic(&a, &u, &b, &v));
            if copy {
                prop_assert!(same);
            }
            Ok(())
        },
    )
}

pub fn automorphisms_form_a_group(cases: u32) -> Result<(), String> {
    run(cases, (tables(),), |(t,)| {
        let s = t.build();
        let auts: BTreeSet<Vec<Node>> = automorphisms(&s, &[]).into_iter().collect();
        let id: Vec<Node> = s.nodes().collect();
        prop_assert!(auts.contains(&id));
        for f in &auts {
            prop_assert!(is_isomorphism(&s, &s, f));
            let mut inv = vec![0; f.len()];
            for (i, &x) in f.iter().enumerate() {
                inv[x] = i;
            }
            prop_assert!(auts.contains(&inv));
            for g in &auts {
                let fg: Vec<Node> = g.iter().map(|&x| f[x]).collect();
                prop_assert!(auts.contains(&fg));
            }
        }
        Ok(())
    })
}

pub fn generated_substructures_are_closed(cases: u32) -> Result<(), String> {
    run(
        cases,
        (tables(), prop::collection::vec(0usize..6, 0..=3)),
        |(t, seeds)| {
            let s = t.build();
            let seeds: Vec<Node> = seeds.iter().map(|&v| v % t.n).collect();
            let sub = generated_substructure(&s, &seeds);
            let nodes: BTreeSet<Node> = sub.inclusion.iter().copied().collect();
            prop_assert!(s.is_closed(&nodes));
            prop_assert!(seeds.iter().all(|v| nodes.contains(v)));
            prop_assert!(nodes.contains(&t.c));
            prop_assert_eq!(&nodes, &generated_nodes(&s, &seeds));
            Ok(())
        },
    )
}

/// Encodings of every bundled benchmark under four option sets.
fn encodings() -> &'static Vec<Encoding> {
    static E: OnceLock<Vec<Encoding>> = OnceLock::new();
    E.get_or_init(|| {
        let mut out = Vec::new();
        for b in suite::bundled().into_iter().filter(|b| !b.buggy) {
            let spec = b.load().unwrap();
            for label in ["baseline", "opn", "dpg", "opn+dpg+sym"] {
                let o = EncodeOptions::from_label(label).unwrap();
                out.push(encode_family(&spec, b.width, o).unwrap());
            }
        }
        out
    })
}

fn sub_system(sys: &ChcSystem, pick: &[usize]) -> ChcSystem {
    ChcSystem {
        predicates: sys.predicates.clone(),
        clauses: pick
            .iter()
            .map(|&i| sys.clauses[i % sys.clauses.len()].clone())
            .collect(),
    }
}

/// Programs of the bundled suite on small members.
fn program(which: usize, n: usize) -> ConcreteProgram {
    let names = ["simple-pipeline", "ring-token", "star-mutex", "line-token", "ring-swap"];
    let spec = suite::find(names[which % names.len()]).unwrap().load().unwrap();
    let n = spec.family.min_index + n % 3;
    attach_program(spec.clone(), Arc::new(spec.family.instantiate(n).unwrap())).unwrap()
}

fn same_program(a: &ConcreteProgram, b: &ConcreteProgram) -> bool {
    *a.topology == *b.topology
        && a.kinds == b.kinds
        && a.topology
            .nodes()
            .all(|v| a.transition(v).unwrap() == b.transition(v).unwrap() && a.init(v).unwrap() == b.init(v).unwrap())
}

pub fn predicates_count_selected_types(cases: u32) -> Result<(), String> {
    run(cases, (0usize..1000,), |(i,)| {
        let enc = &encodings()[i % encodings().len()];
        let selected = enc.chi.iter().filter(|&&c| c).count();
        prop_assert_eq!(enc.system.predicates.len(), selected);
        for (r, p) in enc.pred_of_type.iter().enumerate() {
            prop_assert_eq!(p.is_some(), enc.chi[r]);
        }
        if !enc.options.opn && !enc.options.dpg {
            prop_assert_eq!(selected, enc.types.len());
        }
        Ok(())
    })
}

pub fn symmetry_reduce_is_idempotent(cases: u32) -> Result<(), String> {
    run(
        cases,
        (0usize..1000, prop::collection::vec(0usize..10_000, 0..24)),
        |(i, pick)| {
            let enc = &encodings()[i % encodings().len()];
            let sys = sub_system(&enc.unreduced, &pick);
            let once = symmetry_reduce(&sys);
            prop_assert_eq!(&symmetry_reduce(&once), &once);
            prop_assert!(once.clauses.len() <= sys.clauses.len());
            Ok(())
        },
    )
}

pub fn restriction_composes(cases: u32) -> Result<(), String> {
    run(
        cases,
        (
            0usize..5,
            0usize..3,
            prop::collection::vec(0usize..64, 1..4),
            prop::collection::vec(0usize..4, 1..3),
        ),
        |(which, n, outer, inner)| {
            let prog = program(which, n);
            let len = prog.len();
            let outer: Vec<Node> = outer.iter().map(|&v| v % len).collect();
            let inner: Vec<Node> = inner.iter().map(|&i| outer[i % outer.len()]).collect();
            let s = generated_nodes(&prog.topology, &outer);
            let s2 = generated_nodes(&prog.topology, &inner);
            prop_assert!(s2.is_subset(&s));
            let (p_s, list) = prog.subprogram(&s).unwrap();
            let local: BTreeSet<Node> = s2.iter().map(|v| list.iter().position(|u| u == v).unwrap()).collect();
            let (twice, _) = p_s.subprogram(&local).unwrap();
            let (once, _) = prog.subprogram(&s2).unwrap();
            prop_assert!(same_program(&twice, &once));
            let (whole, _) = prog.subprogram(&prog.topology.nodes().collect()).unwrap();
            prop_assert!(same_program(&whole, &prog));
            Ok(())
        },
    )
}

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::backend::{check_valid_batch, counter_model, SolverConfig, Validity};
use crate::logic::{structure_tuples as tuples, Expr, GlobalState, LogicError, Node, Structure, Var};
use crate::program::{attach_program, family_types, ConcreteProgram};
use crate::symmetry::canonical_form;

use super::assemble::AshcroftInvariant;
use super::InvariantError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TripleKind {
    /// `{init} eps {Phi(w)}`
    Init,
    /// `{Phi} v0 {Phi(w)}`
    Cont,
    /// `{Phi} eps {not error(w)}`
    Safe,
}

impl fmt::Display for TripleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TripleKind::Init => write!(f, "init"),
            TripleKind::Cont => write!(f, "cont"),
            TripleKind::Safe => write!(f, "safe"),
        }
    }
}

/// `{pre} command {post}` on one concrete program. `pre` and `post` are
/// over unprimed field accesses of concrete nodes; for a command the post
/// condition is read in the successor state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoareTriple {
    pub kind: TripleKind,
    pub command: Option<Node>,
    /// The tuple the post condition is about.
    pub tuple: Vec<Node>,
    pub pre: Expr,
    pub post: Expr,
}

impl HoareTriple {
    pub fn describe(&self, s: &Structure) -> String {
        let w: Vec<&str> = self.tuple.iter().map(|&v| s.label(v)).collect();
        match self.command {
            Some(v) => format!("{} triple, {} moves, post at ({})", self.kind, s.label(v), w.join(" ")),
            None => format!("{} triple at ({})", self.kind, w.join(" ")),
        }
    }

    /// Marks identifying the triple up to automorphisms of the program.
    fn marks(&self) -> Vec<Node> {
        self.command.iter().copied().chain(self.tuple.iter().copied()).collect()
    }
}

/// All initialization, continuation and safety triples of `prog` for `inv`:
/// one of each per post tuple and command node.
pub fn hoare_triples(prog: &ConcreteProgram, inv: &AshcroftInvariant) -> Result<Vec<HoareTriple>, InvariantError> {
    let s = &prog.topology;
    let k = inv.width();
    let init = Expr::and(
        prog.topology
            .nodes()
            .map(|v| prog.init(v))
            .collect::<Result<Vec<_>, _>>()?,
    );
    let phi = inv.instance_formula(s, false)?;
    let mut out = Vec::new();
    for w in tuples(s.len(), k) {
        let post = inv.at(s, &w, false)?;
        out.push(HoareTriple {
            kind: TripleKind::Init,
            command: None,
            tuple: w.clone(),
            pre: init.clone(),
            post: post.clone(),
        });
        for v0 in s.nodes() {
            out.push(HoareTriple {
                kind: TripleKind::Cont,
                command: Some(v0),
                tuple: w.clone(),
                pre: phi.clone(),
                post: post.clone(),
            });
        }
    }
    if let Some(m) = prog.spec.error_arity() {
        for w in tuples(s.len(), m) {
            out.push(HoareTriple {
                kind: TripleKind::Safe,
                command: None,
                tuple: w.clone(),
                pre: phi.clone(),
                post: Expr::not(prog.error(&w)?),
            });
        }
    }
    Ok(out)
}

fn var_name(prog: &ConcreteProgram, v: Node, field: &str, primed: bool) -> String {
    format!("{}_{}_{}", if primed { "xp" } else { "x" }, prog.label(v), field)
}

/// The pure formula whose validity is the validity of `t`.
fn entailment(t: &HoareTriple, prog: &ConcreteProgram) -> Result<Expr, InvariantError> {
    let f = match t.command {
        None => Expr::implies(t.pre.clone(), t.post.clone()),
        Some(v0) if !prog.is_process(v0) => Expr::Bool(true),
        Some(v0) => {
            let all = prog.topology.nodes().collect();
            let step = prog.global_transition(v0, &all)?;
            Expr::implies(Expr::and([t.pre.clone(), step]), t.post.prime()?)
        }
    };
    let f = f.subst_fields(&mut |v, field, primed| {
        let sort = prog.field_sort(v, field).ok_or_else(|| LogicError::UnknownField {
            node: prog.label(v).to_string(),
            field: field.to_string(),
        })?;
        Ok(Var::new(var_name(prog, v, field, primed), sort))
    })?;
    Ok(f)
}

/// States falsifying a triple: the pre-state and, for a command, the
/// post-state. Fields the solver left unconstrained are omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub pre: GlobalState,
    pub post: Option<GlobalState>,
}

impl Counterexample {
    fn from_values(
        prog: &ConcreteProgram,
        command: Option<Node>,
        values: &std::collections::BTreeMap<String, crate::logic::Value>,
    ) -> Self {
        let mut pre = GlobalState::new();
        let mut post = GlobalState::new();
        for v in prog.topology.nodes() {
            for (f, _) in prog.fields(v) {
                if let Some(x) = values.get(&var_name(prog, v, f, false)) {
                    pre.set(v, f, *x);
                }
                if let Some(x) = values.get(&var_name(prog, v, f, true)) {
                    post.set(v, f, *x);
                }
            }
        }
        Counterexample {
            pre,
            post: command.map(|_| post),
        }
    }

    pub fn render(&self, s: &Structure) -> String {
        let show = |st: &GlobalState| {
            st.iter()
                .map(|((v, f), x)| format!("{}.{}={}", s.label(*v), f, x))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match &self.post {
            Some(p) => format!("pre: {}; post: {}", show(&self.pre), show(p)),
            None => format!("state: {}", show(&self.pre)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TripleVerdict {
    Valid,
    /// Carries a counterexample when one was requested and obtained.
    Invalid(Option<Counterexample>),
    Undetermined(String),
}

/// Decides one triple with a single validity query; an invalid triple comes
/// with the solver's counterexample.
pub fn check_triple(
    t: &HoareTriple,
    prog: &ConcreteProgram,
    cfg: &SolverConfig,
) -> Result<TripleVerdict, InvariantError> {
    Ok(check_triples(std::slice::from_ref(t), prog, cfg)?.remove(0))
}

/// Decides triples in batches. Triples that are images of one another under
/// an automorphism of the program are decided once. Only the first invalid
/// triple gets a counterexample.
pub fn check_triples(
    triples: &[HoareTriple],
    prog: &ConcreteProgram,
    cfg: &SolverConfig,
) -> Result<Vec<TripleVerdict>, InvariantError> {
    let mut class_of: HashMap<(TripleKind, Vec<u8>), usize> = HashMap::new();
    let mut reps = Vec::new();
    let mut formulas = Vec::new();
    let mut rep_of = Vec::with_capacity(triples.len());
    for t in triples {
        let key = (t.kind, canonical_form(&prog.topology, &t.marks()).key);
        let idx = match class_of.get(&key) {
            Some(&i) => i,
            None => {
                let i = reps.len();
                class_of.insert(key, i);
                reps.push(t);
                formulas.push(entailment(t, prog)?);
                i
            }
        };
        rep_of.push(idx);
    }
    let verdicts = check_valid_batch(&formulas, cfg)?;
    let mut results: Vec<TripleVerdict> = Vec::with_capacity(reps.len());
    let mut explained = false;
    for (i, v) in verdicts.into_iter().enumerate() {
        results.push(match v {
            Validity::Valid => TripleVerdict::Valid,
            Validity::Undetermined(why) => TripleVerdict::Undetermined(why),
            Validity::Invalid if explained => TripleVerdict::Invalid(None),
            Validity::Invalid => {
                explained = true;
                let cex = counter_model(&formulas[i], cfg)?
                    .map(|vals| Counterexample::from_values(prog, reps[i].command, &vals));
                TripleVerdict::Invalid(cex)
            }
        });
    }
    Ok(rep_of.into_iter().map(|i| results[i].clone()).collect())
}

/// Which programs [`check_family`] checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FamilyOptions {
    /// Also check the family members within the enumeration bounds of width
    /// `k + 1` directly, not only their generated substructures.
    pub instances: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyFailure {
    pub member: String,
    pub triple: String,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyVerdict {
    Invariant,
    NotInvariant(FamilyFailure),
    Undetermined(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyCheck {
    pub verdict: FamilyVerdict,
    /// Names of the programs checked.
    pub members: Vec<String>,
    pub triples: usize,
}

/// The programs whose triples decide the invariant for the whole family: the
/// substructures generated by (k+1)-tuples, and by error tuples if errors are
/// wider, up to isomorphism. For a DPG invariant only tuples of processes
/// with at least k distinct ones generate members.
pub fn basis_programs(
    inv: &AshcroftInvariant,
    opts: FamilyOptions,
) -> Result<Vec<(String, ConcreteProgram)>, InvariantError> {
    let spec = &inv.spec;
    let family = &spec.family;
    let k = inv.width();
    let dpg = inv.options.dpg;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut widths = vec![k + 1];
    if let Some(m) = spec.error_arity().filter(|&m| m > k + 1 && !dpg) {
        widths.push(m);
    }
    for width in widths {
        for t in family_types(family, width)?.iter() {
            let w = &t.witness;
            if dpg {
                let distinct: BTreeSet<Node> = w.tuple.iter().copied().collect();
                if distinct.len() < k || !w.tuple.iter().all(|&v| family.is_process(&w.structure, v)) {
                    continue;
                }
            }
            let s = &t.neighbourhood.structure;
            if seen.insert(canonical_form(s, &[]).key) {
                let labels: Vec<&str> = w.tuple.iter().map(|&v| w.structure.label(v)).collect();
                let name = format!("N({}) in member {}", labels.join(" "), w.instance);
                out.push((name, attach_program(spec.clone(), Arc::new(s.clone()))?));
            }
        }
    }
    if opts.instances {
        for (n, s) in family.instances(k + 1)? {
            if seen.insert(canonical_form(&s, &[]).key) {
                out.push((format!("member {n}"), attach_program(spec.clone(), s)?));
            }
        }
    }
    Ok(out)
}

/// Node sets generated by k distinct processes of `prog`.
fn process_covers(prog: &ConcreteProgram, k: usize) -> Vec<BTreeSet<Node>> {
    let procs = prog.processes();
    let mut out: Vec<BTreeSet<Node>> = Vec::new();
    for idx in tuples(procs.len(), k) {
        let distinct: BTreeSet<usize> = idx.iter().copied().collect();
        if distinct.len() < k {
            continue;
        }
        let u: Vec<Node> = idx.iter().map(|&i| procs[i]).collect();
        let set = prog.neighbourhood(&u);
        if !out.contains(&set) {
            out.push(set);
        }
    }
    out
}

/// Checks every triple of every basis program. Stops at the first invalid
/// triple; an undetermined triple makes the verdict undetermined unless an
/// invalid one is found. For a DPG invariant, safety is required only of
/// error tuples inside the substructure generated by k distinct processes.
pub fn check_family(
    inv: &AshcroftInvariant,
    opts: FamilyOptions,
    cfg: &SolverConfig,
) -> Result<FamilyCheck, InvariantError> {
    let programs = basis_programs(inv, opts)?;
    let mut total = 0;
    let mut undetermined = None;
    let members: Vec<String> = programs.iter().map(|(n, _)| n.clone()).collect();
    for (name, prog) in &programs {
        let mut triples = hoare_triples(prog, inv)?;
        if inv.options.dpg {
            let covers = process_covers(prog, inv.width());
            triples
                .retain(|t| t.kind != TripleKind::Safe || covers.iter().any(|c| t.tuple.iter().all(|v| c.contains(v))));
        }
        total += triples.len();
        tracing::debug!(program = %name, triples = triples.len(), "checking triples");
        let verdicts = check_triples(&triples, prog, cfg)?;
        for (t, v) in triples.iter().zip(verdicts) {
            match v {
                TripleVerdict::Valid => {}
                TripleVerdict::Invalid(cex) => {
                    return Ok(FamilyCheck {
                        verdict: FamilyVerdict::NotInvariant(FamilyFailure {
                            member: name.clone(),
                            triple: t.describe(&prog.topology),
                            counterexample: cex.map(|c| c.render(&prog.topology)),
                        }),
                        members,
                        triples: total,
                    });
                }
                TripleVerdict::Undetermined(why) => {
                    undetermined.get_or_insert_with(|| format!("{} in {}: {}", t.describe(&prog.topology), name, why));
                }
            }
        }
    }
    let verdict = match undetermined {
        Some(why) => FamilyVerdict::Undetermined(why),
        None => FamilyVerdict::Invariant,
    };
    Ok(FamilyCheck {
        verdict,
        members,
        triples: total,
    })
}

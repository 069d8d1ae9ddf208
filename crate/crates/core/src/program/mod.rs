//! Topology families, program specifications and concrete programs.

mod concrete;
mod family;
mod spec;

pub use concrete::{attach_program, ConcreteProgram, Transition};
pub use family::{FamilyDescriptor, Topology};
pub use spec::{ErrorSpec, FieldLayout, KindSpec, ProgramSpec, Shape};

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::logic::{Expr, FieldRef, LogicError, Node, NodeTerm, Value};
use crate::sexp::SexpError;
use crate::symmetry::{find_local_isomorphism, generated_nodes, SymmetryError, TypeTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("parse error at {0}")]
    Parse(#[from] SexpError),
    #[error("family: {0}")]
    Family(String),
    #[error("specification: {0}")]
    Spec(String),
    #[error("node `{0}` has a 1-type without a kind")]
    UnknownNodeType(String),
    #[error("node `{0}` has no transition")]
    NotAProcess(String),
    #[error("node set is not closed under the topology functions")]
    NotClosed,
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

/// Enumerates the k-types of a family over its declared bounds.
pub fn family_types(family: &FamilyDescriptor, k: usize) -> Result<TypeTable, ProgramError> {
    Ok(TypeTable::enumerate(&family.instances(k)?, k)?)
}

/// Outcome of re-enumerating types with two more members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub width: usize,
    pub bounds: Vec<usize>,
    pub extended: Vec<usize>,
    pub base_count: usize,
    pub extended_count: usize,
    pub stable: bool,
}

/// Checks that enumeration bounds are large enough: adding the next two
/// members must not reveal new k-types.
pub fn check_bounds_stable(family: &FamilyDescriptor, k: usize) -> Result<StabilityReport, ProgramError> {
    let bounds = family.bounds(k);
    let top = bounds.iter().copied().max().unwrap_or(family.min_index);
    let mut extended = bounds.clone();
    for n in [top + 1, top + 2] {
        if family.contains_index(n) && !extended.contains(&n) {
            extended.push(n);
        }
    }
    let inst = |idx: &[usize]| -> Result<Vec<(usize, Arc<crate::logic::Structure>)>, ProgramError> {
        idx.iter().map(|&n| Ok((n, Arc::new(family.instantiate(n)?)))).collect()
    };
    let base = TypeTable::enumerate(&inst(&bounds)?, k)?;
    let ext = TypeTable::enumerate(&inst(&extended)?, k)?;
    Ok(StabilityReport {
        width: k,
        base_count: base.len(),
        extended_count: ext.len(),
        stable: base.keys() == ext.keys(),
        bounds,
        extended,
    })
}

/// A place where per-node behaviour differs between locally isomorphic nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryViolation {
    pub instance: usize,
    pub node: String,
    pub reference: String,
    pub part: &'static str,
}

/// Checks that nodes of equal 1-type carry the same behaviour up to the local
/// isomorphism between their neighbourhoods, on the given members.
pub fn validate_symmetry(spec: &Arc<ProgramSpec>, samples: &[usize]) -> Result<Vec<SymmetryViolation>, ProgramError> {
    let mut reference: HashMap<usize, (usize, ConcreteProgram, Node)> = HashMap::new();
    let mut out = Vec::new();
    for &n in samples {
        let prog = attach_program(spec.clone(), Arc::new(spec.family.instantiate(n)?))?;
        for v in prog.topology.nodes() {
            let r = spec.node_types().classify(&prog.topology, &[v])?;
            let Some((rn, rprog, rv)) = reference.get(&r) else {
                reference.insert(r, (n, prog.clone(), v));
                continue;
            };
            let iso = find_local_isomorphism(&prog.topology, &[v], &rprog.topology, &[*rv])
                .ok_or(SymmetryError::UnknownType)?;
            let map = |u: Node| iso.apply(u).unwrap_or(usize::MAX);
            let mut check = |part: &'static str, a: Option<Expr>, b: Option<Expr>| {
                let a = a.map(|e| e.map_nodes(&map));
                if a != b {
                    out.push(SymmetryViolation {
                        instance: n,
                        node: prog.label(v).to_string(),
                        reference: format!("{} in member {}", rprog.label(*rv), rn),
                        part,
                    });
                }
            };
            check(
                "transition",
                prog.transition(v)?.map(|t| t.relation),
                rprog.transition(*rv)?.map(|t| t.relation),
            );
            check("init", Some(prog.init(v)?), Some(rprog.init(*rv)?));
            if let Some(m) = spec.error_arity() {
                check(
                    "error",
                    Some(prog.error(&vec![v; m])?),
                    Some(rprog.error(&vec![*rv; m])?),
                );
            }
        }
    }
    Ok(out)
}

/// Result of the extensibility check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extensibility {
    /// Initial states of substructures extend to the whole member.
    Holds(String),
    /// A substructure initial state with no extension.
    Fails { instance: usize, substructure: Vec<String> },
    /// Not decidable by the built-in checks.
    Unknown(String),
}

/// Checks that initial states are extensible.
///
/// Per-node initial conditions (each mentioning only the node's own fields)
/// pass syntactically; otherwise boolean programs are checked by enumeration
/// on the given members.
pub fn check_extensible(spec: &Arc<ProgramSpec>, samples: &[usize]) -> Result<Extensibility, ProgramError> {
    if spec.kinds.iter().all(|k| spec::mentions_only_self(&k.init)) {
        return Ok(Extensibility::Holds("initial conditions are per-node".into()));
    }
    if !spec.has_bool_fields_only() {
        return Ok(Extensibility::Unknown(
            "initial conditions relate several nodes and fields are not all boolean".into(),
        ));
    }
    for &n in samples {
        let prog = attach_program(spec.clone(), Arc::new(spec.family.instantiate(n)?))?;
        let slots: Vec<(Node, String)> = prog
            .topology
            .nodes()
            .flat_map(|v| prog.fields(v).iter().map(move |(f, _)| (v, f.clone())))
            .collect();
        if slots.len() > 20 {
            return Ok(Extensibility::Unknown(format!(
                "member {n} has too many boolean fields"
            )));
        }
        let inits: Vec<(Node, Expr)> = prog
            .topology
            .nodes()
            .map(|v| Ok((v, prog.init(v)?)))
            .collect::<Result<_, ProgramError>>()?;
        let eval = |e: &Expr, bits: u32| -> Result<bool, LogicError> {
            let look = |r: &FieldRef| -> Result<Value, LogicError> {
                let NodeTerm::Param(u) = r.node else {
                    return Err(LogicError::Unresolved);
                };
                let i = slots
                    .iter()
                    .position(|(x, f)| *x == u && *f == r.field)
                    .ok_or(LogicError::Unresolved)?;
                Ok(Value::Bool(bits >> i & 1 == 1))
            };
            Ok(e.eval(&look, &|v| Err(LogicError::UnboundVar(v.name.clone())))? == Value::Bool(true))
        };
        let all_states = 1u32 << slots.len();
        let mut full_init = Vec::new();
        for st in 0..all_states {
            let mut ok = true;
            for (_, e) in &inits {
                if !eval(e, st)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                full_init.push(st);
            }
        }
        let nodes: Vec<Node> = prog.topology.nodes().collect();
        let mut seen: BTreeSet<BTreeSet<Node>> = BTreeSet::new();
        for a in 0..nodes.len() {
            for b in a..nodes.len() {
                let sub = generated_nodes(&prog.topology, &[nodes[a], nodes[b]]);
                if !seen.insert(sub.clone()) {
                    continue;
                }
                let mask: u32 = slots
                    .iter()
                    .enumerate()
                    .filter(|(_, (v, _))| sub.contains(v))
                    .map(|(i, _)| 1u32 << i)
                    .sum();
                let extendable: BTreeSet<u32> = full_init.iter().map(|s| s & mask).collect();
                for st in 0..all_states {
                    if st & !mask != 0 {
                        continue;
                    }
                    let mut ok = true;
                    for (v, e) in &inits {
                        if sub.contains(v) && !eval(e, st)? {
                            ok = false;
                            break;
                        }
                    }
                    if ok && !extendable.contains(&st) {
                        return Ok(Extensibility::Fails {
                            instance: n,
                            substructure: sub.iter().map(|&v| prog.label(v).to_string()).collect(),
                        });
                    }
                }
            }
        }
    }
    Ok(Extensibility::Holds("checked by enumeration".into()))
}

/// Checks the resource/process modeling rules on the given members: no
/// resource sees a process, and every resource lies in some process's
/// neighbourhood. Returns the offending node labels.
pub fn check_modeling_rules(family: &FamilyDescriptor, samples: &[usize]) -> Result<Vec<String>, ProgramError> {
    let mut bad = Vec::new();
    for &n in samples {
        let s = family.instantiate(n)?;
        let procs: Vec<Node> = s.nodes().filter(|&v| family.is_process(&s, v)).collect();
        let mut covered = BTreeSet::new();
        for &p in &procs {
            covered.extend(generated_nodes(&s, &[p]));
        }
        for v in s.nodes().filter(|&v| !family.is_process(&s, v)) {
            let sees_process = generated_nodes(&s, &[v]).iter().any(|&u| family.is_process(&s, u));
            if sees_process || (!procs.is_empty() && !covered.contains(&v)) {
                bad.push(format!("{} in member {n}", s.label(v)));
            }
        }
    }
    Ok(bad)
}

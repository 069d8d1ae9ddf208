use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::logic::{structure_tuples as tuples, Expr, GlobalState, LogicError, Node, NodeTerm, Sort, Value};
use crate::program::ConcreteProgram;

use super::assemble::AshcroftInvariant;
use super::InvariantError;

pub const DEFAULT_MAX_STATES: usize = 1 << 20;

/// Global states of a program with boolean data, as bit vectors.
pub struct StateSpace<'p> {
    prog: &'p ConcreteProgram,
    /// `(node, field)` of each bit.
    bits: Vec<(Node, String)>,
    index: Vec<HashMap<String, usize>>,
}

/// A program transition prepared for enumeration.
struct Step {
    node: Node,
    relation: Expr,
    /// Bits the relation may change.
    modified: Vec<usize>,
}

impl<'p> StateSpace<'p> {
    pub fn new(prog: &'p ConcreteProgram) -> Result<Self, InvariantError> {
        let mut bits = Vec::new();
        let mut index = vec![HashMap::new(); prog.len()];
        for v in prog.topology.nodes() {
            for (f, sort) in prog.fields(v) {
                if *sort != Sort::Bool {
                    return Err(InvariantError::NonBoolean(f.clone()));
                }
                index[v].insert(f.clone(), bits.len());
                bits.push((v, f.clone()));
            }
        }
        if bits.len() >= 63 {
            return Err(InvariantError::BudgetExceeded(usize::MAX));
        }
        Ok(StateSpace { prog, bits, index })
    }

    pub fn bits(&self) -> usize {
        self.bits.len()
    }

    pub fn decode(&self, state: u64) -> GlobalState {
        let mut g = GlobalState::new();
        for (i, (v, f)) in self.bits.iter().enumerate() {
            g.set(*v, f, Value::Bool(state >> i & 1 == 1));
        }
        g
    }

    fn bit(&self, r: &crate::logic::FieldRef) -> Result<usize, LogicError> {
        let NodeTerm::Param(v) = r.node else {
            return Err(LogicError::Unresolved);
        };
        self.index
            .get(v)
            .and_then(|m| m.get(&r.field))
            .copied()
            .ok_or_else(|| LogicError::UnknownField {
                node: self.prog.label(v).to_string(),
                field: r.field.clone(),
            })
    }

    fn holds(&self, e: &Expr, pre: u64, post: u64) -> Result<bool, InvariantError> {
        let v = e.eval(
            &|r| {
                let i = self.bit(r)?;
                let s = if r.primed { post } else { pre };
                Ok(Value::Bool(s >> i & 1 == 1))
            },
            &|v| Err(LogicError::UnboundVar(v.name.clone())),
        )?;
        match v {
            Value::Bool(b) => Ok(b),
            Value::Int(_) => Err(LogicError::SortMismatch("formula evaluates to Int".into()).into()),
        }
    }

    fn max_bit(&self, e: &Expr) -> Result<Option<usize>, InvariantError> {
        let mut m = None;
        for r in e.fields() {
            m = m.max(Some(self.bit(&r)?));
        }
        Ok(m)
    }

    /// All states satisfying the initial condition of every node.
    pub fn init_states(&self, max_states: usize) -> Result<Vec<u64>, InvariantError> {
        let n = self.bits.len();
        // at_depth[d]: conjuncts decided once bits 0..d are assigned.
        let mut at_depth: Vec<Vec<Expr>> = vec![Vec::new(); n + 1];
        for v in self.prog.topology.nodes() {
            let init = self.prog.init(v)?;
            let parts = match init {
                Expr::And(xs) => xs,
                e => vec![e],
            };
            for p in parts {
                let d = self.max_bit(&p)?.map_or(0, |b| b + 1);
                at_depth[d].push(p);
            }
        }
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0u64)];
        while let Some((d, s)) = stack.pop() {
            let mut ok = true;
            for c in &at_depth[d] {
                if !self.holds(c, s, s)? {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            if d == n {
                out.push(s);
                if out.len() > max_states {
                    return Err(InvariantError::BudgetExceeded(max_states));
                }
                continue;
            }
            stack.push((d + 1, s | 1 << d));
            stack.push((d + 1, s));
        }
        out.sort_unstable();
        Ok(out)
    }

    fn steps(&self) -> Result<Vec<Step>, InvariantError> {
        let mut out = Vec::new();
        for v in self.prog.processes() {
            let Some(t) = self.prog.transition(v)? else { continue };
            let mut modified: Vec<usize> = Vec::new();
            for r in t.relation.fields().iter().filter(|r| r.primed) {
                let b = self.bit(r)?;
                if !modified.contains(&b) {
                    modified.push(b);
                }
            }
            modified.sort_unstable();
            out.push(Step {
                node: v,
                relation: t.relation,
                modified,
            });
        }
        Ok(out)
    }

    fn successors(&self, step: &Step, s: u64, out: &mut Vec<u64>) -> Result<(), InvariantError> {
        out.clear();
        let clear: u64 = step.modified.iter().fold(!0, |m, &b| m & !(1 << b));
        for choice in 0u64..1 << step.modified.len() {
            let mut t = s & clear;
            for (j, &b) in step.modified.iter().enumerate() {
                if choice >> j & 1 == 1 {
                    t |= 1 << b;
                }
            }
            if self.holds(&step.relation, s, t)? {
                out.push(t);
            }
        }
        Ok(())
    }

    fn error_conditions(&self) -> Result<Vec<(Vec<Node>, Expr)>, InvariantError> {
        let mut out = Vec::new();
        if let Some(m) = self.prog.spec.error_arity() {
            for w in tuples(self.prog.len(), m) {
                let e = self.prog.error(&w)?;
                if !e.is_false() {
                    out.push((w, e));
                }
            }
        }
        Ok(out)
    }
}

/// Outcome of exhaustive exploration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reach {
    Safe {
        states: usize,
    },
    /// A shortest path to an error state: each step names the node that
    /// moved (none for the initial state).
    Unsafe {
        trace: Vec<(Option<Node>, GlobalState)>,
        error_at: Vec<Node>,
    },
    /// No error within the depth bound; deeper states were not explored.
    NoErrorWithin {
        depth: usize,
        states: usize,
    },
}

/// Breadth-first search over global states from every initial state.
pub fn explicit_reach(prog: &ConcreteProgram, max_states: usize) -> Result<Reach, InvariantError> {
    explicit_reach_within(prog, max_states, None)
}

/// [`explicit_reach`] stopping after `max_depth` steps, if given.
pub fn explicit_reach_within(
    prog: &ConcreteProgram,
    max_states: usize,
    max_depth: Option<usize>,
) -> Result<Reach, InvariantError> {
    let space = StateSpace::new(prog)?;
    let steps = space.steps()?;
    let errors = space.error_conditions()?;
    let mut parent: HashMap<u64, Option<(u64, Node)>> = HashMap::new();
    let mut queue = VecDeque::new();
    for s in space.init_states(max_states)? {
        parent.insert(s, None);
        queue.push_back((s, 0));
    }
    let mut succ = Vec::new();
    let mut cut = false;
    while let Some((s, depth)) = queue.pop_front() {
        for (w, e) in &errors {
            if space.holds(e, s, s)? {
                let mut trace = Vec::new();
                let mut cur = s;
                loop {
                    match parent[&cur] {
                        Some((p, v)) => {
                            trace.push((Some(v), space.decode(cur)));
                            cur = p;
                        }
                        None => {
                            trace.push((None, space.decode(cur)));
                            break;
                        }
                    }
                }
                trace.reverse();
                return Ok(Reach::Unsafe {
                    trace,
                    error_at: w.clone(),
                });
            }
        }
        if max_depth.is_some_and(|d| depth >= d) {
            cut = true;
            continue;
        }
        for step in &steps {
            space.successors(step, s, &mut succ)?;
            for &t in &succ {
                if let std::collections::hash_map::Entry::Vacant(slot) = parent.entry(t) {
                    slot.insert(Some((s, step.node)));
                    if parent.len() > max_states {
                        return Err(InvariantError::BudgetExceeded(max_states));
                    }
                    queue.push_back((t, depth + 1));
                }
            }
        }
    }
    if cut {
        return Ok(Reach::NoErrorWithin {
            depth: max_depth.unwrap_or(0),
            states: parent.len(),
        });
    }
    Ok(Reach::Safe { states: parent.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    Initialization,
    Continuation,
    Safety,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Initialization => write!(f, "initialization"),
            Condition::Continuation => write!(f, "continuation"),
            Condition::Safety => write!(f, "safety"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExplicitVerdict {
    Invariant {
        states: usize,
    },
    Fails {
        condition: Condition,
        state: GlobalState,
        /// The moving node and successor, for continuation.
        next: Option<(Node, GlobalState)>,
        /// The error tuple, for safety.
        tuple: Vec<Node>,
    },
}

/// Checks initialization, continuation and safety of `inv` on `prog` by
/// enumerating every global state.
pub fn check_invariant_explicit(
    inv: &AshcroftInvariant,
    prog: &ConcreteProgram,
    max_states: usize,
) -> Result<ExplicitVerdict, InvariantError> {
    let space = StateSpace::new(prog)?;
    let total = 1usize << space.bits();
    if total > max_states {
        return Err(InvariantError::BudgetExceeded(max_states));
    }
    let phi = inv.instance_formula(&prog.topology, false)?;
    let mut sat = Vec::with_capacity(total);
    for s in 0..total as u64 {
        sat.push(space.holds(&phi, s, s)?);
    }
    let fails = |condition, s: u64, next: Option<(Node, u64)>, tuple: Vec<Node>| ExplicitVerdict::Fails {
        condition,
        state: space.decode(s),
        next: next.map(|(v, t)| (v, space.decode(t))),
        tuple,
    };
    for s in space.init_states(max_states)? {
        if !sat[s as usize] {
            return Ok(fails(Condition::Initialization, s, None, Vec::new()));
        }
    }
    let steps = space.steps()?;
    let errors = space.error_conditions()?;
    let mut succ = Vec::new();
    for s in 0..total as u64 {
        if !sat[s as usize] {
            continue;
        }
        for (w, e) in &errors {
            if space.holds(e, s, s)? {
                return Ok(fails(Condition::Safety, s, None, w.clone()));
            }
        }
        for step in &steps {
            space.successors(step, s, &mut succ)?;
            if let Some(&t) = succ.iter().find(|&&t| !sat[t as usize]) {
                return Ok(fails(Condition::Continuation, s, Some((step.node, t)), Vec::new()));
            }
        }
    }
    Ok(ExplicitVerdict::Invariant { states: total })
}

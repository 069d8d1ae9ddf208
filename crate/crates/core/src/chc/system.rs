use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Range;

use crate::logic::{Expr, NodeTerm, Sort, Var};

/// One argument position of a predicate: a field of a representative node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    /// Index into the representative terms.
    pub pos: usize,
    pub field: String,
    pub sort: Sort,
}

/// The unknown invariant of one k-type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub type_id: usize,
    pub rep_terms: Vec<NodeTerm>,
    pub slots: Vec<Slot>,
    /// Permutations of representative positions induced by automorphisms
    /// of the type's neighbourhood (identity first).
    pub symmetries: Vec<Vec<usize>>,
}

impl Predicate {
    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    pub fn sorts(&self) -> Vec<Sort> {
        self.slots.iter().map(|s| s.sort).collect()
    }

    /// Slot range of each representative position.
    pub fn blocks(&self) -> Vec<Range<usize>> {
        let mut out = vec![0..0; self.rep_terms.len()];
        let mut i = 0;
        for (pos, r) in out.iter_mut().enumerate() {
            let start = i;
            while i < self.slots.len() && self.slots[i].pos == pos {
                i += 1;
            }
            *r = start..i;
        }
        out
    }

    /// Applies a position permutation to an argument list: block `i` of the
    /// result is block `perm[i]` of `args`.
    pub fn permute<T: Clone>(&self, args: &[T], perm: &[usize]) -> Vec<T> {
        let blocks = self.blocks();
        perm.iter().flat_map(|&j| args[blocks[j].clone()].to_vec()).collect()
    }

    /// Positional parameter names used for solutions.
    pub fn params(&self) -> Vec<Var> {
        self.slots
            .iter()
            .enumerate()
            .map(|(i, s)| Var::new(format!("p{i}"), s.sort))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: usize,
    pub args: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    False,
    Atom(Atom),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClauseKind {
    Init,
    Step,
    Error,
    /// `Inv(x) => Inv(pi x)`: forces solutions to be symmetric.
    Symmetry,
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseKind::Init => write!(f, "init"),
            ClauseKind::Step => write!(f, "step"),
            ClauseKind::Error => write!(f, "error"),
            ClauseKind::Symmetry => write!(f, "symmetry"),
        }
    }
}

/// `body /\ constraint => head`, universally quantified over its variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub kind: ClauseKind,
    pub body: Vec<Atom>,
    pub constraint: Expr,
    pub head: Head,
    /// Human-readable description of what generated the clause.
    pub origin: String,
}

impl Clause {
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out: BTreeSet<Var> = self.body.iter().flat_map(|a| a.args.iter().cloned()).collect();
        if let Head::Atom(a) = &self.head {
            out.extend(a.args.iter().cloned());
        }
        out.extend(self.constraint.free_vars());
        out
    }

    /// Sorts and deduplicates body atoms.
    pub fn normalize(&mut self) {
        self.body.sort();
        self.body.dedup();
    }

    /// A rendering invariant under consistent variable renaming, given a
    /// fixed body order; used to deduplicate.
    pub fn canonical_text(&self, preds: &[Predicate]) -> String {
        let mut names: HashMap<String, String> = HashMap::new();
        let mut name = |v: &Var| -> String {
            let next = names.len() + 1;
            names
                .entry(v.name.clone())
                .or_insert_with(|| format!("v{next}"))
                .clone()
        };
        let mut atom = |a: &Atom| -> String {
            let args: Vec<String> = a.args.iter().map(&mut name).collect();
            format!("({} {})", preds[a.pred].name, args.join(" "))
        };
        let mut out = match &self.head {
            Head::False => "false".to_string(),
            Head::Atom(a) => atom(a),
        };
        out.push_str(" <= ");
        let body: Vec<String> = self.body.iter().map(&mut atom).collect();
        out.push_str(&body.join(" "));
        let renamed = self
            .constraint
            .rewrite::<()>(&mut |e| match e {
                Expr::Var(v) => Ok(Some(Expr::Var(Var::new(name(v), v.sort)))),
                _ => Ok(None),
            })
            .expect("infallible");
        out.push_str(" | ");
        out.push_str(&renamed.to_string());
        out
    }
}

/// A set of constrained Horn clauses over per-type predicates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChcSystem {
    pub predicates: Vec<Predicate>,
    pub clauses: Vec<Clause>,
}

impl ChcSystem {
    /// Removes clauses equal to an earlier one up to variable renaming.
    pub fn dedup(&mut self) {
        let mut seen = BTreeSet::new();
        let preds = self.predicates.clone();
        self.clauses.retain_mut(|c| {
            c.normalize();
            seen.insert(c.canonical_text(&preds))
        });
    }

    pub fn count(&self, kind: ClauseKind) -> usize {
        self.clauses.iter().filter(|c| c.kind == kind).count()
    }

    /// Human-readable dump of predicates and clauses.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for p in &self.predicates {
            let slots: Vec<String> = p
                .slots
                .iter()
                .map(|s| format!("{}.{}:{}", s.pos, s.field, s.sort))
                .collect();
            out.push_str(&format!("; {} (type {}) [{}]\n", p.name, p.type_id, slots.join(" ")));
        }
        for c in &self.clauses {
            out.push_str(&format!("; {} clause from {}\n", c.kind, c.origin));
            let body: Vec<String> = c
                .body
                .iter()
                .map(|a| {
                    let args: Vec<&str> = a.args.iter().map(|v| v.name.as_str()).collect();
                    format!("({} {})", self.predicates[a.pred].name, args.join(" "))
                })
                .collect();
            let head = match &c.head {
                Head::False => "false".to_string(),
                Head::Atom(a) => {
                    let args: Vec<&str> = a.args.iter().map(|v| v.name.as_str()).collect();
                    format!("({} {})", self.predicates[a.pred].name, args.join(" "))
                }
            };
            out.push_str(&format!("{} /\\ {}\n  => {}\n", body.join(" /\\ "), c.constraint, head));
        }
        out
    }
}

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::LogicError;

/// A node of a structure, identified by its position in the universe.
pub type Node = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FnId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// Function symbols (constants are nullary functions) and predicate symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    functions: Vec<Symbol>,
    predicates: Vec<Symbol>,
}

impl Vocabulary {
    pub fn new(functions: &[(&str, usize)], predicates: &[(&str, usize)]) -> Result<Self, LogicError> {
        let mut seen = BTreeSet::new();
        for (name, _) in functions.iter().chain(predicates) {
            if !seen.insert(*name) {
                return Err(LogicError::DuplicateSymbol(name.to_string()));
            }
        }
        if let Some((name, _)) = predicates.iter().find(|(_, a)| *a == 0) {
            return Err(LogicError::NullaryPredicate(name.to_string()));
        }
        let sym = |&(name, arity): &(&str, usize)| Symbol {
            name: name.to_string(),
            arity,
        };
        Ok(Vocabulary {
            functions: functions.iter().map(sym).collect(),
            predicates: predicates.iter().map(sym).collect(),
        })
    }

    pub fn functions(&self) -> &[Symbol] {
        &self.functions
    }

    pub fn predicates(&self) -> &[Symbol] {
        &self.predicates
    }

    pub fn function(&self, name: &str) -> Option<FnId> {
        self.functions.iter().position(|s| s.name == name).map(FnId)
    }

    pub fn predicate(&self, name: &str) -> Option<PredId> {
        self.predicates.iter().position(|s| s.name == name).map(PredId)
    }

    pub fn fn_symbol(&self, f: FnId) -> &Symbol {
        &self.functions[f.0]
    }

    pub fn pred_symbol(&self, p: PredId) -> &Symbol {
        &self.predicates[p.0]
    }

    pub fn constants(&self) -> impl Iterator<Item = FnId> + '_ {
        self.functions
            .iter()
            .enumerate()
            .filter(|(_, s)| s.arity == 0)
            .map(|(i, _)| FnId(i))
    }
}

fn table_len(n: usize, arity: usize) -> usize {
    n.pow(arity as u32)
}

fn table_index(n: usize, args: &[Node]) -> usize {
    args.iter().fold(0, |acc, &a| acc * n + a)
}

/// Iterates all tuples of length `arity` over `0..n` in lexicographic order.
pub(crate) fn tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<Node>> {
    let total = if n == 0 && arity > 0 { 0 } else { table_len(n, arity) };
    (0..total).map(move |mut idx| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % n;
            idx /= n;
        }
        t
    })
}

/// A finite structure with total function tables and predicate relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    vocab: Arc<Vocabulary>,
    labels: Vec<String>,
    fn_tables: Vec<Vec<Node>>,
    pred_tables: Vec<Vec<bool>>,
}

impl Structure {
    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes(&self) -> std::ops::Range<Node> {
        0..self.labels.len()
    }

    pub fn label(&self, v: Node) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Option<Node> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn apply(&self, f: FnId, args: &[Node]) -> Node {
        debug_assert_eq!(args.len(), self.vocab.fn_symbol(f).arity);
        self.fn_tables[f.0][table_index(self.len(), args)]
    }

    pub fn constant(&self, f: FnId) -> Node {
        self.apply(f, &[])
    }

    pub fn holds(&self, p: PredId, args: &[Node]) -> bool {
        debug_assert_eq!(args.len(), self.vocab.pred_symbol(p).arity);
        self.pred_tables[p.0][table_index(self.len(), args)]
    }

    /// The substructure on `nodes`, renumbered in the given order.
    ///
    /// `nodes` must be closed under every function; the caller guarantees it.
    pub fn induced(&self, nodes: &[Node]) -> Structure {
        let mut back = vec![usize::MAX; self.len()];
        for (i, &v) in nodes.iter().enumerate() {
            back[v] = i;
        }
        let m = nodes.len();
        let fn_tables = self
            .vocab
            .functions()
            .iter()
            .enumerate()
            .map(|(fi, s)| {
                tuples(m, s.arity)
                    .map(|t| {
                        let orig: Vec<Node> = t.iter().map(|&i| nodes[i]).collect();
                        let w = self.apply(FnId(fi), &orig);
                        debug_assert!(back[w] != usize::MAX, "induced set is not closed");
                        back[w]
                    })
                    .collect()
            })
            .collect();
        let pred_tables = self
            .vocab
            .predicates()
            .iter()
            .enumerate()
            .map(|(pi, s)| {
                tuples(m, s.arity)
                    .map(|t| {
                        let orig: Vec<Node> = t.iter().map(|&i| nodes[i]).collect();
                        self.holds(PredId(pi), &orig)
                    })
                    .collect()
            })
            .collect();
        Structure {
            vocab: self.vocab.clone(),
            labels: nodes.iter().map(|&v| self.labels[v].clone()).collect(),
            fn_tables,
            pred_tables,
        }
    }

    /// Whether `nodes` is closed under all functions (and contains all constants).
    pub fn is_closed(&self, nodes: &BTreeSet<Node>) -> bool {
        let list: Vec<Node> = nodes.iter().copied().collect();
        self.vocab.functions().iter().enumerate().all(|(fi, s)| {
            tuples(list.len(), s.arity).all(|t| {
                let args: Vec<Node> = t.iter().map(|&i| list[i]).collect();
                nodes.contains(&self.apply(FnId(fi), &args))
            })
        })
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "universe: {}", self.labels.join(" "))?;
        for (fi, s) in self.vocab.functions().iter().enumerate() {
            let entries: Vec<String> = tuples(self.len(), s.arity)
                .map(|t| {
                    let args: Vec<&str> = t.iter().map(|&a| self.label(a)).collect();
                    format!(
                        "{}({})={}",
                        s.name,
                        args.join(","),
                        self.label(self.apply(FnId(fi), &t))
                    )
                })
                .collect();
            writeln!(f, "  {}", entries.join(" "))?;
        }
        for (pi, s) in self.vocab.predicates().iter().enumerate() {
            let entries: Vec<String> = tuples(self.len(), s.arity)
                .filter(|t| self.holds(PredId(pi), t))
                .map(|t| {
                    let args: Vec<&str> = t.iter().map(|&a| self.label(a)).collect();
                    format!("{}({})", s.name, args.join(","))
                })
                .collect();
            writeln!(f, "  {}", entries.join(" "))?;
        }
        Ok(())
    }
}

/// Incremental construction of a [`Structure`]; `build` rejects partial functions.
pub struct StructureBuilder {
    vocab: Arc<Vocabulary>,
    labels: Vec<String>,
    fn_tables: Vec<Vec<Node>>,
    pred_tables: Vec<Vec<bool>>,
}

impl StructureBuilder {
    pub fn new(vocab: Arc<Vocabulary>, labels: Vec<String>) -> Self {
        let n = labels.len();
        let fn_tables = vocab
            .functions()
            .iter()
            .map(|s| vec![usize::MAX; table_len(n, s.arity)])
            .collect();
        let pred_tables = vocab
            .predicates()
            .iter()
            .map(|s| vec![false; table_len(n, s.arity)])
            .collect();
        StructureBuilder {
            vocab,
            labels,
            fn_tables,
            pred_tables,
        }
    }

    fn check(&self, args: &[Node], val: Option<Node>) -> Result<(), LogicError> {
        let n = self.labels.len();
        for &a in args.iter().chain(val.iter()) {
            if a >= n {
                return Err(LogicError::NodeOutOfRange(a));
            }
        }
        Ok(())
    }

    pub fn set_fn(&mut self, name: &str, args: &[Node], val: Node) -> Result<&mut Self, LogicError> {
        let f = self
            .vocab
            .function(name)
            .ok_or_else(|| LogicError::UnknownSymbol(name.to_string()))?;
        let arity = self.vocab.fn_symbol(f).arity;
        if arity != args.len() {
            return Err(LogicError::ArityMismatch {
                name: name.to_string(),
                expected: arity,
                got: args.len(),
            });
        }
        self.check(args, Some(val))?;
        let idx = table_index(self.labels.len(), args);
        self.fn_tables[f.0][idx] = val;
        Ok(self)
    }

    pub fn set_pred(&mut self, name: &str, args: &[Node], holds: bool) -> Result<&mut Self, LogicError> {
        let p = self
            .vocab
            .predicate(name)
            .ok_or_else(|| LogicError::UnknownSymbol(name.to_string()))?;
        let arity = self.vocab.pred_symbol(p).arity;
        if arity != args.len() {
            return Err(LogicError::ArityMismatch {
                name: name.to_string(),
                expected: arity,
                got: args.len(),
            });
        }
        self.check(args, None)?;
        let idx = table_index(self.labels.len(), args);
        self.pred_tables[p.0][idx] = holds;
        Ok(self)
    }

    pub fn build(self) -> Result<Structure, LogicError> {
        for (fi, t) in self.fn_tables.iter().enumerate() {
            if t.contains(&usize::MAX) {
                return Err(LogicError::PartialFunction(self.vocab.fn_symbol(FnId(fi)).name.clone()));
            }
        }
        Ok(Structure {
            vocab: self.vocab,
            labels: self.labels,
            fn_tables: self.fn_tables,
            pred_tables: self.pred_tables,
        })
    }
}

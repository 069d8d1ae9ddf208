use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::logic::{Node, PredId, Structure, StructureBuilder, Vocabulary};

use super::ProgramError;

/// Built-in topology generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    /// `n` process circles between `n + 1` squares; constants `b`, `e` name the
    /// end squares, `h` an optional hub square shared by everyone.
    Line { hub: bool },
    /// Processes `1..n` around a shared centre `g = 0`.
    Star,
    /// `n` circles and `n` squares alternating on a cycle; `z` optionally
    /// names one square.
    Ring { marked: bool },
    /// An `n x n` mesh of processes with a square on every edge; squares on
    /// the outer boundary satisfy `border`.
    Grid,
    /// A depth-two tree: `root`, `n` children, `n` leaves under each child.
    DepthTree,
    /// A perfect binary tree with `n` levels; squares sit on the edges.
    BinaryTree,
}

impl Topology {
    pub fn name(&self) -> &'static str {
        match self {
            Topology::Line { .. } => "line",
            Topology::Star => "star",
            Topology::Ring { .. } => "ring",
            Topology::Grid => "grid",
            Topology::DepthTree => "depth-tree",
            Topology::BinaryTree => "binary-tree",
        }
    }

    fn vocabulary(&self) -> Vocabulary {
        let v = match self {
            Topology::Line { hub: false } => {
                Vocabulary::new(&[("b", 0), ("e", 0), ("l", 1), ("r", 1)], &[("isProc", 1)])
            }
            Topology::Line { hub: true } => {
                Vocabulary::new(&[("b", 0), ("e", 0), ("h", 0), ("l", 1), ("r", 1)], &[("isProc", 1)])
            }
            Topology::Star => Vocabulary::new(&[("g", 0)], &[("isProc", 1)]),
            Topology::Ring { marked: false } => Vocabulary::new(&[("l", 1), ("r", 1)], &[("isProc", 1)]),
            Topology::Ring { marked: true } => Vocabulary::new(&[("l", 1), ("r", 1), ("z", 0)], &[("isProc", 1)]),
            Topology::Grid => Vocabulary::new(
                &[("east", 1), ("north", 1), ("south", 1), ("west", 1)],
                &[("border", 1), ("isProc", 1)],
            ),
            Topology::DepthTree => Vocabulary::new(&[("p", 1), ("root", 0)], &[("isProc", 1)]),
            Topology::BinaryTree => Vocabulary::new(&[("lc", 1), ("rc", 1), ("top", 0), ("up", 1)], &[("isProc", 1)]),
        };
        v.expect("built-in vocabularies are well formed")
    }

    /// Smallest index for which the generator is well defined.
    fn floor(&self) -> usize {
        match self {
            Topology::Line { .. } | Topology::Star | Topology::DepthTree | Topology::BinaryTree => 1,
            Topology::Ring { .. } | Topology::Grid => 2,
        }
    }
}

/// A topology family: a generator, its index range and enumeration bounds.
#[derive(Clone, Debug)]
pub struct FamilyDescriptor {
    pub topology: Topology,
    pub vocab: Arc<Vocabulary>,
    pub min_index: usize,
    pub max_index: Option<usize>,
    /// Declared enumeration bounds: width -> member indices.
    pub bounds: BTreeMap<usize, Vec<usize>>,
    proc_pred: PredId,
}

impl fmt::Display for FamilyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.topology.name())?;
        match self.topology {
            Topology::Line { hub: true } => write!(f, "+hub")?,
            Topology::Ring { marked: true } => write!(f, "+marked")?,
            _ => {}
        }
        match self.max_index {
            Some(m) => write!(f, "[{}..{}]", self.min_index, m),
            None => write!(f, "[{}..]", self.min_index),
        }
    }
}

impl FamilyDescriptor {
    pub fn new(topology: Topology, min_index: usize) -> Result<Self, ProgramError> {
        if min_index < topology.floor() {
            return Err(ProgramError::Family(format!(
                "{} family needs index at least {}",
                topology.name(),
                topology.floor()
            )));
        }
        let vocab = Arc::new(topology.vocabulary());
        let proc_pred = vocab.predicate("isProc").expect("every family has isProc");
        Ok(FamilyDescriptor {
            topology,
            vocab,
            min_index,
            max_index: None,
            bounds: BTreeMap::new(),
            proc_pred,
        })
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn contains_index(&self, n: usize) -> bool {
        n >= self.min_index && self.max_index.is_none_or(|m| n <= m)
    }

    /// Member indices enumerated for types of the given width.
    ///
    /// Declared bounds win; otherwise a generator default is used.
    pub fn bounds(&self, width: usize) -> Vec<usize> {
        if let Some(b) = self.bounds.get(&width) {
            return b.clone();
        }
        let top = match self.topology {
            Topology::Line { .. } => 2 * width + 1,
            Topology::Star | Topology::DepthTree => width + 1,
            Topology::Ring { marked: false } => 2 * width + 1,
            Topology::Ring { marked: true } => 2 * width + 3,
            Topology::Grid => 2 * width + 2,
            Topology::BinaryTree => width + 2,
        };
        let top = top.max(self.min_index);
        let top = self.max_index.map_or(top, |m| top.min(m));
        (self.min_index..=top).collect()
    }

    /// Members for the given width, instantiated.
    pub fn instances(&self, width: usize) -> Result<Vec<(usize, Arc<Structure>)>, ProgramError> {
        self.bounds(width)
            .into_iter()
            .map(|n| Ok((n, Arc::new(self.instantiate(n)?))))
            .collect()
    }

    pub fn is_process(&self, s: &Structure, v: Node) -> bool {
        s.holds(self.proc_pred, &[v])
    }

    pub fn process_predicate(&self) -> PredId {
        self.proc_pred
    }

    /// Builds member `n` of the family.
    pub fn instantiate(&self, n: usize) -> Result<Structure, ProgramError> {
        if !self.contains_index(n) {
            return Err(ProgramError::Family(format!("index {n} is outside family {self}")));
        }
        let s = match self.topology {
            Topology::Line { hub } => line(&self.vocab, n, hub),
            Topology::Star => star(&self.vocab, n),
            Topology::Ring { marked } => ring(&self.vocab, n, marked),
            Topology::Grid => grid(&self.vocab, n),
            Topology::DepthTree => depth_tree(&self.vocab, n),
            Topology::BinaryTree => binary_tree(&self.vocab, n),
        };
        s.map_err(|e| ProgramError::Family(e.to_string()))
    }
}

type Built = Result<Structure, crate::logic::LogicError>;

fn line(vocab: &Arc<Vocabulary>, n: usize, hub: bool) -> Built {
    // circles v1..vn are nodes 0..n, squares s0..sn are n..=2n, hub last
    let mut labels: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    labels.extend((0..=n).map(|i| format!("s{i}")));
    if hub {
        labels.push("h".into());
    }
    let sq = |i: usize| n + i;
    let mut b = StructureBuilder::new(vocab.clone(), labels);
    for i in 1..=n {
        let v = i - 1;
        b.set_fn("l", &[v], sq(i - 1))?.set_fn("r", &[v], sq(i))?;
        b.set_pred("isProc", &[v], true)?;
    }
    let mut passive: Vec<Node> = (0..=n).map(sq).collect();
    if hub {
        let h = 2 * n + 1;
        b.set_fn("h", &[], h)?;
        passive.push(h);
    }
    for s in passive {
        b.set_fn("l", &[s], s)?.set_fn("r", &[s], s)?;
    }
    b.set_fn("b", &[], sq(0))?.set_fn("e", &[], sq(n))?;
    b.build()
}

fn star(vocab: &Arc<Vocabulary>, n: usize) -> Built {
    let mut b = StructureBuilder::new(vocab.clone(), (0..=n).map(|i| i.to_string()).collect());
    b.set_fn("g", &[], 0)?;
    for i in 1..=n {
        b.set_pred("isProc", &[i], true)?;
    }
    b.build()
}

fn ring(vocab: &Arc<Vocabulary>, n: usize, marked: bool) -> Built {
    let mut labels: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    labels.extend((0..n).map(|i| format!("s{i}")));
    let mut b = StructureBuilder::new(vocab.clone(), labels);
    for i in 0..n {
        b.set_fn("l", &[i], n + i)?.set_fn("r", &[i], n + (i + 1) % n)?;
        b.set_pred("isProc", &[i], true)?;
        b.set_fn("l", &[n + i], n + i)?.set_fn("r", &[n + i], n + i)?;
    }
    if marked {
        b.set_fn("z", &[], n)?;
    }
    b.build()
}

fn grid(vocab: &Arc<Vocabulary>, n: usize) -> Built {
    // processes p_i_j, horizontal edge squares h_i_j (j in 0..=n, west of p_i_j),
    // vertical edge squares u_i_j (i in 0..=n, north of p_i_j)
    let mut labels = Vec::new();
    let p = |i: usize, j: usize| i * n + j;
    for i in 0..n {
        for j in 0..n {
            labels.push(format!("p{i}_{j}"));
        }
    }
    let h0 = n * n;
    let h = |i: usize, j: usize| h0 + i * (n + 1) + j;
    for i in 0..n {
        for j in 0..=n {
            labels.push(format!("h{i}_{j}"));
        }
    }
    let u0 = h0 + n * (n + 1);
    let u = |i: usize, j: usize| u0 + i * n + j;
    for i in 0..=n {
        for j in 0..n {
            labels.push(format!("u{i}_{j}"));
        }
    }
    let total = labels.len();
    let mut b = StructureBuilder::new(vocab.clone(), labels);
    for i in 0..n {
        for j in 0..n {
            let v = p(i, j);
            b.set_pred("isProc", &[v], true)?;
            b.set_fn("west", &[v], h(i, j))?.set_fn("east", &[v], h(i, j + 1))?;
            b.set_fn("north", &[v], u(i, j))?.set_fn("south", &[v], u(i + 1, j))?;
        }
    }
    for s in h0..total {
        for f in ["east", "north", "south", "west"] {
            b.set_fn(f, &[s], s)?;
        }
    }
    for i in 0..n {
        b.set_pred("border", &[h(i, 0)], true)?
            .set_pred("border", &[h(i, n)], true)?;
        b.set_pred("border", &[u(0, i)], true)?
            .set_pred("border", &[u(n, i)], true)?;
    }
    b.build()
}

fn depth_tree(vocab: &Arc<Vocabulary>, n: usize) -> Built {
    let mut labels = vec!["root".to_string()];
    labels.extend((0..n).map(|i| format!("m{i}")));
    for i in 0..n {
        labels.extend((0..n).map(|j| format!("l{i}_{j}")));
    }
    let total = labels.len();
    let mut b = StructureBuilder::new(vocab.clone(), labels);
    b.set_fn("root", &[], 0)?.set_fn("p", &[0], 0)?;
    for i in 0..n {
        b.set_fn("p", &[1 + i], 0)?;
        for j in 0..n {
            b.set_fn("p", &[1 + n + i * n + j], 1 + i)?;
        }
    }
    for v in 0..total {
        b.set_pred("isProc", &[v], true)?;
    }
    b.build()
}

fn binary_tree(vocab: &Arc<Vocabulary>, levels: usize) -> Built {
    // heap-indexed tree nodes t1..t(2^levels - 1); e_i is the edge square above
    // t_i (e1 is `top`); leaves get private child squares
    let count = (1usize << levels) - 1;
    let mut labels: Vec<String> = (1..=count).map(|i| format!("t{i}")).collect();
    labels.extend((1..=count).map(|i| format!("e{i}")));
    let first_leaf = count.div_ceil(2);
    for i in first_leaf..=count {
        labels.push(format!("d{i}L"));
        labels.push(format!("d{i}R"));
    }
    let total = labels.len();
    let t = |i: usize| i - 1;
    let e = |i: usize| count + i - 1;
    let dangling = |i: usize, right: bool| 2 * count + 2 * (i - first_leaf) + right as usize;
    let mut b = StructureBuilder::new(vocab.clone(), labels);
    for i in 1..=count {
        b.set_pred("isProc", &[t(i)], true)?;
        b.set_fn("up", &[t(i)], e(i))?;
        if i < first_leaf {
            b.set_fn("lc", &[t(i)], e(2 * i))?.set_fn("rc", &[t(i)], e(2 * i + 1))?;
        } else {
            b.set_fn("lc", &[t(i)], dangling(i, false))?;
            b.set_fn("rc", &[t(i)], dangling(i, true))?;
        }
    }
    for s in count..total {
        for f in ["lc", "rc", "up"] {
            b.set_fn(f, &[s], s)?;
        }
    }
    b.set_fn("top", &[], e(1))?;
    b.build()
}

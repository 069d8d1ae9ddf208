use crate::logic::structure_tuples as tuples;
use crate::logic::{FnId, Node, PredId, Structure};

/// A labeling-independent encoding of a marked structure.
///
/// Two marked structures (over the same vocabulary) have equal keys exactly
/// when some isomorphism maps one onto the other and the marked tuple onto
/// the marked tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub key: Vec<u8>,
    /// `labeling[v]` is the canonical position of node `v`.
    pub labeling: Vec<usize>,
}

impl CanonicalForm {
    /// The node at canonical position `i`.
    pub fn node_at(&self, i: usize) -> Node {
        self.labeling
            .iter()
            .position(|&p| p == i)
            .expect("labeling is a permutation")
    }
}

struct Incidence {
    tag: u32,
    sym: u32,
    args: Vec<Node>,
    result: Option<Node>,
}

fn incidences(s: &Structure) -> Vec<Incidence> {
    let n = s.len();
    let vocab = s.vocab();
    let mut out = Vec::new();
    for (fi, sym) in vocab.functions().iter().enumerate() {
        for t in tuples(n, sym.arity) {
            let w = s.apply(FnId(fi), &t);
            out.push(Incidence {
                tag: 0,
                sym: fi as u32,
                args: t,
                result: Some(w),
            });
        }
    }
    for (pi, sym) in vocab.predicates().iter().enumerate() {
        for t in tuples(n, sym.arity) {
            if s.holds(PredId(pi), &t) {
                out.push(Incidence {
                    tag: 1,
                    sym: pi as u32,
                    args: t,
                    result: None,
                });
            }
        }
    }
    out
}

fn rank<T: Ord + Clone>(sigs: &[T]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<T> = sigs.to_vec();
    distinct.sort();
    distinct.dedup();
    let colors = sigs
        .iter()
        .map(|s| distinct.binary_search(s).expect("present"))
        .collect();
    (colors, distinct.len())
}

/// Colour refinement to the coarsest equitable partition below `colors`.
fn refine(n: usize, inc: &[Incidence], colors: &mut Vec<usize>) {
    let mut count = {
        let (c, k) = rank(colors);
        *colors = c;
        k
    };
    loop {
        let mut entries: Vec<Vec<Vec<u32>>> = vec![Vec::new(); n];
        for i in inc {
            let cs: Vec<u32> = i.args.iter().map(|&a| colors[a] as u32).collect();
            let rc = i.result.map(|r| colors[r] as u32);
            for (p, &a) in i.args.iter().enumerate() {
                let mut e = vec![i.tag * 2, i.sym, p as u32];
                e.extend(&cs);
                e.extend(rc);
                entries[a].push(e);
            }
            if let Some(r) = i.result {
                let mut e = vec![i.tag * 2 + 1, i.sym];
                e.extend(&cs);
                entries[r].push(e);
            }
        }
        let sigs: Vec<(usize, Vec<Vec<u32>>)> = entries
            .into_iter()
            .enumerate()
            .map(|(v, mut e)| {
                e.sort();
                (colors[v], e)
            })
            .collect();
        let (next, k) = rank(&sigs);
        *colors = next;
        if k == count {
            return;
        }
        count = k;
    }
}

fn certificate(s: &Structure, marks: &[Node], labeling: &[usize]) -> Vec<u32> {
    let n = s.len();
    let mut inv = vec![0; n];
    for (v, &p) in labeling.iter().enumerate() {
        inv[p] = v;
    }
    let mut cert = vec![n as u32, marks.len() as u32];
    cert.extend(marks.iter().map(|&m| labeling[m] as u32));
    let vocab = s.vocab();
    for (fi, sym) in vocab.functions().iter().enumerate() {
        for t in tuples(n, sym.arity) {
            let args: Vec<Node> = t.iter().map(|&p| inv[p]).collect();
            cert.push(labeling[s.apply(FnId(fi), &args)] as u32);
        }
    }
    for (pi, sym) in vocab.predicates().iter().enumerate() {
        for t in tuples(n, sym.arity) {
            let args: Vec<Node> = t.iter().map(|&p| inv[p]).collect();
            cert.push(s.holds(PredId(pi), &args) as u32);
        }
    }
    cert
}

struct Search<'a> {
    s: &'a Structure,
    marks: &'a [Node],
    inc: Vec<Incidence>,
    best: Option<(Vec<u32>, Vec<usize>)>,
}

impl Search<'_> {
    fn run(&mut self, mut colors: Vec<usize>) {
        let n = self.s.len();
        refine(n, &self.inc, &mut colors);
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c] += 1;
        }
        match (0..n).find(|&c| sizes[c] > 1) {
            None => {
                let cert = certificate(self.s, self.marks, &colors);
                if self.best.as_ref().is_none_or(|(b, _)| cert < *b) {
                    self.best = Some((cert, colors));
                }
            }
            Some(cell) => {
                for v in (0..n).filter(|&v| colors[v] == cell) {
                    let next = colors
                        .iter()
                        .enumerate()
                        .map(|(x, &c)| if x == v { 2 * c } else { 2 * c + 1 })
                        .collect();
                    self.run(next);
                }
            }
        }
    }
}

/// Canonical form of `s` with the tuple `marks` distinguished.
///
/// Uses colour refinement with individualization; the key is the least
/// certificate over all leaves of the search tree.
pub fn canonical_form(s: &Structure, marks: &[Node]) -> CanonicalForm {
    let n = s.len();
    let initial: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            marks
                .iter()
                .enumerate()
                .filter(|(_, &m)| m == v)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    // Marked nodes sort before unmarked ones; empty position lists sort first
    // otherwise, so invert that by tagging.
    let tagged: Vec<(bool, Vec<usize>)> = initial.into_iter().map(|p| (p.is_empty(), p)).collect();
    let (colors, _) = rank(&tagged);
    let mut search = Search {
        s,
        marks,
        inc: incidences(s),
        best: None,
    };
    if n == 0 {
        let cert = certificate(s, marks, &[]);
        return CanonicalForm {
            key: encode(&cert),
            labeling: Vec::new(),
        };
    }
    search.run(colors);
    let (cert, labeling) = search.best.expect("search visits a leaf");
    CanonicalForm {
        key: encode(&cert),
        labeling,
    }
}

fn encode(cert: &[u32]) -> Vec<u8> {
    cert.iter().flat_map(|x| x.to_be_bytes()).collect()
}

/// The isomorphism `a -> b` induced by two canonical forms with equal keys.
pub fn iso_from_forms(a: &CanonicalForm, b: &CanonicalForm) -> Option<Vec<Node>> {
    if a.key != b.key {
        return None;
    }
    let mut inv_b = vec![0; b.labeling.len()];
    for (v, &p) in b.labeling.iter().enumerate() {
        inv_b[p] = v;
    }
    Some(a.labeling.iter().map(|&p| inv_b[p]).collect())
}

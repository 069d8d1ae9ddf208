use crate::logic::structure_tuples as tuples;
use crate::logic::{FnId, Node, PredId, Structure};

use super::closure::generated_nodes;

/// A local isomorphism between generated neighbourhoods, as sorted
/// `(source, target)` pairs in the parent structures' numbering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalIso {
    pub pairs: Vec<(Node, Node)>,
}

impl LocalIso {
    pub fn apply(&self, v: Node) -> Option<Node> {
        self.pairs.iter().find(|(a, _)| *a == v).map(|(_, b)| *b)
    }
}

/// Finds the isomorphism `N(u) -> N(v)` sending `u` to `v`, if one exists.
///
/// Every node of `N(u)` is the value of a term at `u`, so such a map is
/// unique: it is built by closing `u_i -> v_i` and `c -> c` under all
/// functions, then checked to be a bijection preserving predicates.
pub fn find_local_isomorphism(a: &Structure, u: &[Node], b: &Structure, v: &[Node]) -> Option<LocalIso> {
    if u.len() != v.len() || a.vocab() != b.vocab() {
        return None;
    }
    let mut fwd = vec![None; a.len()];
    let mut bwd = vec![None; b.len()];
    let mut queue = Vec::new();
    let add = |x: Node, y: Node, fwd: &mut Vec<Option<Node>>, bwd: &mut Vec<Option<Node>>, q: &mut Vec<Node>| -> bool {
        match (fwd[x], bwd[y]) {
            (None, None) => {
                fwd[x] = Some(y);
                bwd[y] = Some(x);
                q.push(x);
                true
            }
            (Some(y0), Some(x0)) => y0 == y && x0 == x,
            _ => false,
        }
    };
    for (&x, &y) in u.iter().zip(v) {
        if !add(x, y, &mut fwd, &mut bwd, &mut queue) {
            return None;
        }
    }
    let vocab = a.vocab().clone();
    for c in vocab.constants() {
        if !add(a.constant(c), b.constant(c), &mut fwd, &mut bwd, &mut queue) {
            return None;
        }
    }
    let fns: Vec<FnId> = (0..vocab.functions().len())
        .map(FnId)
        .filter(|f| vocab.fn_symbol(*f).arity > 0)
        .collect();
    loop {
        let before = queue.len();
        let domain: Vec<Node> = (0..a.len()).filter(|&x| fwd[x].is_some()).collect();
        for &f in &fns {
            for t in tuples(domain.len(), vocab.fn_symbol(f).arity) {
                let xs: Vec<Node> = t.iter().map(|&i| domain[i]).collect();
                let ys: Vec<Node> = xs.iter().map(|&x| fwd[x].unwrap()).collect();
                if !add(a.apply(f, &xs), b.apply(f, &ys), &mut fwd, &mut bwd, &mut queue) {
                    return None;
                }
            }
        }
        if queue.len() == before {
            break;
        }
    }
    let domain: Vec<Node> = (0..a.len()).filter(|&x| fwd[x].is_some()).collect();
    for (pi, sym) in vocab.predicates().iter().enumerate() {
        for t in tuples(domain.len(), sym.arity) {
            let xs: Vec<Node> = t.iter().map(|&i| domain[i]).collect();
            let ys: Vec<Node> = xs.iter().map(|&x| fwd[x].unwrap()).collect();
            if a.holds(PredId(pi), &xs) != b.holds(PredId(pi), &ys) {
                return None;
            }
        }
    }
    debug_assert_eq!(domain.len(), generated_nodes(a, u).len());
    Some(LocalIso {
        pairs: domain.iter().map(|&x| (x, fwd[x].unwrap())).collect(),
    })
}

/// Whether `u` in `a` and `v` in `b` have the same quantifier-free type.
pub fn locally_isomorphic(a: &Structure, u: &[Node], b: &Structure, v: &[Node]) -> bool {
    find_local_isomorphism(a, u, b, v).is_some()
}

struct Matcher<'a> {
    a: &'a Structure,
    b: &'a Structure,
    bijective: bool,
    first_only: bool,
    found: Vec<Vec<Node>>,
}

impl Matcher<'_> {
    /// Propagates function images; returns false on a conflict.
    fn propagate(&self, fwd: &mut [Option<Node>], used: &mut [bool]) -> bool {
        let vocab = self.a.vocab();
        loop {
            let mut changed = false;
            let domain: Vec<Node> = (0..self.a.len()).filter(|&x| fwd[x].is_some()).collect();
            for (fi, sym) in vocab.functions().iter().enumerate() {
                for t in tuples(domain.len(), sym.arity) {
                    let xs: Vec<Node> = t.iter().map(|&i| domain[i]).collect();
                    let ys: Vec<Node> = xs.iter().map(|&x| fwd[x].unwrap()).collect();
                    let (x, y) = (self.a.apply(FnId(fi), &xs), self.b.apply(FnId(fi), &ys));
                    match fwd[x] {
                        Some(y0) if y0 != y => return false,
                        Some(_) => {}
                        None => {
                            if used[y] {
                                return false;
                            }
                            fwd[x] = Some(y);
                            used[y] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let domain: Vec<Node> = (0..self.a.len()).filter(|&x| fwd[x].is_some()).collect();
        for (pi, sym) in vocab.predicates().iter().enumerate() {
            for t in tuples(domain.len(), sym.arity) {
                let xs: Vec<Node> = t.iter().map(|&i| domain[i]).collect();
                let ys: Vec<Node> = xs.iter().map(|&x| fwd[x].unwrap()).collect();
                if self.a.holds(PredId(pi), &xs) != self.b.holds(PredId(pi), &ys) {
                    return false;
                }
            }
        }
        true
    }

    fn search(&mut self, fwd: Vec<Option<Node>>, used: Vec<bool>) {
        if self.first_only && !self.found.is_empty() {
            return;
        }
        let Some(x) = (0..self.a.len()).find(|&x| fwd[x].is_none()) else {
            self.found.push(fwd.iter().map(|y| y.unwrap()).collect());
            return;
        };
        for y in 0..self.b.len() {
            if used[y] {
                continue;
            }
            let mut f = fwd.clone();
            let mut u = used.clone();
            f[x] = Some(y);
            u[y] = true;
            if self.propagate(&mut f, &mut u) {
                self.search(f, u);
            }
        }
    }
}

fn matches(a: &Structure, b: &Structure, fixed: &[(Node, Node)], bijective: bool, first_only: bool) -> Vec<Vec<Node>> {
    if a.vocab() != b.vocab() || (bijective && a.len() != b.len()) || a.len() > b.len() {
        return Vec::new();
    }
    let mut fwd = vec![None; a.len()];
    let mut used = vec![false; b.len()];
    for &(x, y) in fixed {
        match fwd[x] {
            Some(y0) if y0 != y => return Vec::new(),
            Some(_) => {}
            None => {
                if used[y] {
                    return Vec::new();
                }
                fwd[x] = Some(y);
                used[y] = true;
            }
        }
    }
    let mut m = Matcher {
        a,
        b,
        bijective,
        first_only,
        found: Vec::new(),
    };
    let vocab = a.vocab().clone();
    for c in vocab.constants() {
        let (x, y) = (a.constant(c), b.constant(c));
        match fwd[x] {
            Some(y0) if y0 != y => return Vec::new(),
            Some(_) => {}
            None => {
                if used[y] {
                    return Vec::new();
                }
                fwd[x] = Some(y);
                used[y] = true;
            }
        }
    }
    if !m.propagate(&mut fwd, &mut used) {
        return Vec::new();
    }
    m.search(fwd, used);
    debug_assert!(!m.bijective || m.found.iter().all(|f| f.len() == b.len()));
    m.found
}

/// All automorphisms of `s` that fix every node of `fixed`, as node maps.
pub fn automorphisms(s: &Structure, fixed: &[Node]) -> Vec<Vec<Node>> {
    let pairs: Vec<(Node, Node)> = fixed.iter().map(|&v| (v, v)).collect();
    let mut all = matches(s, s, &pairs, true, false);
    all.sort();
    all
}

/// Some embedding `a -> b` extending `fixed`, if one exists.
pub fn find_embedding(a: &Structure, b: &Structure, fixed: &[(Node, Node)]) -> Option<Vec<Node>> {
    matches(a, b, fixed, false, true).into_iter().next()
}

/// Whether `a` and `b` are isomorphic (unmarked).
pub fn isomorphic(a: &Structure, b: &Structure) -> bool {
    a.len() == b.len() && !matches(a, b, &[], true, true).is_empty()
}

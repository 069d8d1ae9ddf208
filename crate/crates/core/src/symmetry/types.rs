use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::logic::structure_tuples as tuples;
use crate::logic::{FnId, Node, NodeFormula, NodeTerm, PredId, Structure};

use super::canon::canonical_form;
use super::closure::{generated_substructure, Substructure};
use super::SymmetryError;

/// A tuple of a family member realizing a type.
#[derive(Clone, Debug)]
pub struct Witness {
    /// Family index of the member.
    pub instance: usize,
    pub structure: Arc<Structure>,
    pub tuple: Vec<Node>,
}

/// A quantifier-free k-type, i.e. an isomorphism class of marked neighbourhoods.
#[derive(Clone, Debug)]
pub struct QfType {
    pub id: usize,
    pub width: usize,
    pub key: Vec<u8>,
    pub witness: Witness,
    /// `N(w)` for the witness tuple `w`, with `w` as marks.
    pub neighbourhood: Substructure,
    /// Representative terms: each neighbourhood node exactly once.
    pub rep_terms: Vec<NodeTerm>,
    /// The neighbourhood-local node named by each representative term.
    pub rep_nodes: Vec<Node>,
    /// Defining formula over `nu1..nuk`.
    pub alpha: NodeFormula,
}

impl QfType {
    /// Number of representative positions, i.e. `|N(w)|`.
    pub fn n_reps(&self) -> usize {
        self.rep_terms.len()
    }
}

/// Canonical key of the marked neighbourhood `N(tuple)`.
pub fn type_key(s: &Structure, tuple: &[Node]) -> Vec<u8> {
    let sub = generated_substructure(s, tuple);
    canonical_form(&sub.structure, &sub.marks).key
}

/// Representative terms of the marked neighbourhood, in output order.
///
/// Each node gets a term of minimal height, ties broken by
/// [`NodeTerm::canonical_cmp`]. The distinct marked nodes come first in order
/// of first occurrence, then the remaining nodes by their terms.
pub fn representative_terms(sub: &Substructure) -> Result<(Vec<NodeTerm>, Vec<Node>), SymmetryError> {
    let s = &sub.structure;
    let vocab = s.vocab().clone();
    let n = s.len();
    let mut best: Vec<Option<NodeTerm>> = vec![None; n];
    for (i, &m) in sub.marks.iter().enumerate() {
        if best[m].is_none() {
            best[m] = Some(NodeTerm::Var(i));
        }
    }
    let mut consts: Vec<FnId> = vocab.constants().collect();
    consts.sort_by(|a, b| vocab.fn_symbol(*a).name.cmp(&vocab.fn_symbol(*b).name));
    for c in consts {
        let v = s.constant(c);
        if best[v].is_none() {
            best[v] = Some(NodeTerm::App(c, Vec::new()));
        }
    }
    for _height in 1..=n {
        if best.iter().all(Option::is_some) {
            break;
        }
        let known: Vec<Node> = (0..n).filter(|&v| best[v].is_some()).collect();
        let mut cand: Vec<Option<NodeTerm>> = vec![None; n];
        for (fi, sym) in vocab.functions().iter().enumerate() {
            if sym.arity == 0 {
                continue;
            }
            for t in tuples(known.len(), sym.arity) {
                let args: Vec<Node> = t.iter().map(|&i| known[i]).collect();
                let w = s.apply(FnId(fi), &args);
                if best[w].is_some() {
                    continue;
                }
                let term = NodeTerm::App(FnId(fi), args.iter().map(|&a| best[a].clone().unwrap()).collect());
                let better = match &cand[w] {
                    None => true,
                    Some(old) => term.canonical_cmp(old, &vocab).is_lt(),
                };
                if better {
                    cand[w] = Some(term);
                }
            }
        }
        for (v, c) in cand.into_iter().enumerate() {
            if c.is_some() {
                best[v] = c;
            }
        }
    }
    if best.iter().any(Option::is_none) {
        return Err(SymmetryError::NotGenerated);
    }
    let mut order: Vec<Node> = Vec::new();
    for &m in &sub.marks {
        if !order.contains(&m) {
            order.push(m);
        }
    }
    let mut rest: Vec<Node> = (0..n).filter(|v| !order.contains(v)).collect();
    rest.sort_by(|&a, &b| {
        best[a]
            .as_ref()
            .unwrap()
            .canonical_cmp(best[b].as_ref().unwrap(), &vocab)
    });
    order.extend(rest);
    let terms = order.iter().map(|&v| best[v].clone().unwrap()).collect();
    Ok((terms, order))
}

/// The defining formula of a marked neighbourhood, given its representative terms.
///
/// It pins each marked position to its term, makes all terms pairwise
/// distinct, fixes every predicate on every tuple of terms, and records the
/// function table as term equations.
pub fn defining_formula(sub: &Substructure, terms: &[NodeTerm], nodes: &[Node]) -> NodeFormula {
    let s = &sub.structure;
    let vocab = s.vocab().clone();
    let pos_of = |v: Node| nodes.iter().position(|&x| x == v).expect("covering");
    let mut conj = Vec::new();
    for (i, &m) in sub.marks.iter().enumerate() {
        let t = &terms[pos_of(m)];
        if *t != NodeTerm::Var(i) {
            conj.push(NodeFormula::Eq(NodeTerm::Var(i), t.clone()));
        }
    }
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            conj.push(NodeFormula::Not(Box::new(NodeFormula::Eq(
                terms[i].clone(),
                terms[j].clone(),
            ))));
        }
    }
    for (pi, sym) in vocab.predicates().iter().enumerate() {
        for t in tuples(terms.len(), sym.arity) {
            let args: Vec<Node> = t.iter().map(|&i| nodes[i]).collect();
            let atom = NodeFormula::Pred(PredId(pi), t.iter().map(|&i| terms[i].clone()).collect());
            if s.holds(PredId(pi), &args) {
                conj.push(atom);
            } else {
                conj.push(NodeFormula::Not(Box::new(atom)));
            }
        }
    }
    for (fi, sym) in vocab.functions().iter().enumerate() {
        for t in tuples(terms.len(), sym.arity) {
            let args: Vec<Node> = t.iter().map(|&i| nodes[i]).collect();
            let lhs = NodeTerm::App(FnId(fi), t.iter().map(|&i| terms[i].clone()).collect());
            let rhs = terms[pos_of(s.apply(FnId(fi), &args))].clone();
            if lhs != rhs {
                conj.push(NodeFormula::Eq(lhs, rhs));
            }
        }
    }
    NodeFormula::And(conj)
}

/// All k-types realized by the given family members.
#[derive(Clone, Debug)]
pub struct TypeTable {
    pub width: usize,
    pub types: Vec<QfType>,
    by_key: HashMap<Vec<u8>, usize>,
}

impl TypeTable {
    /// Enumerates every k-tuple of every member, deduplicating by canonical
    /// key. Ids follow the sorted order of keys; the witness of a type is its
    /// first occurrence in member order and lexicographic tuple order.
    pub fn enumerate(instances: &[(usize, Arc<Structure>)], k: usize) -> Result<TypeTable, SymmetryError> {
        if k == 0 {
            return Err(SymmetryError::ZeroWidth);
        }
        let mut found: HashMap<Vec<u8>, Witness> = HashMap::new();
        for (idx, s) in instances {
            for t in tuples(s.len(), k) {
                let key = type_key(s, &t);
                found.entry(key).or_insert_with(|| Witness {
                    instance: *idx,
                    structure: s.clone(),
                    tuple: t,
                });
            }
        }
        let mut keys: Vec<Vec<u8>> = found.keys().cloned().collect();
        keys.sort();
        let mut types = Vec::with_capacity(keys.len());
        let mut by_key = HashMap::new();
        for (id, key) in keys.into_iter().enumerate() {
            let witness = found.remove(&key).unwrap();
            let neighbourhood = generated_substructure(&witness.structure, &witness.tuple);
            let (rep_terms, rep_nodes) = representative_terms(&neighbourhood)?;
            let alpha = defining_formula(&neighbourhood, &rep_terms, &rep_nodes);
            by_key.insert(key.clone(), id);
            types.push(QfType {
                id,
                width: k,
                key,
                witness,
                neighbourhood,
                rep_terms,
                rep_nodes,
                alpha,
            });
        }
        Ok(TypeTable {
            width: k,
            types,
            by_key,
        })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn get(&self, id: usize) -> &QfType {
        &self.types[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = &QfType> {
        self.types.iter()
    }

    pub fn id_of_key(&self, key: &[u8]) -> Option<usize> {
        self.by_key.get(key).copied()
    }

    /// The type of `tuple` in `s`.
    pub fn classify(&self, s: &Structure, tuple: &[Node]) -> Result<usize, SymmetryError> {
        if tuple.len() != self.width {
            return Err(SymmetryError::WidthMismatch {
                expected: self.width,
                got: tuple.len(),
            });
        }
        self.id_of_key(&type_key(s, tuple)).ok_or(SymmetryError::UnknownType)
    }

    /// The type of `tuple` and the nodes its representative terms denote there.
    pub fn classify_with_reps(&self, s: &Structure, tuple: &[Node]) -> Result<(usize, Vec<Node>), SymmetryError> {
        let r = self.classify(s, tuple)?;
        let reps = self.types[r]
            .rep_terms
            .iter()
            .map(|t| t.eval(s, tuple))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((r, reps))
    }

    /// Types whose defining formula entails `phi`, decided on witnesses.
    pub fn classify_node_formula(&self, phi: &NodeFormula) -> Result<BTreeSet<usize>, SymmetryError> {
        let mut out = BTreeSet::new();
        for t in &self.types {
            if phi.eval(&t.witness.structure, &t.witness.tuple)? {
                out.insert(t.id);
            }
        }
        Ok(out)
    }

    /// Sorted canonical keys, for comparing enumerations.
    pub fn keys(&self) -> Vec<Vec<u8>> {
        self.types.iter().map(|t| t.key.clone()).collect()
    }
}

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::logic::{structure_tuples as tuples, Node, Structure};
use crate::program::{FamilyDescriptor, ProgramError};
use crate::symmetry::{canonical_form, generated_nodes, generated_substructure, Substructure, TypeTable};

use super::ChcError;

/// Types whose unmarked neighbourhoods are isomorphic, grouped; each class is
/// sorted and its first element is the representative.
pub fn opn_classes(types: &TypeTable, among: &[bool]) -> Vec<Vec<usize>> {
    let mut classes: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    for t in types.iter().filter(|t| among[t.id]) {
        let key = canonical_form(&t.neighbourhood.structure, &[]).key;
        classes.entry(key).or_default().push(t.id);
    }
    let mut out: Vec<Vec<usize>> = classes.into_values().collect();
    out.sort();
    out
}

/// Keeps one type per isomorphism class of unmarked neighbourhoods, among the
/// types already selected by `among`.
pub fn select_opn(types: &TypeTable, among: &[bool]) -> Vec<bool> {
    let mut chi = vec![false; types.len()];
    for class in opn_classes(types, among) {
        chi[class[0]] = true;
    }
    chi
}

/// Selects the types whose witness consists of pairwise distinct processes.
pub fn select_dpg(types: &TypeTable, family: &FamilyDescriptor) -> Vec<bool> {
    types
        .iter()
        .map(|t| {
            let w = &t.witness;
            let distinct: BTreeSet<Node> = w.tuple.iter().copied().collect();
            distinct.len() == w.tuple.len() && w.tuple.iter().all(|&v| family.is_process(&w.structure, v))
        })
        .collect()
}

/// The members an encoding reasons about: the family members up to the
/// bounds of width `k + 1`, and the substructures generated by `k + 1` nodes.
/// With `dpg`, only substructures generated by processes, at least `k` of
/// them distinct, are kept. Isomorphic copies are dropped.
pub fn closure_members(
    family: &FamilyDescriptor,
    next: &TypeTable,
    k: usize,
    dpg: bool,
) -> Result<Vec<(String, Arc<Structure>)>, ProgramError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (n, s) in family.instances(k + 1)? {
        if seen.insert(canonical_form(&s, &[]).key) {
            out.push((format!("member {n}"), s));
        }
    }
    for t in next.iter() {
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
            out.push((
                format!("N({}) in member {}", labels.join(" "), w.instance),
                Arc::new(s.clone()),
            ));
        }
    }
    Ok(out)
}

/// A k-tuple not contained in any selected type's neighbourhood.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChiViolation {
    pub member: String,
    pub tuple: Vec<String>,
}

impl fmt::Display for ChiViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) in {}", self.tuple.join(" "), self.member)
    }
}

/// Checks that the selected types form a basis of rank k for `members`: every
/// k-tuple of every member lies inside `N(u)` for some tuple `u` of that
/// member whose type is selected.
pub fn validate_chi(
    chi: &[bool],
    types: &TypeTable,
    members: &[(String, Arc<Structure>)],
) -> Result<Option<ChiViolation>, ChcError> {
    let k = types.width;
    if chi.iter().all(|&c| c) && !chi.is_empty() {
        return Ok(None);
    }
    for (name, s) in members {
        let mut covers: Vec<BTreeSet<Node>> = Vec::new();
        let mut seen = HashSet::new();
        for u in tuples(s.len(), k) {
            if chi[types.classify(s, &u)?] {
                let set = generated_nodes(s, &u);
                if seen.insert(set.clone()) {
                    covers.push(set);
                }
            }
        }
        for w in tuples(s.len(), k) {
            if !covers.iter().any(|c| w.iter().all(|v| c.contains(v))) {
                return Ok(Some(ChiViolation {
                    member: name.clone(),
                    tuple: w.iter().map(|&v| s.label(v).to_string()).collect(),
                }));
            }
        }
    }
    Ok(None)
}

/// Substructures generated by `rank` distinct processes, up to isomorphism,
/// over the members within the bounds of width `rank`. Members are ordered by
/// size, then by first occurrence.
pub fn distinct_process_basis(family: &FamilyDescriptor, rank: usize) -> Result<Vec<Substructure>, ProgramError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (_, s) in family.instances(rank)? {
        let procs: Vec<Node> = s.nodes().filter(|&v| family.is_process(&s, v)).collect();
        for idx in tuples(procs.len(), rank) {
            let distinct: BTreeSet<usize> = idx.iter().copied().collect();
            if distinct.len() < rank {
                continue;
            }
            let u: Vec<Node> = idx.iter().map(|&i| procs[i]).collect();
            let sub = generated_substructure(&s, &u);
            if seen.insert(canonical_form(&sub.structure, &[]).key) {
                out.push(sub);
            }
        }
    }
    out.sort_by_key(|m| m.structure.len());
    Ok(out)
}

use std::collections::BTreeSet;

use crate::logic::{FnId, Node, Structure};

use crate::logic::structure_tuples as tuples;

/// A generated substructure together with its embedding into the parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substructure {
    pub structure: Structure,
    /// `inclusion[i]` is the parent node that became node `i`.
    pub inclusion: Vec<Node>,
    /// The generating tuple in the substructure's own numbering.
    pub marks: Vec<Node>,
}

impl Substructure {
    /// Maps a parent node to its index in the substructure.
    pub fn local(&self, parent: Node) -> Option<Node> {
        self.inclusion.iter().position(|&p| p == parent)
    }
}

/// The node set of the substructure generated by `seeds`: the closure of the
/// seeds and all constants under every function.
pub fn generated_nodes(s: &Structure, seeds: &[Node]) -> BTreeSet<Node> {
    let vocab = s.vocab().clone();
    let mut set: BTreeSet<Node> = seeds.iter().copied().collect();
    for c in vocab.constants() {
        set.insert(s.constant(c));
    }
    let unary: Vec<FnId> = (0..vocab.functions().len())
        .map(FnId)
        .filter(|f| vocab.fn_symbol(*f).arity == 1)
        .collect();
    let wider: Vec<FnId> = (0..vocab.functions().len())
        .map(FnId)
        .filter(|f| vocab.fn_symbol(*f).arity > 1)
        .collect();
    let mut frontier: Vec<Node> = set.iter().copied().collect();
    loop {
        while let Some(v) = frontier.pop() {
            for &f in &unary {
                let w = s.apply(f, &[v]);
                if set.insert(w) {
                    frontier.push(w);
                }
            }
        }
        if wider.is_empty() {
            break;
        }
        let list: Vec<Node> = set.iter().copied().collect();
        for &f in &wider {
            for t in tuples(list.len(), vocab.fn_symbol(f).arity) {
                let args: Vec<Node> = t.iter().map(|&i| list[i]).collect();
                let w = s.apply(f, &args);
                if set.insert(w) {
                    frontier.push(w);
                }
            }
        }
        if frontier.is_empty() {
            break;
        }
    }
    set
}

/// The substructure generated by `seeds`, with nodes renumbered in increasing
/// parent order.
pub fn generated_substructure(s: &Structure, seeds: &[Node]) -> Substructure {
    let nodes: Vec<Node> = generated_nodes(s, seeds).into_iter().collect();
    let structure = s.induced(&nodes);
    let marks = seeds
        .iter()
        .map(|v| nodes.binary_search(v).expect("seed is generated"))
        .collect();
    Substructure {
        structure,
        inclusion: nodes,
        marks,
    }
}

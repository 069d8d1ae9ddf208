use std::collections::BTreeSet;
use std::sync::Arc;

use crate::logic::{Expr, LogicError, Node, NodeTerm, Sort, Structure};
use crate::symmetry::{generated_nodes, generated_substructure, Substructure};

use super::spec::ProgramSpec;
use super::ProgramError;

/// The transition relation of one process, over its neighbourhood.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    /// Relation between unprimed and primed fields of `N(v)`.
    pub relation: Expr,
    /// Fields of `N(v)` the relation leaves untouched; they keep their value.
    pub unchanged: Vec<(Node, String)>,
}

/// A program on one concrete topology.
#[derive(Clone, Debug)]
pub struct ConcreteProgram {
    pub spec: Arc<ProgramSpec>,
    pub topology: Arc<Structure>,
    /// Kind index of each node.
    pub kinds: Vec<usize>,
    /// Shape index of each node, if it has fields.
    pub shapes: Vec<Option<usize>>,
}

/// Attaches the kinds of `spec` to a topology, by the 1-type of each node.
pub fn attach_program(spec: Arc<ProgramSpec>, topology: Arc<Structure>) -> Result<ConcreteProgram, ProgramError> {
    if topology.vocab() != &spec.family.vocab {
        return Err(ProgramError::Spec(
            "topology vocabulary does not match the family".into(),
        ));
    }
    let kinds = topology
        .nodes()
        .map(|v| spec.kind_of(&topology, v))
        .collect::<Result<Vec<_>, _>>()?;
    let shapes = topology.nodes().map(|v| spec.layout.shape_of(&topology, v)).collect();
    Ok(ConcreteProgram {
        spec,
        topology,
        kinds,
        shapes,
    })
}

impl ConcreteProgram {
    pub fn len(&self) -> usize {
        self.topology.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topology.is_empty()
    }

    pub fn label(&self, v: Node) -> &str {
        self.topology.label(v)
    }

    pub fn fields(&self, v: Node) -> &[(String, Sort)] {
        match self.shapes[v] {
            Some(s) => &self.spec.layout.shapes[s].fields,
            None => &[],
        }
    }

    pub fn field_sort(&self, v: Node, field: &str) -> Option<Sort> {
        self.fields(v).iter().find(|(f, _)| f == field).map(|(_, s)| *s)
    }

    pub fn is_process(&self, v: Node) -> bool {
        self.spec.family.is_process(&self.topology, v)
    }

    pub fn processes(&self) -> Vec<Node> {
        self.topology.nodes().filter(|&v| self.is_process(v)).collect()
    }

    pub fn neighbourhood(&self, seeds: &[Node]) -> BTreeSet<Node> {
        generated_nodes(&self.topology, seeds)
    }

    /// Binds node variables to `env` and checks every field access exists.
    pub(crate) fn instantiate_checked(&self, template: &Expr, env: &[Node]) -> Result<Expr, ProgramError> {
        let e = template.instantiate(&self.topology, env)?;
        for r in e.fields() {
            let NodeTerm::Param(u) = r.node else {
                return Err(LogicError::Unresolved.into());
            };
            if self.field_sort(u, &r.field).is_none() {
                return Err(LogicError::UnknownField {
                    node: self.label(u).to_string(),
                    field: r.field.clone(),
                }
                .into());
            }
        }
        Ok(e)
    }

    /// The transition of `v`, or `None` if `v` never moves.
    pub fn transition(&self, v: Node) -> Result<Option<Transition>, ProgramError> {
        let kind = &self.spec.kinds[self.kinds[v]];
        let Some(t) = &kind.trans else {
            return Ok(None);
        };
        let relation = self.instantiate_checked(t, &[v])?;
        let primed: BTreeSet<(Node, String)> = relation
            .fields()
            .into_iter()
            .filter(|r| r.primed)
            .map(|r| match r.node {
                NodeTerm::Param(u) => (u, r.field),
                _ => unreachable!("instantiated"),
            })
            .collect();
        let mut unchanged = Vec::new();
        for u in self.neighbourhood(&[v]) {
            for (f, _) in self.fields(u) {
                if !primed.contains(&(u, f.clone())) {
                    unchanged.push((u, f.clone()));
                }
            }
        }
        Ok(Some(Transition { relation, unchanged }))
    }

    pub fn init(&self, v: Node) -> Result<Expr, ProgramError> {
        let kind = &self.spec.kinds[self.kinds[v]];
        self.instantiate_checked(&kind.init, &[v])
    }

    /// The error condition of the tuple `w` (false if none applies).
    pub fn error(&self, w: &[Node]) -> Result<Expr, ProgramError> {
        let mut parts = Vec::new();
        if let Some(g) = &self.spec.global_error {
            if g.arity == w.len() {
                parts.push(self.instantiate_checked(&g.formula, w)?);
            }
        }
        if let Some(&first) = w.first() {
            if let Some(e) = &self.spec.kinds[self.kinds[first]].error {
                if e.arity == w.len() {
                    parts.push(self.instantiate_checked(&e.formula, w)?);
                }
            }
        }
        Ok(Expr::or(parts).simplify())
    }

    /// `v`'s transition as a relation on `scope`: everything in `scope`
    /// outside `N(v)` keeps its value.
    pub fn global_transition(&self, v: Node, scope: &BTreeSet<Node>) -> Result<Expr, ProgramError> {
        let Some(t) = self.transition(v)? else {
            return Err(ProgramError::NotAProcess(self.label(v).to_string()));
        };
        let nv = self.neighbourhood(&[v]);
        let same = |u: Node, f: &str| {
            Expr::eq(
                Expr::field(true, NodeTerm::Param(u), f),
                Expr::field(false, NodeTerm::Param(u), f),
            )
        };
        let mut conj = vec![t.relation.clone()];
        conj.extend(t.unchanged.iter().map(|(u, f)| same(*u, f)));
        for &u in scope {
            if !nv.contains(&u) {
                conj.extend(self.fields(u).iter().map(|(f, _)| same(u, f)));
            }
        }
        Ok(Expr::and(conj))
    }

    /// The restriction to a substructure closed under all functions.
    pub fn subprogram(&self, nodes: &BTreeSet<Node>) -> Result<(ConcreteProgram, Vec<Node>), ProgramError> {
        if !self.topology.is_closed(nodes) {
            return Err(ProgramError::NotClosed);
        }
        let list: Vec<Node> = nodes.iter().copied().collect();
        let s = self.topology.induced(&list);
        Ok((
            ConcreteProgram {
                spec: self.spec.clone(),
                topology: Arc::new(s),
                kinds: list.iter().map(|&v| self.kinds[v]).collect(),
                shapes: list.iter().map(|&v| self.shapes[v]).collect(),
            },
            list,
        ))
    }

    /// The subprogram on `N(seeds)`, with the seeds in its numbering.
    pub fn generated_subprogram(&self, seeds: &[Node]) -> (ConcreteProgram, Substructure) {
        let sub = generated_substructure(&self.topology, seeds);
        let prog = ConcreteProgram {
            spec: self.spec.clone(),
            topology: Arc::new(sub.structure.clone()),
            kinds: sub.inclusion.iter().map(|&v| self.kinds[v]).collect(),
            shapes: sub.inclusion.iter().map(|&v| self.shapes[v]).collect(),
        };
        (prog, sub)
    }
}

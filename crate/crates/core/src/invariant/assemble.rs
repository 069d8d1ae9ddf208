use std::collections::HashMap;
use std::sync::Arc;

use crate::backend::Model;
use crate::chc::{opn_classes, predicate_for, select_dpg, EncodeOptions, Encoding, Predicate};
use crate::logic::{structure_tuples as tuples, Expr, Node, NodeTerm, Structure, Var};
use crate::program::ProgramSpec;
use crate::symmetry::{canonical_form, iso_from_forms, SymmetryError, TypeTable};

use super::InvariantError;

/// The data formula of one type, over the parameters of its predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub pred: Predicate,
    /// Formula over `p0..`, one parameter per slot of `pred`.
    pub phi: Expr,
    /// Whether the encoding had an unknown for this type.
    pub selected: bool,
    /// The type the formula was copied from, for types merged with another.
    pub shared_from: Option<usize>,
}

/// `forall nu. OR_r alpha_r(nu) /\ phi_r(mu(t_r(nu)))`, one entry per k-type.
#[derive(Clone, Debug)]
pub struct AshcroftInvariant {
    pub spec: Arc<ProgramSpec>,
    pub types: Arc<TypeTable>,
    pub entries: Vec<Entry>,
    /// The encoding the invariant solves; with DPG it is only inductive on
    /// substructures generated by processes.
    pub options: EncodeOptions,
}

impl AshcroftInvariant {
    pub fn width(&self) -> usize {
        self.types.width
    }

    /// The invariant with every data formula `true`.
    pub fn trivial(spec: Arc<ProgramSpec>, types: Arc<TypeTable>) -> Self {
        let entries = types
            .iter()
            .map(|t| Entry {
                pred: predicate_for(&spec, t),
                phi: Expr::Bool(true),
                selected: false,
                shared_from: None,
            })
            .collect();
        AshcroftInvariant {
            spec,
            types,
            entries,
            options: EncodeOptions::baseline(),
        }
    }

    /// The invariant's matrix at `tuple` of `s`, over field accesses of
    /// concrete nodes (primed ones if `primed`).
    pub fn at(&self, s: &Structure, tuple: &[Node], primed: bool) -> Result<Expr, InvariantError> {
        let (r, reps) = self.types.classify_with_reps(s, tuple).map_err(|e| match e {
            SymmetryError::UnknownType => {
                let labels: Vec<&str> = tuple.iter().map(|&v| s.label(v)).collect();
                InvariantError::UntypedTuple(labels.join(" "))
            }
            e => e.into(),
        })?;
        let e = &self.entries[r];
        if e.phi.is_true() {
            return Ok(Expr::Bool(true));
        }
        let map: HashMap<String, Expr> = e
            .pred
            .params()
            .into_iter()
            .zip(&e.pred.slots)
            .map(|(p, slot)| {
                (
                    p.name,
                    Expr::field(primed, NodeTerm::Param(reps[slot.pos]), slot.field.clone()),
                )
            })
            .collect();
        Ok(e.phi.subst_vars(&map))
    }

    /// The conjunction of the matrix over every k-tuple of `s`.
    pub fn instance_formula(&self, s: &Structure, primed: bool) -> Result<Expr, InvariantError> {
        let mut parts = Vec::new();
        for t in tuples(s.len(), self.width()) {
            let e = self.at(s, &t, primed)?;
            if !e.is_true() && !parts.contains(&e) {
                parts.push(e);
            }
        }
        Ok(Expr::and(parts))
    }

    /// Validity obligations `phi <=> phi o pi` for every neighbourhood
    /// symmetry `pi` of every type.
    pub fn symmetry_obligations(&self) -> Vec<(usize, Expr)> {
        let mut out = Vec::new();
        for (r, e) in self.entries.iter().enumerate() {
            if e.phi.is_true() {
                continue;
            }
            let params: Vec<Expr> = e.pred.params().iter().map(Expr::var).collect();
            for perm in e.pred.symmetries.iter().skip(1) {
                let args = e.pred.permute(&params, perm);
                let map: HashMap<String, Expr> = e
                    .pred
                    .params()
                    .into_iter()
                    .zip(args)
                    .map(|(p, a)| (p.name, a))
                    .collect();
                let image = e.phi.subst_vars(&map);
                out.push((
                    r,
                    Expr::and([
                        Expr::implies(e.phi.clone(), image.clone()),
                        Expr::implies(image, e.phi.clone()),
                    ]),
                ));
            }
        }
        out
    }
}

/// Reads the invariant off a solution of `enc.system`. Unselected types get
/// `true`, except that with OPN a type merged into another copies that
/// type's formula through the isomorphism of their neighbourhoods.
pub fn assemble_invariant(enc: &Encoding, model: &Model) -> Result<AshcroftInvariant, InvariantError> {
    let types = &enc.types;
    let mut inv = AshcroftInvariant::trivial(enc.spec.clone(), types.clone());
    inv.options = enc.options;
    for t in types.iter() {
        if let Some(p) = enc.pred_of_type[t.id] {
            let pred = &enc.system.predicates[p];
            let phi = model
                .get(&pred.name)
                .ok_or_else(|| InvariantError::MissingPredicate(pred.name.clone()))?;
            let e = &mut inv.entries[t.id];
            e.phi = phi.clone();
            e.selected = true;
        }
    }
    if enc.options.opn {
        let among = if enc.options.dpg {
            select_dpg(types, &enc.spec.family)
        } else {
            vec![true; types.len()]
        };
        for class in opn_classes(types, &among) {
            let rep = class[0];
            for &r in &class[1..] {
                let phi = transfer(&inv.entries[rep], &inv.entries[r].pred, types, rep, r)?;
                let e = &mut inv.entries[r];
                e.phi = phi;
                e.shared_from = Some(rep);
            }
        }
    }
    Ok(inv)
}

/// `from`'s formula as a formula over the parameters of type `to`, whose
/// unmarked neighbourhood is isomorphic to that of `from`.
fn transfer(
    entry: &Entry,
    target: &Predicate,
    types: &TypeTable,
    from: usize,
    to: usize,
) -> Result<Expr, InvariantError> {
    let (a, b) = (types.get(from), types.get(to));
    let fa = canonical_form(&a.neighbourhood.structure, &[]);
    let fb = canonical_form(&b.neighbourhood.structure, &[]);
    // iso maps b's neighbourhood onto a's.
    let iso = iso_from_forms(&fb, &fa).ok_or(SymmetryError::UnknownType)?;
    let mut map = HashMap::new();
    for (i, slot) in entry.pred.slots.iter().enumerate() {
        let node_a = a.rep_nodes[slot.pos];
        let pos_b = b
            .rep_nodes
            .iter()
            .position(|&u| iso[u] == node_a)
            .expect("isomorphism is onto");
        let j = target
            .slots
            .iter()
            .position(|s| s.pos == pos_b && s.field == slot.field)
            .expect("isomorphic nodes carry the same fields");
        map.insert(format!("p{i}"), Expr::var(&Var::new(format!("p{j}"), slot.sort)));
    }
    Ok(entry.phi.subst_vars(&map))
}

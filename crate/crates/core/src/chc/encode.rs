use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::logic::{structure_tuples as tuples, Expr, LogicError, Node, Structure, Var};
use crate::program::{attach_program, check_modeling_rules, family_types, ConcreteProgram, ProgramSpec};
use crate::symmetry::{automorphisms, canonical_form, generated_nodes, QfType, TypeTable};

use super::indicator::{closure_members, select_dpg, select_opn, validate_chi};
use super::reduce::{symmetry_clauses, symmetry_reduce};
use super::system::{Atom, ChcSystem, Clause, ClauseKind, Head, Predicate, Slot};
use super::ChcError;

/// Optimizations applied by [`encode_family`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct EncodeOptions {
    /// One predicate per neighbourhood isomorphism class.
    pub opn: bool,
    /// Only distinct process tuples as generators.
    pub dpg: bool,
    /// Canonicalize atoms under neighbourhood automorphisms.
    pub sym: bool,
}

impl EncodeOptions {
    pub fn baseline() -> Self {
        Self::default()
    }

    pub fn all() -> Self {
        EncodeOptions {
            opn: true,
            dpg: true,
            sym: true,
        }
    }

    /// Inverse of [`EncodeOptions::label`].
    pub fn from_label(s: &str) -> Option<Self> {
        let mut o = EncodeOptions::default();
        if s == "baseline" {
            return Some(o);
        }
        for part in s.split('+') {
            match part {
                "opn" => o.opn = true,
                "dpg" => o.dpg = true,
                "sym" => o.sym = true,
                _ => return None,
            }
        }
        Some(o)
    }

    /// Short name such as `baseline` or `opn+dpg+sym`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.opn {
            parts.push("opn");
        }
        if self.dpg {
            parts.push("dpg");
        }
        if self.sym {
            parts.push("sym");
        }
        if parts.is_empty() {
            "baseline".into()
        } else {
            parts.join("+")
        }
    }
}

/// A family encoding together with what is needed to read back solutions.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub spec: Arc<ProgramSpec>,
    pub width: usize,
    pub options: EncodeOptions,
    pub types: Arc<TypeTable>,
    /// Selected types.
    pub chi: Vec<bool>,
    /// Predicate index of each selected type.
    pub pred_of_type: Vec<Option<usize>>,
    /// The system to solve. With `sym` it is the reduced system plus
    /// symmetry clauses.
    pub system: ChcSystem,
    /// The system before symmetry reduction; equal to `system` without `sym`.
    pub unreduced: ChcSystem,
}

/// The unknown predicate of type `t`: one slot per field of each
/// representative node, and the symmetries of its neighbourhood.
pub fn predicate_for(spec: &ProgramSpec, t: &QfType) -> Predicate {
    let sub = &t.neighbourhood;
    let mut slots = Vec::new();
    for (pos, &u) in t.rep_nodes.iter().enumerate() {
        if let Some(sh) = spec.layout.shape_of(&sub.structure, u) {
            for (f, sort) in &spec.layout.shapes[sh].fields {
                slots.push(Slot {
                    pos,
                    field: f.clone(),
                    sort: *sort,
                });
            }
        }
    }
    let identity: Vec<usize> = (0..t.rep_nodes.len()).collect();
    let mut symmetries = vec![identity.clone()];
    let mut seen: HashSet<Vec<usize>> = HashSet::from([identity]);
    for f in automorphisms(&sub.structure, &[]) {
        let perm: Vec<usize> = t
            .rep_nodes
            .iter()
            .map(|&u| {
                t.rep_nodes
                    .iter()
                    .position(|&x| x == f[u])
                    .expect("automorphism is onto")
            })
            .collect();
        if seen.insert(perm.clone()) {
            symmetries.push(perm);
        }
    }
    Predicate {
        name: format!("Inv_{}", t.id),
        type_id: t.id,
        rep_terms: t.rep_terms.clone(),
        slots,
        symmetries,
    }
}

/// How clause variables are named.
enum Naming {
    /// By position in a node list: `x_<i>_<field>`.
    Local(HashMap<Node, usize>),
    /// By node label: `x_<label>_<field>`.
    Labels,
}

impl Naming {
    fn local(scope: &[Node]) -> Naming {
        Naming::Local(scope.iter().enumerate().map(|(i, &v)| (v, i)).collect())
    }

    fn var(&self, prog: &ConcreteProgram, v: Node, field: &str, primed: bool) -> Result<Var, LogicError> {
        let sort = prog.field_sort(v, field).ok_or_else(|| LogicError::UnknownField {
            node: prog.label(v).to_string(),
            field: field.to_string(),
        })?;
        let base = if primed { "xp" } else { "x" };
        let name = match self {
            Naming::Local(m) => {
                let i = m.get(&v).ok_or(LogicError::NodeOutOfRange(v))?;
                format!("{base}_{i}_{field}")
            }
            Naming::Labels => format!("{base}_{}_{field}", prog.label(v)),
        };
        Ok(Var::new(name, sort))
    }
}

/// A program together with cached tuple classifications.
struct Member {
    instance: usize,
    prog: ConcreteProgram,
    cache: HashMap<Vec<Node>, (usize, Vec<Node>)>,
}

impl Member {
    fn labels(&self, t: &[Node]) -> String {
        t.iter().map(|&v| self.prog.label(v)).collect::<Vec<_>>().join(" ")
    }
}

struct Gen<'a> {
    types: &'a TypeTable,
    pred_of_type: &'a [Option<usize>],
    preds: &'a [Predicate],
}

impl Gen<'_> {
    fn classify(&self, m: &mut Member, t: &[Node]) -> Result<(usize, Vec<Node>), ChcError> {
        if let Some(c) = m.cache.get(t) {
            return Ok(c.clone());
        }
        let c = self.types.classify_with_reps(&m.prog.topology, t)?;
        m.cache.insert(t.to_vec(), c.clone());
        Ok(c)
    }

    fn selected(&self, m: &mut Member, t: &[Node]) -> Result<bool, ChcError> {
        Ok(self.pred_of_type[self.classify(m, t)?.0].is_some())
    }

    fn atom(
        &self,
        m: &mut Member,
        t: &[Node],
        naming: &Naming,
        primed: &dyn Fn(Node, &str) -> bool,
    ) -> Result<Option<Atom>, ChcError> {
        let (r, reps) = self.classify(m, t)?;
        let Some(pred) = self.pred_of_type[r] else {
            return Ok(None);
        };
        let mut args = Vec::new();
        for &u in &reps {
            for (f, _) in m.prog.fields(u) {
                args.push(naming.var(&m.prog, u, f, primed(u, f))?);
            }
        }
        debug_assert_eq!(args.len(), self.preds[pred].arity());
        Ok(Some(Atom { pred, args }))
    }

    /// Atoms for every selected k-tuple over `scope`.
    fn body(&self, m: &mut Member, scope: &[Node], naming: &Naming) -> Result<Vec<Atom>, ChcError> {
        let mut out = Vec::new();
        for idx in tuples(scope.len(), self.types.width) {
            let t: Vec<Node> = idx.iter().map(|&i| scope[i]).collect();
            if let Some(a) = self.atom(m, &t, naming, &|_, _| false)? {
                out.push(a);
            }
        }
        Ok(out)
    }

    fn init_clause(
        &self,
        m: &mut Member,
        w: &[Node],
        scope: &[Node],
        naming: &Naming,
    ) -> Result<Option<Clause>, ChcError> {
        let Some(head) = self.atom(m, w, naming, &|_, _| false)? else {
            return Ok(None);
        };
        let mut parts = Vec::new();
        for &v in scope {
            parts.push(m.prog.init(v)?);
        }
        let prog = &m.prog;
        let constraint = Expr::and(parts).subst_fields(&mut |v, f, p| naming.var(prog, v, f, p))?;
        if constraint.is_false() {
            return Ok(None);
        }
        Ok(Some(Clause {
            kind: ClauseKind::Init,
            body: Vec::new(),
            constraint,
            head: Head::Atom(head),
            origin: format!("({}) in member {}", m.labels(w), m.instance),
        }))
    }

    fn step_clause(
        &self,
        m: &mut Member,
        v0: Node,
        w: &[Node],
        body: &[Atom],
        naming: &Naming,
    ) -> Result<Option<Clause>, ChcError> {
        if !self.selected(m, w)? {
            return Ok(None);
        }
        let Some(tr) = m.prog.transition(v0)? else {
            return Ok(None);
        };
        let modified: BTreeSet<(Node, String)> = tr
            .relation
            .fields()
            .into_iter()
            .filter(|r| r.primed)
            .filter_map(|r| match r.node {
                crate::logic::NodeTerm::Param(u) => Some((u, r.field)),
                _ => None,
            })
            .collect();
        let prog = &m.prog;
        let constraint = tr.relation.subst_fields(&mut |v, f, p| naming.var(prog, v, f, p))?;
        if constraint.is_false() {
            return Ok(None);
        }
        let is_modified = |u: Node, f: &str| modified.contains(&(u, f.to_string()));
        let head = self.atom(m, w, naming, &is_modified)?.expect("selected");
        Ok(Some(Clause {
            kind: ClauseKind::Step,
            body: body.to_vec(),
            constraint,
            head: Head::Atom(head),
            origin: format!("{} moves, ({}) in member {}", m.prog.label(v0), m.labels(w), m.instance),
        }))
    }

    fn error_clause(
        &self,
        m: &mut Member,
        w: &[Node],
        body: &[Atom],
        naming: &Naming,
    ) -> Result<Option<Clause>, ChcError> {
        let err = m.prog.error(w)?;
        if err.is_false() {
            return Ok(None);
        }
        let prog = &m.prog;
        let constraint = err.subst_fields(&mut |v, f, p| naming.var(prog, v, f, p))?;
        Ok(Some(Clause {
            kind: ClauseKind::Error,
            body: body.to_vec(),
            constraint,
            head: Head::False,
            origin: format!("error at ({}) in member {}", m.labels(w), m.instance),
        }))
    }
}

fn member_mut<'m>(
    members: &'m mut HashMap<usize, Member>,
    spec: &Arc<ProgramSpec>,
    n: usize,
    s: &Arc<Structure>,
) -> Result<&'m mut Member, ChcError> {
    Ok(match members.entry(n) {
        Entry::Occupied(e) => e.into_mut(),
        Entry::Vacant(e) => e.insert(Member {
            instance: n,
            prog: attach_program(spec.clone(), s.clone())?,
            cache: HashMap::new(),
        }),
    })
}

fn sorted(set: BTreeSet<Node>) -> Vec<Node> {
    set.into_iter().collect()
}

/// Encodes the existence of a width-k invariant for one concrete program,
/// over the whole topology: every tuple gets an init clause, every
/// (process, tuple) pair a step clause and every error tuple a query.
pub fn encode_single(prog: &ConcreteProgram, types: &TypeTable) -> Result<ChcSystem, ChcError> {
    let k = types.width;
    let n = prog.len();
    let mut present = BTreeSet::new();
    for t in tuples(n, k) {
        present.insert(types.classify(&prog.topology, &t)?);
    }
    let mut pred_of_type = vec![None; types.len()];
    let mut predicates = Vec::new();
    for &r in &present {
        pred_of_type[r] = Some(predicates.len());
        predicates.push(predicate_for(&prog.spec, types.get(r)));
    }
    let gen = Gen {
        types,
        pred_of_type: &pred_of_type,
        preds: &predicates,
    };
    let mut m = Member {
        instance: prog.len(),
        prog: prog.clone(),
        cache: HashMap::new(),
    };
    let naming = Naming::Labels;
    let all: Vec<Node> = prog.topology.nodes().collect();
    let mut clauses = Vec::new();
    for w in tuples(n, k) {
        clauses.extend(gen.init_clause(&mut m, &w, &all, &naming)?);
    }
    let body = gen.body(&mut m, &all, &naming)?;
    for v0 in prog.processes() {
        for w in tuples(n, k) {
            clauses.extend(gen.step_clause(&mut m, v0, &w, &body, &naming)?);
        }
    }
    if let Some(arity) = prog.spec.error_arity() {
        for w in tuples(n, arity) {
            clauses.extend(gen.error_clause(&mut m, &w, &body, &naming)?);
        }
    }
    for c in &mut clauses {
        c.origin = c.origin.replace(&format!(" in member {}", m.instance), "");
    }
    let mut system = ChcSystem { predicates, clauses };
    system.dedup();
    Ok(system)
}

/// Encodes the existence of a width-k invariant for the downward closure of
/// the family: init clauses on the neighbourhoods of k-type witnesses, step
/// clauses on the neighbourhoods of (k+1)-type witnesses and error clauses on
/// the neighbourhoods of error tuples.
pub fn encode_family(spec: &Arc<ProgramSpec>, k: usize, options: EncodeOptions) -> Result<Encoding, ChcError> {
    if k == 0 {
        return Err(ChcError::ZeroWidth);
    }
    let family = &spec.family;
    if options.dpg {
        let bad = check_modeling_rules(family, &family.bounds(k + 1))?;
        if let Some(b) = bad.first() {
            return Err(ChcError::ModelingRules(b.clone()));
        }
    }
    let types = Arc::new(family_types(family, k)?);
    let next = family_types(family, k + 1)?;
    let mut chi = vec![true; types.len()];
    if options.dpg {
        chi = select_dpg(&types, family);
    }
    if options.opn {
        chi = select_opn(&types, &chi);
    }
    if chi.iter().any(|c| !c) {
        let members = closure_members(family, &next, k, options.dpg)?;
        if let Some(v) = validate_chi(&chi, &types, &members)? {
            return Err(ChcError::IncompleteIndicator(v));
        }
    }
    let mut pred_of_type = vec![None; types.len()];
    let mut predicates = Vec::new();
    for t in types.iter().filter(|t| chi[t.id]) {
        pred_of_type[t.id] = Some(predicates.len());
        predicates.push(predicate_for(spec, t));
    }
    let gen = Gen {
        types: &types,
        pred_of_type: &pred_of_type,
        preds: &predicates,
    };

    let mut members: HashMap<usize, Member> = HashMap::new();
    let mut clauses = Vec::new();

    for t in types.iter().filter(|t| chi[t.id]) {
        let w = &t.witness;
        let m = member_mut(&mut members, spec, w.instance, &w.structure)?;
        let scope = sorted(generated_nodes(&m.prog.topology, &w.tuple));
        let naming = Naming::local(&scope);
        clauses.extend(gen.init_clause(m, &w.tuple, &scope, &naming)?);
    }

    for t in next.iter() {
        let w = &t.witness;
        let m = member_mut(&mut members, spec, w.instance, &w.structure)?;
        let (v0, rest) = (w.tuple[0], &w.tuple[1..]);
        if !m.prog.is_process(v0) || !gen.selected(m, rest)? {
            continue;
        }
        let scope = sorted(generated_nodes(&m.prog.topology, &w.tuple));
        let naming = Naming::local(&scope);
        let body = gen.body(m, &scope, &naming)?;
        clauses.extend(gen.step_clause(m, v0, rest, &body, &naming)?);
    }

    if let Some(arity) = spec.error_arity() {
        if options.dpg {
            let mut seen = HashSet::new();
            for (n, s) in family.instances(k.max(arity))? {
                let m = member_mut(&mut members, spec, n, &s)?;
                error_clauses_dpg(&gen, m, arity, &mut seen, &mut clauses)?;
            }
        } else {
            let owned;
            let etypes = if arity == k {
                &*types
            } else if arity == k + 1 {
                &next
            } else {
                owned = family_types(family, arity)?;
                &owned
            };
            for t in etypes.iter() {
                let w = &t.witness;
                let m = member_mut(&mut members, spec, w.instance, &w.structure)?;
                if m.prog.error(&w.tuple)?.is_false() {
                    continue;
                }
                let scope = sorted(generated_nodes(&m.prog.topology, &w.tuple));
                let naming = Naming::local(&scope);
                let body = gen.body(m, &scope, &naming)?;
                clauses.extend(gen.error_clause(m, &w.tuple, &body, &naming)?);
            }
        }
    }

    let mut unreduced = ChcSystem { predicates, clauses };
    unreduced.dedup();
    let system = if options.sym {
        let mut s = symmetry_reduce(&unreduced);
        s.clauses.extend(symmetry_clauses(&s.predicates));
        s
    } else {
        unreduced.clone()
    };
    Ok(Encoding {
        spec: spec.clone(),
        width: k,
        options,
        types,
        chi,
        pred_of_type,
        system,
        unreduced,
    })
}

/// Error clauses over the substructures generated by k distinct processes of
/// one member, one per error tuple up to isomorphism of the substructure with
/// the tuple pinned. Fails if some error tuple lies in no such substructure.
fn error_clauses_dpg(
    gen: &Gen<'_>,
    m: &mut Member,
    arity: usize,
    seen: &mut HashSet<Vec<u8>>,
    out: &mut Vec<Clause>,
) -> Result<(), ChcError> {
    let k = gen.types.width;
    let procs = m.prog.processes();
    let mut covers: Vec<Vec<Node>> = Vec::new();
    let mut seen_scopes = HashSet::new();
    for idx in tuples(procs.len(), k) {
        let distinct: BTreeSet<usize> = idx.iter().copied().collect();
        if distinct.len() < k {
            continue;
        }
        let u: Vec<Node> = idx.iter().map(|&i| procs[i]).collect();
        let scope = sorted(generated_nodes(&m.prog.topology, &u));
        if seen_scopes.insert(scope.clone()) {
            covers.push(scope);
        }
    }
    for scope in &covers {
        let sub = m.prog.topology.induced(scope);
        let naming = Naming::local(scope);
        let mut body = None;
        for idx in tuples(scope.len(), arity) {
            let w: Vec<Node> = idx.iter().map(|&i| scope[i]).collect();
            if m.prog.error(&w)?.is_false() {
                continue;
            }
            if !seen.insert(canonical_form(&sub, &idx).key) {
                continue;
            }
            if body.is_none() {
                body = Some(gen.body(m, scope, &naming)?);
            }
            out.extend(gen.error_clause(m, &w, body.as_ref().expect("set"), &naming)?);
        }
    }
    for w in tuples(m.prog.len(), arity) {
        if covers.iter().any(|c| w.iter().all(|v| c.contains(v))) {
            continue;
        }
        if !m.prog.error(&w)?.is_false() {
            return Err(ChcError::ErrorNotCovered(format!(
                "{} in member {}",
                m.labels(&w),
                m.instance
            )));
        }
    }
    Ok(())
}

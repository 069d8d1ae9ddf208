use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::logic::{Expr, Node, NodeTerm, PredId, Sort, Structure};
use crate::parse::{parse_formula, ExprContext};
use crate::sexp::{parse_all, Sexp, SexpError};
use crate::symmetry::{type_key, TypeTable};

use super::family::{FamilyDescriptor, Topology};
use super::ProgramError;

/// The record shape of the nodes matching `selector` (a unary predicate;
/// `None` matches every node).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub selector: Option<PredId>,
    pub fields: Vec<(String, Sort)>,
}

/// Node record shapes; the first matching shape applies to a node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FieldLayout {
    pub shapes: Vec<Shape>,
}

impl FieldLayout {
    pub fn shape_of(&self, s: &Structure, v: Node) -> Option<usize> {
        self.shapes
            .iter()
            .position(|sh| sh.selector.is_none_or(|p| s.holds(p, &[v])))
    }

    /// Field name -> sort over all shapes; a name must have one sort.
    pub fn field_sorts(&self) -> Result<BTreeMap<String, Sort>, ProgramError> {
        let mut out = BTreeMap::new();
        for sh in &self.shapes {
            for (f, s) in &sh.fields {
                if let Some(old) = out.insert(f.clone(), *s) {
                    if old != *s {
                        return Err(ProgramError::Spec(format!("field `{f}` declared with two sorts")));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// An error condition over `arity` node variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorSpec {
    pub arity: usize,
    pub formula: Expr,
}

/// Behaviour shared by all nodes of one 1-type.
///
/// Templates mention the node itself as `nu1`; `trans` is `None` for nodes
/// without transitions. Primed fields not mentioned by `trans` keep their values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KindSpec {
    pub witness_instance: usize,
    pub witness_label: String,
    pub trans: Option<Expr>,
    pub init: Expr,
    /// Error for tuples whose first node has this kind.
    pub error: Option<ErrorSpec>,
}

/// A parameterized program: family, record shapes and per-kind behaviour.
#[derive(Clone, Debug)]
pub struct ProgramSpec {
    pub name: String,
    pub family: FamilyDescriptor,
    pub layout: FieldLayout,
    pub kinds: Vec<KindSpec>,
    /// Error applying to every tuple of its arity.
    pub global_error: Option<ErrorSpec>,
    /// Suggested invariant width.
    pub width: Option<usize>,
    pub(crate) types1: TypeTable,
    kind_of_type: Vec<usize>,
}

impl ProgramSpec {
    pub fn new(
        name: impl Into<String>,
        family: FamilyDescriptor,
        layout: FieldLayout,
        kinds: Vec<KindSpec>,
        global_error: Option<ErrorSpec>,
    ) -> Result<ProgramSpec, ProgramError> {
        let instances = family.instances(1)?;
        let types1 = TypeTable::enumerate(&instances, 1)?;
        let mut kind_of_type: Vec<Option<usize>> = vec![None; types1.len()];
        for (ki, k) in kinds.iter().enumerate() {
            let s = family.instantiate(k.witness_instance)?;
            let v = s.node_by_label(&k.witness_label).ok_or_else(|| {
                ProgramError::Spec(format!(
                    "member {} has no node `{}`",
                    k.witness_instance, k.witness_label
                ))
            })?;
            let r = types1
                .id_of_key(&type_key(&s, &[v]))
                .ok_or(ProgramError::Symmetry(crate::symmetry::SymmetryError::UnknownType))?;
            if let Some(other) = kind_of_type[r] {
                return Err(ProgramError::Spec(format!(
                    "kinds ({} {}) and ({} {}) describe the same 1-type",
                    kinds[other].witness_instance, kinds[other].witness_label, k.witness_instance, k.witness_label
                )));
            }
            kind_of_type[r] = Some(ki);
        }
        let mut resolved = Vec::with_capacity(kind_of_type.len());
        for (r, k) in kind_of_type.iter().enumerate() {
            match k {
                Some(k) => resolved.push(*k),
                None => {
                    let w = &types1.get(r).witness;
                    return Err(ProgramError::Spec(format!(
                        "no kind for the 1-type of node `{}` in member {}",
                        w.structure.label(w.tuple[0]),
                        w.instance
                    )));
                }
            }
        }
        let spec = ProgramSpec {
            name: name.into(),
            family,
            layout,
            kinds,
            global_error,
            width: None,
            types1,
            kind_of_type: resolved,
        };
        spec.check_templates()?;
        Ok(spec)
    }

    /// All 1-types of the family.
    pub fn node_types(&self) -> &TypeTable {
        &self.types1
    }

    /// Kind index for the node `v` of `s`.
    pub fn kind_of(&self, s: &Structure, v: Node) -> Result<usize, ProgramError> {
        let r = self
            .types1
            .classify(s, &[v])
            .map_err(|_| ProgramError::UnknownNodeType(s.label(v).to_string()))?;
        Ok(self.kind_of_type[r])
    }

    /// The common arity of all error conditions, if any exist.
    pub fn error_arity(&self) -> Option<usize> {
        self.global_error
            .iter()
            .chain(self.kinds.iter().filter_map(|k| k.error.as_ref()))
            .map(|e| e.arity)
            .next()
    }

    pub fn has_bool_fields_only(&self) -> bool {
        self.layout
            .shapes
            .iter()
            .all(|s| s.fields.iter().all(|(_, so)| *so == Sort::Bool))
    }

    fn check_templates(&self) -> Result<(), ProgramError> {
        let arities: Vec<usize> = self
            .global_error
            .iter()
            .chain(self.kinds.iter().filter_map(|k| k.error.as_ref()))
            .map(|e| e.arity)
            .collect();
        if arities.iter().any(|&a| a != arities[0]) {
            return Err(ProgramError::Spec(
                "all error conditions must have the same arity".into(),
            ));
        }
        if arities.first() == Some(&0) {
            return Err(ProgramError::Spec("error arity must be at least 1".into()));
        }
        for (ki, k) in self.kinds.iter().enumerate() {
            let s = self.family.instantiate(k.witness_instance)?;
            let v = s.node_by_label(&k.witness_label).expect("checked in new");
            let is_proc = self.family.is_process(&s, v);
            if k.trans.is_some() && !is_proc {
                return Err(ProgramError::Spec(format!(
                    "kind ({} {}) is not a process but has a transition",
                    k.witness_instance, k.witness_label
                )));
            }
            let prog = super::attach_program(Arc::new(self.clone_shallow()), Arc::new(s))?;
            prog.init(v)?;
            prog.transition(v)?;
            if let Some(e) = &k.error {
                // check field names against the witness node and its neighbours
                let env = vec![v; e.arity];
                prog.instantiate_checked(&e.formula, &env)?;
            }
            debug_assert_eq!(prog.kinds[v], ki);
        }
        Ok(())
    }

    fn clone_shallow(&self) -> ProgramSpec {
        self.clone()
    }

    /// Parses the S-expression program format.
    pub fn parse(src: &str) -> Result<ProgramSpec, ProgramError> {
        parse_spec(src)
    }
}

fn spec_err<T>(s: &Sexp, msg: impl Into<String>) -> Result<T, ProgramError> {
    Err(ProgramError::Parse(SexpError::new(s.pos, msg)))
}

fn parse_family(items: &[Sexp], whole: &Sexp) -> Result<FamilyDescriptor, ProgramError> {
    let Some(name) = items.first() else {
        return spec_err(whole, "family needs a generator name");
    };
    let gen = name.expect_atom("generator name")?;
    let mut min = None;
    let mut max = None;
    let mut hub = false;
    let mut marked = false;
    for opt in &items[1..] {
        match (opt.atom(), opt.head()) {
            (Some("hub"), _) => hub = true,
            (Some("marked"), _) => marked = true,
            (_, Some("min")) | (_, Some("max")) => {
                let l = opt.list().unwrap();
                if l.len() != 2 {
                    return spec_err(opt, "expected (min N) or (max N)");
                }
                let n = l[1].expect_usize("index")?;
                if opt.head() == Some("min") {
                    min = Some(n);
                } else {
                    max = Some(n);
                }
            }
            _ => return spec_err(opt, "unknown family option"),
        }
    }
    let topology = match gen {
        "line" => Topology::Line { hub },
        "star" => Topology::Star,
        "ring" => Topology::Ring { marked },
        "grid" => Topology::Grid,
        "depth-tree" => Topology::DepthTree,
        "binary-tree" => Topology::BinaryTree,
        other => return spec_err(name, format!("unknown family `{other}`")),
    };
    if (hub && !matches!(topology, Topology::Line { .. })) || (marked && !matches!(topology, Topology::Ring { .. })) {
        return spec_err(whole, "option does not apply to this family");
    }
    let default_min = match topology {
        Topology::Ring { .. } => 3,
        Topology::Grid | Topology::Star => 2,
        Topology::Line { .. } => 3,
        _ => 1,
    };
    let mut fam = FamilyDescriptor::new(topology, min.unwrap_or(default_min)).map_err(|e| match e {
        ProgramError::Family(m) => ProgramError::Parse(SexpError::new(whole.pos, m)),
        e => e,
    })?;
    fam.max_index = max;
    Ok(fam)
}

fn parse_spec(src: &str) -> Result<ProgramSpec, ProgramError> {
    let forms = parse_all(src)?;
    let mut name = String::from("program");
    let mut family = None;
    let mut layout_forms = None;
    let mut kind_forms = Vec::new();
    let mut error_form = None;
    let mut bounds_form = None;
    let mut width = None;
    for f in &forms {
        let items = f.expect_list("top-level section")?;
        match f.head() {
            Some("program") => {
                name = match items.get(1).map(|s| &s.kind) {
                    Some(crate::sexp::SexpKind::Atom(a)) | Some(crate::sexp::SexpKind::Str(a)) => a.clone(),
                    _ => return spec_err(f, "expected (program <name>)"),
                }
            }
            Some("family") => family = Some(parse_family(&items[1..], f)?),
            Some("fields") => layout_forms = Some(f),
            Some("kind") => kind_forms.push(f),
            Some("error") => error_form = Some(f),
            Some("enum-bounds") => bounds_form = Some(f),
            Some("width") => {
                if items.len() != 2 {
                    return spec_err(f, "expected (width K)");
                }
                width = Some(items[1].expect_usize("width")?);
            }
            _ => return spec_err(f, "unknown section"),
        }
    }
    let Some(mut family) = family else {
        return Err(ProgramError::Spec("missing (family ...) section".into()));
    };
    if let Some(b) = bounds_form {
        for entry in &b.list().unwrap()[1..] {
            let l = entry.expect_list("(k index ...)")?;
            if l.len() < 2 {
                return spec_err(entry, "bounds need a width and at least one index");
            }
            let k = l[0].expect_usize("width")?;
            let mut idx = Vec::new();
            for i in &l[1..] {
                let n = i.expect_usize("member index")?;
                if !family.contains_index(n) {
                    return spec_err(i, format!("index {n} is outside the family"));
                }
                idx.push(n);
            }
            family.bounds.insert(k, idx);
        }
    }
    let vocab = family.vocab.clone();
    let mut layout = FieldLayout::default();
    if let Some(lf) = layout_forms {
        for sh in &lf.list().unwrap()[1..] {
            let l = sh.expect_list("(selector (field sort) ...)")?;
            let Some(sel) = l.first() else {
                return spec_err(sh, "empty shape");
            };
            let sel_name = sel.expect_atom("selector")?;
            let selector = match sel_name {
                "else" | "all" => None,
                p => match vocab.predicate(p) {
                    Some(pid) if vocab.pred_symbol(pid).arity == 1 => Some(pid),
                    _ => return spec_err(sel, format!("`{p}` is not a unary predicate")),
                },
            };
            let mut fields = Vec::new();
            for fd in &l[1..] {
                let pair = fd.expect_list("(field sort)")?;
                if pair.len() != 2 {
                    return spec_err(fd, "expected (field sort)");
                }
                let fname = pair[0].expect_atom("field name")?;
                let sort = match pair[1].expect_atom("sort")? {
                    "int" | "Int" => Sort::Int,
                    "bool" | "Bool" => Sort::Bool,
                    other => return spec_err(&pair[1], format!("unknown sort `{other}`")),
                };
                if fields.iter().any(|(n, _)| n == fname) {
                    return spec_err(&pair[0], format!("duplicate field `{fname}`"));
                }
                fields.push((fname.to_string(), sort));
            }
            layout.shapes.push(Shape { selector, fields });
        }
    }
    let field_sorts = layout.field_sorts()?;
    let no_vars = HashMap::new();
    let ctx = |node_vars: usize| ExprContext {
        vocab: Some(&vocab),
        field_sorts: &field_sorts,
        vars: &no_vars,
        node_vars,
    };
    let parse_error = |f: &Sexp, items: &[Sexp]| -> Result<ErrorSpec, ProgramError> {
        if items.len() != 3 {
            return spec_err(f, "expected (error <arity> <formula>)");
        }
        let arity = items[1].expect_usize("error arity")?;
        Ok(ErrorSpec {
            arity,
            formula: parse_formula(&items[2], &ctx(arity))?,
        })
    };
    let mut kinds = Vec::new();
    for kf in kind_forms {
        let items = kf.list().unwrap();
        let Some(w) = items.get(1) else {
            return spec_err(kf, "kind needs a witness (instance node)");
        };
        let wl = w.expect_list("(instance node)")?;
        if wl.len() != 2 {
            return spec_err(w, "expected (instance node)");
        }
        let inst = wl[0].expect_usize("member index")?;
        let label = match &wl[1].kind {
            crate::sexp::SexpKind::Atom(a) | crate::sexp::SexpKind::Str(a) => a.clone(),
            _ => return spec_err(&wl[1], "expected node label"),
        };
        let mut kind = KindSpec {
            witness_instance: inst,
            witness_label: label,
            trans: None,
            init: Expr::Bool(true),
            error: None,
        };
        for sec in &items[2..] {
            let sl = sec.expect_list("kind section")?;
            match sec.head() {
                Some("trans") if sl.len() == 2 => kind.trans = Some(parse_formula(&sl[1], &ctx(1))?),
                Some("init") if sl.len() == 2 => kind.init = parse_formula(&sl[1], &ctx(1))?,
                Some("error") => kind.error = Some(parse_error(sec, sl)?),
                _ => return spec_err(sec, "expected (trans F), (init F) or (error M F)"),
            }
        }
        if !family.contains_index(inst) {
            return spec_err(w, format!("index {inst} is outside the family"));
        }
        kinds.push(kind);
    }
    let global_error = match error_form {
        Some(f) => Some(parse_error(f, f.list().unwrap())?),
        None => None,
    };
    let mut spec = ProgramSpec::new(name, family, layout, kinds, global_error)?;
    spec.width = width;
    Ok(spec)
}

/// Whether a template only mentions fields of `nu1` itself.
pub(crate) fn mentions_only_self(e: &Expr) -> bool {
    e.fields().iter().all(|r| r.node == NodeTerm::Var(0))
}

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::sync::Arc;

use crate::chc::EncodeOptions;
use crate::logic::{Expr, Sort};
use crate::parse::{parse_formula, ExprContext};
use crate::program::{family_types, ProgramSpec};
use crate::sexp::{parse_all, Sexp};
use crate::symmetry::TypeTable;

use super::assemble::AshcroftInvariant;
use super::InvariantError;

/// `phi_r` with each parameter replaced by the field access on the
/// representative term it stands for.
fn inlined(inv: &AshcroftInvariant, r: usize) -> Expr {
    let e = &inv.entries[r];
    let t = inv.types.get(r);
    let map: HashMap<String, Expr> = e
        .pred
        .params()
        .into_iter()
        .zip(&e.pred.slots)
        .map(|(p, s)| (p.name, Expr::field(false, t.rep_terms[s.pos].clone(), s.field.clone())))
        .collect();
    e.phi.subst_vars(&map)
}

/// `forall nu1..nuk.` followed by one disjunct `alpha_r /\ phi_r` per type.
pub fn export_text(inv: &AshcroftInvariant) -> String {
    let vocab = &inv.spec.family.vocab;
    let nus: Vec<String> = (1..=inv.width()).map(|i| format!("nu{i}")).collect();
    let mut out = format!(
        "; {} at width {}\nforall {}.\n",
        inv.spec.name,
        inv.width(),
        nus.join(" ")
    );
    for (r, t) in inv.types.iter().enumerate() {
        let sep = if r == 0 { "   " } else { "\\/ " };
        writeln!(
            out,
            "  {sep}{} /\\ {}",
            t.alpha.display(vocab),
            inlined(inv, r).display(Some(vocab))
        )
        .unwrap();
    }
    out
}

fn sort_name(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::Bool => "Bool",
    }
}

/// Machine-readable form: one entry per type with a nontrivial formula,
/// keyed by the hex canonical key of the type.
pub fn export_sexp(inv: &AshcroftInvariant) -> String {
    let mut out = format!(
        "(invariant\n  (spec {})\n  (width {})\n  (encoding {})\n",
        inv.spec.name,
        inv.width(),
        inv.options.label()
    );
    for (r, e) in inv.entries.iter().enumerate() {
        if e.phi.is_true() {
            continue;
        }
        let params: Vec<String> = e
            .pred
            .params()
            .iter()
            .map(|p| format!("({} {})", p.name, sort_name(p.sort)))
            .collect();
        writeln!(
            out,
            "  ; type {r}\n  (type {} ({}) {})",
            hex::encode(&inv.types.get(r).key),
            params.join(" "),
            e.phi
        )
        .unwrap();
    }
    out.push_str(")\n");
    out
}

fn import_err<T>(msg: impl Into<String>) -> Result<T, InvariantError> {
    Err(InvariantError::Import(msg.into()))
}

/// Reads an invariant written by [`export_sexp`]. Types absent from the file
/// get `true`.
pub fn import_sexp(
    src: &str,
    spec: Arc<ProgramSpec>,
    types: Arc<TypeTable>,
) -> Result<AshcroftInvariant, InvariantError> {
    let forms = parse_all(src).map_err(|e| InvariantError::Import(e.to_string()))?;
    let [top] = forms.as_slice() else {
        return import_err("expected a single (invariant ...) form");
    };
    if top.head() != Some("invariant") {
        return import_err("expected (invariant ...)");
    }
    let mut inv = AshcroftInvariant::trivial(spec.clone(), types.clone());
    let items = &top.list().expect("has a head")[1..];
    let no_fields = BTreeMap::new();
    for item in items {
        let parts: &[Sexp] = item.list().unwrap_or(&[]);
        match item.head() {
            Some("spec") => {
                let name = parts.get(1).and_then(Sexp::atom).unwrap_or("");
                if name != spec.name {
                    return Err(InvariantError::SpecMismatch {
                        expected: spec.name.clone(),
                        found: name.to_string(),
                    });
                }
            }
            Some("width") => {
                let k = parts
                    .get(1)
                    .ok_or_else(|| InvariantError::Import("missing width".into()))?
                    .expect_usize("width")
                    .map_err(|e| InvariantError::Import(e.to_string()))?;
                if k != types.width {
                    return import_err(format!("invariant has width {k}, expected {}", types.width));
                }
            }
            Some("encoding") => {
                let label = parts.get(1).and_then(Sexp::atom).unwrap_or("");
                inv.options = EncodeOptions::from_label(label)
                    .ok_or_else(|| InvariantError::Import(format!("unknown encoding `{label}`")))?;
            }
            Some("type") => {
                let [_, key, params, body] = parts else {
                    return import_err(format!("malformed type entry at {}", item.pos));
                };
                let key = key
                    .atom()
                    .and_then(|k| hex::decode(k).ok())
                    .ok_or_else(|| InvariantError::Import(format!("bad type key at {}", item.pos)))?;
                let Some(r) = types.id_of_key(&key) else {
                    return import_err(format!("type at {} does not occur in the family", item.pos));
                };
                let entry = &mut inv.entries[r];
                let expected = entry.pred.params();
                let params = params.list().unwrap_or(&[]);
                if params.len() != expected.len() {
                    return import_err(format!("type {r} needs {} parameters", expected.len()));
                }
                let mut vars = HashMap::new();
                for (p, want) in params.iter().zip(&expected) {
                    let pair = p.list().filter(|l| l.len() == 2);
                    let name = pair.and_then(|l| l[0].atom());
                    let sort = pair.and_then(|l| l[1].atom());
                    if name != Some(want.name.as_str()) || sort != Some(sort_name(want.sort)) {
                        return import_err(format!(
                            "type {r}: parameter {} should be ({} {})",
                            p,
                            want.name,
                            sort_name(want.sort)
                        ));
                    }
                    vars.insert(want.name.clone(), want.sort);
                }
                let ctx = ExprContext {
                    vocab: None,
                    field_sorts: &no_fields,
                    vars: &vars,
                    node_vars: 0,
                };
                entry.phi = parse_formula(body, &ctx).map_err(|e| InvariantError::Import(e.to_string()))?;
                entry.selected = true;
            }
            _ => return import_err(format!("unexpected entry at {}", item.pos)),
        }
    }
    Ok(inv)
}

/// [`import_sexp`] for a file whose width is read from the file itself.
pub fn read_invariant(src: &str, spec: Arc<ProgramSpec>) -> Result<AshcroftInvariant, InvariantError> {
    let forms = parse_all(src).map_err(|e| InvariantError::Import(e.to_string()))?;
    let width = forms
        .first()
        .and_then(Sexp::list)
        .and_then(|items| items.iter().find(|i| i.head() == Some("width")))
        .and_then(|w| w.list()?.get(1)?.expect_usize("width").ok())
        .ok_or_else(|| InvariantError::Import("missing (width k)".into()))?;
    let types = Arc::new(family_types(&spec.family, width)?);
    import_sexp(src, spec, types)
}

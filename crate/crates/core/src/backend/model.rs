use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::chc::Predicate;
use crate::logic::{Expr, Sort, Var};
use crate::parse::{parse_formula, ExprContext};
use crate::sexp::{parse_all, Sexp, SexpKind};

/// A solution: one formula per predicate over its positional parameters
/// (see [`Predicate::params`]).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub defs: BTreeMap<String, Expr>,
}

impl Model {
    pub fn get(&self, pred: &str) -> Option<&Expr> {
        self.defs.get(pred)
    }

    /// The definition of `pred` applied to `args`.
    pub fn apply(&self, pred: &Predicate, args: &[Expr]) -> Option<Expr> {
        let body = self.defs.get(&pred.name)?;
        let map: HashMap<String, Expr> = pred
            .params()
            .into_iter()
            .zip(args.iter().cloned())
            .map(|(p, a)| (p.name, a))
            .collect();
        Some(body.subst_vars(&map))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("incomplete model: no definition for `{0}`")]
    Missing(String),
    #[error("unusable model: {0}")]
    Unusable(String),
}

fn define_funs<'a>(forms: &'a [Sexp], out: &mut Vec<&'a [Sexp]>) {
    for f in forms {
        if let Some(items) = f.list() {
            match f.head() {
                Some("define-fun") => out.push(items),
                Some("model") => define_funs(&items[1..], out),
                Some(_) => {}
                None => define_funs(items, out),
            }
        }
    }
}

/// Reads `define-fun` entries for the given predicates from solver output.
/// Parameters are renamed positionally; anything outside the data theory
/// makes the model unusable.
pub fn parse_model(transcript: &str, preds: &[Predicate]) -> Result<Model, ModelError> {
    let start = transcript.find('(').unwrap_or(transcript.len());
    let forms = parse_all(&transcript[start..]).map_err(|e| ModelError::Unusable(e.to_string()))?;
    let mut defs = Vec::new();
    define_funs(&forms, &mut defs);
    let mut by_name: HashMap<&str, &[Sexp]> = HashMap::new();
    for d in defs {
        if let Some(SexpKind::Atom(n)) = d.get(1).map(|s| &s.kind) {
            by_name.insert(n.as_str(), d);
        }
    }
    let no_fields = BTreeMap::new();
    let mut model = Model::default();
    for p in preds {
        let d = by_name
            .get(p.name.as_str())
            .ok_or_else(|| ModelError::Missing(p.name.clone()))?;
        if d.len() != 5 {
            return Err(ModelError::Unusable(format!("malformed definition of `{}`", p.name)));
        }
        let params = d[2]
            .list()
            .ok_or_else(|| ModelError::Unusable(format!("malformed parameters of `{}`", p.name)))?;
        if params.len() != p.arity() {
            return Err(ModelError::Unusable(format!(
                "`{}` defined with the wrong arity",
                p.name
            )));
        }
        let mut vars = HashMap::new();
        let mut rename = HashMap::new();
        for (i, (param, slot)) in params.iter().zip(&p.slots).enumerate() {
            let pair = param.list().filter(|l| l.len() == 2);
            let (Some(name), Some(sort)) = (pair.and_then(|l| l[0].atom()), pair.and_then(|l| l[1].atom())) else {
                return Err(ModelError::Unusable(format!("malformed parameter of `{}`", p.name)));
            };
            let sort = match sort {
                "Int" => Sort::Int,
                "Bool" => Sort::Bool,
                other => return Err(ModelError::Unusable(format!("parameter sort `{other}`"))),
            };
            if sort != slot.sort {
                return Err(ModelError::Unusable(format!(
                    "`{}` defined with the wrong sorts",
                    p.name
                )));
            }
            vars.insert(name.to_string(), sort);
            rename.insert(name.to_string(), Expr::Var(Var::new(format!("p{i}"), sort)));
        }
        let ctx = ExprContext {
            vocab: None,
            field_sorts: &no_fields,
            vars: &vars,
            node_vars: 0,
        };
        let body = parse_formula(&d[4], &ctx).map_err(|e| ModelError::Unusable(format!("`{}`: {}", p.name, e)))?;
        model.defs.insert(p.name.clone(), body.subst_vars(&rename));
    }
    Ok(model)
}

/// The conjunction of a solution over all symmetries of its predicate.
pub fn symmetrize(pred: &Predicate, body: &Expr) -> Expr {
    let params: Vec<Expr> = pred.params().iter().map(Expr::var).collect();
    let parts = pred.symmetries.iter().map(|perm| {
        let args = pred.permute(&params, perm);
        let map: HashMap<String, Expr> = pred.params().into_iter().zip(args).map(|(p, a)| (p.name, a)).collect();
        body.subst_vars(&map)
    });
    Expr::and(parts.collect::<Vec<_>>())
}

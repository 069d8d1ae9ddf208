//! Reading node terms and data formulas from S-expressions.

use std::collections::{BTreeMap, HashMap};

use crate::logic::{CmpOp, Expr, NodeFormula, NodeTerm, Sort, Var, Vocabulary};
use crate::sexp::{Sexp, SexpError, SexpKind};

/// What a formula may refer to.
#[derive(Clone, Copy)]
pub struct ExprContext<'a> {
    /// Node vocabulary; `None` rejects node terms and field accesses.
    pub vocab: Option<&'a Vocabulary>,
    /// Known data fields and their sorts.
    pub field_sorts: &'a BTreeMap<String, Sort>,
    /// Free pure variables.
    pub vars: &'a HashMap<String, Sort>,
    /// Number of node variables `nu1..nuN` in scope.
    pub node_vars: usize,
}

fn err<T>(s: &Sexp, msg: impl Into<String>) -> Result<T, SexpError> {
    Err(SexpError::new(s.pos, msg))
}

/// Parses `nu`, `nuK`, constants and applications `(f t ...)`.
pub fn parse_term(s: &Sexp, ctx: &ExprContext<'_>) -> Result<NodeTerm, SexpError> {
    let Some(vocab) = ctx.vocab else {
        return err(s, "node terms are not allowed here");
    };
    match &s.kind {
        SexpKind::Atom(a) => {
            if let Some(rest) = a.strip_prefix("nu") {
                let idx = if rest.is_empty() {
                    1
                } else {
                    match rest.parse::<usize>() {
                        Ok(i) if i >= 1 => i,
                        _ => return err(s, format!("bad node variable `{a}`")),
                    }
                };
                if idx > ctx.node_vars {
                    return err(s, format!("node variable `{a}` is not in scope"));
                }
                return Ok(NodeTerm::Var(idx - 1));
            }
            match vocab.function(a) {
                Some(f) if vocab.fn_symbol(f).arity == 0 => Ok(NodeTerm::App(f, Vec::new())),
                Some(_) => err(s, format!("function `{a}` needs arguments")),
                None => err(s, format!("unknown node term `{a}`")),
            }
        }
        SexpKind::List(items) if !items.is_empty() => {
            let name = items[0].expect_atom("function symbol")?;
            let Some(f) = vocab.function(name) else {
                return err(&items[0], format!("unknown function `{name}`"));
            };
            let arity = vocab.fn_symbol(f).arity;
            if arity != items.len() - 1 {
                return err(s, format!("`{name}` expects {arity} arguments"));
            }
            let args = items[1..]
                .iter()
                .map(|a| parse_term(a, ctx))
                .collect::<Result<_, _>>()?;
            Ok(NodeTerm::App(f, args))
        }
        _ => err(s, "expected node term"),
    }
}

fn parse_int_atom(a: &str) -> Option<i64> {
    if a.chars().all(|c| c.is_ascii_digit())
        || (a.starts_with('-') && a.len() > 1 && a[1..].chars().all(|c| c.is_ascii_digit()))
    {
        a.parse().ok()
    } else {
        None
    }
}

/// Parses a data formula or term, checking sorts.
pub fn parse_expr(s: &Sexp, ctx: &ExprContext<'_>) -> Result<Expr, SexpError> {
    let mut lets: Vec<HashMap<String, Expr>> = Vec::new();
    let e = parse_inner(s, ctx, &mut lets)?;
    sort_check(&e, ctx, s)?;
    Ok(e)
}

/// Parses and requires sort Bool.
pub fn parse_formula(s: &Sexp, ctx: &ExprContext<'_>) -> Result<Expr, SexpError> {
    let e = parse_expr(s, ctx)?;
    if sort_check(&e, ctx, s)? != Sort::Bool {
        return err(s, "expected a Bool formula");
    }
    Ok(e)
}

fn sort_check(e: &Expr, ctx: &ExprContext<'_>, s: &Sexp) -> Result<Sort, SexpError> {
    e.sort(&|r| ctx.field_sorts.get(&r.field).copied())
        .map_err(|x| SexpError::new(s.pos, x.to_string()))
}

fn parse_inner(s: &Sexp, ctx: &ExprContext<'_>, lets: &mut Vec<HashMap<String, Expr>>) -> Result<Expr, SexpError> {
    match &s.kind {
        SexpKind::Str(_) => err(s, "unexpected string"),
        SexpKind::Atom(a) => {
            if a == "true" {
                return Ok(Expr::Bool(true));
            }
            if a == "false" {
                return Ok(Expr::Bool(false));
            }
            if let Some(i) = parse_int_atom(a) {
                return Ok(Expr::Int(i));
            }
            for scope in lets.iter().rev() {
                if let Some(e) = scope.get(a) {
                    return Ok(e.clone());
                }
            }
            if let Some(sort) = ctx.vars.get(a) {
                return Ok(Expr::Var(Var::new(a.clone(), *sort)));
            }
            err(s, format!("unknown identifier `{a}`"))
        }
        SexpKind::List(items) => {
            let Some(head) = items.first() else {
                return err(s, "empty expression");
            };
            let op = head.expect_atom("operator")?;
            let args = &items[1..];
            let sub = |e: &Sexp, lets: &mut Vec<HashMap<String, Expr>>| parse_inner(e, ctx, lets);
            let all = |lets: &mut Vec<HashMap<String, Expr>>| -> Result<Vec<Expr>, SexpError> {
                args.iter().map(|a| sub(a, lets)).collect()
            };
            let need = |n: usize| -> Result<(), SexpError> {
                if args.len() == n {
                    Ok(())
                } else {
                    err(s, format!("`{op}` expects {n} arguments"))
                }
            };
            let at_least = |n: usize| -> Result<(), SexpError> {
                if args.len() >= n {
                    Ok(())
                } else {
                    err(s, format!("`{op}` expects at least {n} arguments"))
                }
            };
            let chain = |op: CmpOp, swap: bool, xs: Vec<Expr>| -> Expr {
                let pairs: Vec<Expr> = xs
                    .windows(2)
                    .map(|w| {
                        let (a, b) = if swap {
                            (w[1].clone(), w[0].clone())
                        } else {
                            (w[0].clone(), w[1].clone())
                        };
                        Expr::Cmp(op, Box::new(a), Box::new(b))
                    })
                    .collect();
                if pairs.len() == 1 {
                    pairs.into_iter().next().unwrap()
                } else {
                    Expr::And(pairs)
                }
            };
            match op {
                "mu" | "mu'" => {
                    need(2)?;
                    let node = parse_term(&args[0], ctx)?;
                    let field = args[1].expect_atom("field name")?;
                    if !ctx.field_sorts.contains_key(field) {
                        return err(&args[1], format!("unknown field `{field}`"));
                    }
                    Ok(Expr::field(op == "mu'", node, field))
                }
                "node=" => {
                    need(2)?;
                    Ok(Expr::Node(NodeFormula::Eq(
                        parse_term(&args[0], ctx)?,
                        parse_term(&args[1], ctx)?,
                    )))
                }
                "is" => {
                    at_least(2)?;
                    let Some(vocab) = ctx.vocab else {
                        return err(s, "node predicates are not allowed here");
                    };
                    let name = args[0].expect_atom("predicate")?;
                    let Some(p) = vocab.predicate(name) else {
                        return err(&args[0], format!("unknown predicate `{name}`"));
                    };
                    if vocab.pred_symbol(p).arity != args.len() - 1 {
                        return err(s, format!("`{name}` has arity {}", vocab.pred_symbol(p).arity));
                    }
                    let ts = args[1..].iter().map(|a| parse_term(a, ctx)).collect::<Result<_, _>>()?;
                    Ok(Expr::Node(NodeFormula::Pred(p, ts)))
                }
                "and" => Ok(Expr::And(all(lets)?)),
                "or" => Ok(Expr::Or(all(lets)?)),
                "not" => {
                    need(1)?;
                    Ok(Expr::Not(Box::new(sub(&args[0], lets)?)))
                }
                "=>" => {
                    at_least(2)?;
                    let mut xs = all(lets)?;
                    let mut acc = xs.pop().unwrap();
                    while let Some(x) = xs.pop() {
                        acc = Expr::Implies(Box::new(x), Box::new(acc));
                    }
                    Ok(acc)
                }
                "ite" => {
                    need(3)?;
                    let xs = all(lets)?;
                    let mut it = xs.into_iter();
                    Ok(Expr::Ite(
                        Box::new(it.next().unwrap()),
                        Box::new(it.next().unwrap()),
                        Box::new(it.next().unwrap()),
                    ))
                }
                "=" => {
                    at_least(2)?;
                    Ok(chain(CmpOp::Eq, false, all(lets)?))
                }
                "<" => {
                    at_least(2)?;
                    Ok(chain(CmpOp::Lt, false, all(lets)?))
                }
                "<=" => {
                    at_least(2)?;
                    Ok(chain(CmpOp::Le, false, all(lets)?))
                }
                ">" => {
                    at_least(2)?;
                    Ok(chain(CmpOp::Lt, true, all(lets)?))
                }
                ">=" => {
                    at_least(2)?;
                    Ok(chain(CmpOp::Le, true, all(lets)?))
                }
                "distinct" => {
                    at_least(2)?;
                    let xs = all(lets)?;
                    let mut conj = Vec::new();
                    for i in 0..xs.len() {
                        for j in i + 1..xs.len() {
                            conj.push(Expr::Not(Box::new(Expr::eq(xs[i].clone(), xs[j].clone()))));
                        }
                    }
                    Ok(if conj.len() == 1 {
                        conj.pop().unwrap()
                    } else {
                        Expr::And(conj)
                    })
                }
                "+" => {
                    at_least(1)?;
                    Ok(Expr::Add(all(lets)?))
                }
                "-" => {
                    at_least(1)?;
                    let xs = all(lets)?;
                    if let [Expr::Int(i)] = xs.as_slice() {
                        return Ok(Expr::Int(-i));
                    }
                    Ok(Expr::Sub(xs))
                }
                "*" => {
                    at_least(1)?;
                    Ok(Expr::Mul(all(lets)?))
                }
                "div" => {
                    need(2)?;
                    let mut xs = all(lets)?;
                    let b = xs.pop().unwrap();
                    Ok(Expr::Div(Box::new(xs.pop().unwrap()), Box::new(b)))
                }
                "mod" => {
                    need(2)?;
                    let mut xs = all(lets)?;
                    let b = xs.pop().unwrap();
                    Ok(Expr::Mod(Box::new(xs.pop().unwrap()), Box::new(b)))
                }
                "let" => {
                    need(2)?;
                    let binds = args[0].expect_list("let bindings")?;
                    let mut scope = HashMap::new();
                    for b in binds {
                        let pair = b.expect_list("binding")?;
                        if pair.len() != 2 {
                            return err(b, "binding must be (name expr)");
                        }
                        let name = pair[0].expect_atom("bound name")?;
                        scope.insert(name.to_string(), sub(&pair[1], lets)?);
                    }
                    lets.push(scope);
                    let body = sub(&args[1], lets);
                    lets.pop();
                    body
                }
                other => err(head, format!("unsupported operator `{other}`")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::parse_all;

    fn ctx_parse(src: &str) -> Result<Expr, SexpError> {
        let vocab = Vocabulary::new(&[("g", 0), ("l", 1)], &[("isProc", 1)]).unwrap();
        let fields: BTreeMap<String, Sort> = [("x".to_string(), Sort::Int), ("y".to_string(), Sort::Bool)].into();
        let vars: HashMap<String, Sort> = [("p0".to_string(), Sort::Int)].into();
        let ctx = ExprContext {
            vocab: Some(&vocab),
            field_sorts: &fields,
            vars: &vars,
            node_vars: 1,
        };
        parse_formula(&parse_all(src).unwrap()[0], &ctx)
    }

    #[test]
    fn parses_field_accesses_and_arithmetic() {
        let e = ctx_parse("(and (= (mu' nu x) (+ (mu (l nu) x) 1)) (mu g y) (>= p0 -2))").unwrap();
        assert_eq!(e.fields().len(), 3);
        assert_eq!(e.free_vars().len(), 1);
    }

    #[test]
    fn inlines_let_bindings() {
        let e = ctx_parse("(let ((a (+ p0 1))) (let ((b (* 2 a))) (< a b)))").unwrap();
        assert_eq!(
            e,
            Expr::lt(
                Expr::Add(vec![Expr::Var(Var::new("p0", Sort::Int)), Expr::Int(1)]),
                Expr::Mul(vec![
                    Expr::Int(2),
                    Expr::Add(vec![Expr::Var(Var::new("p0", Sort::Int)), Expr::Int(1)])
                ])
            )
        );
    }

    #[test]
    fn rejects_sort_errors_and_unknown_names() {
        assert!(ctx_parse("(+ (mu nu y) 1)").is_err());
        assert!(ctx_parse("(mu nu2 y)").is_err());
        assert!(ctx_parse("(mu nu z)").is_err());
        assert!(ctx_parse("(foo 1)").is_err());
        let e = ctx_parse("(and true\n  (mu nu q))").unwrap_err();
        assert_eq!(e.pos.line, 2);
    }
}

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::{LogicError, Node, NodeFormula, NodeTerm, Structure, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => write!(f, "Int"),
            Sort::Bool => write!(f, "Bool"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn sort(self) -> Sort {
        match self {
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
        }
    }

    fn as_int(self) -> Result<i64, LogicError> {
        match self {
            Value::Int(i) => Ok(i),
            Value::Bool(_) => Err(LogicError::SortMismatch("expected Int, found Bool".into())),
        }
    }

    fn as_bool(self) -> Result<bool, LogicError> {
        match self {
            Value::Bool(b) => Ok(b),
            Value::Int(_) => Err(LogicError::SortMismatch("expected Bool, found Int".into())),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// A pure data variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Var {
            name: name.into(),
            sort,
        }
    }
}

/// A field access `mu(t).field`, or `mu'(t).field` when primed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldRef {
    pub primed: bool,
    pub node: NodeTerm,
    pub field: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Lt,
    Le,
}

/// A formula or term over linear integer arithmetic and booleans.
///
/// Leaves may be field accesses on node terms, pure variables, literals or
/// node-level guards; guards become literals once node variables are bound.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Var(Var),
    Field(FieldRef),
    Node(NodeFormula),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Add(Vec<Expr>),
    /// `(- a)` negates; `(- a b c)` is `a - b - c`.
    Sub(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Mod(Box<Expr>, Box<Expr>),
}

/// Names the variable standing for `mu(node).field` (or its primed copy).
pub type VarNamer<'a> = dyn FnMut(Node, &str, bool) -> Result<Var, LogicError> + 'a;

impl Expr {
    pub fn field(primed: bool, node: NodeTerm, field: impl Into<String>) -> Expr {
        Expr::Field(FieldRef {
            primed,
            node,
            field: field.into(),
        })
    }

    pub fn var(v: &Var) -> Expr {
        Expr::Var(v.clone())
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Expr::Bool(true))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Expr::Bool(false))
    }

    /// Conjunction with constant folding and flattening.
    pub fn and(items: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        for it in items {
            match it {
                Expr::Bool(true) => {}
                Expr::Bool(false) => return Expr::Bool(false),
                Expr::And(xs) => out.extend(xs),
                e => out.push(e),
            }
        }
        dedup_in_order(&mut out);
        match out.len() {
            0 => Expr::Bool(true),
            1 => out.pop().unwrap(),
            _ => Expr::And(out),
        }
    }

    /// Disjunction with constant folding and flattening.
    pub fn or(items: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        for it in items {
            match it {
                Expr::Bool(false) => {}
                Expr::Bool(true) => return Expr::Bool(true),
                Expr::Or(xs) => out.extend(xs),
                e => out.push(e),
            }
        }
        dedup_in_order(&mut out);
        match out.len() {
            0 => Expr::Bool(false),
            1 => out.pop().unwrap(),
            _ => Expr::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        match e {
            Expr::Bool(b) => Expr::Bool(!b),
            Expr::Not(inner) => *inner,
            e => Expr::Not(Box::new(e)),
        }
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Bool(false), _) | (_, Expr::Bool(true)) => Expr::Bool(true),
            (Expr::Bool(true), b) => b,
            (a, Expr::Bool(false)) => Expr::not(a),
            (a, b) => Expr::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::Cmp(CmpOp::Eq, Box::new(a), Box::new(b))
    }

    pub fn lt(a: Expr, b: Expr) -> Expr {
        Expr::Cmp(CmpOp::Lt, Box::new(a), Box::new(b))
    }

    pub fn le(a: Expr, b: Expr) -> Expr {
        Expr::Cmp(CmpOp::Le, Box::new(a), Box::new(b))
    }

    /// Pre-order rewrite: `f` may replace a subtree, otherwise children are visited.
    pub fn rewrite<E>(&self, f: &mut dyn FnMut(&Expr) -> Result<Option<Expr>, E>) -> Result<Expr, E> {
        if let Some(r) = f(self)? {
            return Ok(r);
        }
        let b = |e: &Expr, f: &mut dyn FnMut(&Expr) -> Result<Option<Expr>, E>| -> Result<Box<Expr>, E> {
            Ok(Box::new(e.rewrite(f)?))
        };
        Ok(match self {
            Expr::Bool(_) | Expr::Int(_) | Expr::Var(_) | Expr::Field(_) | Expr::Node(_) => self.clone(),
            Expr::Not(a) => Expr::Not(b(a, f)?),
            Expr::And(xs) => Expr::And(xs.iter().map(|x| x.rewrite(f)).collect::<Result<_, _>>()?),
            Expr::Or(xs) => Expr::Or(xs.iter().map(|x| x.rewrite(f)).collect::<Result<_, _>>()?),
            Expr::Implies(x, y) => Expr::Implies(b(x, f)?, b(y, f)?),
            Expr::Ite(c, x, y) => Expr::Ite(b(c, f)?, b(x, f)?, b(y, f)?),
            Expr::Cmp(op, x, y) => Expr::Cmp(*op, b(x, f)?, b(y, f)?),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.rewrite(f)).collect::<Result<_, _>>()?),
            Expr::Sub(xs) => Expr::Sub(xs.iter().map(|x| x.rewrite(f)).collect::<Result<_, _>>()?),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.rewrite(f)).collect::<Result<_, _>>()?),
            Expr::Div(x, y) => Expr::Div(b(x, f)?, b(y, f)?),
            Expr::Mod(x, y) => Expr::Mod(b(x, f)?, b(y, f)?),
        })
    }

    /// Visits every subexpression in pre-order.
    pub fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Bool(_) | Expr::Int(_) | Expr::Var(_) | Expr::Field(_) | Expr::Node(_) => {}
            Expr::Not(a) => a.visit(f),
            Expr::And(xs) | Expr::Or(xs) | Expr::Add(xs) | Expr::Sub(xs) | Expr::Mul(xs) => {
                xs.iter().for_each(|x| x.visit(f))
            }
            Expr::Implies(x, y) | Expr::Cmp(_, x, y) | Expr::Div(x, y) | Expr::Mod(x, y) => {
                x.visit(f);
                y.visit(f);
            }
            Expr::Ite(c, x, y) => {
                c.visit(f);
                x.visit(f);
                y.visit(f);
            }
        }
    }

    pub fn fields(&self) -> Vec<FieldRef> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Field(r) = e {
                if !out.contains(r) {
                    out.push(r.clone());
                }
            }
        });
        out
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Binds node variables: field accesses get `Param` node terms and node
    /// guards are decided.
    pub fn instantiate(&self, s: &Structure, env: &[Node]) -> Result<Expr, LogicError> {
        let e = self.rewrite(&mut |e| match e {
            Expr::Field(r) => Ok(Some(Expr::Field(FieldRef {
                primed: r.primed,
                node: NodeTerm::Param(r.node.eval(s, env)?),
                field: r.field.clone(),
            }))),
            Expr::Node(phi) => Ok(Some(Expr::Bool(phi.eval(s, env)?))),
            _ => Ok(None),
        })?;
        Ok(e.simplify())
    }

    /// Replaces `mu(t).f` / `mu'(t).f` by pure variables chosen by `namer`.
    ///
    /// Node terms are evaluated in `s` under `env`.
    pub fn subst_mu(&self, s: &Structure, env: &[Node], namer: &mut VarNamer<'_>) -> Result<Expr, LogicError> {
        self.rewrite(&mut |e| match e {
            Expr::Field(r) => {
                let v = r.node.eval(s, env)?;
                Ok(Some(Expr::Var(namer(v, &r.field, r.primed)?)))
            }
            Expr::Node(phi) => Ok(Some(Expr::Bool(phi.eval(s, env)?))),
            _ => Ok(None),
        })
    }

    /// `subst_mu` for formulas whose node terms are already concrete.
    pub fn subst_fields(&self, namer: &mut VarNamer<'_>) -> Result<Expr, LogicError> {
        self.rewrite(&mut |e| match e {
            Expr::Field(r) => match &r.node {
                NodeTerm::Param(v) => Ok(Some(Expr::Var(namer(*v, &r.field, r.primed)?))),
                _ => Err(LogicError::Unresolved),
            },
            Expr::Node(_) => Err(LogicError::Unresolved),
            _ => Ok(None),
        })
    }

    /// Replaces variables by name.
    pub fn subst_vars(&self, map: &HashMap<String, Expr>) -> Expr {
        self.rewrite::<()>(&mut |e| match e {
            Expr::Var(v) => Ok(map.get(&v.name).cloned()),
            _ => Ok(None),
        })
        .expect("infallible")
    }

    /// Maps every field access to its primed copy.
    pub fn prime(&self) -> Result<Expr, LogicError> {
        self.rewrite(&mut |e| match e {
            Expr::Field(r) if r.primed => Err(LogicError::AlreadyPrimed),
            Expr::Field(r) => Ok(Some(Expr::Field(FieldRef {
                primed: true,
                ..r.clone()
            }))),
            _ => Ok(None),
        })
    }

    /// Renames concrete nodes inside field accesses.
    pub fn map_nodes(&self, map: &dyn Fn(Node) -> Node) -> Expr {
        self.rewrite::<()>(&mut |e| match e {
            Expr::Field(r) => Ok(Some(Expr::Field(FieldRef {
                primed: r.primed,
                node: map_term(&r.node, map),
                field: r.field.clone(),
            }))),
            _ => Ok(None),
        })
        .expect("infallible")
    }

    /// Evaluates with the given lookups for field accesses and variables.
    pub fn eval(
        &self,
        fields: &dyn Fn(&FieldRef) -> Result<Value, LogicError>,
        vars: &dyn Fn(&Var) -> Result<Value, LogicError>,
    ) -> Result<Value, LogicError> {
        let ev = |e: &Expr| e.eval(fields, vars);
        Ok(match self {
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Int(i) => Value::Int(*i),
            Expr::Var(v) => vars(v)?,
            Expr::Field(r) => fields(r)?,
            Expr::Node(_) => return Err(LogicError::Unresolved),
            Expr::Not(a) => Value::Bool(!ev(a)?.as_bool()?),
            Expr::And(xs) => {
                for x in xs {
                    if !ev(x)?.as_bool()? {
                        return Ok(Value::Bool(false));
                    }
                }
                Value::Bool(true)
            }
            Expr::Or(xs) => {
                for x in xs {
                    if ev(x)?.as_bool()? {
                        return Ok(Value::Bool(true));
                    }
                }
                Value::Bool(false)
            }
            Expr::Implies(a, b) => Value::Bool(!ev(a)?.as_bool()? || ev(b)?.as_bool()?),
            Expr::Ite(c, a, b) => {
                if ev(c)?.as_bool()? {
                    ev(a)?
                } else {
                    ev(b)?
                }
            }
            Expr::Cmp(op, a, b) => {
                let (x, y) = (ev(a)?, ev(b)?);
                match op {
                    CmpOp::Eq => {
                        if x.sort() != y.sort() {
                            return Err(LogicError::SortMismatch("= on different sorts".into()));
                        }
                        Value::Bool(x == y)
                    }
                    CmpOp::Lt => Value::Bool(x.as_int()? < y.as_int()?),
                    CmpOp::Le => Value::Bool(x.as_int()? <= y.as_int()?),
                }
            }
            Expr::Add(xs) => {
                let mut acc: i64 = 0;
                for x in xs {
                    acc = acc.checked_add(ev(x)?.as_int()?).ok_or(LogicError::Overflow)?;
                }
                Value::Int(acc)
            }
            Expr::Sub(xs) => {
                let first = ev(&xs[0])?.as_int()?;
                if xs.len() == 1 {
                    Value::Int(first.checked_neg().ok_or(LogicError::Overflow)?)
                } else {
                    let mut acc = first;
                    for x in &xs[1..] {
                        acc = acc.checked_sub(ev(x)?.as_int()?).ok_or(LogicError::Overflow)?;
                    }
                    Value::Int(acc)
                }
            }
            Expr::Mul(xs) => {
                let mut acc: i64 = 1;
                for x in xs {
                    acc = acc.checked_mul(ev(x)?.as_int()?).ok_or(LogicError::Overflow)?;
                }
                Value::Int(acc)
            }
            Expr::Div(a, b) | Expr::Mod(a, b) => {
                let (x, y) = (ev(a)?.as_int()?, ev(b)?.as_int()?);
                if y == 0 {
                    return Err(LogicError::DivisionByZero);
                }
                // SMT-LIB integer division: the remainder is never negative.
                let r = x.rem_euclid(y);
                if matches!(self, Expr::Mod(..)) {
                    Value::Int(r)
                } else {
                    Value::Int((x - r) / y)
                }
            }
        })
    }

    /// Computes the sort of the expression, checking operands.
    pub fn sort(&self, field_sort: &dyn Fn(&FieldRef) -> Option<Sort>) -> Result<Sort, LogicError> {
        let want = |e: &Expr, s: Sort| -> Result<(), LogicError> {
            let got = e.sort(field_sort)?;
            if got == s {
                Ok(())
            } else {
                Err(LogicError::SortMismatch(format!("expected {s}, found {got}")))
            }
        };
        Ok(match self {
            Expr::Bool(_) | Expr::Node(_) => Sort::Bool,
            Expr::Int(_) => Sort::Int,
            Expr::Var(v) => v.sort,
            Expr::Field(r) => field_sort(r).ok_or_else(|| LogicError::UnknownField {
                node: format!("{:?}", r.node),
                field: r.field.clone(),
            })?,
            Expr::Not(a) => {
                want(a, Sort::Bool)?;
                Sort::Bool
            }
            Expr::And(xs) | Expr::Or(xs) => {
                for x in xs {
                    want(x, Sort::Bool)?;
                }
                Sort::Bool
            }
            Expr::Implies(a, b) => {
                want(a, Sort::Bool)?;
                want(b, Sort::Bool)?;
                Sort::Bool
            }
            Expr::Ite(c, a, b) => {
                want(c, Sort::Bool)?;
                let s = a.sort(field_sort)?;
                want(b, s)?;
                s
            }
            Expr::Cmp(op, a, b) => {
                let s = a.sort(field_sort)?;
                want(b, s)?;
                if *op != CmpOp::Eq && s != Sort::Int {
                    return Err(LogicError::SortMismatch("ordering on Bool".into()));
                }
                Sort::Bool
            }
            Expr::Add(xs) | Expr::Sub(xs) | Expr::Mul(xs) => {
                if xs.is_empty() {
                    return Err(LogicError::SortMismatch("empty arithmetic operation".into()));
                }
                for x in xs {
                    want(x, Sort::Int)?;
                }
                Sort::Int
            }
            Expr::Div(a, b) | Expr::Mod(a, b) => {
                want(a, Sort::Int)?;
                want(b, Sort::Int)?;
                Sort::Int
            }
        })
    }

    /// Boolean constant folding, flattening and removal of trivial comparisons.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Not(a) => Expr::not(a.simplify()),
            Expr::And(xs) => Expr::and(xs.iter().map(|x| x.simplify())),
            Expr::Or(xs) => Expr::or(xs.iter().map(|x| x.simplify())),
            Expr::Implies(a, b) => Expr::implies(a.simplify(), b.simplify()),
            Expr::Ite(c, a, b) => match c.simplify() {
                Expr::Bool(true) => a.simplify(),
                Expr::Bool(false) => b.simplify(),
                c => Expr::Ite(Box::new(c), Box::new(a.simplify()), Box::new(b.simplify())),
            },
            Expr::Cmp(op, a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (op, &a, &b) {
                    (CmpOp::Eq, x, y) if x == y => Expr::Bool(true),
                    (CmpOp::Le, x, y) if x == y => Expr::Bool(true),
                    (CmpOp::Lt, x, y) if x == y => Expr::Bool(false),
                    (CmpOp::Eq, Expr::Bool(x), Expr::Bool(y)) => Expr::Bool(x == y),
                    (CmpOp::Eq, Expr::Int(x), Expr::Int(y)) => Expr::Bool(x == y),
                    (CmpOp::Lt, Expr::Int(x), Expr::Int(y)) => Expr::Bool(x < y),
                    (CmpOp::Le, Expr::Int(x), Expr::Int(y)) => Expr::Bool(x <= y),
                    (CmpOp::Eq, Expr::Bool(true), e) | (CmpOp::Eq, e, Expr::Bool(true)) => e.clone(),
                    (CmpOp::Eq, Expr::Bool(false), e) | (CmpOp::Eq, e, Expr::Bool(false)) => Expr::not(e.clone()),
                    _ => Expr::Cmp(*op, Box::new(a), Box::new(b)),
                }
            }
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.simplify()).collect()),
            Expr::Sub(xs) => Expr::Sub(xs.iter().map(|x| x.simplify()).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.simplify()).collect()),
            Expr::Div(a, b) => Expr::Div(Box::new(a.simplify()), Box::new(b.simplify())),
            Expr::Mod(a, b) => Expr::Mod(Box::new(a.simplify()), Box::new(b.simplify())),
            e => e.clone(),
        }
    }

    /// SMT-LIB rendering; field accesses print as `(mu t f)` and require `vocab`
    /// when they contain function applications.
    pub fn display<'a>(&'a self, vocab: Option<&'a Vocabulary>) -> impl fmt::Display + 'a {
        ExprDisplay {
            e: self,
            vocab,
            labels: None,
        }
    }

    /// Like [`Expr::display`], printing concrete nodes by their labels in `s`.
    pub fn display_in<'a>(&'a self, s: &'a Structure) -> impl fmt::Display + 'a {
        ExprDisplay {
            e: self,
            vocab: Some(s.vocab()),
            labels: Some(s.labels()),
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, vocab: Option<&Vocabulary>, labels: Option<&[String]>) -> fmt::Result {
        let nary = |f: &mut fmt::Formatter<'_>, op: &str, xs: &[&Expr]| {
            write!(f, "({op}")?;
            for x in xs {
                write!(f, " ")?;
                x.write(f, vocab, labels)?;
            }
            write!(f, ")")
        };
        match self {
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Int(i) if *i < 0 => write!(f, "(- {})", i.unsigned_abs()),
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Var(v) => write!(f, "{}", v.name),
            Expr::Field(r) => {
                write!(f, "({} ", if r.primed { "mu'" } else { "mu" })?;
                match vocab {
                    Some(v) => r.node.write(f, v, labels)?,
                    None => write!(f, "{:?}", r.node)?,
                }
                write!(f, " {})", r.field)
            }
            Expr::Node(phi) => match vocab {
                Some(v) => write!(f, "{}", phi.display(v)),
                None => write!(f, "{phi:?}"),
            },
            Expr::Not(a) => nary(f, "not", &[a]),
            Expr::And(xs) => nary(f, "and", &xs.iter().collect::<Vec<_>>()),
            Expr::Or(xs) => nary(f, "or", &xs.iter().collect::<Vec<_>>()),
            Expr::Implies(a, b) => nary(f, "=>", &[a, b]),
            Expr::Ite(c, a, b) => nary(f, "ite", &[c, a, b]),
            Expr::Cmp(op, a, b) => {
                let s = match op {
                    CmpOp::Eq => "=",
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                };
                nary(f, s, &[a, b])
            }
            Expr::Add(xs) => nary(f, "+", &xs.iter().collect::<Vec<_>>()),
            Expr::Sub(xs) => nary(f, "-", &xs.iter().collect::<Vec<_>>()),
            Expr::Mul(xs) => nary(f, "*", &xs.iter().collect::<Vec<_>>()),
            Expr::Div(a, b) => nary(f, "div", &[a, b]),
            Expr::Mod(a, b) => nary(f, "mod", &[a, b]),
        }
    }
}

fn map_term(t: &NodeTerm, map: &dyn Fn(Node) -> Node) -> NodeTerm {
    match t {
        NodeTerm::Param(v) => NodeTerm::Param(map(*v)),
        NodeTerm::Var(i) => NodeTerm::Var(*i),
        NodeTerm::App(f, args) => NodeTerm::App(*f, args.iter().map(|a| map_term(a, map)).collect()),
    }
}

fn dedup_in_order(xs: &mut Vec<Expr>) {
    let mut seen = std::collections::HashSet::new();
    xs.retain(|x| seen.insert(x.clone()));
}

struct ExprDisplay<'a> {
    e: &'a Expr,
    vocab: Option<&'a Vocabulary>,
    labels: Option<&'a [String]>,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.e.write(f, self.vocab, self.labels)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, None, None)
    }
}

/// A global data state: one value per (node, field).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GlobalState {
    values: BTreeMap<(Node, String), Value>,
}

impl GlobalState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, node: Node, field: &str, v: Value) {
        self.values.insert((node, field.to_string()), v);
    }

    pub fn get(&self, node: Node, field: &str) -> Option<Value> {
        self.values.get(&(node, field.to_string())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Node, String), &Value)> {
        self.values.iter()
    }

    /// Evaluates a concrete formula over the pre-state `self` and post-state `next`.
    pub fn eval(&self, next: Option<&GlobalState>, e: &Expr) -> Result<Value, LogicError> {
        e.eval(
            &|r| {
                let NodeTerm::Param(v) = r.node else {
                    return Err(LogicError::Unresolved);
                };
                let st = if r.primed {
                    next.ok_or(LogicError::Unresolved)?
                } else {
                    self
                };
                st.get(v, &r.field).ok_or_else(|| LogicError::UnknownField {
                    node: v.to_string(),
                    field: r.field.clone(),
                })
            },
            &|v| Err(LogicError::UnboundVar(v.name.clone())),
        )
    }
}

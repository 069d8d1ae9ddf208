use std::cmp::Ordering;
use std::fmt;

use super::{FnId, LogicError, Node, PredId, Structure, Vocabulary};

/// A term over the node vocabulary.
///
/// `Var(i)` is the node variable `nu{i+1}`; `Param(v)` names a concrete node
/// of a fixed structure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeTerm {
    Var(usize),
    Param(Node),
    App(FnId, Vec<NodeTerm>),
}

impl NodeTerm {
    pub fn app(f: FnId, args: Vec<NodeTerm>) -> Self {
        NodeTerm::App(f, args)
    }

    pub fn eval(&self, s: &Structure, env: &[Node]) -> Result<Node, LogicError> {
        match self {
            NodeTerm::Var(i) => env.get(*i).copied().ok_or(LogicError::UnboundNodeVar(*i + 1)),
            NodeTerm::Param(v) => {
                if *v < s.len() {
                    Ok(*v)
                } else {
                    Err(LogicError::NodeOutOfRange(*v))
                }
            }
            NodeTerm::App(f, args) => {
                let sym = s
                    .vocab()
                    .functions()
                    .get(f.0)
                    .ok_or_else(|| LogicError::UnknownSymbol(format!("#{}", f.0)))?;
                if sym.arity != args.len() {
                    return Err(LogicError::ArityMismatch {
                        name: sym.name.clone(),
                        expected: sym.arity,
                        got: args.len(),
                    });
                }
                let vals = args.iter().map(|a| a.eval(s, env)).collect::<Result<Vec<_>, _>>()?;
                Ok(s.apply(*f, &vals))
            }
        }
    }

    /// Nesting depth of function applications; variables and constants have height 0.
    pub fn height(&self) -> usize {
        match self {
            NodeTerm::Var(_) | NodeTerm::Param(_) => 0,
            NodeTerm::App(_, args) => args.iter().map(|a| a.height() + 1).max().unwrap_or(0),
        }
    }

    /// Replaces `Var(i)` by `Param(env[i])`.
    pub fn bind(&self, env: &[Node]) -> Result<NodeTerm, LogicError> {
        Ok(match self {
            NodeTerm::Var(i) => NodeTerm::Param(*env.get(*i).ok_or(LogicError::UnboundNodeVar(*i + 1))?),
            NodeTerm::Param(v) => NodeTerm::Param(*v),
            NodeTerm::App(f, args) => NodeTerm::App(*f, args.iter().map(|a| a.bind(env)).collect::<Result<_, _>>()?),
        })
    }

    /// Total order used to pick canonical representative terms: height, then
    /// variables before applications, then variable index or
    /// (function name, arguments) lexicographically.
    pub fn canonical_cmp(&self, other: &NodeTerm, vocab: &Vocabulary) -> Ordering {
        self.height().cmp(&other.height()).then_with(|| match (self, other) {
            (NodeTerm::Var(a), NodeTerm::Var(b)) => a.cmp(b),
            (NodeTerm::Param(a), NodeTerm::Param(b)) => a.cmp(b),
            (NodeTerm::Var(_), _) => Ordering::Less,
            (_, NodeTerm::Var(_)) => Ordering::Greater,
            (NodeTerm::Param(_), _) => Ordering::Less,
            (_, NodeTerm::Param(_)) => Ordering::Greater,
            (NodeTerm::App(f, xs), NodeTerm::App(g, ys)) => {
                vocab.fn_symbol(*f).name.cmp(&vocab.fn_symbol(*g).name).then_with(|| {
                    for (x, y) in xs.iter().zip(ys) {
                        let c = x.canonical_cmp(y, vocab);
                        if c != Ordering::Equal {
                            return c;
                        }
                    }
                    xs.len().cmp(&ys.len())
                })
            }
        })
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocabulary) -> impl fmt::Display + 'a {
        TermDisplay {
            t: self,
            vocab,
            labels: None,
        }
    }

    pub fn display_in<'a>(&'a self, s: &'a Structure) -> impl fmt::Display + 'a {
        TermDisplay {
            t: self,
            vocab: s.vocab(),
            labels: Some(s.labels()),
        }
    }

    pub(crate) fn write(
        &self,
        f: &mut fmt::Formatter<'_>,
        vocab: &Vocabulary,
        labels: Option<&[String]>,
    ) -> fmt::Result {
        match self {
            NodeTerm::Var(i) => write!(f, "nu{}", i + 1),
            NodeTerm::Param(v) => match labels {
                Some(l) => write!(f, "@{}", l[*v]),
                None => write!(f, "@{v}"),
            },
            NodeTerm::App(g, args) => {
                let name = &vocab.fn_symbol(*g).name;
                if args.is_empty() {
                    write!(f, "{name}")
                } else {
                    write!(f, "({name}")?;
                    for a in args {
                        write!(f, " ")?;
                        a.write(f, vocab, labels)?;
                    }
                    write!(f, ")")
                }
            }
        }
    }
}

struct TermDisplay<'a> {
    t: &'a NodeTerm,
    vocab: &'a Vocabulary,
    labels: Option<&'a [String]>,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.t.write(f, self.vocab, self.labels)
    }
}

/// A quantifier-free formula over node terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeFormula {
    Const(bool),
    Eq(NodeTerm, NodeTerm),
    Pred(PredId, Vec<NodeTerm>),
    Not(Box<NodeFormula>),
    And(Vec<NodeFormula>),
    Or(Vec<NodeFormula>),
}

impl NodeFormula {
    pub fn eval(&self, s: &Structure, env: &[Node]) -> Result<bool, LogicError> {
        Ok(match self {
            NodeFormula::Const(b) => *b,
            NodeFormula::Eq(a, b) => a.eval(s, env)? == b.eval(s, env)?,
            NodeFormula::Pred(p, args) => {
                let sym = s
                    .vocab()
                    .predicates()
                    .get(p.0)
                    .ok_or_else(|| LogicError::UnknownSymbol(format!("#{}", p.0)))?;
                if sym.arity != args.len() {
                    return Err(LogicError::ArityMismatch {
                        name: sym.name.clone(),
                        expected: sym.arity,
                        got: args.len(),
                    });
                }
                let vals = args.iter().map(|a| a.eval(s, env)).collect::<Result<Vec<_>, _>>()?;
                s.holds(*p, &vals)
            }
            NodeFormula::Not(a) => !a.eval(s, env)?,
            NodeFormula::And(xs) => {
                for x in xs {
                    if !x.eval(s, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            NodeFormula::Or(xs) => {
                for x in xs {
                    if x.eval(s, env)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocabulary) -> impl fmt::Display + 'a {
        FormulaDisplay { phi: self, vocab }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, vocab: &Vocabulary) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, op: &str, xs: &[NodeFormula]| {
            write!(f, "({op}")?;
            for x in xs {
                write!(f, " ")?;
                x.write(f, vocab)?;
            }
            write!(f, ")")
        };
        match self {
            NodeFormula::Const(b) => write!(f, "{b}"),
            NodeFormula::Eq(a, b) => {
                write!(f, "(node= ")?;
                a.write(f, vocab, None)?;
                write!(f, " ")?;
                b.write(f, vocab, None)?;
                write!(f, ")")
            }
            NodeFormula::Pred(p, args) => {
                write!(f, "(is {}", vocab.pred_symbol(*p).name)?;
                for a in args {
                    write!(f, " ")?;
                    a.write(f, vocab, None)?;
                }
                write!(f, ")")
            }
            NodeFormula::Not(a) => {
                write!(f, "(not ")?;
                a.write(f, vocab)?;
                write!(f, ")")
            }
            NodeFormula::And(xs) => list(f, "and", xs),
            NodeFormula::Or(xs) => list(f, "or", xs),
        }
    }
}

struct FormulaDisplay<'a> {
    phi: &'a NodeFormula,
    vocab: &'a Vocabulary,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.phi.write(f, self.vocab)
    }
}

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Numeric argument of an atom: constants, named bindings and the few
/// operators the threshold forms need.
#[derive(Debug, Clone, PartialEq)]
pub enum NumExpr {
    Const(f64),
    /// A law constant (`const name = ...`) or a context variable such as `dv`.
    Var(String),
    Neg(Box<NumExpr>),
    Add(Box<NumExpr>, Box<NumExpr>),
    Sub(Box<NumExpr>, Box<NumExpr>),
    Mul(Box<NumExpr>, Box<NumExpr>),
    Max(Box<NumExpr>, Box<NumExpr>),
}

/// Resolves variable names during argument evaluation.
pub trait Bindings {
    fn lookup(&self, name: &str) -> Option<f64>;
}

impl Bindings for BTreeMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl NumExpr {
    pub fn eval(&self, env: &dyn Bindings) -> Result<f64> {
        Ok(match self {
            NumExpr::Const(v) => *v,
            NumExpr::Var(name) => env
                .lookup(name)
                .ok_or_else(|| Error::MissingContext(name.clone()))?,
            NumExpr::Neg(a) => -a.eval(env)?,
            NumExpr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            NumExpr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            NumExpr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            NumExpr::Max(a, b) => a.eval(env)?.max(b.eval(env)?),
        })
    }

    pub fn visit_vars<'a>(&'a self, f: &mut dyn FnMut(&'a str)) {
        match self {
            NumExpr::Const(_) => {}
            NumExpr::Var(name) => f(name),
            NumExpr::Neg(a) => a.visit_vars(f),
            NumExpr::Add(a, b) | NumExpr::Sub(a, b) | NumExpr::Mul(a, b) | NumExpr::Max(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }
}

impl fmt::Display for NumExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // `{:?}` on f64 is the shortest representation that parses back exactly.
            NumExpr::Const(v) => write!(f, "{v:?}"),
            NumExpr::Var(name) => f.write_str(name),
            NumExpr::Neg(a) => write!(f, "-({a})"),
            NumExpr::Add(a, b) => write!(f, "({a} + {b})"),
            NumExpr::Sub(a, b) => write!(f, "({a} - {b})"),
            NumExpr::Mul(a, b) => write!(f, "({a} * {b})"),
            NumExpr::Max(a, b) => write!(f, "max({a}, {b})"),
        }
    }
}

/// A grounded predicate reference, e.g. `gap_gt(d_min)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomRef {
    pub name: String,
    pub args: Vec<NumExpr>,
}

impl AtomRef {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), args: Vec::new() }
    }

    pub fn with_args(name: impl Into<String>, args: Vec<NumExpr>) -> Self {
        Self { name: name.into(), args }
    }
}

impl fmt::Display for AtomRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Temporal-logic formula over finite traces.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(AtomRef),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Self {
        Formula::Atom(AtomRef::new(name))
    }

    pub fn not(a: Formula) -> Self {
        Formula::Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(a: Formula) -> Self {
        Formula::Next(Box::new(a))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn always(a: Formula) -> Self {
        Formula::Always(Box::new(a))
    }

    pub fn eventually(a: Formula) -> Self {
        Formula::Eventually(Box::new(a))
    }

    /// Short operator label used in failure paths.
    pub fn label(&self) -> &'static str {
        match self {
            Formula::Atom(_) => "atom",
            Formula::Not(_) => "!",
            Formula::And(..) => "&",
            Formula::Or(..) => "|",
            Formula::Implies(..) => "->",
            Formula::Next(_) => "X",
            Formula::Until(..) => "U",
            Formula::Always(_) => "G",
            Formula::Eventually(_) => "F",
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Not(a) | Formula::Next(a) | Formula::Always(a) | Formula::Eventually(a) => {
                vec![a]
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b) => vec![a, b],
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn atoms(&self) -> Vec<&AtomRef> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a AtomRef>) {
        match self {
            Formula::Atom(a) => out.push(a),
            _ => self.children().into_iter().for_each(|c| c.collect_atoms(out)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => write!(f, "!({a})"),
            Formula::Next(a) => write!(f, "X({a})"),
            Formula::Always(a) => write!(f, "G({a})"),
            Formula::Eventually(a) => write!(f, "F({a})"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Until(a, b) => write!(f, "({a} U {b})"),
        }
    }
}

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::sexpr::Sexpr;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sort {
    Int,
    Real,
    Bool,
    /// Int-indexed array of the element sort.
    Array(Box<Sort>),
}

impl Sort {
    /// `Int`, `Real`, `Bool` or `(Array Int <elem>)`.
    pub fn from_sexpr(s: &Sexpr) -> Result<Sort, String> {
        match s {
            Sexpr::Atom(a) => match a.as_str() {
                "Int" => Ok(Sort::Int),
                "Real" => Ok(Sort::Real),
                "Bool" => Ok(Sort::Bool),
                _ => Err(format!("unknown sort '{a}'")),
            },
            Sexpr::List(items) if items.len() == 3 && items[0].is_atom("Array") && items[1].is_atom("Int") => {
                let elem = Sort::from_sexpr(&items[2])?;
                if matches!(elem, Sort::Array(_)) {
                    return Err("nested arrays are not supported".into());
                }
                Ok(Sort::Array(Box::new(elem)))
            }
            _ => Err(format!("unsupported sort {s}")),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("Int"),
            Sort::Real => f.write_str("Real"),
            Sort::Bool => f.write_str("Bool"),
            Sort::Array(e) => write!(f, "(Array Int {e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub sort: Sort,
}

impl Symbol {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Self {
            name: name.into(),
            sort,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Not,
    And,
    Or,
    Implies,
    Eq,
    Distinct,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    /// Binary subtraction, or negation with one argument.
    Sub,
    Mul,
    IntDiv,
    Mod,
    RealDiv,
    Abs,
    Ite,
    Select,
    Store,
    ToReal,
    ToInt,
}

impl Op {
    pub fn name(self) -> &'static str {
        match self {
            Op::Not => "not",
            Op::And => "and",
            Op::Or => "or",
            Op::Implies => "=>",
            Op::Eq => "=",
            Op::Distinct => "distinct",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::IntDiv => "div",
            Op::Mod => "mod",
            Op::RealDiv => "/",
            Op::Abs => "abs",
            Op::Ite => "ite",
            Op::Select => "select",
            Op::Store => "store",
            Op::ToReal => "to_real",
            Op::ToInt => "to_int",
        }
    }

    pub fn from_name(s: &str) -> Option<Op> {
        const ALL: [Op; 22] = [
            Op::Not,
            Op::And,
            Op::Or,
            Op::Implies,
            Op::Eq,
            Op::Distinct,
            Op::Lt,
            Op::Le,
            Op::Gt,
            Op::Ge,
            Op::Add,
            Op::Sub,
            Op::Mul,
            Op::IntDiv,
            Op::Mod,
            Op::RealDiv,
            Op::Abs,
            Op::Ite,
            Op::Select,
            Op::Store,
            Op::ToReal,
            Op::ToInt,
        ];
        ALL.into_iter().find(|o| o.name() == s)
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            Op::Not | Op::Abs | Op::ToReal | Op::ToInt => n == 1,
            Op::Sub => n >= 1,
            Op::Ite | Op::Store => n == 3,
            Op::Select | Op::IntDiv | Op::Mod => n == 2,
            Op::And | Op::Or => n >= 1,
            _ => n >= 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i64),
    Real(BigRational),
    Bool(bool),
    Sym(String),
    App(Op, Vec<Term>),
}

impl Term {
    pub fn sym(name: impl Into<String>) -> Term {
        Term::Sym(name.into())
    }

    pub fn app(op: Op, args: Vec<Term>) -> Term {
        Term::App(op, args)
    }

    pub fn not(a: Term) -> Term {
        Term::App(Op::Not, vec![a])
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::App(Op::Eq, vec![a, b])
    }

    pub fn and(args: Vec<Term>) -> Term {
        match args.len() {
            0 => Term::Bool(true),
            1 => args.into_iter().next().unwrap(),
            _ => Term::App(Op::And, args),
        }
    }

    pub fn or(args: Vec<Term>) -> Term {
        match args.len() {
            0 => Term::Bool(false),
            1 => args.into_iter().next().unwrap(),
            _ => Term::App(Op::Or, args),
        }
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::App(Op::Implies, vec![a, b])
    }

    pub fn bin(op: Op, a: Term, b: Term) -> Term {
        Term::App(op, vec![a, b])
    }

    pub fn neg(a: Term) -> Term {
        match a {
            Term::Int(v) if v != i64::MIN => Term::Int(-v),
            other => Term::App(Op::Sub, vec![other]),
        }
    }

    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        Term::App(Op::Ite, vec![c, t, e])
    }

    pub fn select(a: Term, i: Term) -> Term {
        Term::App(Op::Select, vec![a, i])
    }

    pub fn store(a: Term, i: Term, v: Term) -> Term {
        Term::App(Op::Store, vec![a, i, v])
    }

    pub fn to_real(a: Term) -> Term {
        match a {
            Term::Int(v) => Term::Real(BigRational::from_integer(BigInt::from(v))),
            other => Term::App(Op::ToReal, vec![other]),
        }
    }

    pub fn real_from_f64(v: f64) -> Option<Term> {
        BigRational::from_float(v).map(Term::Real)
    }

    /// Symbols referenced by the term, in first-occurrence order.
    pub fn symbols(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let Term::Sym(s) = t {
                if !out.contains(&s.as_str()) {
                    out.push(s.as_str());
                }
            }
        });
        out
    }

    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        f(self);
        if let Term::App(_, args) = self {
            for a in args {
                a.visit(f);
            }
        }
    }

    /// Parses a term; `(- <numeral>)` folds into a negative literal.
    pub fn from_sexpr(s: &Sexpr) -> Result<Term, String> {
        match s {
            Sexpr::Atom(a) => atom_term(a),
            Sexpr::Str(_) => Err("string literals are not supported".into()),
            Sexpr::List(items) => {
                let Some(Sexpr::Atom(head)) = items.first() else {
                    return Err(format!("unsupported term {s}"));
                };
                let op = Op::from_name(head).ok_or_else(|| format!("unknown operator '{head}'"))?;
                let args = items[1..]
                    .iter()
                    .map(Term::from_sexpr)
                    .collect::<Result<Vec<_>, _>>()?;
                if !op.arity_ok(args.len()) {
                    return Err(format!("'{head}' applied to {} arguments", args.len()));
                }
                if op == Op::Sub && args.len() == 1 {
                    match &args[0] {
                        Term::Int(v) => return Ok(Term::Int(-v)),
                        Term::Real(r) => return Ok(Term::Real(-r.clone())),
                        _ => {}
                    }
                }
                Ok(Term::App(op, args))
            }
        }
    }
}

fn atom_term(a: &str) -> Result<Term, String> {
    match a {
        "true" => return Ok(Term::Bool(true)),
        "false" => return Ok(Term::Bool(false)),
        _ => {}
    }
    if a.chars().all(|c| c.is_ascii_digit()) {
        return a
            .parse::<i64>()
            .map(Term::Int)
            .map_err(|_| format!("numeral {a} out of range"));
    }
    if let Some(r) = parse_decimal(a) {
        return Ok(Term::Real(r));
    }
    if a.starts_with(|c: char| c.is_ascii_digit()) {
        return Err(format!("malformed number '{a}'"));
    }
    Ok(Term::Sym(a.to_string()))
}

/// `12`, `1.5`, `3.0` as exact rationals.
pub fn parse_decimal(a: &str) -> Option<BigRational> {
    let (int, frac) = a.split_once('.')?;
    if int.is_empty() || !int.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(digits, scale))
}

pub(crate) fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_negative() {
        f.write_str("(- ")?;
        fmt_rational(&-r.clone(), f)?;
        return f.write_str(")");
    }
    if r.denom().is_one() {
        write!(f, "{}.0", r.numer())
    } else {
        write!(f, "(/ {}.0 {}.0)", r.numer(), r.denom())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(v) if *v < 0 => write!(f, "(- {})", v.unsigned_abs()),
            Term::Int(v) => write!(f, "{v}"),
            Term::Real(r) => {
                if r.is_zero() {
                    f.write_str("0.0")
                } else {
                    fmt_rational(r, f)
                }
            }
            Term::Bool(b) => write!(f, "{b}"),
            Term::Sym(s) => f.write_str(s),
            Term::App(op, args) => {
                write!(f, "({}", op.name())?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

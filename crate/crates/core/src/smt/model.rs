//! Solver models: symbol bindings with array values normalized to a default
//! plus a finite store list.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::eval::eval_term;
use super::sexpr::{parse_all, Sexpr};
use super::term::{fmt_rational, parse_decimal, Op, Sort, Symbol, Term};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(BigInt),
    Real(BigRational),
    Bool(bool),
    Array(ArrayVal),
}

/// Array read as `default` overridden by `stores`. A solver may instead
/// describe an array by a function of the index, kept in `func` when it does
/// not reduce to stores.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayVal {
    pub default: Box<Value>,
    pub stores: Vec<(BigInt, Value)>,
    pub func: Option<ArrayFunc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayFunc {
    pub var: String,
    pub body: Term,
}

impl ArrayVal {
    pub fn constant(default: Value) -> Self {
        Self {
            default: Box::new(default),
            stores: Vec::new(),
            func: None,
        }
    }

    /// Adds a store; a later store to the same index replaces the earlier.
    pub fn store(&mut self, index: BigInt, value: Value) {
        if let Some(slot) = self.stores.iter_mut().find(|(i, _)| *i == index) {
            slot.1 = value;
        } else {
            self.stores.push((index, value));
        }
    }

    pub fn get(&self, index: &BigInt) -> Value {
        if let Some((_, v)) = self.stores.iter().find(|(i, _)| i == index) {
            return v.clone();
        }
        if let Some(f) = &self.func {
            let var = f.var.clone();
            let idx = Value::Int(index.clone());
            let lookup = |s: &str| if s == var { Some(idx.clone()) } else { None };
            if let Ok(v) = eval_term(&f.body, &lookup) {
                return v;
            }
        }
        (*self.default).clone()
    }

    /// Indices at which two arrays could differ, for extensional comparison.
    fn probe_indices(&self, other: &ArrayVal) -> Vec<BigInt> {
        let mut idx: Vec<BigInt> = self
            .stores
            .iter()
            .chain(other.stores.iter())
            .map(|(i, _)| i.clone())
            .collect();
        for f in [&self.func, &other.func].into_iter().flatten() {
            f.body.visit(&mut |t| {
                if let Term::Int(v) = t {
                    for d in -1..=1 {
                        idx.push(BigInt::from(*v) + d);
                    }
                }
            });
            idx.extend((-64..=64).map(BigInt::from));
        }
        idx.sort();
        idx.dedup();
        idx
    }

    pub fn extensionally_equal(&self, other: &ArrayVal) -> bool {
        if self.func.is_none() && other.func.is_none() && !values_equal(&self.default, &other.default) {
            return false;
        }
        self.probe_indices(other)
            .iter()
            .all(|i| values_equal(&self.get(i), &other.get(i)))
    }
}

/// Semantic equality: numbers compare by value across Int/Real, arrays
/// extensionally.
pub fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Array(x), Value::Array(y)) => x.extensionally_equal(y),
        (Value::Bool(x), Value::Bool(y)) => x == y,
        _ => match (a.as_rational(), b.as_rational()) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
    }
}

impl Value {
    pub fn default_for(sort: &Sort) -> Value {
        match sort {
            Sort::Int => Value::Int(BigInt::zero()),
            Sort::Real => Value::Real(BigRational::zero()),
            Sort::Bool => Value::Bool(false),
            Sort::Array(e) => Value::Array(ArrayVal::constant(Value::default_for(e))),
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Value::Int(i) => Some(BigRational::from_integer(i.clone())),
            Value::Real(r) => Some(r.clone()),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(i) => i.to_i64(),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        self.as_rational().and_then(|r| r.to_f64())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => {
                if r.is_zero() {
                    f.write_str("0.0")
                } else {
                    fmt_rational(r, f)
                }
            }
            Value::Bool(b) => write!(f, "{b}"),
            Value::Array(a) => {
                let mut s = format!("(K {})", a.default);
                for (i, v) in &a.stores {
                    s = format!("(store {s} {i} {v})");
                }
                if a.func.is_some() {
                    s.push_str(" +fn");
                }
                f.write_str(&s)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    pub bindings: BTreeMap<String, Value>,
}

impl Model {
    /// The symbol's value, or its sort's default when the solver omitted it.
    pub fn value_of(&self, sym: &Symbol) -> Value {
        self.bindings
            .get(&sym.name)
            .cloned()
            .unwrap_or_else(|| Value::default_for(&sym.sort))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse model near `{near}`: {message}")]
pub struct ModelParseError {
    pub near: String,
    pub message: String,
}

fn perr(near: &Sexpr, message: impl Into<String>) -> ModelParseError {
    let mut near = near.to_string();
    if near.len() > 200 {
        near.truncate(200);
        near.push_str("...");
    }
    ModelParseError {
        near,
        message: message.into(),
    }
}

struct FunDef<'a> {
    params: &'a [Sexpr],
    body: &'a Sexpr,
}

/// Parses a `(get-model)` response. Symbols in `decls` take their declared
/// sorts; other definitions are kept only for `as-array` references.
pub fn parse_model(text: &str, decls: &[Symbol]) -> Result<Model, ModelParseError> {
    let all = parse_all(text).map_err(|e| ModelParseError {
        near: String::new(),
        message: e.to_string(),
    })?;
    let mut defs: Vec<&Sexpr> = Vec::new();
    for top in &all {
        let items = top.as_list().ok_or_else(|| perr(top, "expected a list"))?;
        let items = match items.first() {
            Some(Sexpr::Atom(a)) if a == "model" => &items[1..],
            Some(Sexpr::Atom(a)) if a == "define-fun" => std::slice::from_ref(top),
            _ => items,
        };
        defs.extend(items.iter());
    }
    let mut funs: HashMap<&str, FunDef> = HashMap::new();
    for d in &defs {
        let items = d.as_list().ok_or_else(|| perr(d, "expected define-fun"))?;
        match items.first().and_then(Sexpr::as_atom) {
            Some("define-fun") if items.len() == 5 => {
                let name = items[1].as_atom().ok_or_else(|| perr(d, "bad name"))?;
                let params = items[2].as_list().ok_or_else(|| perr(d, "bad parameter list"))?;
                funs.insert(
                    name,
                    FunDef {
                        params,
                        body: &items[4],
                    },
                );
            }
            // declare-fun of uninterpreted sorts and similar are irrelevant
            _ => continue,
        }
    }
    let mut model = Model::default();
    for sym in decls {
        if let Some(def) = funs.get(sym.name.as_str()) {
            if !def.params.is_empty() {
                return Err(perr(def.body, format!("'{}' is defined as a function", sym.name)));
            }
            let v = parse_value(def.body, &sym.sort, &funs, &HashMap::new())?;
            model.bindings.insert(sym.name.clone(), v);
        }
    }
    Ok(model)
}

type Lets = HashMap<String, Sexpr>;

fn parse_value(
    s: &Sexpr,
    sort: &Sort,
    funs: &HashMap<&str, FunDef>,
    lets: &Lets,
) -> Result<Value, ModelParseError> {
    if let Sexpr::Atom(a) = s {
        if let Some(bound) = lets.get(a) {
            return parse_value(&bound.clone(), sort, funs, lets);
        }
    }
    if let Some(items) = s.as_list() {
        if items.first().is_some_and(|h| h.is_atom("let")) && items.len() == 3 {
            let mut inner = lets.clone();
            for b in items[1].as_list().ok_or_else(|| perr(s, "bad let"))? {
                let pair = b.as_list().ok_or_else(|| perr(b, "bad let binding"))?;
                if pair.len() != 2 {
                    return Err(perr(b, "bad let binding"));
                }
                let name = pair[0].as_atom().ok_or_else(|| perr(b, "bad let name"))?;
                inner.insert(name.to_string(), pair[1].clone());
            }
            return parse_value(&items[2], sort, funs, &inner);
        }
    }
    match sort {
        Sort::Int | Sort::Real | Sort::Bool => {
            let t = scalar_term(s, lets)?;
            let v = eval_term(&t, &|_| None).map_err(|e| perr(s, e.to_string()))?;
            Ok(match (sort, v) {
                (Sort::Real, Value::Int(i)) => Value::Real(BigRational::from_integer(i)),
                (_, v) => v,
            })
        }
        Sort::Array(elem) => parse_array(s, elem, funs, lets).map(Value::Array),
    }
}

fn parse_array(
    s: &Sexpr,
    elem: &Sort,
    funs: &HashMap<&str, FunDef>,
    lets: &Lets,
) -> Result<ArrayVal, ModelParseError> {
    if let Sexpr::Atom(a) = s {
        if let Some(bound) = lets.get(a) {
            return parse_array(&bound.clone(), elem, funs, lets);
        }
    }
    let items = s.as_list().ok_or_else(|| perr(s, "expected an array value"))?;
    let head = items.first().ok_or_else(|| perr(s, "empty list"))?;
    // ((as const (Array Int Int)) v)
    if let Some(h) = head.as_list() {
        if h.first().is_some_and(|x| x.is_atom("as"))
            && h.get(1).is_some_and(|x| x.is_atom("const"))
            && items.len() == 2
        {
            let d = parse_value(&items[1], elem, funs, lets)?;
            return Ok(ArrayVal::constant(d));
        }
        return Err(perr(s, "unsupported array form"));
    }
    match head.as_atom() {
        Some("store") if items.len() == 4 => {
            let mut base = parse_array(&items[1], elem, funs, lets)?;
            let idx = match parse_value(&items[2], &Sort::Int, funs, lets)? {
                Value::Int(i) => i,
                _ => return Err(perr(&items[2], "array index is not an integer")),
            };
            let v = parse_value(&items[3], elem, funs, lets)?;
            base.store(idx, v);
            Ok(base)
        }
        // (_ as-array k!0)
        Some("_") if items.len() == 3 && items[1].is_atom("as-array") => {
            let name = items[2].as_atom().ok_or_else(|| perr(s, "bad as-array"))?;
            let def = funs
                .get(name)
                .ok_or_else(|| perr(s, format!("as-array refers to undefined '{name}'")))?;
            let var = single_param(def.params).ok_or_else(|| perr(s, "array function must take one Int"))?;
            function_array(var, def.body, elem, lets)
        }
        Some("lambda") if items.len() == 3 => {
            let params = items[1].as_list().ok_or_else(|| perr(s, "bad lambda"))?;
            let var = single_param(params).ok_or_else(|| perr(s, "lambda must take one Int"))?;
            function_array(var, &items[2], elem, lets)
        }
        _ => Err(perr(s, "unsupported array form")),
    }
}

fn single_param(params: &[Sexpr]) -> Option<String> {
    if params.len() != 1 {
        return None;
    }
    let p = params[0].as_list()?;
    if p.len() == 2 && p[1].is_atom("Int") {
        p[0].as_atom().map(str::to_string)
    } else {
        None
    }
}

/// Array given as a function of its index. An `ite` chain on index equality
/// is normalized into stores.
fn function_array(var: String, body: &Sexpr, elem: &Sort, lets: &Lets) -> Result<ArrayVal, ModelParseError> {
    let term = scalar_term(body, lets)?;
    let mut stores = Vec::new();
    let mut cur = &term;
    loop {
        match cur {
            Term::App(Op::Ite, args) => {
                let key = match &args[0] {
                    Term::App(Op::Eq, eq) => match (&eq[0], &eq[1]) {
                        (Term::Sym(v), Term::Int(k)) | (Term::Int(k), Term::Sym(v)) if *v == var => Some(*k),
                        _ => None,
                    },
                    _ => None,
                };
                let Some(k) = key else { break };
                let Ok(v) = eval_term(&args[1], &|_| None) else { break };
                stores.push((BigInt::from(k), v));
                cur = &args[2];
            }
            _ => break,
        }
    }
    if let Ok(d) = eval_term(cur, &|_| None) {
        let d = coerce(d, elem);
        let mut arr = ArrayVal::constant(d);
        // the first matching ite arm wins, so earlier arms are stored last
        for (k, v) in stores.into_iter().rev() {
            arr.store(k, coerce(v, elem));
        }
        return Ok(arr);
    }
    let default = Value::default_for(elem);
    Ok(ArrayVal {
        default: Box::new(default),
        stores: Vec::new(),
        func: Some(ArrayFunc { var, body: term }),
    })
}

fn coerce(v: Value, sort: &Sort) -> Value {
    match (sort, v) {
        (Sort::Real, Value::Int(i)) => Value::Real(BigRational::from_integer(i)),
        (_, v) => v,
    }
}

/// Converts a scalar model expression (possibly with `let`s) to a term.
fn scalar_term(s: &Sexpr, lets: &Lets) -> Result<Term, ModelParseError> {
    match s {
        Sexpr::Atom(a) => {
            if let Some(bound) = lets.get(a) {
                return scalar_term(&bound.clone(), lets);
            }
            if let Some(r) = parse_decimal(a) {
                return Ok(Term::Real(r));
            }
            if a.chars().all(|c| c.is_ascii_digit()) && !a.is_empty() {
                // big numerals stay exact through a rational
                let n: BigInt = a.parse().map_err(|_| perr(s, "bad numeral"))?;
                return Ok(match n.to_i64() {
                    Some(v) => Term::Int(v),
                    None => Term::App(Op::ToInt, vec![Term::Real(BigRational::from_integer(n))]),
                });
            }
            match a.as_str() {
                "true" => Ok(Term::Bool(true)),
                "false" => Ok(Term::Bool(false)),
                _ => Ok(Term::Sym(a.clone())),
            }
        }
        Sexpr::Str(_) => Err(perr(s, "unexpected string")),
        Sexpr::List(items) => {
            let head = items.first().and_then(Sexpr::as_atom).ok_or_else(|| perr(s, "bad term"))?;
            if head == "let" && items.len() == 3 {
                let mut inner = lets.clone();
                for b in items[1].as_list().ok_or_else(|| perr(s, "bad let"))? {
                    let pair = b.as_list().ok_or_else(|| perr(b, "bad let binding"))?;
                    let name = pair
                        .first()
                        .and_then(Sexpr::as_atom)
                        .ok_or_else(|| perr(b, "bad let name"))?;
                    let value = pair.get(1).ok_or_else(|| perr(b, "bad let binding"))?;
                    inner.insert(name.to_string(), value.clone());
                }
                return scalar_term(&items[2], &inner);
            }
            let op = Op::from_name(head).ok_or_else(|| perr(s, format!("unknown operator '{head}'")))?;
            let args = items[1..]
                .iter()
                .map(|x| scalar_term(x, lets))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::App(op, args))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_array() -> Sort {
        Sort::Array(Box::new(Sort::Int))
    }

    #[test]
    fn constants() {
        let m = parse_model(
            "((define-fun _x_0 () Int 4)\n (define-fun _y_0 () Int (- 5))\n (define-fun r () Real (/ 1.0 3.0))\n (define-fun b () Bool true))",
            &[
                Symbol::new("_x_0", Sort::Int),
                Symbol::new("_y_0", Sort::Int),
                Symbol::new("r", Sort::Real),
                Symbol::new("b", Sort::Bool),
            ],
        )
        .unwrap();
        assert_eq!(m.bindings["_x_0"], Value::Int(4.into()));
        assert_eq!(m.bindings["_y_0"], Value::Int((-5).into()));
        assert_eq!(
            m.bindings["r"],
            Value::Real(BigRational::new(1.into(), 3.into()))
        );
        assert_eq!(m.bindings["b"], Value::Bool(true));
    }

    #[test]
    fn store_over_const_array() {
        let m = parse_model(
            "((define-fun a () (Array Int Int) (store ((as const (Array Int Int)) 0) 2 3)))",
            &[Symbol::new("a", int_array())],
        )
        .unwrap();
        let Value::Array(a) = &m.bindings["a"] else {
            panic!()
        };
        assert_eq!(*a.default, Value::Int(0.into()));
        assert_eq!(a.stores, vec![(BigInt::from(2), Value::Int(3.into()))]);
        assert!(a.func.is_none());
    }

    #[test]
    fn ite_function_form_normalizes_to_stores() {
        let text = "((define-fun a () (Array Int Int) (_ as-array k!0))\n (define-fun k!0 ((x!0 Int)) Int (ite (= x!0 2) 3 0)))";
        let m = parse_model(text, &[Symbol::new("a", int_array())]).unwrap();
        let Value::Array(a) = &m.bindings["a"] else {
            panic!()
        };
        assert_eq!(*a.default, Value::Int(0.into()));
        assert_eq!(a.stores, vec![(BigInt::from(2), Value::Int(3.into()))]);
    }

    #[test]
    fn lambda_with_let() {
        let text = "((define-fun a () (Array Int Int) (lambda ((x!1 Int)) (let ((a!1 (ite (= x!1 1) 5 7))) (ite (= x!1 0) 9 a!1)))))";
        let m = parse_model(text, &[Symbol::new("a", int_array())]).unwrap();
        let Value::Array(a) = &m.bindings["a"] else {
            panic!()
        };
        assert_eq!(a.get(&0.into()), Value::Int(9.into()));
        assert_eq!(a.get(&1.into()), Value::Int(5.into()));
        assert_eq!(a.get(&4.into()), Value::Int(7.into()));
    }

    #[test]
    fn later_stores_win() {
        let text = "((define-fun a () (Array Int Int) (store (store ((as const (Array Int Int)) 1) 0 2) 0 3)))";
        let m = parse_model(text, &[Symbol::new("a", int_array())]).unwrap();
        let Value::Array(a) = &m.bindings["a"] else {
            panic!()
        };
        assert_eq!(a.stores, vec![(BigInt::from(0), Value::Int(3.into()))]);
    }

    #[test]
    fn missing_symbols_default() {
        let m = Model::default();
        assert_eq!(m.value_of(&Symbol::new("x", Sort::Int)), Value::Int(0.into()));
        assert_eq!(m.value_of(&Symbol::new("x", Sort::Bool)), Value::Bool(false));
        assert_eq!(
            m.value_of(&Symbol::new("a", int_array())),
            Value::Array(ArrayVal::constant(Value::Int(0.into())))
        );
    }

    #[test]
    fn garbage_is_an_error() {
        assert!(parse_model(
            "((define-fun a () (Array Int Int) (frobnicate 1)))",
            &[Symbol::new("a", int_array())]
        )
        .is_err());
    }
}

//! Exact evaluation of terms under a model.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use super::model::{values_equal, Model, Value};
use super::term::{Op, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound symbol '{0}'")]
    Unbound(String),
    #[error("sort mismatch in '{0}'")]
    Sort(String),
    #[error("division by zero")]
    DivByZero,
}

fn sort_err(op: Op) -> EvalError {
    EvalError::Sort(op.name().to_string())
}

pub fn eval_term(t: &Term, lookup: &dyn Fn(&str) -> Option<Value>) -> Result<Value, EvalError> {
    match t {
        Term::Int(v) => Ok(Value::Int(BigInt::from(*v))),
        Term::Real(r) => Ok(Value::Real(r.clone())),
        Term::Bool(b) => Ok(Value::Bool(*b)),
        Term::Sym(s) => lookup(s).ok_or_else(|| EvalError::Unbound(s.clone())),
        Term::App(op, args) => eval_app(*op, args, lookup),
    }
}

fn eval_bool(t: &Term, op: Op, lookup: &dyn Fn(&str) -> Option<Value>) -> Result<bool, EvalError> {
    match eval_term(t, lookup)? {
        Value::Bool(b) => Ok(b),
        _ => Err(sort_err(op)),
    }
}

fn num(v: &Value, op: Op) -> Result<BigRational, EvalError> {
    v.as_rational().ok_or_else(|| sort_err(op))
}

fn int(v: Value, op: Op) -> Result<BigInt, EvalError> {
    match v {
        Value::Int(i) => Ok(i),
        _ => Err(sort_err(op)),
    }
}

/// SMT-LIB integer division: the remainder is always non-negative.
pub fn smt_div(a: &BigInt, b: &BigInt) -> BigInt {
    let q = a.div_floor(b);
    if b.is_negative() && !(a - b * &q).is_zero() {
        q + 1
    } else {
        q
    }
}

fn eval_app(op: Op, args: &[Term], lookup: &dyn Fn(&str) -> Option<Value>) -> Result<Value, EvalError> {
    let all = |lookup: &dyn Fn(&str) -> Option<Value>| -> Result<Vec<Value>, EvalError> {
        args.iter().map(|a| eval_term(a, lookup)).collect()
    };
    match op {
        Op::Not => Ok(Value::Bool(!eval_bool(&args[0], op, lookup)?)),
        Op::And => {
            for a in args {
                if !eval_bool(a, op, lookup)? {
                    return Ok(Value::Bool(false));
                }
            }
            Ok(Value::Bool(true))
        }
        Op::Or => {
            for a in args {
                if eval_bool(a, op, lookup)? {
                    return Ok(Value::Bool(true));
                }
            }
            Ok(Value::Bool(false))
        }
        Op::Implies => {
            // right-associative chain
            let (last, init) = args.split_last().ok_or_else(|| sort_err(op))?;
            for a in init {
                if !eval_bool(a, op, lookup)? {
                    return Ok(Value::Bool(true));
                }
            }
            Ok(Value::Bool(eval_bool(last, op, lookup)?))
        }
        Op::Eq => {
            let vs = all(lookup)?;
            Ok(Value::Bool(vs.windows(2).all(|w| values_equal(&w[0], &w[1]))))
        }
        Op::Distinct => {
            let vs = all(lookup)?;
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    if values_equal(&vs[i], &vs[j]) {
                        return Ok(Value::Bool(false));
                    }
                }
            }
            Ok(Value::Bool(true))
        }
        Op::Lt | Op::Le | Op::Gt | Op::Ge => {
            let vs = all(lookup)?;
            let rs = vs.iter().map(|v| num(v, op)).collect::<Result<Vec<_>, _>>()?;
            let ok = rs.windows(2).all(|w| match op {
                Op::Lt => w[0] < w[1],
                Op::Le => w[0] <= w[1],
                Op::Gt => w[0] > w[1],
                _ => w[0] >= w[1],
            });
            Ok(Value::Bool(ok))
        }
        Op::Add | Op::Sub | Op::Mul => {
            let vs = all(lookup)?;
            if vs.iter().all(|v| matches!(v, Value::Int(_))) {
                let is: Vec<BigInt> = vs.into_iter().map(|v| int(v, op)).collect::<Result<_, _>>()?;
                let r = match op {
                    Op::Sub if is.len() == 1 => -is[0].clone(),
                    Op::Add => is.iter().sum(),
                    Op::Mul => is.iter().product(),
                    _ => {
                        let mut acc = is[0].clone();
                        for x in &is[1..] {
                            acc -= x;
                        }
                        acc
                    }
                };
                return Ok(Value::Int(r));
            }
            let rs = vs.iter().map(|v| num(v, op)).collect::<Result<Vec<_>, _>>()?;
            let r = match op {
                Op::Sub if rs.len() == 1 => -rs[0].clone(),
                Op::Add => rs.iter().fold(BigRational::zero(), |a, b| a + b),
                Op::Mul => rs
                    .iter()
                    .fold(BigRational::from_integer(1.into()), |a, b| a * b),
                _ => {
                    let mut acc = rs[0].clone();
                    for x in &rs[1..] {
                        acc -= x;
                    }
                    acc
                }
            };
            Ok(Value::Real(r))
        }
        Op::IntDiv | Op::Mod => {
            let mut vs = all(lookup)?.into_iter();
            let a = int(vs.next().unwrap(), op)?;
            let b = int(vs.next().unwrap(), op)?;
            if b.is_zero() {
                return Err(EvalError::DivByZero);
            }
            let q = smt_div(&a, &b);
            Ok(Value::Int(if op == Op::IntDiv { q } else { a - b * q }))
        }
        Op::RealDiv => {
            let vs = all(lookup)?;
            let mut acc = num(&vs[0], op)?;
            for v in &vs[1..] {
                let d = num(v, op)?;
                if d.is_zero() {
                    return Err(EvalError::DivByZero);
                }
                acc /= d;
            }
            Ok(Value::Real(acc))
        }
        Op::Abs => match eval_term(&args[0], lookup)? {
            Value::Int(i) => Ok(Value::Int(i.abs())),
            Value::Real(r) => Ok(Value::Real(r.abs())),
            _ => Err(sort_err(op)),
        },
        Op::Ite => {
            if eval_bool(&args[0], op, lookup)? {
                eval_term(&args[1], lookup)
            } else {
                eval_term(&args[2], lookup)
            }
        }
        Op::Select => {
            let a = eval_term(&args[0], lookup)?;
            let i = int(eval_term(&args[1], lookup)?, op)?;
            match a {
                Value::Array(a) => Ok(a.get(&i)),
                _ => Err(sort_err(op)),
            }
        }
        Op::Store => {
            let a = eval_term(&args[0], lookup)?;
            let i = int(eval_term(&args[1], lookup)?, op)?;
            let v = eval_term(&args[2], lookup)?;
            match a {
                Value::Array(mut a) => {
                    a.store(i, v);
                    Ok(Value::Array(a))
                }
                _ => Err(sort_err(op)),
            }
        }
        Op::ToReal => {
            let v = eval_term(&args[0], lookup)?;
            Ok(Value::Real(num(&v, op)?))
        }
        Op::ToInt => {
            let v = eval_term(&args[0], lookup)?;
            Ok(Value::Int(num(&v, op)?.floor().to_integer()))
        }
    }
}

/// Evaluates a term under a model; declared symbols missing from the model
/// take their sort default.
pub fn eval_in_model(t: &Term, decls: &[Symbol], model: &Model) -> Result<Value, EvalError> {
    let lookup = |s: &str| {
        if let Some(v) = model.bindings.get(s) {
            return Some(v.clone());
        }
        decls.iter().find(|d| d.name == s).map(|d| model.value_of(d))
    };
    eval_term(t, &lookup)
}

/// Indices of assertions the model does not satisfy. An assertion that fails
/// to evaluate counts as unsatisfied.
pub fn unsatisfied(asserts: &[Term], decls: &[Symbol], model: &Model) -> Vec<usize> {
    asserts
        .iter()
        .enumerate()
        .filter(|(_, a)| !matches!(eval_in_model(a, decls, model), Ok(Value::Bool(true))))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::sexpr::parse_one;
    use super::super::term::Sort;
    use super::super::model::ArrayVal;
    use super::*;

    fn ev(src: &str) -> Value {
        let t = Term::from_sexpr(&parse_one(src).unwrap()).unwrap();
        eval_term(&t, &|_| None).unwrap()
    }

    #[test]
    fn smt_division_matches_definition() {
        for a in -9i64..=9 {
            for b in (-4i64..=4).filter(|b| *b != 0) {
                let q = smt_div(&a.into(), &b.into());
                let r = BigInt::from(a) - BigInt::from(b) * &q;
                assert!(r >= BigInt::zero() && r < BigInt::from(b.abs()), "{a} div {b}");
            }
        }
        assert_eq!(ev("(div (- 7) 2)"), Value::Int((-4).into()));
        assert_eq!(ev("(div 7 (- 2))"), Value::Int((-3).into()));
        assert_eq!(ev("(mod (- 7) 2)"), Value::Int(1.into()));
    }

    #[test]
    fn arrays_and_ite() {
        let arr = Value::Array(ArrayVal::constant(Value::Int(2.into())));
        let look = move |s: &str| if s == "a" { Some(arr.clone()) } else { None };
        let t = |src: &str| Term::from_sexpr(&parse_one(src).unwrap()).unwrap();
        assert_eq!(eval_term(&t("(select a 3)"), &look).unwrap(), Value::Int(2.into()));
        assert_eq!(
            eval_term(&t("(select (store (store a 1 5) 1 6) 1)"), &look).unwrap(),
            Value::Int(6.into())
        );
        assert_eq!(ev("(ite (> 1 2) 3 4)"), Value::Int(4.into()));
    }

    #[test]
    fn lazy_connectives_skip_errors() {
        assert_eq!(ev("(and false (= (div 1 0) 0))"), Value::Bool(false));
        assert_eq!(ev("(=> false (= (div 1 0) 0))"), Value::Bool(true));
    }

    #[test]
    fn mixed_arith_and_conversions() {
        assert_eq!(ev("(to_int (- (/ 5.0 2.0)))"), Value::Int((-3).into()));
        assert_eq!(
            ev("(+ (to_real 1) 0.5)"),
            Value::Real(BigRational::new(3.into(), 2.into()))
        );
        assert_eq!(ev("(abs (- 4))"), Value::Int(4.into()));
    }

    #[test]
    fn unsatisfied_reports_failures() {
        let decls = vec![Symbol::new("x", Sort::Int)];
        let mut m = Model::default();
        m.bindings.insert("x".into(), Value::Int(3.into()));
        let asserts = vec![
            Term::from_sexpr(&parse_one("(> x 2)").unwrap()).unwrap(),
            Term::from_sexpr(&parse_one("(< x 2)").unwrap()).unwrap(),
            Term::from_sexpr(&parse_one("(= (div x 0) 1)").unwrap()).unwrap(),
        ];
        assert_eq!(unsatisfied(&asserts, &decls, &m), vec![1, 2]);
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{parse_expr, ExprKind, UnaryOp};
use crate::typing::{ScalarType, SubsetType};

/// Argument or return value of a subset function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum ConcreteValue {
    Int(i64),
    Float(f64),
    Bool(bool),
    List(Vec<ConcreteValue>),
}

impl ConcreteValue {
    /// Converts to the declared type where Python would accept the value
    /// unchanged (an int where a float is expected).
    pub fn coerce_to(self, ty: SubsetType) -> Result<ConcreteValue, LiteralError> {
        let scalar = |v: ConcreteValue, t: ScalarType| match (v, t) {
            (ConcreteValue::Int(i), ScalarType::Int) => Ok(ConcreteValue::Int(i)),
            (ConcreteValue::Int(i), ScalarType::Float) => Ok(ConcreteValue::Float(i as f64)),
            (ConcreteValue::Float(f), ScalarType::Float) => Ok(ConcreteValue::Float(f)),
            (ConcreteValue::Bool(b), ScalarType::Bool) => Ok(ConcreteValue::Bool(b)),
            (v, t) => Err(LiteralError(format!("{v} is not a {t}"))),
        };
        match ty {
            SubsetType::ListOf(e) => match self {
                ConcreteValue::List(items) => Ok(ConcreteValue::List(
                    items
                        .into_iter()
                        .map(|v| scalar(v, e))
                        .collect::<Result<_, _>>()?,
                )),
                v => Err(LiteralError(format!("{v} is not a list"))),
            },
            SubsetType::Int => scalar(self, ScalarType::Int),
            SubsetType::Float => scalar(self, ScalarType::Float),
            SubsetType::Bool => scalar(self, ScalarType::Bool),
        }
    }

    pub fn type_name(&self) -> String {
        match self {
            ConcreteValue::Int(_) => "int".into(),
            ConcreteValue::Float(_) => "float".into(),
            ConcreteValue::Bool(_) => "bool".into(),
            ConcreteValue::List(items) => match items.first() {
                Some(v) => format!("list[{}]", v.type_name()),
                None => "list".into(),
            },
        }
    }
}

pub fn float_literal(f: f64) -> String {
    if f.is_nan() {
        "float('nan')".into()
    } else if f.is_infinite() {
        if f > 0.0 { "float('inf')".into() } else { "float('-inf')".into() }
    } else if f.fract() == 0.0 && f.abs() < 1e16 {
        format!("{f:.1}")
    } else {
        format!("{f}")
    }
}

/// Python literal syntax.
impl fmt::Display for ConcreteValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcreteValue::Int(i) => write!(f, "{i}"),
            ConcreteValue::Float(x) => f.write_str(&float_literal(*x)),
            ConcreteValue::Bool(true) => f.write_str("True"),
            ConcreteValue::Bool(false) => f.write_str("False"),
            ConcreteValue::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad argument literal: {0}")]
pub struct LiteralError(pub String);

fn literal(e: &crate::frontend::Expr, depth: usize) -> Result<ConcreteValue, LiteralError> {
    match &e.kind {
        ExprKind::Int(i) => Ok(ConcreteValue::Int(*i)),
        ExprKind::Float(f) => Ok(ConcreteValue::Float(*f)),
        ExprKind::Bool(b) => Ok(ConcreteValue::Bool(*b)),
        ExprKind::Unary(UnaryOp::Neg, inner) => match literal(inner, depth)? {
            ConcreteValue::Int(i) => i
                .checked_neg()
                .map(ConcreteValue::Int)
                .ok_or_else(|| LiteralError("integer out of range".into())),
            ConcreteValue::Float(f) => Ok(ConcreteValue::Float(-f)),
            v => Err(LiteralError(format!("cannot negate {v}"))),
        },
        ExprKind::ListLit(items) if depth == 0 => Ok(ConcreteValue::List(
            items
                .iter()
                .map(|i| literal(i, depth + 1))
                .collect::<Result<_, _>>()?,
        )),
        _ => Err(LiteralError(format!("unsupported literal at column {}", e.span.column))),
    }
}

/// Parses a comma-separated argument list such as `3, [1, -2], 0.5, True`.
pub fn parse_args(text: &str) -> Result<Vec<ConcreteValue>, LiteralError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let e = parse_expr(&format!("[{text}]")).map_err(|e| LiteralError(e.to_string()))?;
    match &e.kind {
        ExprKind::ListLit(items) => items.iter().map(|i| literal(i, 0)).collect(),
        _ => Err(LiteralError("expected comma-separated values".into())),
    }
}

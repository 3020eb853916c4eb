//! Test inputs decoded from solver models, and the artifacts written for
//! them.
//!
//! Artifact files hold one JSON object per line, fields in this order:
//! `function`, `file`, `path_id`, `args` (each `{name, type, literal}` with
//! `literal` in Python syntax), `verdict`.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::FunctionDef;
use crate::interp::{parse_args, ConcreteValue};
use crate::smt::{Model, SmtScript, Value, VarSymbols};
use crate::typing::{ScalarType, SubsetType, TypeEnv};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TestInput {
    pub args: Vec<(String, ConcreteValue)>,
}

impl TestInput {
    pub fn values(&self) -> Vec<ConcreteValue> {
        self.args.iter().map(|(_, v)| v.clone()).collect()
    }

    /// `name=literal` pairs joined by commas.
    pub fn render(&self) -> String {
        self.args
            .iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("parameter '{0}' has no symbols in the script")]
    MissingParam(String),
    #[error("negative length {len} for list parameter '{param}'")]
    NegativeLength { param: String, len: String },
    #[error("value {value} for '{param}' does not fit the parameter type")]
    OutOfRange { param: String, value: String },
}

const MAX_DECODED_LEN: i64 = 1 << 20;

fn scalar_value(v: &Value, t: ScalarType, param: &str) -> Result<ConcreteValue, DecodeError> {
    let bad = || DecodeError::OutOfRange {
        param: param.to_string(),
        value: v.to_string(),
    };
    match (t, v) {
        (ScalarType::Int, Value::Int(i)) => i.to_i64().map(ConcreteValue::Int).ok_or_else(bad),
        (ScalarType::Float, Value::Real(r)) => r.to_f64().map(ConcreteValue::Float).ok_or_else(bad),
        (ScalarType::Float, Value::Int(i)) => i.to_f64().map(ConcreteValue::Float).ok_or_else(bad),
        (ScalarType::Bool, Value::Bool(b)) => Ok(ConcreteValue::Bool(*b)),
        _ => Err(bad()),
    }
}

/// Reads each parameter's index-0 symbols from the model. Lists take
/// elements `0..len` of their array; stores outside that window are ignored.
pub fn decode_model(model: &Model, env: &TypeEnv, script: &SmtScript) -> Result<TestInput, DecodeError> {
    let mut args = Vec::with_capacity(env.params.len());
    for (name, ty) in &env.params {
        let syms = script
            .param(name)
            .ok_or_else(|| DecodeError::MissingParam(name.clone()))?;
        let value = match (syms, ty) {
            (VarSymbols::Scalar(sym), t) => {
                let st = match t {
                    SubsetType::Int => ScalarType::Int,
                    SubsetType::Float => ScalarType::Float,
                    SubsetType::Bool => ScalarType::Bool,
                    SubsetType::ListOf(_) => return Err(DecodeError::MissingParam(name.clone())),
                };
                scalar_value(&model.value_of(sym), st, name)?
            }
            (VarSymbols::List { array, len }, SubsetType::ListOf(elem)) => {
                let n = match model.value_of(len) {
                    Value::Int(i) => i,
                    other => {
                        return Err(DecodeError::OutOfRange {
                            param: name.clone(),
                            value: other.to_string(),
                        })
                    }
                };
                if n < 0.into() {
                    return Err(DecodeError::NegativeLength {
                        param: name.clone(),
                        len: n.to_string(),
                    });
                }
                let n = n.to_i64().filter(|n| *n <= MAX_DECODED_LEN).ok_or_else(|| DecodeError::OutOfRange {
                    param: name.clone(),
                    value: n.to_string(),
                })?;
                let arr = match model.value_of(array) {
                    Value::Array(a) => a,
                    other => {
                        return Err(DecodeError::OutOfRange {
                            param: name.clone(),
                            value: other.to_string(),
                        })
                    }
                };
                let items = (0..n)
                    .map(|i| scalar_value(&arr.get(&i.into()), *elem, name))
                    .collect::<Result<Vec<_>, _>>()?;
                ConcreteValue::List(items)
            }
            (VarSymbols::List { .. }, _) => return Err(DecodeError::MissingParam(name.clone())),
        };
        args.push((name.clone(), value));
    }
    Ok(TestInput { args })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgRecord {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub literal: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestArtifact {
    pub function: String,
    pub file: String,
    pub path_id: usize,
    pub args: Vec<ArgRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("malformed artifact record: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Literal(#[from] crate::interp::LiteralError),
}

pub fn emit_artifact(
    input: &TestInput,
    f: &FunctionDef,
    file: &str,
    path_id: usize,
    verdict: Option<&str>,
) -> TestArtifact {
    TestArtifact {
        function: f.name.clone(),
        file: file.to_string(),
        path_id,
        args: input
            .args
            .iter()
            .map(|(n, v)| ArgRecord {
                name: n.clone(),
                ty: f
                    .params
                    .iter()
                    .find(|p| &p.name == n)
                    .and_then(|p| p.annot)
                    .map_or_else(|| v.type_name(), |a| a.to_string()),
                literal: v.to_string(),
            })
            .collect(),
        verdict: verdict.map(str::to_string),
    }
}

impl TestArtifact {
    /// Positional call of the function with the argument literals.
    pub fn snippet(&self) -> String {
        let args: Vec<&str> = self.args.iter().map(|a| a.literal.as_str()).collect();
        format!("{}({})", self.function, args.join(", "))
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("artifact serializes")
    }

    pub fn from_line(line: &str) -> Result<TestArtifact, ArtifactError> {
        Ok(serde_json::from_str(line)?)
    }

    /// Argument values parsed back from their literals.
    pub fn input(&self) -> Result<TestInput, ArtifactError> {
        let mut args = Vec::with_capacity(self.args.len());
        for a in &self.args {
            let mut v = parse_args(&a.literal)?;
            args.push((a.name.clone(), v.pop().unwrap_or(ConcreteValue::List(Vec::new()))));
        }
        Ok(TestInput { args })
    }
}

#[cfg(test)]
mod tests {
    use num_bigint::BigInt;

    use super::*;
    use crate::smt::{ArrayVal, Sort, Symbol};

    fn list_script() -> (SmtScript, TypeEnv) {
        let mut script = SmtScript::new("sortedSquares");
        let array = Symbol::new("_n_0", Sort::Array(Box::new(Sort::Int)));
        let len = Symbol::new("_n_0_len", Sort::Int);
        script.param_map.push(("n".into(), VarSymbols::List { array, len }));
        let mut env = TypeEnv::default();
        env.params.push(("n".into(), SubsetType::ListOf(ScalarType::Int)));
        (script, env)
    }

    fn model_with(arr: ArrayVal, len: i64) -> Model {
        let mut m = Model::default();
        m.bindings.insert("_n_0".into(), Value::Array(arr));
        m.bindings.insert("_n_0_len".into(), Value::Int(len.into()));
        m
    }

    #[test]
    fn decodes_store_over_default() {
        let (script, env) = list_script();
        let mut arr = ArrayVal::constant(Value::Int(0.into()));
        arr.store(BigInt::from(2), Value::Int(3.into()));
        arr.store(BigInt::from(7), Value::Int(9.into()));
        let input = decode_model(&model_with(arr.clone(), 4), &env, &script).unwrap();
        let l = |v: Vec<i64>| ConcreteValue::List(v.into_iter().map(ConcreteValue::Int).collect());
        assert_eq!(input.args[0].1, l(vec![0, 0, 3, 0]));
        let empty = decode_model(&model_with(arr.clone(), 0), &env, &script).unwrap();
        assert_eq!(empty.args[0].1, l(vec![]));
        assert!(matches!(
            decode_model(&model_with(arr, -1), &env, &script),
            Err(DecodeError::NegativeLength { .. })
        ));
    }

    #[test]
    fn missing_scalar_defaults_to_zero() {
        let mut script = SmtScript::new("f");
        script
            .param_map
            .push(("x".into(), VarSymbols::Scalar(Symbol::new("_x_0", Sort::Int))));
        let mut env = TypeEnv::default();
        env.params.push(("x".into(), SubsetType::Int));
        let input = decode_model(&Model::default(), &env, &script).unwrap();
        assert_eq!(input.args, vec![("x".to_string(), ConcreteValue::Int(0))]);
    }

    #[test]
    fn artifact_round_trip() {
        let f = crate::frontend::parse_unit("def sortedSquares(n: list[int]) -> int:\n    return 0\n", "s.py")
            .unwrap()
            .functions
            .remove(0);
        let input = TestInput {
            args: vec![(
                "n".into(),
                ConcreteValue::List([0, 0, 3, 0].into_iter().map(ConcreteValue::Int).collect()),
            )],
        };
        let a = emit_artifact(&input, &f, "s.py", 3, Some("path-correct"));
        assert_eq!(a.snippet(), "sortedSquares([0, 0, 3, 0])");
        let line = a.to_line();
        assert_eq!(
            line,
            r#"{"function":"sortedSquares","file":"s.py","path_id":3,"args":[{"name":"n","type":"list[int]","literal":"[0, 0, 3, 0]"}],"verdict":"path-correct"}"#
        );
        let back = TestArtifact::from_line(&line).unwrap();
        assert_eq!(back.to_line(), line);
        assert_eq!(back.input().unwrap(), input);
    }

    #[test]
    fn zero_args_and_floats() {
        let f = crate::frontend::parse_unit("def f() -> int:\n    return 0\n", "s.py")
            .unwrap()
            .functions
            .remove(0);
        assert_eq!(emit_artifact(&TestInput::default(), &f, "s.py", 0, None).snippet(), "f()");
        let g = crate::frontend::parse_unit("def g(x: float) -> float:\n    return x\n", "s.py")
            .unwrap()
            .functions
            .remove(0);
        let input = TestInput {
            args: vec![("x".into(), ConcreteValue::Float(0.5))],
        };
        assert_eq!(emit_artifact(&input, &g, "s.py", 0, None).snippet(), "g(0.5)");
    }
}

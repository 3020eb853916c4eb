//! Exhaustive search for inputs driving a function down given paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cfg::{build_cfg, ExecutionPath};
use crate::frontend::FunctionDef;
use crate::testcase::TestInput;
use crate::typing::{ScalarType, SubsetType, TypeEnv};

use super::{follows, run_cfg, ConcreteValue, Limits};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub int_range: (i64, i64),
    pub list_len_max: usize,
    pub elem_range: (i64, i64),
    pub float_grid: Vec<f64>,
}

impl Default for Domain {
    fn default() -> Self {
        Self {
            int_range: (-5, 5),
            list_len_max: 4,
            elem_range: (-3, 3),
            float_grid: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleResult {
    FoundInput(TestInput),
    ExhaustedNoInput,
}

impl OracleResult {
    pub fn found(&self) -> bool {
        matches!(self, OracleResult::FoundInput(_))
    }
}

impl Domain {
    fn scalars(&self, t: ScalarType, (lo, hi): (i64, i64)) -> Vec<ConcreteValue> {
        match t {
            ScalarType::Int => (lo..=hi).map(ConcreteValue::Int).collect(),
            ScalarType::Float => self.float_grid.iter().map(|f| ConcreteValue::Float(*f)).collect(),
            ScalarType::Bool => vec![ConcreteValue::Bool(false), ConcreteValue::Bool(true)],
        }
    }

    /// Candidate values in search order: ascending scalars; lists by length,
    /// then element-wise.
    pub fn candidates(&self, ty: SubsetType) -> Vec<ConcreteValue> {
        match ty {
            SubsetType::Int => self.scalars(ScalarType::Int, self.int_range),
            SubsetType::Float => self.scalars(ScalarType::Float, self.int_range),
            SubsetType::Bool => self.scalars(ScalarType::Bool, self.int_range),
            SubsetType::ListOf(e) => {
                let elems = self.scalars(e, self.elem_range);
                let mut out = vec![ConcreteValue::List(Vec::new())];
                let mut layer: Vec<Vec<ConcreteValue>> = vec![Vec::new()];
                for _ in 0..self.list_len_max {
                    let mut next = Vec::with_capacity(layer.len() * elems.len());
                    for prefix in &layer {
                        for e in &elems {
                            let mut l = prefix.clone();
                            l.push(e.clone());
                            next.push(l);
                        }
                    }
                    out.extend(next.iter().cloned().map(ConcreteValue::List));
                    layer = next;
                }
                out
            }
        }
    }
}

const CHUNK: usize = 2048;

/// First input (in search order) following each target.
pub fn brute_force_all(
    f: &FunctionDef,
    env: &TypeEnv,
    targets: &[ExecutionPath],
    domain: &Domain,
) -> Vec<OracleResult> {
    let cfg = build_cfg(f);
    let cands: Vec<Vec<ConcreteValue>> = env.params.iter().map(|(_, t)| domain.candidates(*t)).collect();
    let total: usize = cands.iter().map(Vec::len).product();
    let decode = |mut k: usize| -> Vec<ConcreteValue> {
        let mut args = vec![ConcreteValue::Int(0); cands.len()];
        for (slot, c) in args.iter_mut().zip(&cands).rev() {
            *slot = c[k % c.len()].clone();
            k /= c.len();
        }
        args
    };
    let limits = Limits::default();
    let chunks = total.div_ceil(CHUNK);
    let firsts: Vec<Option<usize>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut first = vec![None; targets.len()];
            let mut open = targets.len();
            for k in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let r = run_cfg(&cfg, &decode(k), limits);
                for (t, slot) in targets.iter().zip(first.iter_mut()) {
                    if slot.is_none() && follows(&r, t) {
                        *slot = Some(k);
                        open -= 1;
                    }
                }
                if open == 0 {
                    break;
                }
            }
            first
        })
        .reduce(
            || vec![None; targets.len()],
            |a, b| {
                a.into_iter()
                    .zip(b)
                    .map(|(x, y)| match (x, y) {
                        (Some(x), Some(y)) => Some(x.min(y)),
                        (x, y) => x.or(y),
                    })
                    .collect()
            },
        );
    firsts
        .into_iter()
        .map(|k| match k {
            Some(k) => OracleResult::FoundInput(TestInput {
                args: env.params.iter().map(|(p, _)| p.clone()).zip(decode(k)).collect(),
            }),
            None => OracleResult::ExhaustedNoInput,
        })
        .collect()
}

pub fn brute_force(f: &FunctionDef, env: &TypeEnv, target: &ExecutionPath, domain: &Domain) -> OracleResult {
    brute_force_all(f, env, std::slice::from_ref(target), domain)
        .pop()
        .unwrap_or(OracleResult::ExhaustedNoInput)
}

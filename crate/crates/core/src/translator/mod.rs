//! Path-to-constraint translation under SSA renaming.
//!
//! Every definition of a variable `x` introduces a fresh symbol `_x_k`;
//! lists are an Int-indexed array `_x_k` paired with an Int `_x_k_len`.
//! Parameters are defined at index 0 by the Enter step, locals at index 0
//! by their first assignment on the path.

mod expr;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::cfg::{ExecutionPath, PathStep, StepKind};
use crate::frontend::FunctionDef;
use crate::smt::{Origin, SmtScript, Sort, Symbol, Term, VarSymbols};
use crate::typing::{ScalarType, SubsetType, TypeEnv};

pub use expr::translate_step;

/// Per-variable SSA indices plus the types the symbols are declared with.
#[derive(Debug, Clone, PartialEq)]
pub struct SsaEnv {
    pub index: BTreeMap<String, u32>,
    pub types: TypeEnv,
    /// Groups of list variables currently bound to the same array.
    aliases: Vec<BTreeSet<String>>,
    fresh: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown variable '{0}'")]
pub struct UnknownVariable(pub String);

/// First step the rules cannot translate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unsupported {
    pub step: usize,
    pub construct: String,
}

impl fmt::Display for Unsupported {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: unsupported {}", self.step, self.construct)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TranslationOutcome {
    Translated {
        script: SmtScript,
        /// SSA indices in force after each step.
        ssa: Vec<BTreeMap<String, u32>>,
    },
    Unsupported(Unsupported),
}

impl TranslationOutcome {
    pub fn script(&self) -> Option<&SmtScript> {
        match self {
            TranslationOutcome::Translated { script, .. } => Some(script),
            TranslationOutcome::Unsupported(_) => None,
        }
    }
}

pub fn sort_of_scalar(t: ScalarType) -> Sort {
    match t {
        ScalarType::Int => Sort::Int,
        ScalarType::Float => Sort::Real,
        ScalarType::Bool => Sort::Bool,
    }
}

pub fn ssa_name(var: &str, k: u32) -> String {
    format!("_{var}_{k}")
}

/// Splits `_x_3` or `_x_3_len` into (`x`, 3). Other names give `None`.
pub fn parse_ssa_name(name: &str) -> Option<(&str, u32)> {
    let body = name.strip_prefix('_')?;
    let body = body.strip_suffix("_len").unwrap_or(body);
    let (var, k) = body.rsplit_once('_')?;
    if var.is_empty() || k.is_empty() || !k.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some((var, k.parse().ok()?))
}

impl SsaEnv {
    pub fn new(types: TypeEnv) -> Self {
        Self {
            index: BTreeMap::new(),
            types,
            aliases: Vec::new(),
            fresh: 0,
        }
    }

    fn symbols_at(&self, var: &str, k: u32) -> Result<VarSymbols, UnknownVariable> {
        let ty = self
            .types
            .get(var)
            .ok_or_else(|| UnknownVariable(var.to_string()))?;
        let name = ssa_name(var, k);
        Ok(match ty {
            SubsetType::ListOf(e) => VarSymbols::List {
                array: Symbol::new(name.clone(), Sort::Array(Box::new(sort_of_scalar(e)))),
                len: Symbol::new(format!("{name}_len"), Sort::Int),
            },
            scalar => VarSymbols::Scalar(Symbol::new(
                name,
                sort_of_scalar(match scalar {
                    SubsetType::Int => ScalarType::Int,
                    SubsetType::Float => ScalarType::Float,
                    _ => ScalarType::Bool,
                }),
            )),
        })
    }

    /// Starts a new version of `var` and declares its symbols.
    fn define(&mut self, var: &str, script: &mut SmtScript) -> Result<VarSymbols, UnknownVariable> {
        let k = self.index.get(var).map_or(0, |k| k + 1);
        let syms = self.symbols_at(var, k)?;
        self.index.insert(var.to_string(), k);
        match &syms {
            VarSymbols::Scalar(s) => script.declare(s.clone()),
            VarSymbols::List { array, len } => {
                script.declare(array.clone());
                script.declare(len.clone());
            }
        }
        Ok(syms)
    }

    fn fresh(&mut self, prefix: &str, sort: Sort, script: &mut SmtScript) -> Term {
        let name = format!("{prefix}!{}", self.fresh);
        self.fresh += 1;
        script.declare(Symbol::new(name.clone(), sort));
        Term::Sym(name)
    }

    fn unalias(&mut self, var: &str) {
        for g in &mut self.aliases {
            g.remove(var);
        }
        self.aliases.retain(|g| g.len() > 1);
    }

    fn alias(&mut self, target: &str, source: &str) {
        self.unalias(target);
        if let Some(g) = self.aliases.iter_mut().find(|g| g.contains(source)) {
            g.insert(target.to_string());
        } else {
            self.aliases
                .push([target.to_string(), source.to_string()].into_iter().collect());
        }
    }

    fn is_aliased(&self, var: &str) -> bool {
        self.aliases.iter().any(|g| g.contains(var))
    }
}

/// Symbols for the current version of `var`. Reads never advance indices.
pub fn current_symbol(state: &SsaEnv, var: &str) -> Result<VarSymbols, UnknownVariable> {
    let k = *state
        .index
        .get(var)
        .ok_or_else(|| UnknownVariable(var.to_string()))?;
    state.symbols_at(var, k)
}

/// Declares the index-0 symbols of every parameter.
fn init_params(state: &mut SsaEnv, script: &mut SmtScript, step: usize) {
    let params = state.types.params.clone();
    for (p, _) in &params {
        let syms = state
            .define(p, script)
            .expect("parameters are typed");
        if let VarSymbols::List { len, .. } = &syms {
            script.assert(
                Term::bin(crate::smt::Op::Ge, Term::sym(&len.name), Term::Int(0)),
                Origin {
                    step,
                    synthetic: true,
                },
            );
        }
        script.param_map.push((p.clone(), syms));
    }
}

/// SSA state and script prefix after entering `f`.
pub fn init_state(env: &TypeEnv, f: &FunctionDef) -> (SsaEnv, SmtScript) {
    let mut state = SsaEnv::new(env.clone());
    let mut script = SmtScript::new(&f.name);
    init_params(&mut state, &mut script, 0);
    (state, script)
}

/// Translates the whole path, stopping at the first untranslatable step.
pub fn translate_path(path: &ExecutionPath, env: &TypeEnv) -> TranslationOutcome {
    let mut state = SsaEnv::new(env.clone());
    let mut script = SmtScript::new(&path.function);
    let mut ssa = Vec::with_capacity(path.steps.len());
    for (i, step) in path.steps.iter().enumerate() {
        if let Err(u) = translate_step(&mut state, &mut script, i, step) {
            return TranslationOutcome::Unsupported(u);
        }
        ssa.push(state.index.clone());
    }
    TranslationOutcome::Translated { script, ssa }
}

fn enter_step(state: &mut SsaEnv, script: &mut SmtScript, index: usize, step: &PathStep) -> Result<(), Unsupported> {
    debug_assert_eq!(step.kind, StepKind::Enter);
    if !script.param_map.is_empty() {
        return Err(Unsupported {
            step: index,
            construct: "second function entry".into(),
        });
    }
    init_params(state, script, index);
    Ok(())
}

#[cfg(test)]
mod tests;

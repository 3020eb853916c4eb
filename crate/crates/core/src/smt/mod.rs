//! Solver-agnostic constraint scripts, SMT-LIB emission, external solver
//! runs and model handling.

mod emit;
mod eval;
mod model;
pub mod sexpr;
mod solver;
mod term;

pub use emit::emit_smtlib;
pub use eval::{eval_in_model, eval_term, smt_div, unsatisfied, EvalError};
pub use model::{parse_model, values_equal, ArrayFunc, ArrayVal, Model, ModelParseError, Value};
pub use solver::{solve, solve_text, solver_available, SolveRun, SolverConfig, SolverVerdict};
pub use term::{parse_decimal, Op, Sort, Symbol, Term};

use serde::{Deserialize, Serialize};

/// Where an assertion came from: the index of the path step that produced it,
/// and whether it is a side constraint rather than the step's own meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub step: usize,
    pub synthetic: bool,
}

/// Index-0 symbols standing for a parameter's input value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarSymbols {
    Scalar(Symbol),
    List { array: Symbol, len: Symbol },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SmtScript {
    pub function: String,
    pub decls: Vec<Symbol>,
    pub asserts: Vec<Term>,
    /// Parallel to `asserts`.
    pub origin: Vec<Origin>,
    /// Parameters in declaration order.
    pub param_map: Vec<(String, VarSymbols)>,
}

impl SmtScript {
    pub fn new(function: impl Into<String>) -> Self {
        Self {
            function: function.into(),
            ..Self::default()
        }
    }

    pub fn declare(&mut self, sym: Symbol) {
        if !self.decls.iter().any(|d| d.name == sym.name) {
            self.decls.push(sym);
        }
    }

    pub fn assert(&mut self, t: Term, origin: Origin) {
        self.asserts.push(t);
        self.origin.push(origin);
    }

    pub fn param(&self, name: &str) -> Option<&VarSymbols> {
        self.param_map.iter().find(|(p, _)| p == name).map(|(_, s)| s)
    }

    /// True iff every assertion holds under the model.
    pub fn eval_model(&self, model: &Model) -> bool {
        unsatisfied(&self.asserts, &self.decls, model).is_empty()
    }

    /// `assert-index<TAB>step-index` lines; synthetic assertions are marked
    /// with a trailing `*`.
    pub fn origin_map(&self) -> String {
        let mut out = String::new();
        for (k, o) in self.origin.iter().enumerate() {
            let mark = if o.synthetic { "\t*" } else { "" };
            out.push_str(&format!("{k}\t{}{mark}\n", o.step));
        }
        out
    }
}

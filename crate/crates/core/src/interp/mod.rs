//! Concrete execution with Python semantics over the same CFG lowering the
//! path enumerator walks, so traces and enumerated paths are directly
//! comparable.

mod oracle;
mod value;

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::cfg::{build_cfg, walk_to_path, Cfg, EdgeLabel, ExecutionPath, NodeKind, NodeOp};
use crate::frontend::{BinOp, CmpOp, Expr, ExprKind, FunctionDef, LValue, StmtKind, UnaryOp};
use crate::testcase::TestInput;

pub use oracle::{brute_force, brute_force_all, Domain, OracleResult};
pub use value::{float_literal, parse_args, ConcreteValue, LiteralError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RaiseKind {
    IndexError,
    ZeroDivisionError,
    StepLimit,
    NameError,
    OverflowError,
    TypeError,
    /// A construct outside the subset was reached.
    Unsupported,
}

impl fmt::Display for RaiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Returned(Option<ConcreteValue>),
    Raised { kind: RaiseKind, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub outcome: Outcome,
    /// Every step visited, including one that raised.
    pub trace: ExecutionPath,
    pub steps_executed: usize,
}

impl RunResult {
    pub fn raised(&self) -> Option<RaiseKind> {
        match self.outcome {
            Outcome::Raised { kind, .. } => Some(kind),
            Outcome::Returned(_) => None,
        }
    }

    /// Steps that finished without raising.
    pub fn completed_steps(&self) -> usize {
        match self.outcome {
            Outcome::Returned(_)
            | Outcome::Raised {
                kind: RaiseKind::StepLimit,
                ..
            } => self.trace.steps.len(),
            Outcome::Raised { .. } => self.trace.steps.len().saturating_sub(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_steps: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_steps: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathVerdict {
    PathCorrect,
    ExecutionPassOnly,
    Failed(String),
}

impl PathVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            PathVerdict::PathCorrect => "path-correct",
            PathVerdict::ExecutionPassOnly => "execution-pass",
            PathVerdict::Failed(_) => "failed",
        }
    }
}

/// Whether a run follows `target`. A truncated target only needs its steps
/// to be executed to completion as a prefix of the run.
pub fn follows(run: &RunResult, target: &ExecutionPath) -> bool {
    if target.truncated {
        run.completed_steps() >= target.steps.len() && target.is_followed_by(&run.trace)
    } else {
        run.raised().is_none() && target.is_followed_by(&run.trace)
    }
}

pub fn classify(run: &RunResult, target: &ExecutionPath) -> PathVerdict {
    if follows(run, target) {
        return PathVerdict::PathCorrect;
    }
    match run.raised() {
        Some(kind) => PathVerdict::Failed(kind.to_string()),
        None => PathVerdict::ExecutionPassOnly,
    }
}

pub fn path_verdict(f: &FunctionDef, input: &TestInput, target: &ExecutionPath) -> PathVerdict {
    let args: Vec<ConcreteValue> = input.args.iter().map(|(_, v)| v.clone()).collect();
    classify(&run(f, &args, Limits::default()), target)
}

pub fn run(f: &FunctionDef, args: &[ConcreteValue], limits: Limits) -> RunResult {
    run_cfg(&build_cfg(f), args, limits)
}

#[derive(Debug, Clone)]
enum Rv {
    Int(i64),
    Float(f64),
    Bool(bool),
    List(Rc<RefCell<Vec<Rv>>>),
}

struct Raise(RaiseKind, String);

type Ev<T> = Result<T, Raise>;

fn raise<T>(kind: RaiseKind, msg: impl Into<String>) -> Ev<T> {
    Err(Raise(kind, msg.into()))
}

impl Rv {
    fn from_concrete(v: &ConcreteValue) -> Rv {
        match v {
            ConcreteValue::Int(i) => Rv::Int(*i),
            ConcreteValue::Float(f) => Rv::Float(*f),
            ConcreteValue::Bool(b) => Rv::Bool(*b),
            ConcreteValue::List(items) => Rv::List(Rc::new(RefCell::new(items.iter().map(Rv::from_concrete).collect()))),
        }
    }

    fn to_concrete(&self) -> ConcreteValue {
        match self {
            Rv::Int(i) => ConcreteValue::Int(*i),
            Rv::Float(f) => ConcreteValue::Float(*f),
            Rv::Bool(b) => ConcreteValue::Bool(*b),
            Rv::List(l) => ConcreteValue::List(l.borrow().iter().map(Rv::to_concrete).collect()),
        }
    }
}

enum Num {
    I(i64),
    F(f64),
}

fn num(v: &Rv) -> Ev<Num> {
    match v {
        Rv::Int(i) => Ok(Num::I(*i)),
        Rv::Bool(b) => Ok(Num::I(*b as i64)),
        Rv::Float(f) => Ok(Num::F(*f)),
        Rv::List(_) => raise(RaiseKind::TypeError, "list used as a number"),
    }
}

fn as_f64(n: &Num) -> f64 {
    match n {
        Num::I(i) => *i as f64,
        Num::F(f) => *f,
    }
}

fn overflow<T>() -> Ev<T> {
    raise(RaiseKind::OverflowError, "integer overflow")
}

fn floor_div_int(a: i64, b: i64) -> Ev<i64> {
    if b == 0 {
        return raise(RaiseKind::ZeroDivisionError, "integer division or modulo by zero");
    }
    let Some(q) = a.checked_div(b) else { return overflow() };
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        Ok(q - 1)
    } else {
        Ok(q)
    }
}

fn arith(op: BinOp, a: &Rv, b: &Rv) -> Ev<Rv> {
    let (x, y) = (num(a)?, num(b)?);
    if let (Num::I(x), Num::I(y)) = (&x, &y) {
        let (x, y) = (*x, *y);
        return match op {
            BinOp::Add => x.checked_add(y).map(Rv::Int).map_or_else(overflow, Ok),
            BinOp::Sub => x.checked_sub(y).map(Rv::Int).map_or_else(overflow, Ok),
            BinOp::Mul => x.checked_mul(y).map(Rv::Int).map_or_else(overflow, Ok),
            BinOp::Div => {
                if y == 0 {
                    return raise(RaiseKind::ZeroDivisionError, "division by zero");
                }
                Ok(Rv::Float(x as f64 / y as f64))
            }
            BinOp::FloorDiv => floor_div_int(x, y).map(Rv::Int),
            BinOp::Mod => {
                let q = floor_div_int(x, y)?;
                let Some(p) = q.checked_mul(y) else { return overflow() };
                x.checked_sub(p).map(Rv::Int).map_or_else(overflow, Ok)
            }
            BinOp::And | BinOp::Or => unreachable!(),
        };
    }
    let (x, y) = (as_f64(&x), as_f64(&y));
    let zero_div = || raise(RaiseKind::ZeroDivisionError, "float division by zero");
    Ok(Rv::Float(match op {
        BinOp::Add => x + y,
        BinOp::Sub => x - y,
        BinOp::Mul => x * y,
        BinOp::Div => {
            if y == 0.0 {
                return zero_div();
            }
            x / y
        }
        BinOp::FloorDiv => {
            if y == 0.0 {
                return zero_div();
            }
            (x / y).floor()
        }
        BinOp::Mod => {
            if y == 0.0 {
                return zero_div();
            }
            let r = x % y;
            if r != 0.0 && ((r < 0.0) != (y < 0.0)) {
                r + y
            } else {
                r
            }
        }
        BinOp::And | BinOp::Or => unreachable!(),
    }))
}

fn truthy(v: &Rv) -> bool {
    match v {
        Rv::Int(i) => *i != 0,
        Rv::Float(f) => *f != 0.0,
        Rv::Bool(b) => *b,
        Rv::List(l) => !l.borrow().is_empty(),
    }
}

fn values_eq(a: &Rv, b: &Rv) -> Ev<bool> {
    match (a, b) {
        (Rv::List(x), Rv::List(y)) => {
            let (x, y) = (x.borrow(), y.borrow());
            if x.len() != y.len() {
                return Ok(false);
            }
            for (p, q) in x.iter().zip(y.iter()) {
                if !values_eq(p, q)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (Rv::List(_), _) | (_, Rv::List(_)) => Ok(false),
        _ => Ok(match (num(a)?, num(b)?) {
            (Num::I(x), Num::I(y)) => x == y,
            (x, y) => as_f64(&x) == as_f64(&y),
        }),
    }
}

fn compare(op: CmpOp, a: &Rv, b: &Rv) -> Ev<bool> {
    match op {
        CmpOp::Eq => return values_eq(a, b),
        CmpOp::Ne => return values_eq(a, b).map(|e| !e),
        _ => {}
    }
    let ord = match (num(a)?, num(b)?) {
        (Num::I(x), Num::I(y)) => x.partial_cmp(&y),
        (x, y) => as_f64(&x).partial_cmp(&as_f64(&y)),
    };
    let Some(ord) = ord else { return Ok(false) };
    Ok(match op {
        CmpOp::Lt => ord.is_lt(),
        CmpOp::Le => ord.is_le(),
        CmpOp::Gt => ord.is_gt(),
        _ => ord.is_ge(),
    })
}

struct Machine {
    vars: HashMap<String, Rv>,
}

impl Machine {
    fn get(&self, n: &str) -> Ev<Rv> {
        match self.vars.get(n) {
            Some(v) => Ok(v.clone()),
            None => raise(RaiseKind::NameError, format!("name '{n}' is not defined")),
        }
    }

    fn list(&self, e: &Expr) -> Ev<Rc<RefCell<Vec<Rv>>>> {
        match self.eval(e)? {
            Rv::List(l) => Ok(l),
            _ => raise(RaiseKind::TypeError, "not a list"),
        }
    }

    fn list_var(&self, n: &str) -> Ev<Rc<RefCell<Vec<Rv>>>> {
        match self.get(n)? {
            Rv::List(l) => Ok(l),
            _ => raise(RaiseKind::TypeError, format!("'{n}' is not a list")),
        }
    }

    fn index(&self, len: usize, e: &Expr) -> Ev<usize> {
        let i = match self.eval(e)? {
            Rv::Int(i) => i,
            Rv::Bool(b) => b as i64,
            _ => return raise(RaiseKind::TypeError, "list indices must be integers"),
        };
        let j = if i < 0 { i + len as i64 } else { i };
        if j < 0 || j >= len as i64 {
            return raise(RaiseKind::IndexError, "list index out of range");
        }
        Ok(j as usize)
    }

    fn eval(&self, e: &Expr) -> Ev<Rv> {
        match &e.kind {
            ExprKind::Int(i) => Ok(Rv::Int(*i)),
            ExprKind::Float(f) => Ok(Rv::Float(*f)),
            ExprKind::Bool(b) => Ok(Rv::Bool(*b)),
            ExprKind::Name(n) => self.get(n),
            ExprKind::Unary(UnaryOp::Not, a) => Ok(Rv::Bool(!truthy(&self.eval(a)?))),
            ExprKind::Unary(UnaryOp::Neg, a) => match num(&self.eval(a)?)? {
                Num::I(i) => i.checked_neg().map(Rv::Int).map_or_else(overflow, Ok),
                Num::F(f) => Ok(Rv::Float(-f)),
            },
            ExprKind::Binary(BinOp::And, l, r) => {
                let a = self.eval(l)?;
                if truthy(&a) {
                    self.eval(r)
                } else {
                    Ok(a)
                }
            }
            ExprKind::Binary(BinOp::Or, l, r) => {
                let a = self.eval(l)?;
                if truthy(&a) {
                    Ok(a)
                } else {
                    self.eval(r)
                }
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                arith(*op, &a, &b)
            }
            ExprKind::Compare(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                compare(*op, &a, &b).map(Rv::Bool)
            }
            ExprKind::Subscript { base, index } => {
                let l = self.list(base)?;
                let len = l.borrow().len();
                let i = self.index(len, index)?;
                let v = l.borrow()[i].clone();
                Ok(v)
            }
            ExprKind::Len(a) => {
                let l = self.list(a)?;
                let n = l.borrow().len();
                Ok(Rv::Int(n as i64))
            }
            ExprKind::Abs(a) => match num(&self.eval(a)?)? {
                Num::I(i) => i.checked_abs().map(Rv::Int).map_or_else(overflow, Ok),
                Num::F(f) => Ok(Rv::Float(f.abs())),
            },
            ExprKind::Pop(a) => {
                let l = self.list(a)?;
                let v = l.borrow_mut().pop();
                match v {
                    Some(v) => Ok(v),
                    None => raise(RaiseKind::IndexError, "pop from empty list"),
                }
            }
            ExprKind::ListLit(items) => {
                let vs = items.iter().map(|i| self.eval(i)).collect::<Ev<Vec<_>>>()?;
                Ok(Rv::List(Rc::new(RefCell::new(vs))))
            }
            ExprKind::Opaque { construct, .. } => raise(RaiseKind::Unsupported, construct.clone()),
        }
    }

    fn assign(&mut self, target: &LValue, v: Rv) -> Ev<()> {
        match target {
            LValue::Name(n) => {
                self.vars.insert(n.clone(), v);
                Ok(())
            }
            LValue::Index { base, index } => {
                let l = self.list_var(base)?;
                let len = l.borrow().len();
                let i = self.index(len, index)?;
                l.borrow_mut()[i] = v;
                Ok(())
            }
        }
    }

    /// Executes a simple statement; `Some` when it returns.
    fn exec(&mut self, s: &StmtKind) -> Ev<Option<Option<Rv>>> {
        match s {
            StmtKind::Assign { target, value } => {
                // the index of a subscript target is evaluated after the value
                let v = self.eval(value)?;
                self.assign(target, v)?;
            }
            StmtKind::AugAssign { target, op, value } => {
                let cur = match target {
                    LValue::Name(n) => self.get(n)?,
                    LValue::Index { base, index } => {
                        let l = self.list_var(base)?;
                        let len = l.borrow().len();
                        let i = self.index(len, index)?;
                        let v = l.borrow()[i].clone();
                        v
                    }
                };
                let rhs = self.eval(value)?;
                let v = arith(*op, &cur, &rhs)?;
                self.assign(target, v)?;
            }
            StmtKind::Append { list, value } => {
                let l = self.list_var(list)?;
                let v = self.eval(value)?;
                l.borrow_mut().push(v);
            }
            StmtKind::ExprStmt(e) => {
                self.eval(e)?;
            }
            StmtKind::Return(e) => {
                let v = e.as_ref().map(|e| self.eval(e)).transpose()?;
                return Ok(Some(v));
            }
            StmtKind::Break | StmtKind::Continue => {}
            StmtKind::Opaque { construct, .. } => return raise(RaiseKind::Unsupported, construct.clone()),
            StmtKind::If { .. } | StmtKind::While { .. } | StmtKind::ForRange { .. } | StmtKind::ForEach { .. } => {
                return raise(RaiseKind::Unsupported, "compound statement node")
            }
        }
        Ok(None)
    }
}

/// Runs the function whose CFG is `cfg`.
pub fn run_cfg(cfg: &Cfg, args: &[ConcreteValue], limits: Limits) -> RunResult {
    let mut m = Machine { vars: HashMap::new() };
    let mut walk: Vec<usize> = Vec::new();
    let mut node = cfg.entry;
    let finish = |walk: &[usize], outcome: Outcome, final_branch: Option<bool>, done: bool| RunResult {
        trace: walk_to_path(cfg, walk, final_branch, !done),
        steps_executed: walk.len(),
        outcome,
    };
    loop {
        if cfg.nodes[node].kind == NodeKind::Exit {
            return finish(&walk, Outcome::Returned(None), None, true);
        }
        if walk.len() >= limits.max_steps {
            let outcome = Outcome::Raised {
                kind: RaiseKind::StepLimit,
                message: format!("more than {} steps", limits.max_steps),
            };
            return finish(&walk, outcome, None, false);
        }
        walk.push(node);
        let step: Ev<(EdgeLabel, Option<Option<Rv>>)> = match &cfg.nodes[node].op {
            NodeOp::Enter => {
                if args.len() != cfg.params.len() {
                    Err(Raise(
                        RaiseKind::TypeError,
                        format!("expected {} arguments, got {}", cfg.params.len(), args.len()),
                    ))
                } else {
                    for (p, a) in cfg.params.iter().zip(args) {
                        m.vars.insert(p.name.clone(), Rv::from_concrete(a));
                    }
                    Ok((EdgeLabel::Fallthrough, None))
                }
            }
            NodeOp::Cond(e) => m.eval(e).map(|v| {
                let label = if truthy(&v) {
                    EdgeLabel::TrueBranch
                } else {
                    EdgeLabel::FalseBranch
                };
                (label, None)
            }),
            NodeOp::Simple(s) => m.exec(&s.kind).map(|r| (EdgeLabel::Fallthrough, r)),
            NodeOp::Exit => unreachable!(),
        };
        match step {
            Err(Raise(kind, message)) => {
                return finish(&walk, Outcome::Raised { kind, message }, None, false);
            }
            Ok((_, Some(ret))) => {
                let v = ret.map(|v| v.to_concrete());
                return finish(&walk, Outcome::Returned(v), None, true);
            }
            Ok((label, None)) => {
                let Some(edge) = cfg.successor(node, label) else {
                    let outcome = Outcome::Raised {
                        kind: RaiseKind::Unsupported,
                        message: "no successor in the control-flow graph".into(),
                    };
                    return finish(&walk, outcome, None, false);
                };
                if edge.to == cfg.exit {
                    // the final branch is read from the exit edge
                    let fb = match label {
                        EdgeLabel::TrueBranch => Some(true),
                        EdgeLabel::FalseBranch => Some(false),
                        EdgeLabel::Fallthrough => None,
                    };
                    return finish(&walk, Outcome::Returned(None), fb, true);
                }
                node = edge.to;
            }
        }
    }
}

#[cfg(test)]
mod tests;

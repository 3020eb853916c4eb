//! Static types for function variables under the monomorphism assumption:
//! each variable keeps one type for the whole function.
//!
//! Annotations are taken verbatim. Everything else is solved by unification,
//! with arithmetic result types joined once both operand types are known.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{
    BinOp, Expr, ExprKind, FunctionDef, LValue, ScalarAnnot, Stmt, StmtKind, TypeAnnot, UnaryOp,
    HIDDEN_PREFIX,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScalarType {
    Int,
    Float,
    Bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubsetType {
    Int,
    Float,
    Bool,
    ListOf(ScalarType),
}

impl SubsetType {
    pub fn scalar(s: ScalarType) -> SubsetType {
        match s {
            ScalarType::Int => SubsetType::Int,
            ScalarType::Float => SubsetType::Float,
            ScalarType::Bool => SubsetType::Bool,
        }
    }

    pub fn is_list(self) -> bool {
        matches!(self, SubsetType::ListOf(_))
    }

    pub fn element(self) -> Option<ScalarType> {
        match self {
            SubsetType::ListOf(e) => Some(e),
            _ => None,
        }
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalarType::Int => "int",
            ScalarType::Float => "float",
            ScalarType::Bool => "bool",
        })
    }
}

impl fmt::Display for SubsetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetType::Int => f.write_str("int"),
            SubsetType::Float => f.write_str("float"),
            SubsetType::Bool => f.write_str("bool"),
            SubsetType::ListOf(e) => write!(f, "list[{e}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TypeEnv {
    pub vars: BTreeMap<String, SubsetType>,
    /// Parameters in declaration order.
    pub params: Vec<(String, SubsetType)>,
    pub return_type: Option<SubsetType>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl TypeEnv {
    pub fn get(&self, var: &str) -> Option<SubsetType> {
        self.vars.get(var).copied()
    }

    /// `name: type` lines, parameters first.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (p, t) in &self.params {
            out.push_str(&format!("{p}: {t}\n"));
        }
        for (v, t) in &self.vars {
            if !self.params.iter().any(|(p, _)| p == v) {
                out.push_str(&format!("{v}: {t}\n"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("conflicting types for '{var}': {t1} vs {t2}")]
    Conflict {
        var: String,
        t1: String,
        t2: String,
    },
    #[error("cannot determine the type of '{var}'")]
    Unresolved { var: String },
    #[error("ill-typed expression `{expr}`: {reason}")]
    Invalid { expr: String, reason: String },
}

// ------------------------------------------------------------------ terms

type Node = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Int,
    Float,
    Bool,
    List(Node),
}

#[derive(Debug, Clone)]
enum Constraint {
    Eq(Node, Node, usize),
    /// `res = l op r` over numbers.
    Arith {
        res: Node,
        l: Node,
        r: Node,
        true_div: bool,
        ctx: usize,
    },
    /// Operands of a comparison: two numbers, or two equal scalars.
    Compare(Node, Node, usize),
    Numeric(Node, usize),
    Scalar(Node, usize),
}

#[derive(Clone)]
struct Store {
    parent: Vec<Node>,
    shape: Vec<Option<Shape>>,
}

impl Store {
    fn fresh(&mut self) -> Node {
        self.parent.push(self.parent.len());
        self.shape.push(None);
        self.parent.len() - 1
    }

    fn with_shape(&mut self, s: Shape) -> Node {
        let n = self.fresh();
        self.shape[n] = Some(s);
        n
    }

    fn find(&mut self, mut n: Node) -> Node {
        while self.parent[n] != n {
            self.parent[n] = self.parent[self.parent[n]];
            n = self.parent[n];
        }
        n
    }

    fn shape(&mut self, n: Node) -> Option<Shape> {
        let r = self.find(n);
        self.shape[r]
    }

    fn unify(&mut self, a: Node, b: Node) -> Result<(), (String, String)> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        match (self.shape[ra], self.shape[rb]) {
            (None, _) => {
                self.parent[ra] = rb;
                Ok(())
            }
            (_, None) => {
                self.parent[rb] = ra;
                Ok(())
            }
            (Some(Shape::List(x)), Some(Shape::List(y))) => {
                self.parent[ra] = rb;
                self.unify(x, y)
            }
            (Some(sa), Some(sb)) if sa == sb => {
                self.parent[ra] = rb;
                Ok(())
            }
            _ => Err((self.describe(ra), self.describe(rb))),
        }
    }

    fn describe(&mut self, n: Node) -> String {
        match self.shape(n) {
            None => "?".into(),
            Some(Shape::Int) => "int".into(),
            Some(Shape::Float) => "float".into(),
            Some(Shape::Bool) => "bool".into(),
            Some(Shape::List(e)) => format!("list[{}]", self.describe(e)),
        }
    }

    fn resolve(&mut self, n: Node) -> Option<SubsetType> {
        match self.shape(n)? {
            Shape::Int => Some(SubsetType::Int),
            Shape::Float => Some(SubsetType::Float),
            Shape::Bool => Some(SubsetType::Bool),
            Shape::List(e) => match self.shape(e)? {
                Shape::Int => Some(SubsetType::ListOf(ScalarType::Int)),
                Shape::Float => Some(SubsetType::ListOf(ScalarType::Float)),
                Shape::Bool => Some(SubsetType::ListOf(ScalarType::Bool)),
                Shape::List(_) => None,
            },
        }
    }
}

// ------------------------------------------------------------- collection

struct Collector {
    store: Store,
    vars: BTreeMap<String, Node>,
    read: BTreeSet<String>,
    constraints: Vec<Constraint>,
    /// Context label per constraint: the variable an error is reported on.
    ctxs: Vec<(String, String)>,
    ret: Node,
}

impl Collector {
    fn var(&mut self, name: &str) -> Node {
        if let Some(&n) = self.vars.get(name) {
            return n;
        }
        let n = self.store.fresh();
        self.vars.insert(name.to_string(), n);
        n
    }

    fn ctx(&mut self, var: &str, expr: &Expr) -> usize {
        self.ctxs
            .push((var.to_string(), crate::frontend::pretty::expr(expr)));
        self.ctxs.len() - 1
    }

    fn int(&mut self) -> Node {
        self.store.with_shape(Shape::Int)
    }

    fn eq(&mut self, a: Node, b: Node, ctx: usize) {
        self.constraints.push(Constraint::Eq(a, b, ctx));
    }

    fn list_of(&mut self, elem: Node) -> Node {
        self.store.with_shape(Shape::List(elem))
    }

    fn annot(&mut self, a: TypeAnnot) -> Option<Node> {
        let scalar = |st: &mut Store, s: ScalarAnnot| -> Option<Node> {
            Some(st.with_shape(match s {
                ScalarAnnot::Int => Shape::Int,
                ScalarAnnot::Float => Shape::Float,
                ScalarAnnot::Bool => Shape::Bool,
                ScalarAnnot::Other => return None,
            }))
        };
        match a {
            TypeAnnot::Int => Some(self.store.with_shape(Shape::Int)),
            TypeAnnot::Float => Some(self.store.with_shape(Shape::Float)),
            TypeAnnot::Bool => Some(self.store.with_shape(Shape::Bool)),
            TypeAnnot::List(e) => {
                let e = scalar(&mut self.store, e)?;
                Some(self.list_of(e))
            }
            TypeAnnot::NoneType | TypeAnnot::Other => None,
        }
    }

    /// Type node of an expression; `owner` names the variable errors are
    /// attributed to.
    fn expr(&mut self, e: &Expr, owner: &str) -> Node {
        match &e.kind {
            ExprKind::Int(_) => self.int(),
            ExprKind::Float(_) => self.store.with_shape(Shape::Float),
            ExprKind::Bool(_) => self.store.with_shape(Shape::Bool),
            ExprKind::Name(n) => {
                self.read.insert(n.clone());
                self.var(n)
            }
            ExprKind::Unary(UnaryOp::Not, x) => {
                let t = self.expr(x, owner);
                let b = self.store.with_shape(Shape::Bool);
                let c = self.ctx(owner, e);
                self.eq(t, b, c);
                b
            }
            ExprKind::Unary(UnaryOp::Neg, x) | ExprKind::Abs(x) => {
                let t = self.expr(x, owner);
                let c = self.ctx(owner, e);
                self.constraints.push(Constraint::Numeric(t, c));
                t
            }
            ExprKind::Binary(op, l, r) => {
                let (tl, tr) = (self.expr(l, owner), self.expr(r, owner));
                let c = self.ctx(owner, e);
                if op.is_logical() {
                    let b = self.store.with_shape(Shape::Bool);
                    self.eq(tl, b, c);
                    self.eq(tr, b, c);
                    b
                } else {
                    let res = self.store.fresh();
                    self.constraints.push(Constraint::Numeric(tl, c));
                    self.constraints.push(Constraint::Numeric(tr, c));
                    self.constraints.push(Constraint::Arith {
                        res,
                        l: tl,
                        r: tr,
                        true_div: *op == BinOp::Div,
                        ctx: c,
                    });
                    res
                }
            }
            ExprKind::Compare(_, l, r) => {
                let (tl, tr) = (self.expr(l, owner), self.expr(r, owner));
                let c = self.ctx(owner, e);
                self.constraints.push(Constraint::Scalar(tl, c));
                self.constraints.push(Constraint::Scalar(tr, c));
                self.constraints.push(Constraint::Compare(tl, tr, c));
                self.store.with_shape(Shape::Bool)
            }
            ExprKind::Subscript { base, index } => {
                let tb = self.expr(base, owner);
                let ti = self.expr(index, owner);
                let elem = self.store.fresh();
                let lst = self.list_of(elem);
                let int = self.int();
                let c = self.ctx(owner, e);
                self.eq(tb, lst, c);
                self.eq(ti, int, c);
                elem
            }
            ExprKind::Len(x) => {
                let t = self.expr(x, owner);
                let elem = self.store.fresh();
                let lst = self.list_of(elem);
                let c = self.ctx(owner, e);
                self.eq(t, lst, c);
                self.int()
            }
            ExprKind::Pop(x) => {
                let t = self.expr(x, owner);
                let elem = self.store.fresh();
                let lst = self.list_of(elem);
                let c = self.ctx(owner, e);
                self.eq(t, lst, c);
                elem
            }
            ExprKind::ListLit(items) => {
                let elem = self.store.fresh();
                for it in items {
                    let t = self.expr(it, owner);
                    let c = self.ctx(owner, it);
                    self.eq(t, elem, c);
                    self.constraints.push(Constraint::Scalar(t, c));
                }
                self.list_of(elem)
            }
            // unsupported constructs carry no type information
            ExprKind::Opaque { .. } => self.store.fresh(),
        }
    }

    fn cond(&mut self, e: &Expr) {
        let owner = first_name(e).unwrap_or_default();
        let t = self.expr(e, &owner);
        let b = self.store.with_shape(Shape::Bool);
        let c = self.ctx(&owner, e);
        self.eq(t, b, c);
    }

    fn assign_name(&mut self, var: &str, value: &Expr) {
        let tv = self.expr(value, var);
        let x = self.var(var);
        let c = self.ctx(var, value);
        self.eq(x, tv, c);
    }

    fn block(&mut self, body: &[Stmt]) {
        for s in body {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Assign { target, value } => match target {
                LValue::Name(n) => self.assign_name(n, value),
                LValue::Index { base, index } => {
                    let ti = self.expr(index, base);
                    let tv = self.expr(value, base);
                    let tb = self.var(base);
                    self.read.insert(base.clone());
                    let lst = self.list_of(tv);
                    let int = self.int();
                    let c = self.ctx(base, value);
                    self.eq(tb, lst, c);
                    self.eq(ti, int, c);
                }
            },
            StmtKind::AugAssign { target, op, value } => {
                let current = match target {
                    LValue::Name(n) => Expr::synth(ExprKind::Name(n.clone())),
                    LValue::Index { base, index } => Expr::synth(ExprKind::Subscript {
                        base: Box::new(Expr::name(base)),
                        index: Box::new(index.clone()),
                    }),
                };
                let lowered = Stmt {
                    kind: StmtKind::Assign {
                        target: target.clone(),
                        value: Expr::binary(*op, current, value.clone()),
                    },
                    span: s.span,
                };
                self.stmt(&lowered);
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                self.cond(cond);
                self.block(then_body);
                self.block(else_body);
            }
            StmtKind::While { cond, body } => {
                self.cond(cond);
                self.block(body);
            }
            StmtKind::ForRange {
                var,
                start,
                stop,
                step,
                body,
            } => {
                let v = self.var(var);
                let int = self.int();
                let c = self.ctx(var, start);
                self.eq(v, int, c);
                for e in [start, stop, step] {
                    let t = self.expr(e, var);
                    let c = self.ctx(var, e);
                    self.eq(t, int, c);
                }
                self.block(body);
            }
            StmtKind::ForEach {
                var,
                iterable,
                body,
            } => {
                let idx = format!("{HIDDEN_PREFIX}{var}");
                let ti = self.var(&idx);
                let int = self.int();
                let c = self.ctx(&idx, iterable);
                self.eq(ti, int, c);
                self.read.insert(idx);
                let tl = self.expr(iterable, var);
                let x = self.var(var);
                let lst = self.list_of(x);
                let c = self.ctx(var, iterable);
                self.eq(tl, lst, c);
                self.block(body);
            }
            StmtKind::Return(Some(e)) => {
                let t = self.expr(e, "return");
                let r = self.ret;
                let c = self.ctx("return", e);
                self.eq(t, r, c);
            }
            StmtKind::Return(None) => {}
            StmtKind::Append { list, value } => {
                let tv = self.expr(value, list);
                let tl = self.var(list);
                self.read.insert(list.clone());
                let lst = self.list_of(tv);
                let c = self.ctx(list, value);
                self.eq(tl, lst, c);
                self.constraints.push(Constraint::Scalar(tv, c));
            }
            StmtKind::ExprStmt(e) => {
                self.expr(e, &first_name(e).unwrap_or_default());
            }
            StmtKind::Break | StmtKind::Continue | StmtKind::Opaque { .. } => {}
        }
    }
}

fn first_name(e: &Expr) -> Option<String> {
    e.names().first().map(|s| s.to_string())
}

// ---------------------------------------------------------------- solving

struct Solver<'a> {
    store: Store,
    ctxs: &'a [(String, String)],
}

impl Solver<'_> {
    fn conflict(&self, ctx: usize, (t1, t2): (String, String)) -> TypeError {
        TypeError::Conflict {
            var: self.ctxs[ctx].0.clone(),
            t1,
            t2,
        }
    }

    fn invalid(&self, ctx: usize, reason: impl Into<String>) -> TypeError {
        TypeError::Invalid {
            expr: self.ctxs[ctx].1.clone(),
            reason: reason.into(),
        }
    }

    fn is_number(&mut self, n: Node) -> Option<bool> {
        match self.store.shape(n)? {
            Shape::Int | Shape::Float => Some(true),
            _ => Some(false),
        }
    }

    /// Applies `c` if enough is known. Returns whether it is discharged.
    fn step(&mut self, c: &Constraint) -> Result<bool, TypeError> {
        match *c {
            Constraint::Eq(a, b, ctx) => {
                self.store.unify(a, b).map_err(|e| self.conflict(ctx, e))?;
                Ok(true)
            }
            Constraint::Arith {
                res,
                l,
                r,
                true_div,
                ctx,
            } => {
                let (sl, sr) = (self.store.shape(l), self.store.shape(r));
                match (sl, sr) {
                    (Some(a), Some(b)) => {
                        let joined = match (a, b) {
                            (Shape::Int, Shape::Int) if true_div => {
                                return Err(self.invalid(ctx, "'/' between ints; use '//'"))
                            }
                            (Shape::Int, Shape::Int) => Shape::Int,
                            (Shape::Int | Shape::Float, Shape::Int | Shape::Float) => Shape::Float,
                            _ => return Err(self.invalid(ctx, "arithmetic needs int or float operands")),
                        };
                        let j = self.store.with_shape(joined);
                        self.store.unify(res, j).map_err(|e| self.conflict(ctx, e))?;
                        Ok(true)
                    }
                    _ => {
                        // an int result forces int operands
                        if self.store.shape(res) == Some(Shape::Int) && !true_div {
                            let i = self.store.with_shape(Shape::Int);
                            self.store.unify(l, i).map_err(|e| self.conflict(ctx, e))?;
                            self.store.unify(r, i).map_err(|e| self.conflict(ctx, e))?;
                            return Ok(false);
                        }
                        Ok(false)
                    }
                }
            }
            Constraint::Compare(l, r, ctx) => match (self.store.shape(l), self.store.shape(r)) {
                (Some(a), Some(b)) => {
                    let nums = matches!(a, Shape::Int | Shape::Float)
                        && matches!(b, Shape::Int | Shape::Float);
                    if !nums && a != b {
                        let (t1, t2) = (self.store.describe(l), self.store.describe(r));
                        return Err(self.conflict(ctx, (t1, t2)));
                    }
                    Ok(true)
                }
                _ => Ok(false),
            },
            Constraint::Numeric(n, ctx) => match self.is_number(n) {
                Some(true) => Ok(true),
                Some(false) => {
                    let t = self.store.describe(n);
                    Err(self.invalid(ctx, format!("expected a number, found {t}")))
                }
                None => Ok(false),
            },
            Constraint::Scalar(n, ctx) => match self.store.shape(n) {
                Some(Shape::List(_)) => Err(self.invalid(ctx, "lists cannot be compared or nested")),
                Some(_) => Ok(true),
                None => Ok(false),
            },
        }
    }

    /// When stuck, an operand pair with one known side borrows that type for
    /// the other side. Candidates are taken in a fixed order so the outcome
    /// does not depend on the order constraints were generated.
    fn hint(&mut self, pending: &[Constraint]) -> Result<bool, TypeError> {
        let mut candidates: Vec<(String, Node, Node, usize)> = Vec::new();
        for c in pending {
            let (a, b, ctx) = match *c {
                Constraint::Arith { l, r, ctx, .. } => (l, r, ctx),
                Constraint::Compare(l, r, ctx) => (l, r, ctx),
                _ => continue,
            };
            let (ka, kb) = (self.store.shape(a).is_some(), self.store.shape(b).is_some());
            if ka != kb {
                let (known, unknown) = if ka { (a, b) } else { (b, a) };
                let key = format!("{}\u{0}{}", self.ctxs[ctx].1, self.ctxs[ctx].0);
                candidates.push((key, known, unknown, ctx));
            }
        }
        candidates.sort_by(|x, y| x.0.cmp(&y.0));
        if let Some((_, known, unknown, ctx)) = candidates.into_iter().next() {
            self.store
                .unify(unknown, known)
                .map_err(|e| self.conflict(ctx, e))?;
            return Ok(true);
        }
        Ok(false)
    }

    fn run(&mut self, constraints: &[Constraint]) -> Result<(), TypeError> {
        let mut pending: Vec<Constraint> = constraints.to_vec();
        loop {
            loop {
                let mut next = Vec::new();
                let before = pending.len();
                let mut changed = false;
                for c in &pending {
                    let sig = self.signature();
                    if !self.step(c)? {
                        next.push(c.clone());
                    }
                    changed |= sig != self.signature();
                }
                pending = next;
                if pending.len() == before && !changed {
                    break;
                }
            }
            if pending.is_empty() || !self.hint(&pending)? {
                return Ok(());
            }
        }
    }

    fn signature(&mut self) -> usize {
        let n = self.store.parent.len();
        (0..n)
            .map(|i| {
                let r = self.store.find(i);
                r * 4 + self.store.shape[r].map_or(0, |_| 1)
            })
            .sum::<usize>()
            .wrapping_add(n)
    }
}

fn collect(f: &FunctionDef) -> (Collector, Vec<(String, Option<Node>)>) {
    let mut col = Collector {
        store: Store {
            parent: Vec::new(),
            shape: Vec::new(),
        },
        vars: BTreeMap::new(),
        read: BTreeSet::new(),
        constraints: Vec::new(),
        ctxs: Vec::new(),
        ret: 0,
    };
    col.ret = col.store.fresh();
    let mut params = Vec::new();
    for p in &f.params {
        let v = col.var(&p.name);
        let a = p.annot.and_then(|a| col.annot(a));
        if let Some(a) = a {
            let c = col.ctx(&p.name, &Expr::name(&p.name));
            col.eq(v, a, c);
        }
        params.push((p.name.clone(), a));
        // parameters count as read: their value comes from the caller
        col.read.insert(p.name.clone());
    }
    if let Some(r) = f.return_annot.and_then(|a| col.annot(a)) {
        let ret = col.ret;
        let c = col.ctx("return", &Expr::name("return"));
        col.eq(ret, r, c);
    }
    col.block(&f.body);
    (col, params)
}

/// Infers one type per variable of `f`.
pub fn infer_types(f: &FunctionDef) -> Result<TypeEnv, TypeError> {
    infer_with_order(f, false)
}

fn infer_with_order(f: &FunctionDef, reversed: bool) -> Result<TypeEnv, TypeError> {
    let (col, _) = collect(f);
    let mut constraints = col.constraints.clone();
    if reversed {
        constraints.reverse();
    }
    let mut solver = Solver {
        store: col.store.clone(),
        ctxs: &col.ctxs,
    };
    solver.run(&constraints)?;
    // anything still pending is re-checked once every type is known
    for c in &constraints {
        solver.step(c)?;
    }
    let mut env = TypeEnv::default();
    for (name, &node) in &col.vars {
        let t = match solver.store.resolve(node) {
            Some(t) => t,
            None if !col.read.contains(name) && solver.store.shape(node).is_none() => {
                env.warnings
                    .push(format!("'{name}' is never read and has no type; assuming int"));
                SubsetType::Int
            }
            None => return Err(TypeError::Unresolved { var: name.clone() }),
        };
        env.vars.insert(name.clone(), t);
    }
    for p in &f.params {
        let t = env.vars[&p.name];
        env.params.push((p.name.clone(), t));
    }
    env.return_type = solver.store.resolve(col.ret);
    Ok(env)
}

#[cfg(test)]
pub(crate) fn infer_types_reversed(f: &FunctionDef) -> Result<TypeEnv, TypeError> {
    infer_with_order(f, true)
}

//! Syntax tree for the supported Python subset.
//!
//! Nodes outside the subset that the parser can still delimit are kept as
//! `Opaque` placeholders carrying their raw source text. Strict parsing turns
//! them into errors; lenient parsing keeps them so the rest of a function can
//! still be analyzed.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    /// 1-based.
    pub line: u32,
    /// 0-based, in characters.
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        Self {
            line,
            column,
            length,
        }
    }

    /// Smallest span on `self.line` covering both spans. Spans on later lines
    /// are clamped to the end of the first line's extent.
    pub fn to(self, other: SourceSpan) -> SourceSpan {
        if other.line != self.line {
            return self;
        }
        let end = (other.column + other.length).max(self.column + self.length);
        SourceSpan::new(self.line, self.column, end - self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeAnnot {
    Int,
    Float,
    Bool,
    /// `list[T]` / `List[T]`; the element is validated to be scalar.
    List(ScalarAnnot),
    /// Only meaningful as a return annotation.
    NoneType,
    /// Anything the subset cannot express (`str`, `dict[...]`, nested lists).
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalarAnnot {
    Int,
    Float,
    Bool,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceUnit {
    pub functions: Vec<FunctionDef>,
    pub enclosing_class_name: Option<String>,
    pub source_text: String,
    pub path: String,
    /// Top-level items that are neither functions nor a class.
    pub stray: Vec<Stmt>,
}

impl SourceUnit {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub annot: Option<TypeAnnot>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub return_annot: Option<TypeAnnot>,
    pub body: Vec<Stmt>,
    pub span: SourceSpan,
    /// Set when the function was a method whose `self` parameter was dropped.
    pub self_dropped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign {
        target: LValue,
        value: Expr,
    },
    AugAssign {
        target: LValue,
        op: BinOp,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    ForRange {
        var: String,
        start: Expr,
        stop: Expr,
        step: Expr,
        body: Vec<Stmt>,
    },
    ForEach {
        var: String,
        iterable: Expr,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    /// `lst.append(e)`.
    Append {
        list: String,
        value: Expr,
    },
    /// Bare expression statement; only `lst.pop()` is in the subset.
    ExprStmt(Expr),
    Break,
    Continue,
    Opaque {
        construct: String,
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LValue {
    Name(String),
    Index { base: String, index: Expr },
}

impl LValue {
    pub fn root(&self) -> &str {
        match self {
            LValue::Name(n) => n,
            LValue::Index { base, .. } => base,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

impl Expr {
    pub fn new(kind: ExprKind, span: SourceSpan) -> Self {
        Self { kind, span }
    }

    /// Node without position information, used when synthesizing lowered
    /// statements.
    pub fn synth(kind: ExprKind) -> Self {
        Self {
            kind,
            span: SourceSpan::default(),
        }
    }

    pub fn name(n: &str) -> Self {
        Self::synth(ExprKind::Name(n.to_string()))
    }

    pub fn int(v: i64) -> Self {
        Self::synth(ExprKind::Int(v))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        Self::synth(ExprKind::Binary(op, Box::new(l), Box::new(r)))
    }

    pub fn compare(op: CmpOp, l: Expr, r: Expr) -> Self {
        Self::synth(ExprKind::Compare(op, Box::new(l), Box::new(r)))
    }

    /// Visits every sub-expression, including `self`, in evaluation order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Unary(_, e)
            | ExprKind::Len(e)
            | ExprKind::Abs(e)
            | ExprKind::Pop(e) => e.walk(f),
            ExprKind::Binary(_, l, r) | ExprKind::Compare(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            ExprKind::Subscript { base, index } => {
                base.walk(f);
                index.walk(f);
            }
            ExprKind::ListLit(items) => items.iter().for_each(|e| e.walk(f)),
            ExprKind::Int(_)
            | ExprKind::Float(_)
            | ExprKind::Bool(_)
            | ExprKind::Name(_)
            | ExprKind::Opaque { .. } => {}
        }
    }

    /// Names read anywhere inside the expression.
    pub fn names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let ExprKind::Name(n) = &e.kind {
                out.push(n.as_str());
            }
        });
        out
    }

    pub fn as_negative_literal(&self) -> Option<i64> {
        match self.kind {
            ExprKind::Int(v) if v < 0 => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Bool(bool),
    Name(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Subscript { base: Box<Expr>, index: Box<Expr> },
    Len(Box<Expr>),
    Abs(Box<Expr>),
    /// `base.pop()` used as a value or statement.
    Pop(Box<Expr>),
    ListLit(Vec<Expr>),
    Opaque { construct: String, text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

impl fmt::Display for TypeAnnot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeAnnot::Int => f.write_str("int"),
            TypeAnnot::Float => f.write_str("float"),
            TypeAnnot::Bool => f.write_str("bool"),
            TypeAnnot::List(e) => write!(f, "list[{e}]"),
            TypeAnnot::NoneType => f.write_str("None"),
            TypeAnnot::Other => f.write_str("?"),
        }
    }
}

impl fmt::Display for ScalarAnnot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalarAnnot::Int => "int",
            ScalarAnnot::Float => "float",
            ScalarAnnot::Bool => "bool",
            ScalarAnnot::Other => "?",
        })
    }
}

/// Visits statements depth-first in source order.
pub fn walk_stmts<'a>(body: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in body {
        f(s);
        match &s.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                walk_stmts(then_body, f);
                walk_stmts(else_body, f);
            }
            StmtKind::While { body, .. }
            | StmtKind::ForRange { body, .. }
            | StmtKind::ForEach { body, .. } => walk_stmts(body, f),
            _ => {}
        }
    }
}

/// Top-level expressions owned directly by a statement (not its children).
pub fn stmt_exprs(s: &Stmt) -> Vec<&Expr> {
    match &s.kind {
        StmtKind::Assign { target, value } | StmtKind::AugAssign { target, value, .. } => {
            let mut v = Vec::new();
            if let LValue::Index { index, .. } = target {
                v.push(index);
            }
            v.push(value);
            v
        }
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
        StmtKind::ForRange {
            start, stop, step, ..
        } => vec![start, stop, step],
        StmtKind::ForEach { iterable, .. } => vec![iterable],
        StmtKind::Return(Some(e)) | StmtKind::ExprStmt(e) => vec![e],
        StmtKind::Append { value, .. } => vec![value],
        _ => vec![],
    }
}

impl Expr {
    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Expr {
        let kind = match &self.kind {
            ExprKind::Unary(op, e) => ExprKind::Unary(*op, Box::new(e.without_spans())),
            ExprKind::Binary(op, l, r) => {
                ExprKind::Binary(*op, Box::new(l.without_spans()), Box::new(r.without_spans()))
            }
            ExprKind::Compare(op, l, r) => {
                ExprKind::Compare(*op, Box::new(l.without_spans()), Box::new(r.without_spans()))
            }
            ExprKind::Subscript { base, index } => ExprKind::Subscript {
                base: Box::new(base.without_spans()),
                index: Box::new(index.without_spans()),
            },
            ExprKind::Len(e) => ExprKind::Len(Box::new(e.without_spans())),
            ExprKind::Abs(e) => ExprKind::Abs(Box::new(e.without_spans())),
            ExprKind::Pop(e) => ExprKind::Pop(Box::new(e.without_spans())),
            ExprKind::ListLit(items) => {
                ExprKind::ListLit(items.iter().map(Expr::without_spans).collect())
            }
            other => other.clone(),
        };
        Expr::synth(kind)
    }
}

impl Stmt {
    pub fn without_spans(&self) -> Stmt {
        let body = |b: &[Stmt]| b.iter().map(Stmt::without_spans).collect::<Vec<_>>();
        let lv = |t: &LValue| match t {
            LValue::Name(n) => LValue::Name(n.clone()),
            LValue::Index { base, index } => LValue::Index {
                base: base.clone(),
                index: index.without_spans(),
            },
        };
        let kind = match &self.kind {
            StmtKind::Assign { target, value } => StmtKind::Assign {
                target: lv(target),
                value: value.without_spans(),
            },
            StmtKind::AugAssign { target, op, value } => StmtKind::AugAssign {
                target: lv(target),
                op: *op,
                value: value.without_spans(),
            },
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => StmtKind::If {
                cond: cond.without_spans(),
                then_body: body(then_body),
                else_body: body(else_body),
            },
            StmtKind::While { cond, body: b } => StmtKind::While {
                cond: cond.without_spans(),
                body: body(b),
            },
            StmtKind::ForRange {
                var,
                start,
                stop,
                step,
                body: b,
            } => StmtKind::ForRange {
                var: var.clone(),
                start: start.without_spans(),
                stop: stop.without_spans(),
                step: step.without_spans(),
                body: body(b),
            },
            StmtKind::ForEach {
                var,
                iterable,
                body: b,
            } => StmtKind::ForEach {
                var: var.clone(),
                iterable: iterable.without_spans(),
                body: body(b),
            },
            StmtKind::Return(e) => StmtKind::Return(e.as_ref().map(Expr::without_spans)),
            StmtKind::Append { list, value } => StmtKind::Append {
                list: list.clone(),
                value: value.without_spans(),
            },
            StmtKind::ExprStmt(e) => StmtKind::ExprStmt(e.without_spans()),
            other => other.clone(),
        };
        Stmt {
            kind,
            span: SourceSpan::default(),
        }
    }
}

impl SourceUnit {
    /// Functions, class name and stray items with spans erased; source text
    /// and path are dropped.
    pub fn structure(&self) -> (Vec<FunctionDef>, Option<String>, Vec<Stmt>) {
        let functions = self
            .functions
            .iter()
            .map(|f| FunctionDef {
                name: f.name.clone(),
                params: f
                    .params
                    .iter()
                    .map(|p| Param {
                        name: p.name.clone(),
                        annot: p.annot,
                        span: SourceSpan::default(),
                    })
                    .collect(),
                return_annot: f.return_annot,
                body: f.body.iter().map(Stmt::without_spans).collect(),
                span: SourceSpan::default(),
                self_dropped: f.self_dropped,
            })
            .collect();
        (
            functions,
            self.enclosing_class_name.clone(),
            self.stray.iter().map(Stmt::without_spans).collect(),
        )
    }
}

//! Source rendering. Output re-parses to a structurally identical tree
//! (spans aside).

use super::ast::*;

const INDENT: &str = "    ";

pub fn unit(u: &SourceUnit) -> String {
    let mut out = String::new();
    for s in &u.stray {
        stmt_into(&mut out, s, 0);
    }
    match &u.enclosing_class_name {
        Some(class) => {
            out.push_str(&format!("class {class}:\n"));
            for (i, f) in u.functions.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                function_into(&mut out, f, 1);
            }
        }
        None => {
            for (i, f) in u.functions.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                function_into(&mut out, f, 0);
            }
        }
    }
    out
}

pub fn function(f: &FunctionDef) -> String {
    let mut out = String::new();
    function_into(&mut out, f, 0);
    out
}

/// `def name(p: t, ...)`, the text of a path's Enter step.
pub fn signature(f: &FunctionDef) -> String {
    let params: Vec<String> = f.params.iter().map(param).collect();
    format!("def {}({})", f.name, params.join(", "))
}

fn param(p: &Param) -> String {
    match &p.annot {
        Some(a) => format!("{}: {}", p.name, annot(a)),
        None => p.name.clone(),
    }
}

fn annot(a: &TypeAnnot) -> String {
    match a {
        TypeAnnot::Other => "object".into(),
        TypeAnnot::List(ScalarAnnot::Other) => "list[object]".into(),
        other => other.to_string(),
    }
}

fn function_into(out: &mut String, f: &FunctionDef, depth: usize) {
    let pad = INDENT.repeat(depth);
    let mut params: Vec<String> = f.params.iter().map(param).collect();
    if f.self_dropped {
        params.insert(0, "self".into());
    }
    out.push_str(&format!("{pad}def {}({})", f.name, params.join(", ")));
    if let Some(r) = &f.return_annot {
        out.push_str(&format!(" -> {}", annot(r)));
    }
    out.push_str(":\n");
    block_into(out, &f.body, depth + 1);
}

fn block_into(out: &mut String, body: &[Stmt], depth: usize) {
    for s in body {
        stmt_into(out, s, depth);
    }
}

pub fn stmt(s: &Stmt) -> String {
    let mut out = String::new();
    stmt_into(&mut out, s, 0);
    out
}

fn stmt_into(out: &mut String, s: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    match &s.kind {
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            out.push_str(&format!("{pad}if {}:\n", expr(cond)));
            block_into(out, then_body, depth + 1);
            else_into(out, else_body, depth);
        }
        StmtKind::While { cond, body } => {
            out.push_str(&format!("{pad}while {}:\n", expr(cond)));
            block_into(out, body, depth + 1);
        }
        StmtKind::ForRange {
            var,
            start,
            stop,
            step,
            body,
        } => {
            out.push_str(&format!(
                "{pad}for {var} in {}:\n",
                range_call(start, stop, step)
            ));
            block_into(out, body, depth + 1);
        }
        StmtKind::ForEach {
            var,
            iterable,
            body,
        } => {
            out.push_str(&format!("{pad}for {var} in {}:\n", expr(iterable)));
            block_into(out, body, depth + 1);
        }
        _ => {
            out.push_str(&pad);
            out.push_str(&simple_stmt(s));
            out.push('\n');
        }
    }
}

fn else_into(out: &mut String, else_body: &[Stmt], depth: usize) {
    if else_body.is_empty() {
        return;
    }
    let pad = INDENT.repeat(depth);
    if let [Stmt {
        kind:
            StmtKind::If {
                cond,
                then_body,
                else_body: inner_else,
            },
        ..
    }] = else_body
    {
        out.push_str(&format!("{pad}elif {}:\n", expr(cond)));
        block_into(out, then_body, depth + 1);
        else_into(out, inner_else, depth);
    } else {
        out.push_str(&format!("{pad}else:\n"));
        block_into(out, else_body, depth + 1);
    }
}

pub fn range_call(start: &Expr, stop: &Expr, step: &Expr) -> String {
    let default_start = start.kind == ExprKind::Int(0);
    let default_step = step.kind == ExprKind::Int(1);
    if default_step && default_start {
        format!("range({})", expr(stop))
    } else if default_step {
        format!("range({}, {})", expr(start), expr(stop))
    } else {
        format!("range({}, {}, {})", expr(start), expr(stop), expr(step))
    }
}

/// One-line rendering of a non-compound statement. Compound statements render
/// as their header without the trailing colon.
pub fn simple_stmt(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Assign { target, value } => format!("{} = {}", lvalue(target), expr(value)),
        StmtKind::AugAssign { target, op, value } => {
            format!("{} {}= {}", lvalue(target), op.symbol(), expr(value))
        }
        StmtKind::Return(None) => "return".into(),
        StmtKind::Return(Some(e)) => format!("return {}", expr(e)),
        StmtKind::Append { list, value } => format!("{list}.append({})", expr(value)),
        StmtKind::ExprStmt(e) => expr(e),
        StmtKind::Break => "break".into(),
        StmtKind::Continue => "continue".into(),
        StmtKind::Opaque { text, .. } => text.clone(),
        StmtKind::If { cond, .. } => format!("if {}", expr(cond)),
        StmtKind::While { cond, .. } => format!("while {}", expr(cond)),
        StmtKind::ForRange {
            var,
            start,
            stop,
            step,
            ..
        } => format!("for {var} in {}", range_call(start, stop, step)),
        StmtKind::ForEach { var, iterable, .. } => format!("for {var} in {}", expr(iterable)),
    }
}

pub fn lvalue(t: &LValue) -> String {
    match t {
        LValue::Name(n) => n.clone(),
        LValue::Index { base, index } => format!("{base}[{}]", expr(index)),
    }
}

// Binding strength, loosest first.
const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_NOT: u8 = 3;
const P_CMP: u8 = 4;
const P_ADD: u8 = 5;
const P_MUL: u8 = 6;
const P_NEG: u8 = 7;
const P_POSTFIX: u8 = 8;
const P_ATOM: u8 = 9;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(BinOp::Or, ..) => P_OR,
        ExprKind::Binary(BinOp::And, ..) => P_AND,
        ExprKind::Unary(UnaryOp::Not, _) => P_NOT,
        ExprKind::Compare(..) => P_CMP,
        ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => P_ADD,
        ExprKind::Binary(..) => P_MUL,
        ExprKind::Unary(UnaryOp::Neg, _) => P_NEG,
        // negative literals bind like unary minus
        ExprKind::Int(v) if *v < 0 => P_NEG,
        ExprKind::Float(v) if v.is_sign_negative() => P_NEG,
        ExprKind::Subscript { .. } | ExprKind::Pop(_) => P_POSTFIX,
        // opaque text is arbitrary; keep it grouped
        ExprKind::Opaque { .. } => P_OR,
        _ => P_ATOM,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let s = expr(e);
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Float(v) => float(*v),
        ExprKind::Bool(b) => if *b { "True" } else { "False" }.into(),
        ExprKind::Name(n) => n.clone(),
        ExprKind::Unary(UnaryOp::Not, inner) => format!("not {}", wrap(inner, P_NOT)),
        ExprKind::Unary(UnaryOp::Neg, inner) => {
            // `-(2)` keeps the unary node distinct from the folded literal `-2`
            let needs_parens = matches!(
                inner.kind,
                ExprKind::Int(_) | ExprKind::Float(_) | ExprKind::Unary(UnaryOp::Neg, _)
            ) || prec(inner) < P_NEG;
            if needs_parens {
                format!("-({})", expr(inner))
            } else {
                format!("-{}", expr(inner))
            }
        }
        ExprKind::Binary(op, l, r) => {
            let p = prec(e);
            format!("{} {} {}", wrap(l, p), op.symbol(), wrap(r, p + 1))
        }
        ExprKind::Compare(op, l, r) => {
            format!("{} {} {}", wrap(l, P_ADD), op.symbol(), wrap(r, P_ADD))
        }
        ExprKind::Subscript { base, index } => {
            format!("{}[{}]", wrap(base, P_POSTFIX), expr(index))
        }
        ExprKind::Len(a) => format!("len({})", expr(a)),
        ExprKind::Abs(a) => format!("abs({})", expr(a)),
        ExprKind::Pop(b) => format!("{}.pop()", wrap(b, P_POSTFIX)),
        ExprKind::ListLit(items) => {
            let parts: Vec<String> = items.iter().map(expr).collect();
            format!("[{}]", parts.join(", "))
        }
        ExprKind::Opaque { text, .. } => text.clone(),
    }
}

/// Python-style float rendering: always carries a decimal point or exponent.
pub fn float(v: f64) -> String {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e16 {
        format!("{v:.1}")
    } else {
        let s = format!("{v}");
        if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
            s
        } else {
            format!("{s}.0")
        }
    }
}

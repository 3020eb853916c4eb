use std::collections::HashSet;

use super::ast::*;
use super::{Diagnostic, DiagnosticCode};

/// Hidden loop indices use this prefix; source names may not.
pub const HIDDEN_PREFIX: &str = "_idx_";

fn unsupported(message: impl Into<String>, span: SourceSpan) -> Diagnostic {
    Diagnostic {
        code: DiagnosticCode::UnsupportedConstruct,
        message: message.into(),
        span,
    }
}

fn violation(message: impl Into<String>, span: SourceSpan) -> Diagnostic {
    Diagnostic {
        code: DiagnosticCode::SubsetViolation,
        message: message.into(),
        span,
    }
}

/// Diagnostics for every node outside the subset plus semantic restrictions
/// the analysis relies on. Empty iff the unit is fully supported.
pub fn validate_subset(unit: &SourceUnit) -> Vec<Diagnostic> {
    let mut out = syntactic_diagnostics(unit);
    let mut seen = HashSet::new();
    for f in &unit.functions {
        if !seen.insert(f.name.as_str()) {
            out.push(violation(format!("duplicate function '{}'", f.name), f.span));
        }
        out.extend(semantic_diagnostics(f));
    }
    out.sort_by_key(|d| (d.span.line, d.span.column));
    out
}

/// Diagnostics for one function only, ignoring the rest of its unit.
pub fn validate_function(f: &FunctionDef) -> Vec<Diagnostic> {
    let mut out = function_syntax(f);
    out.extend(semantic_diagnostics(f));
    out.sort_by_key(|d| (d.span.line, d.span.column));
    out
}

/// Body constructs come before signature problems so that strict parsing
/// names the construct a reader would look for first.
pub(crate) fn syntactic_diagnostics(unit: &SourceUnit) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for s in &unit.stray {
        match &s.kind {
            StmtKind::Opaque { construct, .. } => out.push(unsupported(construct.clone(), s.span)),
            _ => out.push(unsupported("top-level statement", s.span)),
        }
    }
    for f in &unit.functions {
        out.extend(function_syntax(f));
    }
    out
}

fn function_syntax(f: &FunctionDef) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    walk_stmts(&f.body, &mut |s| {
        if let StmtKind::Opaque { construct, .. } = &s.kind {
            out.push(unsupported(construct.clone(), s.span));
        }
        for e in stmt_exprs(s) {
            e.walk(&mut |x| {
                if let ExprKind::Opaque { construct, text } = &x.kind {
                    // `self.x` and `self.m()` show up as opaque attribute use
                    let message = if f.self_dropped && text.starts_with("self.") {
                        "method uses self".to_string()
                    } else {
                        construct.clone()
                    };
                    out.push(unsupported(message, x.span));
                }
                if f.self_dropped {
                    if let ExprKind::Name(n) = &x.kind {
                        if n == "self" {
                            out.push(unsupported("method uses self", x.span));
                        }
                    }
                }
            });
        }
    });
    for p in &f.params {
        match p.annot {
            Some(TypeAnnot::Other) | Some(TypeAnnot::NoneType) => {
                out.push(unsupported("parameter type outside the subset", p.span))
            }
            Some(TypeAnnot::List(ScalarAnnot::Other)) => {
                out.push(unsupported("list of non-scalar elements", p.span))
            }
            _ => {}
        }
    }
    if matches!(f.return_annot, Some(TypeAnnot::List(ScalarAnnot::Other))) {
        out.push(unsupported("list of non-scalar elements", f.span));
    }
    out
}

fn semantic_diagnostics(f: &FunctionDef) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut names = HashSet::new();
    for p in &f.params {
        if !names.insert(p.name.as_str()) {
            out.push(violation(format!("duplicate parameter '{}'", p.name), p.span));
        }
    }
    let mut cx = Cx {
        out: &mut out,
        loop_vars: Vec::new(),
        all_loop_vars: HashSet::new(),
        loop_depth: 0,
    };
    walk_stmts(&f.body, &mut |s| match &s.kind {
        StmtKind::ForRange { var, .. } | StmtKind::ForEach { var, .. } => {
            cx.all_loop_vars.insert(var.clone());
        }
        _ => {}
    });
    for p in &f.params {
        if cx.all_loop_vars.contains(&p.name) {
            cx.out.push(violation(
                format!("loop variable '{}' shadows a parameter", p.name),
                p.span,
            ));
        }
    }
    cx.block(&f.body);
    out
}

struct Cx<'o> {
    out: &'o mut Vec<Diagnostic>,
    loop_vars: Vec<String>,
    all_loop_vars: HashSet<String>,
    loop_depth: usize,
}

impl Cx<'_> {
    fn block(&mut self, body: &[Stmt]) {
        for s in body {
            self.stmt(s);
        }
    }

    fn check_name(&mut self, n: &str, span: SourceSpan) {
        if n.starts_with(HIDDEN_PREFIX) {
            self.out.push(violation(
                format!("name '{n}' uses the reserved prefix '{HIDDEN_PREFIX}'"),
                span,
            ));
        }
        if self.all_loop_vars.contains(n) && !self.loop_vars.iter().any(|v| v == n) {
            self.out.push(violation(
                format!("loop variable '{n}' used outside its loop"),
                span,
            ));
        }
    }

    fn target(&mut self, t: &LValue, span: SourceSpan) {
        self.check_name(t.root(), span);
        if self.loop_vars.iter().any(|v| v == t.root()) {
            if let LValue::Name(_) = t {
                self.out.push(violation(
                    format!("assignment to loop variable '{}'", t.root()),
                    span,
                ));
            }
        }
        if let LValue::Index { index, .. } = t {
            self.expr(index, false);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Assign { target, value } => {
                self.target(target, s.span);
                self.expr(value, false);
            }
            StmtKind::AugAssign { target, op, value } => {
                self.target(target, s.span);
                self.expr(value, false);
                if *op == BinOp::Div && is_int_lit(value) {
                    self.out
                        .push(violation("'/' between ints; use '//'", value.span));
                }
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                self.expr(cond, false);
                self.block(then_body);
                self.block(else_body);
            }
            StmtKind::While { cond, body } => {
                self.expr(cond, false);
                self.loop_depth += 1;
                self.block(body);
                self.loop_depth -= 1;
            }
            StmtKind::ForRange {
                var,
                start,
                stop,
                step,
                body,
            } => {
                self.expr(start, false);
                self.expr(stop, false);
                self.expr(step, false);
                match step.kind {
                    ExprKind::Int(0) => self.out.push(violation("range step is zero", step.span)),
                    ExprKind::Int(_) => {}
                    _ => self
                        .out
                        .push(violation("range step must be an integer literal", step.span)),
                }
                if var.starts_with(HIDDEN_PREFIX) {
                    self.check_name(var, s.span);
                }
                let bound: HashSet<&str> = stop.names().into_iter().collect();
                let values = value_reads(stop);
                let mut mutated = Vec::new();
                walk_stmts(body, &mut |b| {
                    if let Some((root, elements_only)) = mutated_root(b) {
                        let reads = if elements_only { values.contains(root) } else { bound.contains(root) };
                        if reads {
                            mutated.push((root.to_string(), b.span));
                        }
                    }
                });
                for (root, span) in mutated {
                    self.out.push(violation(
                        format!("loop body changes '{root}', which the range bound reads"),
                        span,
                    ));
                }
                self.loop_vars.push(var.clone());
                self.loop_depth += 1;
                self.block(body);
                self.loop_depth -= 1;
                self.loop_vars.pop();
            }
            StmtKind::ForEach {
                var,
                iterable,
                body,
            } => {
                self.expr(iterable, false);
                match &iterable.kind {
                    ExprKind::Name(list) => {
                        let mut rebinds = Vec::new();
                        walk_stmts(body, &mut |b| {
                            if let StmtKind::Assign {
                                target: LValue::Name(t),
                                ..
                            } = &b.kind
                            {
                                if t == list {
                                    rebinds.push(b.span);
                                }
                            }
                        });
                        for span in rebinds {
                            self.out.push(violation(
                                format!("loop body rebinds the iterated list '{list}'"),
                                span,
                            ));
                        }
                    }
                    ExprKind::Opaque { .. } => {}
                    _ => self.out.push(violation(
                        "for-each loops must iterate over a list variable",
                        iterable.span,
                    )),
                }
                if var.starts_with(HIDDEN_PREFIX) {
                    self.check_name(var, s.span);
                }
                self.loop_vars.push(var.clone());
                self.loop_depth += 1;
                self.block(body);
                self.loop_depth -= 1;
                self.loop_vars.pop();
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr(e, false);
                }
            }
            StmtKind::Append { list, value } => {
                self.check_name(list, s.span);
                self.expr(value, false);
            }
            StmtKind::ExprStmt(e) => self.expr(e, false),
            StmtKind::Break | StmtKind::Continue => {
                if self.loop_depth == 0 {
                    self.out.push(violation("break or continue outside a loop", s.span));
                }
            }
            StmtKind::Opaque { .. } => {}
        }
    }

    fn expr(&mut self, e: &Expr, short_circuited: bool) {
        match &e.kind {
            ExprKind::Name(n) => self.check_name(n, e.span),
            ExprKind::Binary(op, l, r) => {
                self.expr(l, short_circuited);
                self.expr(r, short_circuited || op.is_logical());
                if *op == BinOp::Div && is_int_lit(l) && is_int_lit(r) {
                    self.out.push(violation("'/' between ints; use '//'", e.span));
                }
            }
            ExprKind::Unary(_, x) | ExprKind::Abs(x) => self.expr(x, short_circuited),
            ExprKind::Compare(_, l, r) => {
                self.expr(l, short_circuited);
                self.expr(r, short_circuited);
            }
            ExprKind::Subscript { base, index } => {
                if !matches!(base.kind, ExprKind::Name(_) | ExprKind::Opaque { .. }) {
                    self.out.push(violation(
                        "subscript base must be a list variable",
                        base.span,
                    ));
                }
                self.expr(base, short_circuited);
                self.expr(index, short_circuited);
            }
            ExprKind::Len(x) => {
                if !matches!(x.kind, ExprKind::Name(_) | ExprKind::Opaque { .. }) {
                    self.out
                        .push(violation("len() argument must be a list variable", x.span));
                }
                self.expr(x, short_circuited);
            }
            ExprKind::Pop(x) => {
                if !matches!(x.kind, ExprKind::Name(_) | ExprKind::Opaque { .. }) {
                    self.out
                        .push(violation("pop() receiver must be a list variable", x.span));
                }
                if short_circuited {
                    self.out.push(violation(
                        "pop() inside a short-circuited operand",
                        e.span,
                    ));
                }
                self.expr(x, short_circuited);
            }
            ExprKind::ListLit(items) => {
                for it in items {
                    if matches!(it.kind, ExprKind::ListLit(_)) {
                        self.out.push(violation("nested list literal", it.span));
                    }
                    self.expr(it, short_circuited);
                }
            }
            ExprKind::Int(_) | ExprKind::Float(_) | ExprKind::Bool(_) | ExprKind::Opaque { .. } => {}
        }
    }
}

fn is_int_lit(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Int(_))
}

/// Names an expression reads other than as the argument of `len`.
fn value_reads(e: &Expr) -> HashSet<&str> {
    let mut out = HashSet::new();
    fn go<'a>(e: &'a Expr, out: &mut HashSet<&'a str>) {
        match &e.kind {
            ExprKind::Len(inner) if matches!(inner.kind, ExprKind::Name(_)) => {}
            ExprKind::Name(n) => {
                out.insert(n.as_str());
            }
            ExprKind::Unary(_, a) | ExprKind::Len(a) | ExprKind::Abs(a) | ExprKind::Pop(a) => go(a, out),
            ExprKind::Binary(_, a, b) | ExprKind::Compare(_, a, b) => {
                go(a, out);
                go(b, out);
            }
            ExprKind::Subscript { base, index } => {
                go(base, out);
                go(index, out);
            }
            ExprKind::ListLit(items) => items.iter().for_each(|x| go(x, out)),
            ExprKind::Int(_) | ExprKind::Float(_) | ExprKind::Bool(_) | ExprKind::Opaque { .. } => {}
        }
    }
    go(e, &mut out);
    out
}

/// The variable a statement changes, if any, and whether only its elements
/// change.
fn mutated_root(s: &Stmt) -> Option<(&str, bool)> {
    match &s.kind {
        StmtKind::Assign { target, .. } | StmtKind::AugAssign { target, .. } => {
            Some((target.root(), matches!(target, LValue::Index { .. })))
        }
        StmtKind::Append { list, .. } => Some((list, false)),
        _ => {
            let mut root = None;
            for e in stmt_exprs(s) {
                e.walk(&mut |x| {
                    if let ExprKind::Pop(b) = &x.kind {
                        if let ExprKind::Name(n) = &b.kind {
                            root = Some(n.as_str());
                        }
                    }
                });
            }
            root.map(|r| (r, false))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_unit_lenient;
    use super::*;

    fn diags(src: &str) -> Vec<Diagnostic> {
        validate_subset(&parse_unit_lenient(src, "t.py").unwrap())
    }

    #[test]
    fn range_bound_mutation() {
        let src = "def f(nums: list[int]) -> int:\n    for i in range(len(nums)):\n        nums[i] = 0\n    for j in range(len(nums)):\n        nums.append(1)\n    for k in range(nums[0]):\n        nums[0] = 1\n    return 0\n";
        let lines: Vec<u32> = diags(src).iter().map(|d| d.span.line).collect();
        assert_eq!(lines, vec![5, 7]);
    }

    #[test]
    fn table_operations_are_clean() {
        let src = "\
def f(n1: List[int], lst: List[int], i: int, x: int, z: int) -> int:
    if len(n1) > 5:
        lst[i] = 2
    n1.append(x)
    n1.pop()
    if lst[-2] == z:
        return lst[i]
    return 0
";
        assert_eq!(diags(src), vec![]);
    }

    #[test]
    fn dictionary_is_flagged_with_span() {
        let d = diags("def f(x: int) -> int:\n    d = {1: x}\n    return x\n");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagnosticCode::UnsupportedConstruct);
        assert_eq!(d[0].message, "dictionary");
        assert_eq!(d[0].span.line, 2);
        assert_eq!(d[0].span.column, 8);
    }

    #[test]
    fn for_each_is_clean() {
        let src = "def f(nums: List[int]) -> int:\n    s = 0\n    for num in nums:\n        s += num\n    return s\n";
        assert_eq!(diags(src), vec![]);
    }

    #[test]
    fn semantic_violations() {
        let cases = [
            "def f(x: int) -> float:\n    return 1 / 2\n",
            "def f(n: int) -> int:\n    for i in range(0, n, n):\n        n = 1\n    return 0\n",
            "def f(n: int) -> int:\n    for i in range(n):\n        n = n - 1\n    return 0\n",
            "def f(n: int) -> int:\n    for i in range(n):\n        n = 0\n    return i\n",
            "def f(xs: List[int]) -> int:\n    for x in xs:\n        xs = [1]\n    return 0\n",
            "def f(_idx_a: int) -> int:\n    return _idx_a\n",
            "def f(x: int, x: int) -> int:\n    return x\n",
            "def f(xs: List[int]) -> bool:\n    return len(xs) > 0 and xs.pop() > 0\n",
            "def f(x: List[List[int]]) -> int:\n    return 0\n",
            "def f(x: int) -> int:\n    break\n",
        ];
        for src in cases {
            assert!(!diags(src).is_empty(), "expected a diagnostic for:\n{src}");
        }
    }

    #[test]
    fn duplicate_functions() {
        let d = diags("def f() -> int:\n    return 0\ndef f() -> int:\n    return 1\n");
        assert!(d.iter().any(|d| d.message.contains("duplicate function")));
    }
}

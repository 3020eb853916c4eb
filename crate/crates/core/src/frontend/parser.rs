//! Recursive-descent parser for the subset.
//!
//! Constructs outside the subset that can be delimited syntactically become
//! `Opaque` nodes instead of errors; `parse_unit` (strict) rejects them.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

pub(crate) struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

const SKIP_KEYWORDS: &[(&str, &str)] = &[
    ("import", "import"),
    ("from", "import"),
    ("try", "exception handling"),
    ("with", "with statement"),
    ("raise", "exception handling"),
    ("assert", "assert statement"),
    ("del", "del statement"),
    ("global", "global declaration"),
    ("nonlocal", "nonlocal declaration"),
    ("yield", "generator"),
    ("pass", "pass statement"),
    ("async", "async code"),
    ("match", "match statement"),
];

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str) -> Result<Self, ParseError> {
        Ok(Self {
            src,
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_n(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn tok(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        let t = self.tok();
        ParseError::Syntax {
            line: t.span.line,
            column: t.span.column,
            message: message.into(),
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<Token, ParseError> {
        if self.is_op(op) {
            Ok(self.advance())
        } else {
            Err(self.err_here(format!("expected '{op}', found {}", describe(self.peek()))))
        }
    }

    fn expect_name(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Name(n) if !is_reserved(&n) => {
                let t = self.advance();
                Ok((n, t.span))
            }
            other => Err(self.err_here(format!("expected identifier, found {}", describe(&other)))),
        }
    }

    fn expect_newline(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Newline => {
                self.advance();
                Ok(())
            }
            Tok::Eof | Tok::Dedent => Ok(()),
            other => Err(self.err_here(format!("expected end of line, found {}", describe(other)))),
        }
    }

    fn text(&self, start: usize, end: usize) -> String {
        self.src[start..end].trim().to_string()
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].end
        }
    }

    // ---------------------------------------------------------------- units

    pub(crate) fn unit(&mut self, path: &str) -> Result<SourceUnit, ParseError> {
        let mut functions = Vec::new();
        let mut class_name = None;
        let mut stray = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Newline => {
                    self.advance();
                }
                Tok::Name(n) if n == "def" => functions.push(self.function(false)?),
                Tok::Name(n) if n == "class" && class_name.is_none() => {
                    let (name, methods) = self.class()?;
                    class_name = Some(name);
                    functions.extend(methods.0);
                    stray.extend(methods.1);
                }
                _ => stray.push(self.stmt()?),
            }
        }
        Ok(SourceUnit {
            functions,
            enclosing_class_name: class_name,
            source_text: self.src.to_string(),
            path: path.to_string(),
            stray,
        })
    }

    #[allow(clippy::type_complexity)]
    fn class(&mut self) -> Result<(String, (Vec<FunctionDef>, Vec<Stmt>)), ParseError> {
        self.advance();
        let (name, _) = self.expect_name()?;
        if self.eat_op("(") {
            while !self.is_op(")") {
                if matches!(self.peek(), Tok::Eof) {
                    return Err(self.err_here("unterminated class bases"));
                }
                self.advance();
            }
            self.advance();
        }
        self.expect_op(":")?;
        self.expect_newline()?;
        if !matches!(self.peek(), Tok::Indent) {
            return Err(self.err_here("expected an indented class body"));
        }
        self.advance();
        let mut methods = Vec::new();
        let mut stray = Vec::new();
        while !matches!(self.peek(), Tok::Dedent | Tok::Eof) {
            if matches!(self.peek(), Tok::Newline) {
                self.advance();
            } else if self.is_kw("def") {
                methods.push(self.function(true)?);
            } else {
                stray.push(self.stmt()?);
            }
        }
        if matches!(self.peek(), Tok::Dedent) {
            self.advance();
        }
        Ok((name, (methods, stray)))
    }

    fn function(&mut self, in_class: bool) -> Result<FunctionDef, ParseError> {
        let def_tok = self.advance();
        let (name, _) = self.expect_name()?;
        self.expect_op("(")?;
        let mut params = Vec::new();
        while !self.is_op(")") {
            if self.is_op("*") || self.is_op("**") || self.is_op("/") {
                return Err(self.unsupported_here("variadic or positional-only parameters"));
            }
            let (pname, span) = self.expect_name()?;
            let annot = if self.eat_op(":") {
                Some(self.annotation()?)
            } else {
                None
            };
            if self.is_op("=") {
                return Err(self.unsupported_here("default parameter value"));
            }
            params.push(Param {
                name: pname,
                annot,
                span,
            });
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        let return_annot = if self.eat_op("->") {
            Some(self.annotation()?)
        } else {
            None
        };
        self.expect_op(":")?;
        let body = self.block()?;
        let mut self_dropped = false;
        if in_class && params.first().is_some_and(|p| p.name == "self") {
            params.remove(0);
            self_dropped = true;
        }
        Ok(FunctionDef {
            name,
            params,
            return_annot,
            body,
            span: def_tok.span,
            self_dropped,
        })
    }

    fn unsupported_here(&self, construct: &str) -> ParseError {
        ParseError::UnsupportedConstruct {
            construct: construct.to_string(),
            span: self.tok().span,
        }
    }

    fn annotation(&mut self) -> Result<TypeAnnot, ParseError> {
        let (name, _) = match self.peek().clone() {
            Tok::Name(n) if n == "None" => {
                let t = self.advance();
                (n, t.span)
            }
            _ => self.expect_name()?,
        };
        let base = match name.as_str() {
            "int" => TypeAnnot::Int,
            "float" => TypeAnnot::Float,
            "bool" => TypeAnnot::Bool,
            "None" => TypeAnnot::NoneType,
            "list" | "List" => {
                self.expect_op("[")?;
                let inner = self.annotation()?;
                self.expect_op("]")?;
                TypeAnnot::List(match inner {
                    TypeAnnot::Int => ScalarAnnot::Int,
                    TypeAnnot::Float => ScalarAnnot::Float,
                    TypeAnnot::Bool => ScalarAnnot::Bool,
                    _ => ScalarAnnot::Other,
                })
            }
            _ => {
                if self.eat_op("[") {
                    let mut depth = 1;
                    while depth > 0 {
                        match self.advance().tok {
                            Tok::Op("[") => depth += 1,
                            Tok::Op("]") => depth -= 1,
                            Tok::Eof => return Err(self.err_here("unterminated annotation")),
                            _ => {}
                        }
                    }
                }
                TypeAnnot::Other
            }
        };
        Ok(base)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        if matches!(self.peek(), Tok::Newline) {
            self.advance();
            if !matches!(self.peek(), Tok::Indent) {
                return Err(self.err_here("expected an indented block"));
            }
            self.advance();
            let mut body = Vec::new();
            while !matches!(self.peek(), Tok::Dedent | Tok::Eof) {
                if matches!(self.peek(), Tok::Newline) {
                    self.advance();
                    continue;
                }
                body.push(self.stmt()?);
            }
            if matches!(self.peek(), Tok::Dedent) {
                self.advance();
            }
            if body.is_empty() {
                return Err(self.err_here("empty block"));
            }
            Ok(body)
        } else {
            // `if x: return 1` on one line.
            Ok(vec![self.stmt()?])
        }
    }

    /// Consumes the rest of the current statement, including any indented
    /// block and follow-on clauses (`except`, `else`, ...).
    fn skip_statement(&mut self, start_tok: usize) -> Stmt {
        let first = self.toks[start_tok].clone();
        loop {
            self.skip_line();
            if matches!(self.peek(), Tok::Indent) {
                self.skip_indented();
            }
            let continues = matches!(self.peek(), Tok::Name(n)
                if matches!(n.as_str(), "except" | "finally" | "else" | "elif"));
            if !continues {
                break;
            }
        }
        let construct = match &first.tok {
            Tok::Name(n) => SKIP_KEYWORDS
                .iter()
                .find(|(k, _)| k == n)
                .map(|(_, c)| c.to_string())
                .unwrap_or_else(|| match n.as_str() {
                    "def" => "nested function definition".into(),
                    "class" => "nested class definition".into(),
                    _ => format!("statement '{n}'"),
                }),
            _ => "statement".into(),
        };
        let end = self.prev_end();
        let text = self.text(first.start, end);
        let first_line = text.lines().next().unwrap_or("").to_string();
        Stmt {
            kind: StmtKind::Opaque {
                construct,
                text: first_line,
            },
            span: first.span,
        }
    }

    fn skip_line(&mut self) {
        loop {
            match self.peek() {
                Tok::Newline => {
                    self.advance();
                    return;
                }
                Tok::Eof | Tok::Dedent | Tok::Indent => return,
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn skip_indented(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Indent => depth += 1,
                Tok::Dedent => {
                    depth -= 1;
                    if depth == 0 {
                        self.advance();
                        return;
                    }
                }
                Tok::Eof => return,
                _ => {}
            }
            self.advance();
        }
    }

    // ----------------------------------------------------------- statements

    pub(crate) fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let start_tok = self.pos;
        let span = self.tok().span;
        if let Tok::Name(kw) = self.peek().clone() {
            match kw.as_str() {
                "if" => return self.if_stmt(),
                "while" => {
                    self.advance();
                    let cond = self.expr()?;
                    self.expect_op(":")?;
                    let body = self.block()?;
                    if self.is_kw("else") {
                        return Ok(self.skip_trailing_else(start_tok, "while-else"));
                    }
                    return Ok(Stmt {
                        kind: StmtKind::While { cond, body },
                        span,
                    });
                }
                "for" => return self.for_stmt(),
                "return" => {
                    self.advance();
                    let value = if matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::Dedent) {
                        None
                    } else {
                        Some(self.expr()?)
                    };
                    if self.is_op(",") {
                        return Ok(self.opaque_rest(start_tok, "tuple"));
                    }
                    self.end_simple(start_tok)?;
                    return Ok(Stmt {
                        kind: StmtKind::Return(value),
                        span,
                    });
                }
                "break" | "continue" => {
                    self.advance();
                    self.end_simple(start_tok)?;
                    let kind = if kw == "break" {
                        StmtKind::Break
                    } else {
                        StmtKind::Continue
                    };
                    return Ok(Stmt { kind, span });
                }
                "def" | "class" => return Ok(self.skip_statement(start_tok)),
                k if SKIP_KEYWORDS.iter().any(|(s, _)| *s == k) => {
                    return Ok(self.skip_statement(start_tok))
                }
                _ => {}
            }
        }
        self.simple_stmt()
    }

    fn skip_trailing_else(&mut self, start_tok: usize, construct: &str) -> Stmt {
        // the else clause and its block
        self.skip_line();
        if matches!(self.peek(), Tok::Indent) {
            self.skip_indented();
        }
        let first = self.toks[start_tok].clone();
        let end = self.prev_end();
        let text = self.text(first.start, end);
        Stmt {
            kind: StmtKind::Opaque {
                construct: construct.to_string(),
                text: text.lines().next().unwrap_or("").to_string(),
            },
            span: first.span,
        }
    }

    /// Expects the end of a simple statement; a `;` makes it opaque.
    fn end_simple(&mut self, _start_tok: usize) -> Result<(), ParseError> {
        if self.is_op(";") {
            return Err(self.unsupported_here("multiple statements on one line"));
        }
        self.expect_newline()
    }

    fn opaque_rest(&mut self, start_tok: usize, construct: &str) -> Stmt {
        let first = self.toks[start_tok].clone();
        self.skip_line();
        let end = self.prev_end();
        Stmt {
            kind: StmtKind::Opaque {
                construct: construct.to_string(),
                text: self.text(first.start, end),
            },
            span: first.span,
        }
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.advance().span;
        let cond = self.expr()?;
        self.expect_op(":")?;
        let then_body = self.block()?;
        let else_body = if self.is_kw("elif") {
            vec![self.if_stmt()?]
        } else if self.is_kw("else") {
            self.advance();
            self.expect_op(":")?;
            self.block()?
        } else {
            Vec::new()
        };
        Ok(Stmt {
            kind: StmtKind::If {
                cond,
                then_body,
                else_body,
            },
            span,
        })
    }

    fn for_stmt(&mut self) -> Result<Stmt, ParseError> {
        let start_tok = self.pos;
        let span = self.advance().span;
        let (var, _) = match self.expect_name() {
            Ok(v) => v,
            Err(_) => return Ok(self.skip_statement_as(start_tok, "for loop target")),
        };
        if self.is_op(",") {
            return Ok(self.skip_statement_as(start_tok, "tuple unpacking in for loop"));
        }
        if !self.is_kw("in") {
            return Err(self.err_here("expected 'in'"));
        }
        self.advance();
        let is_range = matches!(self.peek(), Tok::Name(n) if n == "range")
            && matches!(self.peek_n(1), Tok::Op("("));
        let kind_is_range;
        let mut args = Vec::new();
        let iterable;
        if is_range {
            let range_tok = self.advance();
            self.expect_op("(")?;
            while !self.is_op(")") {
                args.push(self.expr()?);
                if !self.eat_op(",") {
                    break;
                }
            }
            self.expect_op(")")?;
            kind_is_range = true;
            iterable = Expr::new(
                ExprKind::Opaque {
                    construct: "range".into(),
                    text: String::new(),
                },
                range_tok.span,
            );
            if args.is_empty() || args.len() > 3 {
                return Err(ParseError::UnsupportedConstruct {
                    construct: format!("range with {} arguments", args.len()),
                    span: range_tok.span,
                });
            }
        } else {
            iterable = self.expr()?;
            kind_is_range = false;
        }
        self.expect_op(":")?;
        let body = self.block()?;
        if self.is_kw("else") {
            return Ok(self.skip_trailing_else(start_tok, "for-else"));
        }
        let kind = if kind_is_range {
            let (start, stop, step) = match args.len() {
                1 => (Expr::int(0), args.remove(0), Expr::int(1)),
                2 => {
                    let start = args.remove(0);
                    (start, args.remove(0), Expr::int(1))
                }
                _ => {
                    let start = args.remove(0);
                    let stop = args.remove(0);
                    (start, stop, args.remove(0))
                }
            };
            StmtKind::ForRange {
                var,
                start,
                stop,
                step,
                body,
            }
        } else {
            StmtKind::ForEach {
                var,
                iterable,
                body,
            }
        };
        Ok(Stmt { kind, span })
    }

    fn skip_statement_as(&mut self, start_tok: usize, construct: &str) -> Stmt {
        let mut s = self.skip_statement(start_tok);
        if let StmtKind::Opaque { construct: c, .. } = &mut s.kind {
            *c = construct.to_string();
        }
        s
    }

    fn simple_stmt(&mut self) -> Result<Stmt, ParseError> {
        let start_tok = self.pos;
        let span = self.tok().span;

        // lst.append(e)
        if let (Tok::Name(list), Tok::Op("."), Tok::Name(m), Tok::Op("(")) = (
            self.peek().clone(),
            self.peek_n(1).clone(),
            self.peek_n(2).clone(),
            self.peek_n(3).clone(),
        ) {
            if m == "append" && !is_reserved(&list) {
                self.pos += 4;
                if self.is_op(")") {
                    return Ok(self.opaque_rest(start_tok, "append without argument"));
                }
                let value = self.expr()?;
                if !self.eat_op(")") {
                    return Ok(self.opaque_rest(start_tok, "append with multiple arguments"));
                }
                if !matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::Dedent) {
                    self.pos = start_tok;
                    return Ok(self.opaque_rest(start_tok, "append used as a value"));
                }
                self.end_simple(start_tok)?;
                return Ok(Stmt {
                    kind: StmtKind::Append { list, value },
                    span,
                });
            }
        }

        let lhs = self.expr()?;
        if self.is_op(",") {
            return Ok(self.opaque_rest(start_tok, "multiple assignment targets"));
        }
        if self.is_op(":") {
            return Ok(self.opaque_rest(start_tok, "annotated assignment"));
        }
        if self.eat_op("=") {
            let value = self.expr()?;
            if self.is_op("=") || self.is_op(",") {
                return Ok(self.opaque_rest(start_tok, "multiple assignment targets"));
            }
            let Some(target) = to_lvalue(&lhs) else {
                return Ok(self.opaque_rest_from(start_tok, "assignment target"));
            };
            self.end_simple(start_tok)?;
            return Ok(Stmt {
                kind: StmtKind::Assign { target, value },
                span,
            });
        }
        let aug = match self.peek() {
            Tok::Op("+=") => Some(BinOp::Add),
            Tok::Op("-=") => Some(BinOp::Sub),
            Tok::Op("*=") => Some(BinOp::Mul),
            Tok::Op("/=") => Some(BinOp::Div),
            Tok::Op("//=") => Some(BinOp::FloorDiv),
            Tok::Op("%=") => Some(BinOp::Mod),
            Tok::Op("**=") => return Ok(self.opaque_rest(start_tok, "power operator")),
            _ => None,
        };
        if let Some(op) = aug {
            self.advance();
            let value = self.expr()?;
            let Some(target) = to_lvalue(&lhs) else {
                return Ok(self.opaque_rest_from(start_tok, "assignment target"));
            };
            self.end_simple(start_tok)?;
            return Ok(Stmt {
                kind: StmtKind::AugAssign { target, op, value },
                span,
            });
        }
        self.end_simple(start_tok)?;
        let kind = match &lhs.kind {
            ExprKind::Pop(_) => StmtKind::ExprStmt(lhs),
            ExprKind::Opaque { construct, text } => StmtKind::Opaque {
                construct: construct.clone(),
                text: text.clone(),
            },
            _ => {
                let end = self.prev_end();
                StmtKind::Opaque {
                    construct: "expression statement".into(),
                    text: self.text(self.toks[start_tok].start, end),
                }
            }
        };
        Ok(Stmt { kind, span })
    }

    fn opaque_rest_from(&mut self, start_tok: usize, construct: &str) -> Stmt {
        self.opaque_rest(start_tok, construct)
    }

    // ---------------------------------------------------------- expressions

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        if self.is_kw("lambda") {
            let start = self.tok().clone();
            self.advance();
            while !self.is_op(":") {
                if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                    return Err(self.err_here("expected ':' in lambda"));
                }
                self.advance();
            }
            self.advance();
            self.expr()?;
            return Ok(self.opaque_from(&start, "lambda"));
        }
        let start = self.tok().clone();
        let e = self.or_expr()?;
        if self.is_kw("if") {
            self.advance();
            self.or_expr()?;
            if !self.is_kw("else") {
                return Err(self.err_here("expected 'else' in conditional expression"));
            }
            self.advance();
            self.expr()?;
            return Ok(self.opaque_from(&start, "conditional expression"));
        }
        Ok(e)
    }

    fn opaque_from(&self, start: &Token, construct: &str) -> Expr {
        let end = self.prev_end();
        let text = self.text(start.start, end);
        let mut span = start.span;
        let end_tok = &self.toks[self.pos.saturating_sub(1)];
        if end_tok.span.line == span.line {
            span = span.to(end_tok.span);
        }
        Expr::new(
            ExprKind::Opaque {
                construct: construct.to_string(),
                text,
            },
            span,
        )
    }

    fn span_from(&self, start: &Token) -> SourceSpan {
        let end_tok = &self.toks[self.pos.saturating_sub(1)];
        start.span.to(end_tok.span)
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok().clone();
        let mut lhs = self.and_expr()?;
        while self.is_kw("or") {
            self.advance();
            let rhs = self.and_expr()?;
            lhs = Expr::new(
                ExprKind::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs)),
                self.span_from(&start),
            );
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok().clone();
        let mut lhs = self.not_expr()?;
        while self.is_kw("and") {
            self.advance();
            let rhs = self.not_expr()?;
            lhs = Expr::new(
                ExprKind::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)),
                self.span_from(&start),
            );
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.is_kw("not") {
            let start = self.advance();
            let inner = self.not_expr()?;
            return Ok(Expr::new(
                ExprKind::Unary(UnaryOp::Not, Box::new(inner)),
                self.span_from(&start),
            ));
        }
        self.comparison()
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek() {
            Tok::Op("==") => Some(CmpOp::Eq),
            Tok::Op("!=") => Some(CmpOp::Ne),
            Tok::Op("<") => Some(CmpOp::Lt),
            Tok::Op("<=") => Some(CmpOp::Le),
            Tok::Op(">") => Some(CmpOp::Gt),
            Tok::Op(">=") => Some(CmpOp::Ge),
            _ => None,
        }
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok().clone();
        let first = self.bitwise()?;
        let mut operands = vec![first];
        let mut ops = Vec::new();
        loop {
            if let Some(op) = self.cmp_op() {
                self.advance();
                ops.push(op);
                operands.push(self.bitwise()?);
            } else if self.is_kw("in")
                || self.is_kw("is")
                || (self.is_kw("not") && matches!(self.peek_n(1), Tok::Name(n) if n == "in"))
            {
                let construct = if self.is_kw("is") {
                    "identity test"
                } else {
                    "membership test"
                };
                while self.is_kw("not") || self.is_kw("in") || self.is_kw("is") {
                    self.advance();
                }
                self.bitwise()?;
                return Ok(self.opaque_from(&start, construct));
            } else {
                break;
            }
        }
        if ops.is_empty() {
            return Ok(operands.pop().unwrap());
        }
        let span = self.span_from(&start);
        let mut conj: Option<Expr> = None;
        for (i, op) in ops.iter().enumerate() {
            let cmp = Expr::new(
                ExprKind::Compare(
                    *op,
                    Box::new(operands[i].clone()),
                    Box::new(operands[i + 1].clone()),
                ),
                span,
            );
            conj = Some(match conj {
                None => cmp,
                Some(prev) => Expr::new(
                    ExprKind::Binary(BinOp::And, Box::new(prev), Box::new(cmp)),
                    span,
                ),
            });
        }
        Ok(conj.unwrap())
    }

    fn bitwise(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok().clone();
        let lhs = self.arith()?;
        if matches!(self.peek(), Tok::Op("|" | "&" | "^" | "<<" | ">>")) {
            while matches!(self.peek(), Tok::Op("|" | "&" | "^" | "<<" | ">>")) {
                self.advance();
                self.arith()?;
            }
            return Ok(self.opaque_from(&start, "bitwise operator"));
        }
        Ok(lhs)
    }

    fn arith(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok().clone();
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op("+") => BinOp::Add,
                Tok::Op("-") => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::new(
                ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                self.span_from(&start),
            );
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok().clone();
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op("*") => BinOp::Mul,
                Tok::Op("/") => BinOp::Div,
                Tok::Op("//") => BinOp::FloorDiv,
                Tok::Op("%") => BinOp::Mod,
                Tok::Op("@") => {
                    self.advance();
                    self.factor()?;
                    lhs = self.opaque_from(&start, "matrix multiplication");
                    continue;
                }
                _ => break,
            };
            self.advance();
            let rhs = self.factor()?;
            lhs = Expr::new(
                ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                self.span_from(&start),
            );
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok().clone();
        match self.peek() {
            Tok::Op("-") => {
                self.advance();
                // fold `-<literal>` into the literal itself
                match self.peek().clone() {
                    Tok::Int(v) if !matches!(self.peek_n(1), Tok::Op("**" | "[" | "(" | ".")) => {
                        self.advance();
                        return Ok(Expr::new(ExprKind::Int(-v), self.span_from(&start)));
                    }
                    Tok::Float(v) if !matches!(self.peek_n(1), Tok::Op("**" | "[" | "(" | ".")) => {
                        self.advance();
                        return Ok(Expr::new(ExprKind::Float(-v), self.span_from(&start)));
                    }
                    _ => {}
                }
                let inner = self.factor()?;
                Ok(Expr::new(
                    ExprKind::Unary(UnaryOp::Neg, Box::new(inner)),
                    self.span_from(&start),
                ))
            }
            Tok::Op("+") => {
                self.advance();
                self.factor()?;
                Ok(self.opaque_from(&start, "unary plus"))
            }
            Tok::Op("~") => {
                self.advance();
                self.factor()?;
                Ok(self.opaque_from(&start, "bitwise operator"))
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok().clone();
        let base = self.postfix()?;
        if self.eat_op("**") {
            self.factor()?;
            return Ok(self.opaque_from(&start, "power operator"));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok().clone();
        let mut e = self.atom()?;
        loop {
            if self.is_op("[") {
                self.advance();
                if self.is_op(":") {
                    self.skip_to_close("]")?;
                    e = self.opaque_from(&start, "slice");
                    continue;
                }
                let index = self.expr()?;
                if self.is_op(":") || self.is_op(",") {
                    let construct = if self.is_op(":") { "slice" } else { "tuple index" };
                    self.skip_to_close("]")?;
                    e = self.opaque_from(&start, construct);
                    continue;
                }
                self.expect_op("]")?;
                e = Expr::new(
                    ExprKind::Subscript {
                        base: Box::new(e),
                        index: Box::new(index),
                    },
                    self.span_from(&start),
                );
            } else if self.is_op("(") {
                self.advance();
                let mut args = Vec::new();
                let mut odd_args = false;
                while !self.is_op(")") {
                    if self.is_op("*") || self.is_op("**") {
                        odd_args = true;
                        self.advance();
                    }
                    if matches!(self.peek(), Tok::Name(_)) && matches!(self.peek_n(1), Tok::Op("="))
                    {
                        odd_args = true;
                        self.advance();
                        self.advance();
                    }
                    args.push(self.expr()?);
                    if self.is_kw("for") {
                        self.skip_to_close(")")?;
                        odd_args = true;
                        self.pos -= 1;
                        break;
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op(")")?;
                e = self.call(&start, e, args, odd_args);
            } else if self.is_op(".") {
                self.advance();
                let (attr, _) = self.expect_name()?;
                if self.is_op("(") {
                    self.advance();
                    let mut nargs = 0;
                    while !self.is_op(")") {
                        self.expr()?;
                        nargs += 1;
                        if !self.eat_op(",") {
                            break;
                        }
                    }
                    self.expect_op(")")?;
                    e = match (attr.as_str(), nargs) {
                        ("pop", 0) => Expr::new(ExprKind::Pop(Box::new(e)), self.span_from(&start)),
                        ("pop", _) => self.opaque_from(&start, "pop with an index"),
                        ("append", _) => self.opaque_from(&start, "append used as a value"),
                        _ => self.opaque_from(&start, &format!("method call '.{attr}()'")),
                    };
                } else {
                    e = self.opaque_from(&start, "attribute access");
                }
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn call(&self, start: &Token, callee: Expr, mut args: Vec<Expr>, odd_args: bool) -> Expr {
        let span = self.span_from(start);
        let ExprKind::Name(name) = &callee.kind else {
            return self.opaque_from(start, "call of a computed function");
        };
        if odd_args {
            return self.opaque_from(start, &format!("call to '{name}'"));
        }
        match (name.as_str(), args.len()) {
            ("len", 1) => Expr::new(ExprKind::Len(Box::new(args.remove(0))), span),
            ("abs", 1) => Expr::new(ExprKind::Abs(Box::new(args.remove(0))), span),
            ("str", _) => self.opaque_from(start, "str conversion"),
            ("int" | "float" | "bool", _) => self.opaque_from(start, "type conversion"),
            ("range", _) => self.opaque_from(start, "range outside a for loop"),
            _ => self.opaque_from(start, &format!("call to '{name}'")),
        }
    }

    fn skip_to_close(&mut self, close: &str) -> Result<(), ParseError> {
        let mut depth = 1usize;
        loop {
            match self.peek() {
                Tok::Op("(" | "[" | "{") => depth += 1,
                Tok::Op(o @ (")" | "]" | "}")) => {
                    depth -= 1;
                    if depth == 0 {
                        if *o != close {
                            return Err(self.err_here(format!("expected '{close}'")));
                        }
                        self.advance();
                        return Ok(());
                    }
                }
                Tok::Eof => return Err(self.err_here(format!("expected '{close}'"))),
                _ => {}
            }
            self.advance();
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok().clone();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Expr::new(ExprKind::Int(v), start.span))
            }
            Tok::Float(v) => {
                self.advance();
                Ok(Expr::new(ExprKind::Float(v), start.span))
            }
            Tok::Str => {
                while matches!(self.peek(), Tok::Str) {
                    self.advance();
                }
                Ok(self.opaque_from(&start, "string literal"))
            }
            Tok::Name(n) => match n.as_str() {
                "True" | "False" => {
                    self.advance();
                    Ok(Expr::new(ExprKind::Bool(n == "True"), start.span))
                }
                "None" => {
                    self.advance();
                    Ok(self.opaque_from(&start, "None"))
                }
                "await" => {
                    self.advance();
                    self.postfix()?;
                    Ok(self.opaque_from(&start, "async code"))
                }
                _ if is_reserved(&n) => Err(self.err_here(format!("unexpected keyword '{n}'"))),
                _ => {
                    self.advance();
                    Ok(Expr::new(ExprKind::Name(n), start.span))
                }
            },
            Tok::Op("(") => {
                self.advance();
                if self.is_op(")") {
                    self.advance();
                    return Ok(self.opaque_from(&start, "tuple"));
                }
                let inner = self.expr()?;
                if self.is_kw("for") {
                    self.skip_to_close(")")?;
                    return Ok(self.opaque_from(&start, "generator expression"));
                }
                if self.is_op(",") {
                    self.skip_to_close(")")?;
                    return Ok(self.opaque_from(&start, "tuple"));
                }
                self.expect_op(")")?;
                Ok(inner)
            }
            Tok::Op("[") => {
                self.advance();
                let mut items = Vec::new();
                while !self.is_op("]") {
                    items.push(self.expr()?);
                    if self.is_kw("for") {
                        self.skip_to_close("]")?;
                        return Ok(self.opaque_from(&start, "list comprehension"));
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op("]")?;
                Ok(Expr::new(ExprKind::ListLit(items), self.span_from(&start)))
            }
            Tok::Op("{") => {
                self.advance();
                let is_dict = self.is_op("}") || {
                    // look for ':' at depth 1
                    let mut depth = 0usize;
                    let mut i = self.pos;
                    let mut found = false;
                    while i < self.toks.len() {
                        match &self.toks[i].tok {
                            Tok::Op("(" | "[" | "{") => depth += 1,
                            Tok::Op(")" | "]") => depth = depth.saturating_sub(1),
                            Tok::Op("}") if depth == 0 => break,
                            Tok::Op("}") => depth -= 1,
                            Tok::Op(":") if depth == 0 => {
                                found = true;
                                break;
                            }
                            Tok::Eof => break,
                            _ => {}
                        }
                        i += 1;
                    }
                    found
                };
                self.skip_to_close("}")?;
                Ok(self.opaque_from(&start, if is_dict { "dictionary" } else { "set" }))
            }
            other => Err(self.err_here(format!("unexpected {}", describe(&other)))),
        }
    }

    pub(crate) fn at_eof(&mut self) -> bool {
        while matches!(self.peek(), Tok::Newline) {
            self.advance();
        }
        matches!(self.peek(), Tok::Eof)
    }
}

fn to_lvalue(e: &Expr) -> Option<LValue> {
    match &e.kind {
        ExprKind::Name(n) => Some(LValue::Name(n.clone())),
        ExprKind::Subscript { base, index } => match &base.kind {
            ExprKind::Name(b) => Some(LValue::Index {
                base: b.clone(),
                index: (**index).clone(),
            }),
            _ => None,
        },
        _ => None,
    }
}

pub(crate) fn is_reserved(word: &str) -> bool {
    matches!(
        word,
        "False"
            | "None"
            | "True"
            | "and"
            | "as"
            | "assert"
            | "async"
            | "await"
            | "break"
            | "class"
            | "continue"
            | "def"
            | "del"
            | "elif"
            | "else"
            | "except"
            | "finally"
            | "for"
            | "from"
            | "global"
            | "if"
            | "import"
            | "in"
            | "is"
            | "lambda"
            | "nonlocal"
            | "not"
            | "or"
            | "pass"
            | "raise"
            | "return"
            | "try"
            | "while"
            | "with"
            | "yield"
    )
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) => format!("'{n}'"),
        Tok::Int(v) => format!("'{v}'"),
        Tok::Float(v) => format!("'{v}'"),
        Tok::Str => "string".into(),
        Tok::Op(o) => format!("'{o}'"),
        Tok::Newline => "end of line".into(),
        Tok::Indent => "indent".into(),
        Tok::Dedent => "dedent".into(),
        Tok::Eof => "end of input".into(),
    }
}

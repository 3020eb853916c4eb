//! Source frontend: tokenizer, parser, pretty-printer and subset checks.

pub mod ast;
mod lexer;
mod parser;
pub mod pretty;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::*;
pub use validate::{validate_function, validate_subset, HIDDEN_PREFIX};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("{}:{}: unsupported construct: {construct}", span.line, span.column)]
    UnsupportedConstruct { construct: String, span: SourceSpan },
}

impl ParseError {
    pub fn line(&self) -> u32 {
        match self {
            ParseError::Syntax { line, .. } => *line,
            ParseError::UnsupportedConstruct { span, .. } => span.line,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        match self {
            ParseError::Syntax {
                line,
                column,
                message,
            } => Diagnostic {
                code: DiagnosticCode::SyntaxError,
                message: message.clone(),
                span: SourceSpan::new(*line, *column, 1),
            },
            ParseError::UnsupportedConstruct { construct, span } => Diagnostic {
                code: DiagnosticCode::UnsupportedConstruct,
                message: construct.clone(),
                span: *span,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagnosticCode {
    SyntaxError,
    /// Syntax outside the subset (dictionaries, lambdas, strings, ...).
    UnsupportedConstruct,
    /// In-subset syntax used in a way the analysis cannot model.
    SubsetViolation,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::SyntaxError => "syntax-error",
            DiagnosticCode::UnsupportedConstruct => "unsupported-construct",
            DiagnosticCode::SubsetViolation => "subset-violation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    /// `path:line:col: code: message`
    pub fn render(&self, path: &str) -> String {
        format!(
            "{}:{}:{}: {}: {}",
            path,
            self.span.line,
            self.span.column,
            self.code.as_str(),
            self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.span.line,
            self.span.column,
            self.code.as_str(),
            self.message
        )
    }
}

/// Parses `source`, rejecting the first construct outside the subset.
pub fn parse_unit(source: &str, path: &str) -> Result<SourceUnit, ParseError> {
    let unit = parse_unit_lenient(source, path)?;
    if let Some(d) = validate::syntactic_diagnostics(&unit).into_iter().next() {
        return Err(ParseError::UnsupportedConstruct {
            construct: d.message,
            span: d.span,
        });
    }
    Ok(unit)
}

/// Parses `source`, keeping out-of-subset constructs as `Opaque` nodes.
/// Only malformed input is an error.
pub fn parse_unit_lenient(source: &str, path: &str) -> Result<SourceUnit, ParseError> {
    parser::Parser::new(source)?.unit(path)
}

/// Parses a single expression such as a path-step condition.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = parser::Parser::new(text)?;
    let e = p.expr()?;
    if !p.at_eof() {
        return Err(ParseError::Syntax {
            line: 1,
            column: 0,
            message: format!("trailing input after expression in {text:?}"),
        });
    }
    Ok(e)
}

/// Parses a single simple statement such as a path-step expression.
pub fn parse_stmt(text: &str) -> Result<Stmt, ParseError> {
    let mut p = parser::Parser::new(text)?;
    let s = p.stmt()?;
    if !p.at_eof() {
        return Err(ParseError::Syntax {
            line: 1,
            column: 0,
            message: format!("trailing input after statement in {text:?}"),
        });
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_function() {
        let u = parse_unit("def f(x: int) -> int:\n    return x + 1", "t.py").unwrap();
        assert_eq!(u.functions.len(), 1);
        let f = &u.functions[0];
        assert_eq!(f.params.len(), 1);
        assert_eq!(f.params[0].annot, Some(TypeAnnot::Int));
        let StmtKind::Return(Some(e)) = &f.body[0].kind else {
            panic!()
        };
        let ExprKind::Binary(BinOp::Add, l, r) = &e.kind else {
            panic!()
        };
        assert_eq!(l.kind, ExprKind::Name("x".into()));
        assert_eq!(r.kind, ExprKind::Int(1));
    }

    #[test]
    fn str_conversion_is_unsupported() {
        let err = parse_unit("def f(s: str):\n    y = str(s)", "t.py").unwrap_err();
        match err {
            ParseError::UnsupportedConstruct { construct, span } => {
                assert_eq!(construct, "str conversion");
                assert_eq!(span.line, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unannotated_param() {
        let u = parse_unit(
            "def f(x):\n  if x > 3:\n    return 1\n  return 0",
            "t.py",
        )
        .unwrap();
        assert_eq!(u.functions[0].params[0].annot, None);
    }

    #[test]
    fn chained_comparison_desugars() {
        let e = parse_expr("a < b <= c").unwrap();
        let ExprKind::Binary(BinOp::And, l, r) = &e.kind else {
            panic!()
        };
        assert!(matches!(l.kind, ExprKind::Compare(CmpOp::Lt, _, _)));
        assert!(matches!(r.kind, ExprKind::Compare(CmpOp::Le, _, _)));
    }

    #[test]
    fn rejected_constructs_name_themselves() {
        let cases = [
            ("def f(x):\n    g = lambda y: y\n    return 0", "lambda"),
            ("def f(x):\n    y = [i for i in x]\n    return 0", "list comprehension"),
            ("def f(x):\n    d = {1: 2}\n    return 0", "dictionary"),
            ("def f(x):\n    s = 'a'\n    return 0", "string literal"),
            ("def f(x):\n    def g():\n        return 1\n    return 0", "nested function definition"),
            ("def f(x):\n    a = b = 1\n    return 0", "multiple assignment targets"),
        ];
        for (src, construct) in cases {
            match parse_unit(src, "t.py") {
                Err(ParseError::UnsupportedConstruct { construct: c, .. }) => {
                    assert_eq!(c, construct, "{src}")
                }
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn class_methods_are_flattened() {
        let src = "class Solution:\n    def f(self, nums: List[int]) -> int:\n        return len(nums)\n";
        let u = parse_unit(src, "t.py").unwrap();
        assert_eq!(u.enclosing_class_name.as_deref(), Some("Solution"));
        assert_eq!(u.functions[0].params.len(), 1);
        assert!(u.functions[0].self_dropped);
    }

    #[test]
    fn self_use_is_rejected() {
        let src = "class S:\n    def f(self, x: int) -> int:\n        return self.g(x)\n";
        assert!(matches!(
            parse_unit(src, "t.py"),
            Err(ParseError::UnsupportedConstruct { .. })
        ));
    }

    #[test]
    fn range_defaults() {
        let u = parse_unit("def f(n: int):\n    for i in range(n):\n        n = n\n    return 0", "t")
            .unwrap();
        let StmtKind::ForRange { start, step, .. } = &u.functions[0].body[0].kind else {
            panic!()
        };
        assert_eq!(start.kind, ExprKind::Int(0));
        assert_eq!(step.kind, ExprKind::Int(1));
    }

    #[test]
    fn diagnostics_render() {
        let d = Diagnostic {
            code: DiagnosticCode::UnsupportedConstruct,
            message: "dictionary".into(),
            span: SourceSpan::new(3, 8, 6),
        };
        assert_eq!(d.render("a.py"), "a.py:3:8: unsupported-construct: dictionary");
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_unit("def f(x):\n    return (x +\n", "t.py") {
            Err(ParseError::Syntax { .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_unit("def f(x)\n    return x\n", "t.py") {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }
}

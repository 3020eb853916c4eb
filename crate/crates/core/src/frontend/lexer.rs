//! Indentation-aware tokenizer.

use super::ast::SourceSpan;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str,
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
}

const OPS: &[&str] = &[
    "//=", "**=", "->", "**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "<<",
    ">>", ":=", "+", "-", "*", "/", "%", "<", ">", "=", "(", ")", "[", "]", "{", "}", ",", ":",
    ".", ";", "@", "&", "|", "^", "~", "!",
];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    indents: Vec<u32>,
    depth: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        src,
        pos: 0,
        line: 1,
        col: 0,
        tokens: Vec::new(),
        indents: vec![0],
        depth: 0,
    };
    lx.run()?;
    Ok(lx.tokens)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 0;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.col,
            message: message.into(),
        }
    }

    fn push(&mut self, tok: Tok, start: usize, line: u32, col: u32) {
        let length = self.src[start..self.pos].chars().count() as u32;
        self.tokens.push(Token {
            tok,
            span: SourceSpan::new(line, col, length),
            start,
            end: self.pos,
        });
    }

    fn push_virtual(&mut self, tok: Tok) {
        self.tokens.push(Token {
            tok,
            span: SourceSpan::new(self.line, self.col, 0),
            start: self.pos,
            end: self.pos,
        });
    }

    fn last_is_line_end(&self) -> bool {
        matches!(
            self.tokens.last().map(|t| &t.tok),
            None | Some(Tok::Newline) | Some(Tok::Indent) | Some(Tok::Dedent)
        )
    }

    fn run(&mut self) -> Result<(), ParseError> {
        let mut at_line_start = true;
        loop {
            if at_line_start && self.depth == 0 {
                let mut width = 0u32;
                while let Some(c) = self.peek() {
                    match c {
                        ' ' => {
                            width += 1;
                            self.bump();
                        }
                        '\t' => return Err(self.err("tab in indentation; indent with spaces")),
                        '\r' => {
                            self.bump();
                        }
                        _ => break,
                    }
                }
                match self.peek() {
                    None => break,
                    Some('\n') => {
                        self.bump();
                        continue;
                    }
                    Some('#') => {
                        while !matches!(self.peek(), None | Some('\n')) {
                            self.bump();
                        }
                        continue;
                    }
                    _ => {}
                }
                let current = *self.indents.last().unwrap();
                if width > current {
                    self.indents.push(width);
                    self.push_virtual(Tok::Indent);
                } else {
                    while width < *self.indents.last().unwrap() {
                        self.indents.pop();
                        self.push_virtual(Tok::Dedent);
                    }
                    if width != *self.indents.last().unwrap() {
                        return Err(self.err("unindent does not match any outer indentation level"));
                    }
                }
                at_line_start = false;
            }

            let Some(c) = self.peek() else { break };
            let (start, line, col) = (self.pos, self.line, self.col);
            match c {
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                '#' => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                '\\' if self.peek_at(1) == Some('\n') => {
                    self.bump();
                    self.bump();
                }
                '\n' => {
                    if self.depth == 0 {
                        if !self.last_is_line_end() {
                            self.bump();
                            self.tokens.push(Token {
                                tok: Tok::Newline,
                                span: SourceSpan::new(line, col, 1),
                                start,
                                end: self.pos,
                            });
                        } else {
                            self.bump();
                        }
                        at_line_start = true;
                    } else {
                        self.bump();
                    }
                }
                '0'..='9' => self.number(start, line, col)?,
                '.' if matches!(self.peek_at(1), Some('0'..='9')) => self.number(start, line, col)?,
                '"' | '\'' => {
                    self.string()?;
                    self.push(Tok::Str, start, line, col);
                }
                c if c.is_alphabetic() || c == '_' => {
                    while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
                        self.bump();
                    }
                    let word = &self.src[start..self.pos];
                    let is_prefix = word.len() <= 2
                        && word
                            .chars()
                            .all(|c| matches!(c.to_ascii_lowercase(), 'r' | 'b' | 'f' | 'u'));
                    if is_prefix && matches!(self.peek(), Some('"' | '\'')) {
                        self.string()?;
                        self.push(Tok::Str, start, line, col);
                    } else {
                        let word = word.to_string();
                        self.push(Tok::Name(word), start, line, col);
                    }
                }
                _ => {
                    let rest = &self.src[self.pos..];
                    let Some(op) = OPS.iter().find(|op| rest.starts_with(**op)) else {
                        return Err(self.err(format!("unexpected character {c:?}")));
                    };
                    for _ in 0..op.len() {
                        self.bump();
                    }
                    match *op {
                        "(" | "[" | "{" => self.depth += 1,
                        ")" | "]" | "}" => {
                            if self.depth == 0 {
                                return Err(ParseError::Syntax {
                                    line,
                                    column: col,
                                    message: format!("unmatched '{op}'"),
                                });
                            }
                            self.depth -= 1;
                        }
                        _ => {}
                    }
                    self.push(Tok::Op(op), start, line, col);
                }
            }
        }
        if self.depth > 0 {
            return Err(self.err("unexpected end of input inside brackets"));
        }
        if !self.last_is_line_end() {
            self.push_virtual(Tok::Newline);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push_virtual(Tok::Dedent);
        }
        self.push_virtual(Tok::Eof);
        Ok(())
    }

    fn number(&mut self, start: usize, line: u32, col: u32) -> Result<(), ParseError> {
        let mut is_float = false;
        while let Some(c) = self.peek() {
            match c {
                '0'..='9' | '_' => {
                    self.bump();
                }
                '.' if !is_float => {
                    is_float = true;
                    self.bump();
                }
                'e' | 'E' => {
                    is_float = true;
                    self.bump();
                    if matches!(self.peek(), Some('+' | '-')) {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        if matches!(self.peek(), Some(c) if c.is_alphabetic()) {
            return Err(self.err("invalid numeric literal"));
        }
        let text: String = self.src[start..self.pos].chars().filter(|c| *c != '_').collect();
        let tok = if is_float {
            Tok::Float(text.parse().map_err(|_| ParseError::Syntax {
                line,
                column: col,
                message: format!("invalid float literal '{text}'"),
            })?)
        } else {
            Tok::Int(text.parse().map_err(|_| ParseError::Syntax {
                line,
                column: col,
                message: format!("integer literal '{text}' out of range"),
            })?)
        };
        self.push(tok, start, line, col);
        Ok(())
    }

    fn string(&mut self) -> Result<(), ParseError> {
        let quote = self.bump().unwrap();
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.bump();
            self.bump();
        }
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated string literal")),
                Some('\\') => {
                    self.bump();
                }
                Some('\n') if !triple => return Err(self.err("unterminated string literal")),
                Some(c) if c == quote => {
                    if !triple {
                        return Ok(());
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        return Ok(());
                    }
                }
                Some(_) => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn indentation_produces_indent_and_dedent() {
        let toks = kinds("def f():\n    return 1\n");
        assert!(toks.contains(&Tok::Indent));
        assert!(toks.contains(&Tok::Dedent));
        assert_eq!(toks.last(), Some(&Tok::Eof));
    }

    #[test]
    fn brackets_join_lines() {
        let toks = kinds("x = [1,\n     2]\n");
        assert_eq!(toks.iter().filter(|t| **t == Tok::Newline).count(), 1);
        assert!(!toks.contains(&Tok::Indent));
    }

    #[test]
    fn longest_operator_wins() {
        let toks = kinds("a //= b // c\n");
        assert!(toks.contains(&Tok::Op("//=")));
        assert!(toks.contains(&Tok::Op("//")));
    }

    #[test]
    fn tabs_in_indentation_are_rejected() {
        let err = tokenize("def f():\n\treturn 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }));
    }

    #[test]
    fn strings_and_floats() {
        let toks = kinds("s = 'a#b' + \"\"\"x\ny\"\"\"\nz = 1.5e1\n");
        assert_eq!(toks.iter().filter(|t| **t == Tok::Str).count(), 2);
        assert!(toks.contains(&Tok::Float(15.0)));
    }

    #[test]
    fn bad_dedent_is_an_error() {
        assert!(tokenize("if x:\n    a = 1\n  b = 2\n").is_err());
    }
}

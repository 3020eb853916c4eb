//! S-expression reader for solver output and SMT-LIB fragments.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String),
    Str(String),
    List(Vec<Sexpr>),
}

impl Sexpr {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_atom(&self, s: &str) -> bool {
        self.as_atom() == Some(s)
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(a) => f.write_str(a),
            Sexpr::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Sexpr::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("s-expression error at byte {offset}: {message}")]
pub struct SexprError {
    pub offset: usize,
    pub message: String,
}

/// Reads every top-level s-expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexpr>, SexprError> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut out = Vec::new();
    loop {
        skip_ws(bytes, &mut pos);
        if pos >= bytes.len() {
            return Ok(out);
        }
        out.push(parse_at(text, &mut pos)?);
    }
}

/// Reads exactly one s-expression.
pub fn parse_one(text: &str) -> Result<Sexpr, SexprError> {
    let mut all = parse_all(text)?;
    if all.len() != 1 {
        return Err(SexprError {
            offset: 0,
            message: format!("expected one s-expression, found {}", all.len()),
        });
    }
    Ok(all.pop().unwrap())
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b' ' | b'\t' | b'\n' | b'\r' => *pos += 1,
            b';' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            _ => break,
        }
    }
}

fn parse_at(text: &str, pos: &mut usize) -> Result<Sexpr, SexprError> {
    let bytes = text.as_bytes();
    skip_ws(bytes, pos);
    let err = |offset: usize, message: &str| SexprError {
        offset,
        message: message.to_string(),
    };
    match bytes.get(*pos) {
        None => Err(err(*pos, "unexpected end of input")),
        Some(b'(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(bytes, pos);
                match bytes.get(*pos) {
                    None => return Err(err(*pos, "unclosed '('")),
                    Some(b')') => {
                        *pos += 1;
                        return Ok(Sexpr::List(items));
                    }
                    _ => items.push(parse_at(text, pos)?),
                }
            }
        }
        Some(b')') => Err(err(*pos, "unexpected ')'")),
        Some(b'"') => {
            let start = *pos;
            *pos += 1;
            let mut s = String::new();
            loop {
                match bytes.get(*pos) {
                    None => return Err(err(start, "unterminated string")),
                    Some(b'"') if bytes.get(*pos + 1) == Some(&b'"') => {
                        s.push('"');
                        *pos += 2;
                    }
                    Some(b'"') => {
                        *pos += 1;
                        return Ok(Sexpr::Str(s));
                    }
                    Some(_) => {
                        let c = text[*pos..].chars().next().unwrap();
                        s.push(c);
                        *pos += c.len_utf8();
                    }
                }
            }
        }
        Some(b'|') => {
            let start = *pos;
            *pos += 1;
            let body_start = *pos;
            while *pos < bytes.len() && bytes[*pos] != b'|' {
                *pos += 1;
            }
            if *pos >= bytes.len() {
                return Err(err(start, "unterminated quoted symbol"));
            }
            let sym = text[body_start..*pos].to_string();
            *pos += 1;
            Ok(Sexpr::Atom(sym))
        }
        Some(_) => {
            let start = *pos;
            while *pos < bytes.len()
                && !matches!(bytes[*pos], b' ' | b'\t' | b'\n' | b'\r' | b'(' | b')' | b';' | b'"')
            {
                *pos += 1;
            }
            Ok(Sexpr::Atom(text[start..*pos].to_string()))
        }
    }
}

//! Just enough of an S-expression reader for solver responses.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    /// A symbol or numeral; `|quoted|` symbols are stored unquoted.
    Atom(String),
    Str(String),
    List(Vec<SExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("malformed solver output at byte {offset}: {message}")]
pub struct SExprError {
    pub offset: usize,
    pub message: String,
}

impl SExpr {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a) => f.write_str(a),
            SExpr::Str(s) => write!(f, "\"{s}\""),
            SExpr::List(items) => {
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

/// Reads every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<SExpr>, SExprError> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut stack: Vec<Vec<SExpr>> = alloc::vec![Vec::new()];
    let err = |offset: usize, m: &str| SExprError {
        offset,
        message: m.to_string(),
    };
    while pos < bytes.len() {
        let c = bytes[pos];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => pos += 1,
            b';' => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            }
            b'(' => {
                stack.push(Vec::new());
                pos += 1;
            }
            b')' => {
                if stack.len() < 2 {
                    return Err(err(pos, "unbalanced `)`"));
                }
                let list = stack.pop().unwrap();
                stack.last_mut().unwrap().push(SExpr::List(list));
                pos += 1;
            }
            b'|' => {
                let start = pos + 1;
                let end = text[start..].find('|').ok_or_else(|| err(pos, "unterminated `|`"))?;
                stack
                    .last_mut()
                    .unwrap()
                    .push(SExpr::Atom(text[start..start + end].to_string()));
                pos = start + end + 1;
            }
            b'"' => {
                let mut s = String::new();
                let mut i = pos + 1;
                loop {
                    match bytes.get(i) {
                        None => return Err(err(pos, "unterminated string")),
                        Some(b'"') if bytes.get(i + 1) == Some(&b'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some(b'"') => break,
                        Some(_) => {
                            let ch = text[i..].chars().next().unwrap();
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                stack.last_mut().unwrap().push(SExpr::Str(s));
                pos = i + 1;
            }
            _ => {
                let start = pos;
                while pos < bytes.len()
                    && !matches!(bytes[pos], b' ' | b'\t' | b'\r' | b'\n' | b'(' | b')' | b'"' | b';')
                {
                    pos += 1;
                }
                stack
                    .last_mut()
                    .unwrap()
                    .push(SExpr::Atom(text[start..pos].to_string()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(err(bytes.len(), "unbalanced `(`"));
    }
    Ok(stack.pop().unwrap())
}

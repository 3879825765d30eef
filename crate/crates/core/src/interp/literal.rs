//! The argument syntax of the `run` command: integers, `true`/`false`,
//! constant names and `{field: value, ...}` records.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigInt;

use super::Value;
use crate::semantics::{ConstValue, ResolvedModule, Shape, Ty};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("bad value at offset {offset}: {message}")]
pub struct LiteralError {
    pub offset: usize,
    pub message: String,
}

/// Parses `text` as a value of type `ty`. Type constraints are not checked.
pub fn parse_value(text: &str, ty: Ty, module: &ResolvedModule) -> Result<Value, LiteralError> {
    let mut p = Reader { text, pos: 0, module };
    let v = p.value(ty)?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
    module: &'a ResolvedModule,
}

impl Reader<'_> {
    fn err(&self, message: impl Into<String>) -> LiteralError {
        LiteralError {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
            .unwrap_or(rest.len());
        self.pos += len;
        &self.text[start..start + len]
    }

    fn value(&mut self, ty: Ty) -> Result<Value, LiteralError> {
        match self.module.shape(ty) {
            Shape::Record(_) => self.record(ty),
            shape => {
                let at = self.pos;
                let w = self.word().to_string();
                let v = match (shape, w.as_str()) {
                    (Shape::Bool, "true") => Value::Bool(true),
                    (Shape::Bool, "false") => Value::Bool(false),
                    (_, name) => match self.module.constant(name) {
                        Some(ConstValue::Int(n)) => Value::Int(n.clone()),
                        Some(ConstValue::Bool(b)) => Value::Bool(*b),
                        None => match name.parse::<BigInt>() {
                            Ok(n) => Value::Int(n),
                            Err(_) => {
                                self.pos = at;
                                return Err(self.err(alloc::format!(
                                    "expected a {} value, found `{name}`",
                                    self.module.type_name(ty)
                                )));
                            }
                        },
                    },
                };
                let ok = matches!((shape, &v), (Shape::Int, Value::Int(_)) | (Shape::Bool, Value::Bool(_)));
                if !ok {
                    self.pos = at;
                    return Err(self.err(alloc::format!("expected a {} value", self.module.type_name(ty))));
                }
                Ok(v)
            }
        }
    }

    fn record(&mut self, ty: Ty) -> Result<Value, LiteralError> {
        let defs = self.module.fields(ty).expect("record shape");
        if !self.eat('{') {
            return Err(self.err(alloc::format!("expected `{{` for a {}", self.module.type_name(ty))));
        }
        let mut vals: Vec<Option<Value>> = alloc::vec![None; defs.len()];
        if !self.eat('}') {
            loop {
                let name = self.word().to_string();
                let Some(idx) = defs.iter().position(|d| *d.name == *name) else {
                    return Err(self.err(alloc::format!("{} has no field `{name}`", self.module.type_name(ty))));
                };
                if vals[idx].is_some() {
                    return Err(self.err(alloc::format!("field `{name}` given twice")));
                }
                if !self.eat(':') {
                    return Err(self.err("expected `:`"));
                }
                vals[idx] = Some(self.value(defs[idx].ty)?);
                if self.eat('}') {
                    break;
                }
                if !self.eat(',') {
                    return Err(self.err("expected `,` or `}`"));
                }
            }
        }
        let mut fields: Vec<(Arc<str>, Value)> = Vec::with_capacity(defs.len());
        for (d, v) in defs.iter().zip(vals) {
            match v {
                Some(v) => fields.push((d.name.clone(), v)),
                None => return Err(self.err(alloc::format!("missing field `{}`", d.name))),
            }
        }
        Ok(Value::Record(fields))
    }
}

use core::fmt;

use super::{TExpr, TExprKind};
use crate::frontend::UnaryOp;

impl fmt::Display for TExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TExprKind::Int(n) => write!(f, "{n}"),
            TExprKind::Bool(b) => write!(f, "{b}"),
            TExprKind::Const(name, _) => f.write_str(name),
            TExprKind::Local(_, name) => f.write_str(name),
            TExprKind::Field(base, _, name) => {
                // Where clauses of a record refer to fields of the implicit
                // unnamed self value.
                if matches!(&base.kind, TExprKind::Local(_, n) if n.is_empty()) {
                    return f.write_str(name);
                }
                atom(f, base)?;
                write!(f, ".{name}")
            }
            TExprKind::Unary(op, inner) => {
                f.write_str(match op {
                    UnaryOp::Neg => "-",
                    UnaryOp::Not => "!",
                })?;
                atom(f, inner)
            }
            TExprKind::Binary(op, l, r) => {
                let p = op.precedence();
                operand(f, l, |q| q < p || (q == p && op.is_right_assoc()))?;
                write!(f, " {} ", op.symbol())?;
                operand(f, r, |q| q < p || (q == p && !op.is_right_assoc()))
            }
            TExprKind::PropCall(_, name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            TExprKind::Record(fields) => {
                f.write_str("{")?;
                for (i, (_, name, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}: {v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

fn atom(f: &mut fmt::Formatter<'_>, e: &TExpr) -> fmt::Result {
    if matches!(e.kind, TExprKind::Binary(..) | TExprKind::Unary(..)) {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn operand(f: &mut fmt::Formatter<'_>, e: &TExpr, parens: impl Fn(u8) -> bool) -> fmt::Result {
    match &e.kind {
        TExprKind::Binary(op, ..) if parens(op.precedence()) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

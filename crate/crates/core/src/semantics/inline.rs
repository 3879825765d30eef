use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{ResolvedModule, TExpr, TExprKind};

/// Replaces every property call in `e` by the property body with the actual
/// arguments substituted for the formals, transitively.
///
/// Formals are resolved to slots of the property's own frame, so the
/// substitution is simultaneous and cannot capture caller variables.
pub fn inline_properties(e: &TExpr, module: &ResolvedModule) -> TExpr {
    let kind = match &e.kind {
        TExprKind::Int(_) | TExprKind::Bool(_) | TExprKind::Const(..) | TExprKind::Local(..) => return e.clone(),
        TExprKind::Field(base, idx, name) => {
            TExprKind::Field(Box::new(inline_properties(base, module)), *idx, name.clone())
        }
        TExprKind::Unary(op, inner) => TExprKind::Unary(*op, Box::new(inline_properties(inner, module))),
        TExprKind::Binary(op, l, r) => TExprKind::Binary(
            *op,
            Box::new(inline_properties(l, module)),
            Box::new(inline_properties(r, module)),
        ),
        TExprKind::Record(fields) => TExprKind::Record(
            fields
                .iter()
                .map(|(i, n, v)| (*i, n.clone(), inline_properties(v, module)))
                .collect(),
        ),
        TExprKind::PropCall(id, _, args) => {
            let args: Vec<TExpr> = args.iter().map(|a| inline_properties(a, module)).collect();
            let body = inline_properties(&module.property(*id).body, module);
            let mut out = substitute(&body, &args);
            out.span = e.span;
            return out;
        }
    };
    TExpr {
        kind,
        ty: e.ty,
        span: e.span,
    }
}

/// Replaces `Local(i)` by `args[i]` everywhere in `e`.
pub(crate) fn substitute(e: &TExpr, args: &[TExpr]) -> TExpr {
    let kind = match &e.kind {
        TExprKind::Local(slot, _) => return args[*slot as usize].clone(),
        TExprKind::Int(_) | TExprKind::Bool(_) | TExprKind::Const(..) => return e.clone(),
        TExprKind::Field(base, idx, name) => TExprKind::Field(Box::new(substitute(base, args)), *idx, name.clone()),
        TExprKind::Unary(op, inner) => TExprKind::Unary(*op, Box::new(substitute(inner, args))),
        TExprKind::Binary(op, l, r) => {
            TExprKind::Binary(*op, Box::new(substitute(l, args)), Box::new(substitute(r, args)))
        }
        TExprKind::PropCall(id, name, inner) => {
            TExprKind::PropCall(*id, name.clone(), inner.iter().map(|a| substitute(a, args)).collect())
        }
        TExprKind::Record(fields) => TExprKind::Record(
            fields
                .iter()
                .map(|(i, n, v)| (*i, n.clone(), substitute(v, args)))
                .collect(),
        ),
    };
    TExpr {
        kind,
        ty: e.ty,
        span: e.span,
    }
}

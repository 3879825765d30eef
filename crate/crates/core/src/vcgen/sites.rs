//! Where the checks after a write go. Shared with the interpreter so both
//! report the same kind and span for a site.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::ObligationKind;
use crate::semantics::{FunctionDef, ResolvedModule, Shape, Ty};
use crate::Span;

/// A write target as the check placement sees it.
pub(crate) struct Target<'a> {
    pub slot: u32,
    pub path: &'a [(u32, Arc<str>)],
    pub ty: Ty,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct PostCheck {
    pub kind: ObligationKind,
    pub span: Span,
    pub slot: u32,
    pub path: Vec<u32>,
    pub ty: Ty,
    /// Only the where clauses of `ty` itself, not of its fields.
    pub own_only: bool,
    pub what: String,
}

/// Checks due after a statement writing `targets` with values of static
/// types `value_tys`: a validity check per target whose value could violate
/// the location type, then the own clauses of every enclosing record that
/// has some, innermost first and each once.
pub(crate) fn post_checks(
    module: &ResolvedModule,
    func: &FunctionDef,
    targets: &[Target<'_>],
    value_tys: &[Ty],
) -> Vec<PostCheck> {
    let mut out = Vec::new();
    for (t, vty) in targets.iter().zip(value_tys) {
        if module.flows_trivially(*vty, t.ty) {
            continue;
        }
        out.push(PostCheck {
            kind: validity_kind(module, t.ty),
            span: t.span,
            slot: t.slot,
            path: t.path.iter().map(|p| p.0).collect(),
            ty: t.ty,
            own_only: false,
            what: path_name(func, t.slot, t.path.len(), t.path),
        });
    }
    let mut seen = BTreeSet::new();
    for t in targets {
        let mut prefix_tys = Vec::with_capacity(t.path.len());
        let mut ty = func.locals[t.slot as usize].ty;
        for (idx, _) in t.path {
            prefix_tys.push(ty);
            ty = module.fields(ty).expect("field path on a record")[*idx as usize].ty;
        }
        for depth in (0..t.path.len()).rev() {
            let pty = prefix_tys[depth];
            if !module.has_own_clauses(pty) {
                continue;
            }
            let path: Vec<u32> = t.path[..depth].iter().map(|p| p.0).collect();
            if !seen.insert((t.slot, path.clone())) {
                continue;
            }
            out.push(PostCheck {
                kind: ObligationKind::RecordInvariant,
                span: t.span,
                slot: t.slot,
                path,
                ty: pty,
                own_only: true,
                what: path_name(func, t.slot, depth, t.path),
            });
        }
    }
    out
}

/// Kind of a whole-value validity check against `ty`.
pub(crate) fn validity_kind(module: &ResolvedModule, ty: Ty) -> ObligationKind {
    match module.shape(ty) {
        Shape::Record(_) if module.has_own_clauses(ty) => ObligationKind::RecordInvariant,
        _ => ObligationKind::TypeConstraint,
    }
}

fn path_name(func: &FunctionDef, slot: u32, depth: usize, path: &[(u32, Arc<str>)]) -> String {
    let mut s = String::from(&*func.locals[slot as usize].name);
    for (_, name) in &path[..depth] {
        s.push('.');
        s.push_str(name);
    }
    s
}

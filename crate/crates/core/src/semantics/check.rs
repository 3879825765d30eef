//! The typechecker proper.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::*;
use crate::frontend::{
    BinaryOp, ConstDecl, Decl, DeclKind, Expr, ExprKind, FunctionDecl, ModuleAst, Param, PropertyDecl, Stmt, StmtKind,
    TypeBody, TypeDecl, TypeExpr, TypeExprKind, UnaryOp,
};
use crate::{Diagnostic, Diagnostics};

/// Largest exponent accepted by `**` in constant expressions.
const MAX_EXPONENT: u32 = 4096;

/// Resolves names, checks types and definite assignment, and evaluates
/// constants.
pub fn typecheck(file: &str, ast: &ModuleAst) -> Result<ResolvedModule, Diagnostics> {
    let mut c = Checker {
        file: Arc::from(file),
        errors: Vec::new(),
        names: BTreeMap::new(),
        type_decls: Vec::new(),
        const_decls: Vec::new(),
        prop_decls: Vec::new(),
        fn_decls: Vec::new(),
        types: Vec::new(),
        consts: Vec::new(),
        properties: Vec::new(),
        functions: Vec::new(),
    };
    c.collect(ast);
    c.resolve_types();
    if !c.errors.is_empty() {
        return Err(Diagnostics(c.errors));
    }
    c.eval_consts();
    c.signatures();
    c.where_clauses();
    c.property_bodies();
    c.check_property_cycles();
    c.function_bodies();
    c.check_call_cycles();
    let (bounds, exact_bounds) = c.compute_bounds();
    if !c.errors.is_empty() {
        return Err(Diagnostics(c.errors));
    }
    Ok(ResolvedModule {
        file: c.file,
        types: c.types,
        consts: c
            .consts
            .into_iter()
            .map(|s| match s {
                ConstState::Done(d) => d,
                _ => unreachable!("constants are evaluated before the module is built"),
            })
            .collect(),
        properties: c.properties,
        functions: c.functions,
        bounds,
        exact_bounds,
        names: c.names,
    })
}

enum ConstState {
    Pending,
    Evaluating,
    Done(ConstDef),
    Failed,
}

struct Checker<'a> {
    file: Arc<str>,
    errors: Vec<Diagnostic>,
    names: BTreeMap<Arc<str>, Global>,
    type_decls: Vec<(&'a TypeDecl, Span)>,
    const_decls: Vec<(&'a ConstDecl, Span)>,
    prop_decls: Vec<(&'a PropertyDecl, Span)>,
    fn_decls: Vec<(&'a FunctionDecl, Span)>,
    types: Vec<TypeDef>,
    consts: Vec<ConstState>,
    properties: Vec<PropertyDef>,
    functions: Vec<FunctionDef>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Spec,
    Code,
}

/// Variables visible to an expression.
struct Scope<'s> {
    locals: &'s [LocalDecl],
    visible: &'s [(Arc<str>, u32)],
    /// Record whose fields may be named bare (record where clauses).
    self_record: Option<TypeId>,
    assigned: Option<&'s [bool]>,
    ctx: Ctx,
}

impl Scope<'_> {
    fn lookup(&self, name: &str) -> Option<&LocalDecl> {
        self.visible
            .iter()
            .rev()
            .find(|(n, _)| &**n == name)
            .map(|(_, slot)| &self.locals[*slot as usize])
    }
}

/// Mutable state while checking one function body.
struct FnState {
    locals: Vec<LocalDecl>,
    visible: Vec<(Arc<str>, u32)>,
    assigned: Vec<bool>,
}

impl FnState {
    fn declare(&mut self, name: Arc<str>, ty: Ty, span: Span) -> u32 {
        let slot = self.locals.len() as u32;
        self.locals.push(LocalDecl {
            slot,
            name: name.clone(),
            ty,
            span,
        });
        self.visible.push((name, slot));
        self.assigned.push(false);
        slot
    }

    fn scope(&self) -> Scope<'_> {
        Scope {
            locals: &self.locals,
            visible: &self.visible,
            self_record: None,
            assigned: Some(&self.assigned),
            ctx: Ctx::Code,
        }
    }
}

fn is_const_nonzero(e: &TExpr) -> bool {
    match &e.kind {
        TExprKind::Int(n) | TExprKind::Const(_, ConstValue::Int(n)) => !n.is_zero(),
        TExprKind::Unary(UnaryOp::Neg, inner) => is_const_nonzero(inner),
        _ => false,
    }
}

impl<'a> Checker<'a> {
    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.errors.push(Diagnostic::error(&self.file, span, msg));
    }

    fn ty_name(&self, ty: Ty) -> String {
        match ty {
            Ty::Int => "int".into(),
            Ty::Bool => "bool".into(),
            Ty::Named(id) => String::from(&*self.types[id.0 as usize].name),
        }
    }

    fn shape(&self, mut ty: Ty) -> Shape {
        loop {
            match ty {
                Ty::Int => return Shape::Int,
                Ty::Bool => return Shape::Bool,
                Ty::Named(id) => match &self.types[id.0 as usize].body {
                    TypeDefBody::Record(_) => return Shape::Record(id),
                    TypeDefBody::Constrained { base, .. } => ty = *base,
                },
            }
        }
    }

    fn fields(&self, ty: Ty) -> Option<&[FieldDef]> {
        match self.shape(ty) {
            Shape::Record(id) => match &self.types[id.0 as usize].body {
                TypeDefBody::Record(f) => Some(f),
                TypeDefBody::Constrained { .. } => None,
            },
            _ => None,
        }
    }

    fn compatible(&self, a: Ty, b: Ty) -> bool {
        self.shape(a) == self.shape(b)
    }

    fn expect_ty(&mut self, e: &TExpr, expected: Ty) -> bool {
        if self.compatible(e.ty, expected) {
            true
        } else {
            let msg = format!(
                "type mismatch: expected `{}`, found `{}`",
                self.ty_name(expected),
                self.ty_name(e.ty)
            );
            self.error(e.span, msg);
            false
        }
    }

    // ---- phase 1: global names ----

    fn collect(&mut self, ast: &'a ModuleAst) {
        for Decl { kind, span } in &ast.decls {
            let name: Arc<str> = Arc::from(kind.name());
            if let Some(prev) = self.names.get(&name) {
                let what = describe_global(*prev);
                self.error(
                    *span,
                    format!("duplicate declaration: `{name}` is already declared as a {what}"),
                );
                continue;
            }
            let g = match kind {
                DeclKind::Type(t) => {
                    self.type_decls.push((t, *span));
                    Global::Type(TypeId(self.type_decls.len() as u32 - 1))
                }
                DeclKind::Const(c) => {
                    self.const_decls.push((c, *span));
                    Global::Const(self.const_decls.len() as u32 - 1)
                }
                DeclKind::Property(p) => {
                    self.prop_decls.push((p, *span));
                    Global::Property(PropId(self.prop_decls.len() as u32 - 1))
                }
                DeclKind::Function(f) => {
                    self.fn_decls.push((f, *span));
                    Global::Function(FuncId(self.fn_decls.len() as u32 - 1))
                }
            };
            self.names.insert(name, g);
        }
    }

    fn resolve_type(&mut self, t: &TypeExpr) -> Ty {
        match &t.kind {
            TypeExprKind::Int => Ty::Int,
            TypeExprKind::Bool => Ty::Bool,
            TypeExprKind::Named(n) => match self.names.get(n.as_str()) {
                Some(Global::Type(id)) => Ty::Named(*id),
                Some(g) => {
                    let what = describe_global(*g);
                    self.error(t.span, format!("`{n}` is a {what}, not a type"));
                    Ty::Int
                }
                None => {
                    self.error(t.span, format!("unknown type `{n}`"));
                    Ty::Int
                }
            },
        }
    }

    // ---- phase 2: type shapes ----

    fn resolve_types(&mut self) {
        for i in 0..self.type_decls.len() {
            let (decl, span) = self.type_decls[i];
            let body = match &decl.body {
                TypeBody::Record(fields) => {
                    let mut out: Vec<FieldDef> = Vec::new();
                    for f in fields {
                        let ty = self.resolve_type(&f.ty);
                        if out.iter().any(|o| *o.name == *f.name) {
                            self.error(
                                f.span,
                                format!("duplicate field `{}` in record `{}`", f.name, decl.name),
                            );
                            continue;
                        }
                        out.push(FieldDef {
                            name: Arc::from(f.name.as_str()),
                            ty,
                            span: f.span,
                        });
                    }
                    TypeDefBody::Record(out)
                }
                TypeBody::Constrained { base, binder } => TypeDefBody::Constrained {
                    base: self.resolve_type(base),
                    binder: Arc::from(binder.as_str()),
                },
            };
            self.types.push(TypeDef {
                name: Arc::from(decl.name.as_str()),
                visibility: decl.visibility,
                body,
                where_clauses: Vec::new(),
                span,
            });
        }
        // A type may not contain itself.
        let deps: Vec<Vec<usize>> = self
            .types
            .iter()
            .map(|t| {
                let mut d = Vec::new();
                let mut push = |ty: &Ty| {
                    if let Ty::Named(id) = ty {
                        d.push(id.0 as usize);
                    }
                };
                match &t.body {
                    TypeDefBody::Record(fields) => fields.iter().for_each(|f| push(&f.ty)),
                    TypeDefBody::Constrained { base, .. } => push(base),
                }
                d
            })
            .collect();
        let names: Vec<Arc<str>> = self.types.iter().map(|t| t.name.clone()).collect();
        for cycle in find_cycles(&deps) {
            let path = cycle_path(&cycle, &names);
            let span = self.types[cycle[0]].span;
            self.error(span, format!("recursive type definition: {path}"));
        }
    }

    // ---- phase 3: constants ----

    fn eval_consts(&mut self) {
        self.consts = (0..self.const_decls.len()).map(|_| ConstState::Pending).collect();
        for i in 0..self.const_decls.len() {
            self.eval_const(i);
        }
    }

    fn eval_const(&mut self, i: usize) -> Option<ConstValue> {
        match &self.consts[i] {
            ConstState::Done(d) => return Some(d.value.clone()),
            ConstState::Failed => return None,
            ConstState::Evaluating => {
                let (decl, span) = self.const_decls[i];
                self.error(span, format!("recursive constant definition involving `{}`", decl.name));
                self.consts[i] = ConstState::Failed;
                return None;
            }
            ConstState::Pending => {}
        }
        self.consts[i] = ConstState::Evaluating;
        let (decl, span) = self.const_decls[i];
        let v = self.const_expr(&decl.value);
        if matches!(self.consts[i], ConstState::Failed) {
            return None;
        }
        self.consts[i] = match &v {
            Some(value) => ConstState::Done(ConstDef {
                name: Arc::from(decl.name.as_str()),
                value: value.clone(),
                span,
            }),
            None => ConstState::Failed,
        };
        v
    }

    fn const_int(&mut self, e: &Expr) -> Option<BigInt> {
        match self.const_expr(e)? {
            ConstValue::Int(n) => Some(n),
            ConstValue::Bool(_) => {
                self.error(e.span, "type mismatch: expected `int`, found `bool`");
                None
            }
        }
    }

    fn const_bool(&mut self, e: &Expr) -> Option<bool> {
        match self.const_expr(e)? {
            ConstValue::Bool(b) => Some(b),
            ConstValue::Int(_) => {
                self.error(e.span, "type mismatch: expected `bool`, found `int`");
                None
            }
        }
    }

    fn const_expr(&mut self, e: &Expr) -> Option<ConstValue> {
        match &e.kind {
            ExprKind::Int(n) => Some(ConstValue::Int(n.clone())),
            ExprKind::Bool(b) => Some(ConstValue::Bool(*b)),
            ExprKind::Var(name) => match self.names.get(name.as_str()).copied() {
                Some(Global::Const(i)) => self.eval_const(i as usize),
                Some(g) => {
                    let what = describe_global(g);
                    self.error(e.span, format!("`{name}` is a {what}, not a constant"));
                    None
                }
                None => {
                    self.error(e.span, format!("unknown identifier `{name}`"));
                    None
                }
            },
            ExprKind::Unary(UnaryOp::Neg, inner) => Some(ConstValue::Int(-self.const_int(inner)?)),
            ExprKind::Unary(UnaryOp::Not, inner) => Some(ConstValue::Bool(!self.const_bool(inner)?)),
            ExprKind::Binary(op, l, r) => {
                use BinaryOp::*;
                match op {
                    And | Or | Implies => {
                        let (a, b) = (self.const_bool(l)?, self.const_bool(r)?);
                        Some(ConstValue::Bool(match op {
                            And => a && b,
                            Or => a || b,
                            _ => !a || b,
                        }))
                    }
                    Eq | Ne => {
                        let (a, b) = (self.const_expr(l)?, self.const_expr(r)?);
                        if core::mem::discriminant(&a) != core::mem::discriminant(&b) {
                            self.error(e.span, "type mismatch: cannot compare `int` with `bool`");
                            return None;
                        }
                        Some(ConstValue::Bool((a == b) == (*op == Eq)))
                    }
                    _ => {
                        let (a, b) = (self.const_int(l)?, self.const_int(r)?);
                        Some(match op {
                            Add => ConstValue::Int(a + b),
                            Sub => ConstValue::Int(a - b),
                            Mul => ConstValue::Int(a * b),
                            Div | Rem if b.is_zero() => {
                                self.error(r.span, "division by zero in constant expression");
                                return None;
                            }
                            Div => ConstValue::Int(a / b),
                            Rem => ConstValue::Int(a % b),
                            Pow => match b.to_u32() {
                                Some(k) if k <= MAX_EXPONENT => ConstValue::Int(num_traits::pow(a, k as usize)),
                                _ => {
                                    self.error(r.span, format!("exponent must be between 0 and {MAX_EXPONENT}"));
                                    return None;
                                }
                            },
                            Lt => ConstValue::Bool(a < b),
                            Le => ConstValue::Bool(a <= b),
                            Gt => ConstValue::Bool(a > b),
                            Ge => ConstValue::Bool(a >= b),
                            And | Or | Implies | Eq | Ne => unreachable!(),
                        })
                    }
                }
            }
            ExprKind::Field(..) | ExprKind::Call(..) | ExprKind::Record(..) => {
                self.error(
                    e.span,
                    "constant expressions may only use literals, constants and operators",
                );
                None
            }
        }
    }

    // ---- phase 4: signatures ----

    fn params(&mut self, params: &[Param], locals: &mut Vec<LocalDecl>, what: &str) {
        for p in params {
            let ty = self.resolve_type(&p.ty);
            if locals.iter().any(|l| *l.name == *p.name) {
                self.error(p.span, format!("duplicate {what} name `{}`", p.name));
            }
            locals.push(LocalDecl {
                slot: locals.len() as u32,
                name: Arc::from(p.name.as_str()),
                ty,
                span: p.span,
            });
        }
    }

    fn signatures(&mut self) {
        for i in 0..self.prop_decls.len() {
            let (decl, span) = self.prop_decls[i];
            let mut params = Vec::new();
            self.params(&decl.params, &mut params, "parameter");
            self.properties.push(PropertyDef {
                name: Arc::from(decl.name.as_str()),
                params,
                body: TExpr {
                    kind: TExprKind::Bool(true),
                    ty: Ty::Bool,
                    span,
                },
                span,
            });
        }
        for i in 0..self.fn_decls.len() {
            let (decl, span) = self.fn_decls[i];
            let mut locals = Vec::new();
            self.params(&decl.params, &mut locals, "parameter");
            let n = locals.len();
            self.params(&decl.returns, &mut locals, "parameter or return");
            self.functions.push(FunctionDef {
                name: Arc::from(decl.name.as_str()),
                visibility: decl.visibility,
                params: locals[..n].to_vec(),
                returns: locals[n..].to_vec(),
                requires: Vec::new(),
                ensures: Vec::new(),
                body: Vec::new(),
                locals,
                span,
            });
        }
    }

    // ---- phase 5: specifications ----

    fn spec_clause(&mut self, scope: &Scope<'_>, e: &Expr, what: &str) -> Option<TExpr> {
        let t = self.expr(scope, e, Some(Ty::Bool))?;
        if self.shape(t.ty) != Shape::Bool {
            let found = self.ty_name(t.ty);
            self.error(e.span, format!("{what} must be a boolean expression, found `{found}`"));
            return None;
        }
        Some(t)
    }

    fn where_clauses(&mut self) {
        for i in 0..self.types.len() {
            let (decl, _) = self.type_decls[i];
            if decl.where_clauses.is_empty() {
                continue;
            }
            let id = TypeId(i as u32);
            let (self_ty, name, self_record) = match &self.types[i].body {
                TypeDefBody::Record(_) => (Ty::Named(id), Arc::from(""), Some(id)),
                TypeDefBody::Constrained { base, binder } => (*base, binder.clone(), None),
            };
            let locals = [LocalDecl {
                slot: 0,
                name: name.clone(),
                ty: self_ty,
                span: self.types[i].span,
            }];
            let visible = [(name, 0u32)];
            let scope = Scope {
                locals: &locals,
                visible: if self_record.is_some() { &[] } else { &visible },
                self_record,
                assigned: None,
                ctx: Ctx::Spec,
            };
            let mut clauses = Vec::new();
            for w in &decl.where_clauses {
                if let Some(t) = self.spec_clause(&scope, w, "a where clause") {
                    clauses.push(t);
                }
            }
            self.types[i].where_clauses = clauses;
        }
    }

    fn property_bodies(&mut self) {
        for i in 0..self.prop_decls.len() {
            let (decl, _) = self.prop_decls[i];
            let locals = core::mem::take(&mut self.properties[i].params);
            let visible: Vec<(Arc<str>, u32)> = locals.iter().map(|l| (l.name.clone(), l.slot)).collect();
            let scope = Scope {
                locals: &locals,
                visible: &visible,
                self_record: None,
                assigned: None,
                ctx: Ctx::Spec,
            };
            let body = self.spec_clause(&scope, &decl.body, "a property body");
            self.properties[i].params = locals;
            if let Some(body) = body {
                self.properties[i].body = body;
            }
        }
    }

    fn check_property_cycles(&mut self) {
        let deps: Vec<Vec<usize>> = self
            .properties
            .iter()
            .map(|p| {
                let mut out = Vec::new();
                collect_prop_calls(&p.body, &mut out);
                out
            })
            .collect();
        let names: Vec<Arc<str>> = self.properties.iter().map(|p| p.name.clone()).collect();
        for cycle in find_cycles(&deps) {
            let path = cycle_path(&cycle, &names);
            let span = self.properties[cycle[0]].span;
            self.error(span, format!("recursive property definitions: {path}"));
        }
    }

    // ---- phase 6: functions ----

    fn function_bodies(&mut self) {
        for i in 0..self.fn_decls.len() {
            let (decl, span) = self.fn_decls[i];
            let locals = core::mem::take(&mut self.functions[i].locals);
            let n_params = self.functions[i].params.len();
            let all: Vec<(Arc<str>, u32)> = locals.iter().map(|l| (l.name.clone(), l.slot)).collect();
            let mut requires = Vec::new();
            let mut ensures = Vec::new();
            {
                let scope = Scope {
                    locals: &locals,
                    visible: &all[..n_params],
                    self_record: None,
                    assigned: None,
                    ctx: Ctx::Spec,
                };
                for r in &decl.requires {
                    if let Some(t) = self.spec_clause(&scope, r, "a requires clause") {
                        requires.push(t);
                    }
                }
                let scope = Scope { visible: &all, ..scope };
                for e in &decl.ensures {
                    if let Some(t) = self.spec_clause(&scope, e, "an ensures clause") {
                        ensures.push(t);
                    }
                }
            }
            let n_locals = locals.len();
            let mut st = FnState {
                visible: all[..n_params].to_vec(),
                assigned: (0..n_locals).map(|s| s < n_params).collect(),
                locals,
            };
            let returns: Vec<Ty> = self.functions[i].returns.iter().map(|r| r.ty).collect();
            let (body, terminates) = self.block(&mut st, &decl.body, &returns);
            if !terminates && !returns.is_empty() {
                self.error(
                    span,
                    format!(
                        "missing return: function `{}` can reach its end without returning",
                        decl.name
                    ),
                );
            }
            let f = &mut self.functions[i];
            f.locals = st.locals;
            f.requires = requires;
            f.ensures = ensures;
            f.body = body;
        }
    }

    fn check_call_cycles(&mut self) {
        let deps: Vec<Vec<usize>> = self
            .functions
            .iter()
            .map(|f| {
                let mut out = Vec::new();
                collect_calls(&f.body, &mut out);
                out
            })
            .collect();
        let names: Vec<Arc<str>> = self.functions.iter().map(|f| f.name.clone()).collect();
        for cycle in find_cycles(&deps) {
            let path = cycle_path(&cycle, &names);
            let span = self.functions[cycle[0]].span;
            self.error(span, format!("recursive function calls are not supported: {path}"));
        }
    }

    /// Checks a statement list; the flag reports whether every path returns.
    fn block(&mut self, st: &mut FnState, stmts: &[Stmt], returns: &[Ty]) -> (Vec<TStmt>, bool) {
        let mark = st.visible.len();
        let mut out = Vec::new();
        let mut terminated = false;
        for s in stmts {
            if terminated {
                self.error(s.span, "unreachable statement after return");
                break;
            }
            match self.stmt(st, s, returns) {
                Some((t, term)) => {
                    out.push(t);
                    terminated = term;
                }
                // Keep going as if the statement were well-formed so one
                // mistake does not cascade into missing-return errors.
                None => terminated = matches!(s.kind, StmtKind::Return(_)),
            }
        }
        st.visible.truncate(mark);
        (out, terminated)
    }

    fn stmt(&mut self, st: &mut FnState, s: &Stmt, returns: &[Ty]) -> Option<(TStmt, bool)> {
        match &s.kind {
            StmtKind::VarDecl { vars, init } => {
                let mut decls = Vec::new();
                for v in vars {
                    let ty = self.resolve_type(&v.ty);
                    decls.push((Arc::<str>::from(v.name.as_str()), ty, v.span));
                }
                let tys: Vec<Ty> = decls.iter().map(|d| d.1).collect();
                let rhs = match init {
                    Some(values) => Some(self.rhs(st, values, &tys, s.span)?),
                    None => None,
                };
                let mut out = Vec::new();
                for (name, ty, span) in decls {
                    let mark_start = st.visible.len();
                    if st.visible[..mark_start].iter().any(|(n, _)| *n == name) {
                        self.error(span, format!("variable `{name}` is already declared"));
                        return None;
                    }
                    let slot = st.declare(name.clone(), ty, span);
                    st.assigned[slot as usize] = rhs.is_some();
                    out.push((slot, name, ty, span));
                }
                Some((
                    TStmt::Decl {
                        vars: out,
                        init: rhs,
                        span: s.span,
                    },
                    false,
                ))
            }
            StmtKind::Assign { targets, values } => {
                let mut lvs = Vec::new();
                for t in targets {
                    lvs.push(self.lvalue(st, t)?);
                }
                for (i, a) in lvs.iter().enumerate() {
                    for b in &lvs[i + 1..] {
                        let overlap = a.slot == b.slot && a.path.iter().zip(&b.path).all(|(x, y)| x.0 == y.0);
                        if overlap {
                            self.error(b.span, "overlapping targets in tuple assignment");
                            return None;
                        }
                    }
                }
                let tys: Vec<Ty> = lvs.iter().map(|l| l.ty).collect();
                let rhs = self.rhs(st, values, &tys, s.span)?;
                for l in &lvs {
                    if l.path.is_empty() {
                        st.assigned[l.slot as usize] = true;
                    }
                }
                Some((
                    TStmt::Assign {
                        targets: lvs,
                        rhs,
                        span: s.span,
                    },
                    false,
                ))
            }
            StmtKind::Return(values) => {
                if values.len() != returns.len() {
                    self.error(
                        s.span,
                        format!(
                            "arity mismatch: function returns {} value(s), found {}",
                            returns.len(),
                            values.len()
                        ),
                    );
                    return None;
                }
                let mut out = Vec::new();
                for (v, ty) in values.iter().zip(returns) {
                    let t = self.code_expr(st, v, Some(*ty))?;
                    if !self.expect_ty(&t, *ty) {
                        return None;
                    }
                    out.push(t);
                }
                Some((
                    TStmt::Return {
                        values: out,
                        span: s.span,
                    },
                    true,
                ))
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let c = self.code_expr(st, cond, Some(Ty::Bool))?;
                if !self.expect_ty(&c, Ty::Bool) {
                    return None;
                }
                let before = st.assigned.clone();
                let (t, t_term) = self.block(st, then_body, returns);
                let after_then = core::mem::replace(&mut st.assigned, before.clone());
                let (e, e_term) = self.block(st, else_body, returns);
                let after_else = core::mem::take(&mut st.assigned);
                let n = st.locals.len();
                st.assigned = (0..n)
                    .map(|i| {
                        let a = after_then.get(i).copied().unwrap_or(false);
                        let b = after_else.get(i).copied().unwrap_or(false);
                        match (t_term, e_term) {
                            (true, false) => b,
                            (false, true) => a,
                            _ => a && b,
                        }
                    })
                    .collect();
                Some((
                    TStmt::If {
                        cond: c,
                        then_body: t,
                        else_body: e,
                        span: s.span,
                    },
                    t_term && e_term,
                ))
            }
        }
    }

    fn code_expr(&mut self, st: &FnState, e: &Expr, expected: Option<Ty>) -> Option<TExpr> {
        let scope = st.scope();
        self.expr(&scope, e, expected)
    }

    fn rhs(&mut self, st: &FnState, values: &[Expr], targets: &[Ty], span: Span) -> Option<Rhs> {
        if let [Expr {
            kind: ExprKind::Call(name, args),
            span: call_span,
        }] = values
        {
            if let Some(Global::Function(fid)) = self.names.get(name.as_str()).copied() {
                let (arg_tys, ret_tys): (Vec<Ty>, Vec<Ty>) = {
                    let f = &self.functions[fid.0 as usize];
                    (
                        f.params.iter().map(|p| p.ty).collect(),
                        f.returns.iter().map(|p| p.ty).collect(),
                    )
                };
                if args.len() != arg_tys.len() {
                    self.error(
                        *call_span,
                        format!(
                            "arity mismatch: `{name}` expects {} argument(s), found {}",
                            arg_tys.len(),
                            args.len()
                        ),
                    );
                    return None;
                }
                if ret_tys.len() != targets.len() {
                    self.error(
                        span,
                        format!(
                            "arity mismatch: `{name}` returns {} value(s) but {} target(s) are assigned",
                            ret_tys.len(),
                            targets.len()
                        ),
                    );
                    return None;
                }
                let mut targs = Vec::new();
                for (a, ty) in args.iter().zip(&arg_tys) {
                    let t = self.code_expr(st, a, Some(*ty))?;
                    if !self.expect_ty(&t, *ty) {
                        return None;
                    }
                    targs.push(t);
                }
                for (r, t) in ret_tys.iter().zip(targets) {
                    if !self.compatible(*r, *t) {
                        let msg = format!(
                            "type mismatch: `{name}` returns `{}` where `{}` is expected",
                            self.ty_name(*r),
                            self.ty_name(*t)
                        );
                        self.error(*call_span, msg);
                        return None;
                    }
                }
                return Some(Rhs::Call(CallExpr {
                    func: fid,
                    name: Arc::from(name.as_str()),
                    args: targs,
                    span: *call_span,
                }));
            }
        }
        if values.len() != targets.len() {
            self.error(
                span,
                format!(
                    "arity mismatch: {} target(s) but {} value(s)",
                    targets.len(),
                    values.len()
                ),
            );
            return None;
        }
        let mut out = Vec::new();
        for (v, ty) in values.iter().zip(targets) {
            let t = self.code_expr(st, v, Some(*ty))?;
            if !self.expect_ty(&t, *ty) {
                return None;
            }
            out.push(t);
        }
        Some(Rhs::Exprs(out))
    }

    fn lvalue(&mut self, st: &FnState, e: &Expr) -> Option<LValue> {
        match &e.kind {
            ExprKind::Var(name) => {
                let scope = st.scope();
                match scope.lookup(name) {
                    Some(l) => Some(LValue {
                        slot: l.slot,
                        name: l.name.clone(),
                        path: Vec::new(),
                        ty: l.ty,
                        span: e.span,
                    }),
                    None => {
                        match self.names.get(name.as_str()) {
                            Some(g) => {
                                let what = describe_global(*g);
                                self.error(e.span, format!("cannot assign to {what} `{name}`"));
                            }
                            None => self.error(e.span, format!("unknown identifier `{name}`")),
                        }
                        None
                    }
                }
            }
            ExprKind::Field(base, field) => {
                let mut lv = self.lvalue(st, base)?;
                if lv.path.is_empty() && !st.assigned[lv.slot as usize] {
                    self.error(
                        base.span,
                        format!("variable `{}` is used before being assigned", lv.name),
                    );
                    return None;
                }
                let Some(fields) = self.fields(lv.ty) else {
                    let found = self.ty_name(lv.ty);
                    self.error(e.span, format!("field access `.{field}` on non-record type `{found}`"));
                    return None;
                };
                let Some(idx) = fields.iter().position(|f| *f.name == **field) else {
                    let found = self.ty_name(lv.ty);
                    self.error(e.span, format!("type `{found}` has no field `{field}`"));
                    return None;
                };
                let f = &fields[idx];
                lv.path.push((idx as u32, f.name.clone()));
                lv.ty = f.ty;
                lv.span = e.span;
                Some(lv)
            }
            _ => {
                self.error(e.span, "invalid assignment target: expected a variable or field path");
                None
            }
        }
    }

    // ---- expressions ----

    fn expr(&mut self, scope: &Scope<'_>, e: &Expr, expected: Option<Ty>) -> Option<TExpr> {
        let span = e.span;
        let mk = |kind, ty| Some(TExpr { kind, ty, span });
        match &e.kind {
            ExprKind::Int(n) => mk(TExprKind::Int(n.clone()), Ty::Int),
            ExprKind::Bool(b) => mk(TExprKind::Bool(*b), Ty::Bool),
            ExprKind::Var(name) => {
                if let Some(l) = scope.lookup(name) {
                    if let Some(assigned) = scope.assigned {
                        if !assigned[l.slot as usize] {
                            self.error(span, format!("variable `{name}` is used before being assigned"));
                            return None;
                        }
                    }
                    return mk(TExprKind::Local(l.slot, l.name.clone()), l.ty);
                }
                if let Some(rid) = scope.self_record {
                    if let TypeDefBody::Record(fields) = &self.types[rid.0 as usize].body {
                        if let Some(idx) = fields.iter().position(|f| *f.name == **name) {
                            let f = &fields[idx];
                            let base = TExpr {
                                kind: TExprKind::Local(0, Arc::from("")),
                                ty: Ty::Named(rid),
                                span,
                            };
                            return mk(TExprKind::Field(Box::new(base), idx as u32, f.name.clone()), f.ty);
                        }
                    }
                }
                match self.names.get(name.as_str()).copied() {
                    Some(Global::Const(i)) => match &self.consts[i as usize] {
                        ConstState::Done(d) => {
                            let ty = match d.value {
                                ConstValue::Int(_) => Ty::Int,
                                ConstValue::Bool(_) => Ty::Bool,
                            };
                            mk(TExprKind::Const(d.name.clone(), d.value.clone()), ty)
                        }
                        _ => None,
                    },
                    Some(g) => {
                        let what = describe_global(g);
                        self.error(span, format!("`{name}` is a {what}, not a value"));
                        None
                    }
                    None => {
                        self.error(span, format!("unknown identifier `{name}`"));
                        None
                    }
                }
            }
            ExprKind::Field(base, field) => {
                let b = self.expr(scope, base, None)?;
                let Some(fields) = self.fields(b.ty) else {
                    let found = self.ty_name(b.ty);
                    self.error(span, format!("field access `.{field}` on non-record type `{found}`"));
                    return None;
                };
                let Some(idx) = fields.iter().position(|f| *f.name == **field) else {
                    let found = self.ty_name(b.ty);
                    self.error(span, format!("type `{found}` has no field `{field}`"));
                    return None;
                };
                let (fname, fty) = (fields[idx].name.clone(), fields[idx].ty);
                mk(TExprKind::Field(Box::new(b), idx as u32, fname), fty)
            }
            ExprKind::Unary(op, inner) => {
                let want = match op {
                    UnaryOp::Neg => Ty::Int,
                    UnaryOp::Not => Ty::Bool,
                };
                let t = self.expr(scope, inner, Some(want))?;
                if !self.expect_ty(&t, want) {
                    return None;
                }
                mk(TExprKind::Unary(*op, Box::new(t)), want)
            }
            ExprKind::Binary(op, l, r) => self.binary(scope, *op, l, r, span),
            ExprKind::Call(name, args) => match self.names.get(name.as_str()).copied() {
                Some(Global::Property(pid)) => {
                    if scope.ctx != Ctx::Spec {
                        self.error(
                            span,
                            format!("property `{name}` can only be used in specifications (requires, ensures, where)"),
                        );
                        return None;
                    }
                    let ptys: Vec<Ty> = self.properties[pid.0 as usize].params.iter().map(|p| p.ty).collect();
                    if ptys.len() != args.len() {
                        self.error(
                            span,
                            format!(
                                "arity mismatch: property `{name}` expects {} argument(s), found {}",
                                ptys.len(),
                                args.len()
                            ),
                        );
                        return None;
                    }
                    let mut targs = Vec::new();
                    for (a, ty) in args.iter().zip(&ptys) {
                        let t = self.expr(scope, a, Some(*ty))?;
                        if !self.expect_ty(&t, *ty) {
                            return None;
                        }
                        targs.push(t);
                    }
                    mk(TExprKind::PropCall(pid, Arc::from(name.as_str()), targs), Ty::Bool)
                }
                Some(Global::Function(_)) => {
                    let msg = match scope.ctx {
                        Ctx::Spec => format!("function `{name}` cannot be called from a specification; use a property"),
                        Ctx::Code => format!(
                            "call to function `{name}` must be the entire right-hand side of an assignment or declaration"
                        ),
                    };
                    self.error(span, msg);
                    None
                }
                Some(g) => {
                    let what = describe_global(g);
                    self.error(span, format!("`{name}` is a {what} and cannot be called"));
                    None
                }
                None => {
                    self.error(span, format!("unknown identifier `{name}`"));
                    None
                }
            },
            ExprKind::Record(items) => {
                let Some(ty) = expected.filter(|t| self.fields(*t).is_some()) else {
                    let msg = match expected {
                        Some(t) => format!("type mismatch: expected `{}`, found a record literal", self.ty_name(t)),
                        None => "cannot infer the record type of this literal".into(),
                    };
                    self.error(span, msg);
                    return None;
                };
                let fields: Vec<(Arc<str>, Ty)> = self
                    .fields(ty)
                    .unwrap_or(&[])
                    .iter()
                    .map(|f| (f.name.clone(), f.ty))
                    .collect();
                let mut out = Vec::new();
                let mut seen = BTreeSet::new();
                for (fname, v) in items {
                    let Some(idx) = fields.iter().position(|f| *f.0 == **fname) else {
                        let found = self.ty_name(ty);
                        self.error(v.span, format!("type `{found}` has no field `{fname}`"));
                        return None;
                    };
                    if !seen.insert(idx) {
                        self.error(v.span, format!("field `{fname}` given twice in record literal"));
                        return None;
                    }
                    let fty = fields[idx].1;
                    let t = self.expr(scope, v, Some(fty))?;
                    if !self.expect_ty(&t, fty) {
                        return None;
                    }
                    out.push((idx as u32, fields[idx].0.clone(), t));
                }
                let missing: Vec<&str> = fields
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !seen.contains(i))
                    .map(|(_, f)| &*f.0)
                    .collect();
                if !missing.is_empty() {
                    let name = self.ty_name(ty);
                    self.error(
                        span,
                        format!(
                            "partial record literal: `{name}` literal is missing field(s) {}",
                            missing.iter().map(|m| format!("`{m}`")).collect::<Vec<_>>().join(", ")
                        ),
                    );
                    return None;
                }
                mk(TExprKind::Record(out), ty)
            }
        }
    }

    fn binary(&mut self, scope: &Scope<'_>, op: BinaryOp, l: &Expr, r: &Expr, span: Span) -> Option<TExpr> {
        use BinaryOp::*;
        let (operand, result) = match op {
            Add | Sub | Mul | Div | Rem | Pow => (Some(Ty::Int), Ty::Int),
            Lt | Le | Gt | Ge => (Some(Ty::Int), Ty::Bool),
            And | Or | Implies => (Some(Ty::Bool), Ty::Bool),
            Eq | Ne => (None, Ty::Bool),
        };
        if op == Pow {
            self.error(span, "exponent operator `**` is only allowed in constant declarations");
            return None;
        }
        let (tl, tr) = match operand {
            Some(want) => {
                let tl = self.expr(scope, l, Some(want));
                let tr = self.expr(scope, r, Some(want));
                let (tl, tr) = (tl?, tr?);
                if !self.expect_ty(&tl, want) | !self.expect_ty(&tr, want) {
                    return None;
                }
                (tl, tr)
            }
            None => {
                // Type the side that is not a record literal first, so the
                // literal can take its type from the other side.
                if matches!(l.kind, ExprKind::Record(_)) {
                    let tr = self.expr(scope, r, None)?;
                    let tl = self.expr(scope, l, Some(tr.ty))?;
                    (tl, tr)
                } else {
                    let tl = self.expr(scope, l, None)?;
                    let tr = self.expr(scope, r, Some(tl.ty))?;
                    (tl, tr)
                }
            }
        };
        if operand.is_none() && !self.compatible(tl.ty, tr.ty) {
            let msg = format!(
                "type mismatch: cannot compare `{}` with `{}`",
                self.ty_name(tl.ty),
                self.ty_name(tr.ty)
            );
            self.error(span, msg);
            return None;
        }
        if matches!(op, Div | Rem) && scope.ctx == Ctx::Spec && !is_const_nonzero(&tr) {
            self.error(tr.span, "divisor in a specification must be a nonzero constant");
            return None;
        }
        Some(TExpr {
            kind: TExprKind::Binary(op, Box::new(tl), Box::new(tr)),
            ty: result,
            span,
        })
    }

    // ---- bounded integer types ----

    fn compute_bounds(&mut self) -> (BTreeMap<TypeId, BoundedIntType>, BTreeMap<TypeId, bool>) {
        let mut bounds = BTreeMap::new();
        let mut exact = BTreeMap::new();
        for i in 0..self.types.len() {
            let id = TypeId(i as u32);
            if self.shape(Ty::Named(id)) != Shape::Int {
                continue;
            }
            let mut lo: Option<BigInt> = None;
            let mut hi: Option<BigInt> = None;
            let mut all_interval = true;
            let mut ty = Ty::Named(id);
            while let Ty::Named(t) = ty {
                let def = &self.types[t.0 as usize];
                for w in &def.where_clauses {
                    all_interval &= interval_of(w, &mut lo, &mut hi);
                }
                ty = match &def.body {
                    TypeDefBody::Constrained { base, .. } => *base,
                    TypeDefBody::Record(_) => break,
                };
            }
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if lo > hi {
                    let span = self.types[i].span;
                    let name = self.types[i].name.clone();
                    self.error(span, format!("type `{name}` has an empty range {lo}..{hi}"));
                    continue;
                }
                bounds.insert(
                    id,
                    BoundedIntType {
                        name: self.types[i].name.clone(),
                        lo,
                        hi,
                    },
                );
                exact.insert(id, all_interval);
            }
        }
        (bounds, exact)
    }
}

fn const_of(e: &TExpr) -> Option<BigInt> {
    match &e.kind {
        TExprKind::Int(n) | TExprKind::Const(_, ConstValue::Int(n)) => Some(n.clone()),
        TExprKind::Unary(UnaryOp::Neg, inner) => const_of(inner).map(|n| -n),
        _ => None,
    }
}

fn tighten(slot: &mut Option<BigInt>, v: BigInt, lower: bool) {
    *slot = Some(match slot.take() {
        Some(old) if lower => old.max(v),
        Some(old) => old.min(v),
        None => v,
    });
}

/// Folds a clause of the form `b >= c`, `c <= b`, `b == c`, ... (possibly
/// conjoined) into `lo`/`hi`. Returns whether the whole clause had that form.
fn interval_of(e: &TExpr, lo: &mut Option<BigInt>, hi: &mut Option<BigInt>) -> bool {
    let TExprKind::Binary(op, l, r) = &e.kind else {
        return false;
    };
    if *op == BinaryOp::And {
        let a = interval_of(l, lo, hi);
        let b = interval_of(r, lo, hi);
        return a && b;
    }
    let is_binder = |x: &TExpr| matches!(x.kind, TExprKind::Local(0, _));
    let (op, c) = if is_binder(l) {
        match const_of(r) {
            Some(c) => (*op, c),
            None => return false,
        }
    } else if is_binder(r) {
        let flipped = match op {
            BinaryOp::Lt => BinaryOp::Gt,
            BinaryOp::Le => BinaryOp::Ge,
            BinaryOp::Gt => BinaryOp::Lt,
            BinaryOp::Ge => BinaryOp::Le,
            other => *other,
        };
        match const_of(l) {
            Some(c) => (flipped, c),
            None => return false,
        }
    } else {
        return false;
    };
    match op {
        BinaryOp::Ge => tighten(lo, c, true),
        BinaryOp::Gt => tighten(lo, c + BigInt::one(), true),
        BinaryOp::Le => tighten(hi, c, false),
        BinaryOp::Lt => tighten(hi, c - BigInt::one(), false),
        BinaryOp::Eq => {
            tighten(lo, c.clone(), true);
            tighten(hi, c, false);
        }
        _ => return false,
    }
    true
}

fn collect_prop_calls(e: &TExpr, out: &mut Vec<usize>) {
    match &e.kind {
        TExprKind::PropCall(id, _, args) => {
            out.push(id.0 as usize);
            args.iter().for_each(|a| collect_prop_calls(a, out));
        }
        TExprKind::Field(b, ..) | TExprKind::Unary(_, b) => collect_prop_calls(b, out),
        TExprKind::Binary(_, l, r) => {
            collect_prop_calls(l, out);
            collect_prop_calls(r, out);
        }
        TExprKind::Record(f) => f.iter().for_each(|(_, _, v)| collect_prop_calls(v, out)),
        _ => {}
    }
}

fn collect_calls(body: &[TStmt], out: &mut Vec<usize>) {
    for s in body {
        match s {
            TStmt::Decl {
                init: Some(Rhs::Call(c)),
                ..
            }
            | TStmt::Assign { rhs: Rhs::Call(c), .. } => out.push(c.func.0 as usize),
            TStmt::If {
                then_body, else_body, ..
            } => {
                collect_calls(then_body, out);
                collect_calls(else_body, out);
            }
            _ => {}
        }
    }
}

/// One representative cycle per strongly connected group, each reported
/// starting from its smallest node, in ascending order.
fn find_cycles(deps: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = deps.len();
    let mut reported = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if reported[start] {
            continue;
        }
        // Depth-first search for a path from `start` back to itself
        // through nodes not smaller than `start`.
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        let mut on_path = vec![false; n];
        let mut visited = vec![false; n];
        on_path[start] = true;
        let mut found = None;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < deps[node].len() {
                let m = deps[node][*next];
                *next += 1;
                if m == start {
                    found = Some(stack.iter().map(|(v, _)| *v).collect::<Vec<_>>());
                    break;
                }
                if m > start && !visited[m] && !on_path[m] {
                    visited[m] = true;
                    on_path[m] = true;
                    stack.push((m, 0));
                }
            } else {
                on_path[node] = false;
                stack.pop();
            }
        }
        if let Some(c) = found {
            for v in &c {
                reported[*v] = true;
            }
            cycles.push(c);
        }
    }
    cycles
}

fn cycle_path(cycle: &[usize], names: &[Arc<str>]) -> String {
    let mut parts: Vec<&str> = cycle.iter().map(|i| &*names[*i]).collect();
    parts.push(&names[cycle[0]]);
    parts.join(" -> ")
}

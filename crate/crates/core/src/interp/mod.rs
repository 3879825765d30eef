//! Concrete reference interpreter.
//!
//! Functions run on exact integers with every contract checked at runtime.
//! The first failing check reverts the call; since arguments are passed by
//! value the caller's state is untouched. Together with [`enumerate_inputs`]
//! this is the small-scope oracle the verifier is compared against.

mod enumerate;
mod literal;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::frontend::{BinaryOp, UnaryOp};
use crate::semantics::{ConstValue, FunctionDef, ResolvedModule, Rhs, Shape, TExpr, TExprKind, TStmt, Ty};
use crate::vcgen::{post_checks, validity_kind, ObligationKind, Target};
use crate::{SourceSpan, Span};

pub use enumerate::{enumerate_inputs, EnumError, Inputs};
pub use literal::{parse_value, LiteralError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    /// Fields in declaration order.
    Record(Vec<(Arc<str>, Value)>),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn int(n: impl Into<BigInt>) -> Self {
        Value::Int(n.into())
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Field by name.
    pub fn field(&self, name: &str) -> Option<&Value> {
        match self {
            Value::Record(fs) => fs.iter().find(|(n, _)| &**n == name).map(|(_, v)| v),
            _ => None,
        }
    }

    /// Follows a dotted path such as `wager.value`.
    pub fn get(&self, path: &str) -> Option<&Value> {
        path.split('.').try_fold(self, |v, f| v.field(f))
    }

    /// Mutable access by dotted path.
    pub fn get_mut(&mut self, path: &str) -> Option<&mut Value> {
        path.split('.').try_fold(self, |v, f| match v {
            Value::Record(fs) => fs.iter_mut().find(|(n, _)| &**n == f).map(|(_, v)| v),
            _ => None,
        })
    }

    fn at(&self, idx: u32) -> &Value {
        match self {
            Value::Record(fs) => &fs[idx as usize].1,
            _ => panic!("field access on a non-record value"),
        }
    }

    fn at_mut(&mut self, idx: u32) -> &mut Value {
        match self {
            Value::Record(fs) => &mut fs[idx as usize].1,
            _ => panic!("field access on a non-record value"),
        }
    }

    /// Every scalar leaf with its dotted path below `prefix`.
    pub fn leaves(&self, prefix: &str, out: &mut Vec<(String, Value)>) {
        match self {
            Value::Record(fs) => {
                for (n, v) in fs {
                    v.leaves(&format!("{prefix}.{n}"), out);
                }
            }
            _ => out.push((prefix.into(), self.clone())),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Record(fs) => {
                f.write_str("{")?;
                for (i, (n, v)) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n}: {v}")?;
                }
                f.write_str("}")
            }
            Value::Tuple(vs) => {
                f.write_str("(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Kind of a failed runtime check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    /// A check that has a matching verifier obligation.
    Check(ObligationKind),
    /// An argument of the entry call violates its parameter type.
    EntryConstraint,
    /// A requires clause of the entry call is false.
    EntryRequires,
}

impl ViolationKind {
    pub fn obligation_kind(self) -> Option<ObligationKind> {
        match self {
            ViolationKind::Check(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::Check(k) => write!(f, "{k}"),
            ViolationKind::EntryConstraint => f.write_str("EntryConstraint"),
            ViolationKind::EntryRequires => f.write_str("EntryRequires"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuntimeViolation {
    pub kind: ViolationKind,
    /// Function whose check failed (may be a callee of the entry function).
    pub function: Arc<str>,
    pub span: SourceSpan,
    pub message: String,
    /// Values involved, by name.
    pub values: Vec<(String, Value)>,
}

impl fmt::Display for RuntimeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {}:{} in `{}`: {}",
            self.kind, self.span.file, self.span.span, self.function, self.message
        )?;
        for (n, v) in &self.values {
            write!(f, "; {n} = {v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CallOutcome {
    Returned(Vec<Value>),
    Reverted(RuntimeViolation),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InterpError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{function}` expects {expected} argument(s), got {got}")]
    Arity {
        function: String,
        expected: usize,
        got: usize,
    },
    #[error("argument `{param}` does not have the shape of `{ty}`")]
    Shape { param: String, ty: String },
}

/// Runs `function` on `args`: checks argument types and requires, executes
/// the body with every contract check, and reports the first failure.
pub fn eval_function(module: &ResolvedModule, function: &str, args: &[Value]) -> Result<CallOutcome, InterpError> {
    let id = module
        .function_by_name(function)
        .ok_or_else(|| InterpError::UnknownFunction(function.into()))?;
    let func = module.function(id);
    if args.len() != func.params.len() {
        return Err(InterpError::Arity {
            function: function.into(),
            expected: func.params.len(),
            got: args.len(),
        });
    }
    for (p, a) in func.params.iter().zip(args) {
        if !has_shape(module, p.ty, a) {
            return Err(InterpError::Shape {
                param: String::from(&*p.name),
                ty: module.type_name(p.ty),
            });
        }
    }
    let m = Machine { module };
    for (p, a) in func.params.iter().zip(args) {
        if !m.valid(p.ty, a) {
            return Ok(CallOutcome::Reverted(m.violation(
                ViolationKind::EntryConstraint,
                func,
                p.span,
                format!("argument `{}` is not a valid {}", p.name, module.type_name(p.ty)),
                vec![(String::from(&*p.name), a.clone())],
            )));
        }
    }
    for r in &func.requires {
        if !m.truth(r, args) {
            return Ok(CallOutcome::Reverted(m.violation(
                ViolationKind::EntryRequires,
                func,
                r.span,
                format!("requires {r} is false"),
                named(func, args),
            )));
        }
    }
    Ok(match m.run(func, args.to_vec()) {
        Ok(vals) => CallOutcome::Returned(vals),
        Err(v) => CallOutcome::Reverted(v),
    })
}

/// Whether `v` satisfies every where clause of `ty`, including those of
/// its fields.
pub fn check_type_invariant(v: &Value, ty: Ty, module: &ResolvedModule) -> bool {
    Machine { module }.valid(ty, v)
}

/// Whether `v` is structurally a value of `ty`.
pub fn has_shape(module: &ResolvedModule, ty: Ty, v: &Value) -> bool {
    match (module.shape(ty), v) {
        (Shape::Int, Value::Int(_)) | (Shape::Bool, Value::Bool(_)) => true,
        (Shape::Record(_), Value::Record(fs)) => {
            let defs = module.fields(ty).unwrap_or(&[]);
            defs.len() == fs.len()
                && defs
                    .iter()
                    .zip(fs)
                    .all(|(d, (n, fv))| d.name == *n && has_shape(module, d.ty, fv))
        }
        _ => false,
    }
}

fn named(func: &FunctionDef, args: &[Value]) -> Vec<(String, Value)> {
    func.params
        .iter()
        .zip(args)
        .map(|(p, a)| (String::from(&*p.name), a.clone()))
        .collect()
}

enum Env<'a> {
    Frame(&'a [Option<Value>]),
    Bound(&'a [Value]),
}

type Exec<T> = Result<T, RuntimeViolation>;

struct Machine<'m> {
    module: &'m ResolvedModule,
}

impl<'m> Machine<'m> {
    fn violation(
        &self,
        kind: ViolationKind,
        func: &FunctionDef,
        span: Span,
        message: String,
        values: Vec<(String, Value)>,
    ) -> RuntimeViolation {
        RuntimeViolation {
            kind,
            function: func.name.clone(),
            span: SourceSpan {
                file: self.module.file.clone(),
                span,
            },
            message,
            values,
        }
    }

    /// Executes a body whose entry conditions were already checked.
    fn run(&self, func: &FunctionDef, args: Vec<Value>) -> Exec<Vec<Value>> {
        let mut frame: Vec<Option<Value>> = vec![None; func.locals.len()];
        for (i, a) in args.iter().enumerate() {
            frame[i] = Some(a.clone());
        }
        match self.block(func, &args, &mut frame, &func.body)? {
            Some(vals) => Ok(vals),
            None => panic!("`{}` finished without returning", func.name),
        }
    }

    fn block(
        &self,
        func: &FunctionDef,
        entry: &[Value],
        frame: &mut Vec<Option<Value>>,
        stmts: &[TStmt],
    ) -> Exec<Option<Vec<Value>>> {
        for s in stmts {
            if let Some(ret) = self.stmt(func, entry, frame, s)? {
                return Ok(Some(ret));
            }
        }
        Ok(None)
    }

    fn stmt(
        &self,
        func: &FunctionDef,
        entry: &[Value],
        frame: &mut Vec<Option<Value>>,
        s: &TStmt,
    ) -> Exec<Option<Vec<Value>>> {
        match s {
            TStmt::Decl { init: None, .. } => Ok(None),
            TStmt::Decl {
                vars, init: Some(rhs), ..
            } => {
                let targets: Vec<Target<'_>> = vars
                    .iter()
                    .map(|(slot, _, ty, span)| Target {
                        slot: *slot,
                        path: &[],
                        ty: *ty,
                        span: *span,
                    })
                    .collect();
                self.write(func, frame, &targets, rhs)?;
                Ok(None)
            }
            TStmt::Assign { targets, rhs, .. } => {
                let targets: Vec<Target<'_>> = targets
                    .iter()
                    .map(|lv| Target {
                        slot: lv.slot,
                        path: &lv.path,
                        ty: lv.ty,
                        span: lv.span,
                    })
                    .collect();
                self.write(func, frame, &targets, rhs)?;
                Ok(None)
            }
            TStmt::Return { values, .. } => {
                let mut vals = Vec::with_capacity(values.len());
                for v in values {
                    vals.push(self.eval(func, v, &Env::Frame(frame))?);
                }
                let mut env = entry.to_vec();
                env.extend(vals.iter().cloned());
                for en in &func.ensures {
                    if !self.truth(en, &env) {
                        let mut shown = named(func, entry);
                        shown.extend(
                            func.returns
                                .iter()
                                .zip(&vals)
                                .map(|(r, v)| (String::from(&*r.name), v.clone())),
                        );
                        return Err(self.violation(
                            ViolationKind::Check(ObligationKind::Postcondition),
                            func,
                            en.span,
                            format!("postcondition {en} is false"),
                            shown,
                        ));
                    }
                }
                for ((r, v), e) in func.returns.iter().zip(&vals).zip(values) {
                    if self.module.is_constrained(r.ty) && !self.valid(r.ty, v) {
                        return Err(self.type_violation(
                            func,
                            validity_kind(self.module, r.ty),
                            e.span,
                            r.ty,
                            &format!("returned `{}`", r.name),
                            v,
                        ));
                    }
                }
                Ok(Some(vals))
            }
            TStmt::If {
                cond,
                then_body,
                else_body,
                ..
            } => {
                let c = self.eval(func, cond, &Env::Frame(frame))?;
                let body = if c == Value::Bool(true) { then_body } else { else_body };
                self.block(func, entry, frame, body)
            }
        }
    }

    fn write(&self, func: &FunctionDef, frame: &mut [Option<Value>], targets: &[Target<'_>], rhs: &Rhs) -> Exec<()> {
        let (values, tys) = match rhs {
            Rhs::Exprs(es) => {
                let mut vals = Vec::with_capacity(es.len());
                for e in es {
                    vals.push(self.eval(func, e, &Env::Frame(frame))?);
                }
                (vals, es.iter().map(|e| e.ty).collect::<Vec<_>>())
            }
            Rhs::Call(c) => {
                let callee = self.module.function(c.func);
                let mut args = Vec::with_capacity(c.args.len());
                for (a, p) in c.args.iter().zip(&callee.params) {
                    let v = self.eval(func, a, &Env::Frame(frame))?;
                    if !self.module.flows_trivially(a.ty, p.ty) && !self.valid(p.ty, &v) {
                        return Err(self.type_violation(
                            func,
                            validity_kind(self.module, p.ty),
                            a.span,
                            p.ty,
                            &format!("argument `{}` of `{}`", p.name, callee.name),
                            &v,
                        ));
                    }
                    args.push(v);
                }
                for r in &callee.requires {
                    if !self.truth(r, &args) {
                        return Err(self.violation(
                            ViolationKind::Check(ObligationKind::CalleePrecondition),
                            func,
                            c.span,
                            format!("precondition of `{}` is false: {r}", callee.name),
                            named(callee, &args),
                        ));
                    }
                }
                let vals = self.run(callee, args)?;
                (vals, callee.returns.iter().map(|r| r.ty).collect())
            }
        };
        for (t, v) in targets.iter().zip(values) {
            let slot = &mut frame[t.slot as usize];
            if t.path.is_empty() {
                *slot = Some(v);
            } else {
                let mut loc = slot.as_mut().expect("definitely assigned");
                for (idx, _) in t.path {
                    loc = loc.at_mut(*idx);
                }
                *loc = v;
            }
        }
        for pc in post_checks(self.module, func, targets, &tys) {
            let mut v = frame[pc.slot as usize].as_ref().expect("just written");
            for idx in &pc.path {
                v = v.at(*idx);
            }
            let ok = if pc.own_only {
                self.own_clauses_hold(pc.ty, v)
            } else {
                self.valid(pc.ty, v)
            };
            if !ok {
                return Err(self.type_violation(func, pc.kind, pc.span, pc.ty, &format!("`{}`", pc.what), v));
            }
        }
        Ok(())
    }

    fn type_violation(
        &self,
        func: &FunctionDef,
        kind: ObligationKind,
        span: Span,
        ty: Ty,
        what: &str,
        v: &Value,
    ) -> RuntimeViolation {
        let tname = self.module.type_name(ty);
        let message = match (self.module.bounds_of(ty), v) {
            (Some(b), Value::Int(n)) if *n < b.lo => {
                format!("underflow: {what} = {n} is below the {tname} minimum {}", b.lo)
            }
            (Some(b), Value::Int(n)) if *n > b.hi => {
                format!("overflow: {what} = {n} exceeds the {tname} maximum {}", b.hi)
            }
            _ if kind == ObligationKind::RecordInvariant => {
                format!("invariant of {tname} is false for {what}")
            }
            _ => format!("{what} does not satisfy {tname}"),
        };
        self.violation(
            ViolationKind::Check(kind),
            func,
            span,
            message,
            vec![(String::from(what.trim_matches('`')), v.clone())],
        )
    }

    fn valid(&self, ty: Ty, v: &Value) -> bool {
        if !self.own_clauses_hold(ty, v) {
            return false;
        }
        match (self.module.fields(ty), v) {
            (Some(defs), Value::Record(fs)) => defs.iter().zip(fs).all(|(d, (_, fv))| self.valid(d.ty, fv)),
            _ => true,
        }
    }

    fn own_clauses_hold(&self, ty: Ty, v: &Value) -> bool {
        if let (Some(b), Value::Int(n)) = (self.module.bounds_of(ty), v) {
            if self.module.bounds_exact(ty) {
                return b.lo <= *n && *n <= b.hi;
            }
        }
        self.module.constraint_chain(ty).into_iter().all(|id| {
            self.module
                .type_def(id)
                .where_clauses
                .iter()
                .all(|c| self.truth(c, core::slice::from_ref(v)))
        })
    }

    /// Evaluates a specification expression. Specifications only divide by
    /// nonzero constants, so this cannot fail.
    fn truth(&self, e: &TExpr, env: &[Value]) -> bool {
        match self.eval_spec(e, env) {
            Value::Bool(b) => b,
            _ => panic!("non-boolean specification"),
        }
    }

    fn eval_spec(&self, e: &TExpr, env: &[Value]) -> Value {
        self.eval_in(None, e, &Env::Bound(env))
            .unwrap_or_else(|v| panic!("specification failed to evaluate: {v}"))
    }

    fn eval(&self, func: &FunctionDef, e: &TExpr, env: &Env<'_>) -> Exec<Value> {
        self.eval_in(Some(func), e, env)
    }

    fn eval_in(&self, func: Option<&FunctionDef>, e: &TExpr, env: &Env<'_>) -> Exec<Value> {
        if let Some(v) = place(e, env) {
            return Ok(v.clone());
        }
        Ok(match &e.kind {
            TExprKind::Int(n) => Value::Int(n.clone()),
            TExprKind::Bool(b) => Value::Bool(*b),
            TExprKind::Const(_, ConstValue::Int(n)) => Value::Int(n.clone()),
            TExprKind::Const(_, ConstValue::Bool(b)) => Value::Bool(*b),
            TExprKind::Local(slot, name) => match env {
                Env::Frame(f) => f[*slot as usize]
                    .clone()
                    .unwrap_or_else(|| panic!("`{name}` read before assignment")),
                Env::Bound(vs) => vs[*slot as usize].clone(),
            },
            TExprKind::Field(base, idx, _) => self.eval_in(func, base, env)?.at(*idx).clone(),
            TExprKind::Unary(op, a) => match (op, self.eval_in(func, a, env)?) {
                (UnaryOp::Neg, Value::Int(n)) => Value::Int(-n),
                (UnaryOp::Not, Value::Bool(b)) => Value::Bool(!b),
                _ => panic!("ill-typed unary operand"),
            },
            TExprKind::Binary(op, l, r) if matches!(op, BinaryOp::Eq | BinaryOp::Ne) && place(l, env).is_some() => {
                let lv = place(l, env).expect("checked");
                let same = match place(r, env) {
                    Some(rv) => lv == rv,
                    None => *lv == self.eval_in(func, r, env)?,
                };
                Value::Bool(same == (*op == BinaryOp::Eq))
            }
            TExprKind::Binary(op, l, r) => {
                let lv = self.eval_in(func, l, env)?;
                match op {
                    BinaryOp::And | BinaryOp::Or | BinaryOp::Implies => {
                        let x = lv.as_bool().expect("boolean operand");
                        let short = match op {
                            BinaryOp::And => (!x).then_some(false),
                            BinaryOp::Or => x.then_some(true),
                            _ => (!x).then_some(true),
                        };
                        if let Some(b) = short {
                            return Ok(Value::Bool(b));
                        }
                        return self.eval_in(func, r, env);
                    }
                    BinaryOp::Eq | BinaryOp::Ne => {
                        let same = match place(r, env) {
                            Some(rv) => lv == *rv,
                            None => lv == self.eval_in(func, r, env)?,
                        };
                        return Ok(Value::Bool(same == (*op == BinaryOp::Eq)));
                    }
                    _ => {}
                }
                let rv = self.eval_in(func, r, env)?;
                let (Value::Int(x), Value::Int(y)) = (lv, rv) else {
                    panic!("ill-typed arithmetic operand");
                };
                match op {
                    BinaryOp::Add => Value::Int(x + y),
                    BinaryOp::Sub => Value::Int(x - y),
                    BinaryOp::Mul => Value::Int(x * y),
                    BinaryOp::Div | BinaryOp::Rem if y.is_zero() => {
                        let func = func.expect("specification divisors are nonzero constants");
                        return Err(self.violation(
                            ViolationKind::Check(ObligationKind::DivByZero),
                            func,
                            e.span,
                            format!("division by zero in {e}"),
                            vec![(alloc::string::ToString::to_string(&**r), Value::Int(y))],
                        ));
                    }
                    BinaryOp::Div => Value::Int(x / y),
                    BinaryOp::Rem => Value::Int(x % y),
                    BinaryOp::Lt => Value::Bool(x < y),
                    BinaryOp::Le => Value::Bool(x <= y),
                    BinaryOp::Gt => Value::Bool(x > y),
                    BinaryOp::Ge => Value::Bool(x >= y),
                    BinaryOp::Pow => panic!("`**` survives only in constants"),
                    _ => unreachable!(),
                }
            }
            TExprKind::PropCall(id, _, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_in(func, a, env)?);
                }
                Value::Bool(self.truth(&self.module.property(*id).body, &vals))
            }
            TExprKind::Record(fields) => {
                let defs = self.module.fields(e.ty).expect("record literal of record type");
                let mut vals: Vec<Option<Value>> = vec![None; defs.len()];
                for (idx, name, fe) in fields {
                    let v = self.eval_in(func, fe, env)?;
                    let fty = defs[*idx as usize].ty;
                    if let Some(func) = func {
                        if !self.module.flows_trivially(fe.ty, fty) && !self.valid(fty, &v) {
                            return Err(self.type_violation(
                                func,
                                validity_kind(self.module, fty),
                                fe.span,
                                fty,
                                &format!("field `{name}`"),
                                &v,
                            ));
                        }
                    }
                    vals[*idx as usize] = Some(v);
                }
                let rec = Value::Record(
                    defs.iter()
                        .zip(vals)
                        .map(|(d, v)| (d.name.clone(), v.expect("full literal")))
                        .collect(),
                );
                if let Some(func) = func {
                    if self.module.has_own_clauses(e.ty) && !self.own_clauses_hold(e.ty, &rec) {
                        return Err(self.type_violation(
                            func,
                            ObligationKind::RecordInvariant,
                            e.span,
                            e.ty,
                            "the record literal",
                            &rec,
                        ));
                    }
                }
                rec
            }
        })
    }
}

/// The value a local or a field path of one denotes, without copying.
fn place<'a>(e: &TExpr, env: &Env<'a>) -> Option<&'a Value> {
    match &e.kind {
        TExprKind::Local(slot, name) => Some(match env {
            Env::Frame(f) => f[*slot as usize]
                .as_ref()
                .unwrap_or_else(|| panic!("`{name}` read before assignment")),
            Env::Bound(vs) => &vs[*slot as usize],
        }),
        TExprKind::Field(base, idx, _) => place(base, env).map(|v| v.at(*idx)),
        _ => None,
    }
}

#[cfg(test)]
mod tests;

//! Exhaustive enumeration of valid inputs for small bounded types.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{check_type_invariant, Value};
use crate::semantics::{ResolvedModule, Shape, TExpr, TExprKind, Ty, TypeDefBody};

/// Largest scalar domain enumerated eagerly.
pub const MAX_DOMAIN: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EnumError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("parameter `{param}` has type `{ty}`, which is not finitely enumerable")]
    NotEnumerable { param: String, ty: String },
    #[error("type `{ty}` has {size} values, more than the enumeration limit")]
    TooLarge { ty: String, size: BigInt },
}

/// One position of the odometer: a parameter, or a top-level field of a
/// record parameter.
struct Slot {
    param: usize,
    /// Field index within the parameter, if the parameter is split.
    field: Option<usize>,
    choices: Arc<Vec<Value>>,
    /// Where clauses of the parameter's type that can be decided once this
    /// slot is set (all fields they read are at or before it).
    checks: Vec<TExpr>,
}

/// Lazy stream of argument lists, in lexicographic order of the slots.
pub struct Inputs<'m> {
    module: &'m ResolvedModule,
    slots: Vec<Slot>,
    /// Field names of split record parameters.
    records: Vec<Option<Vec<Arc<str>>>>,
    pos: Vec<usize>,
    level: usize,
    started: bool,
    done: bool,
}

/// Every argument list of `function` whose values satisfy the parameter
/// types (requires clauses are not consulted).
pub fn enumerate_inputs<'m>(module: &'m ResolvedModule, function: &str) -> Result<Inputs<'m>, EnumError> {
    let id = module
        .function_by_name(function)
        .ok_or_else(|| EnumError::UnknownFunction(function.into()))?;
    let func = module.function(id);
    let mut cache = BTreeMap::new();
    let mut slots = Vec::new();
    let mut records = Vec::new();
    for (i, p) in func.params.iter().enumerate() {
        let err = |e: EnumError| match e {
            EnumError::NotEnumerable { .. } => EnumError::NotEnumerable {
                param: String::from(&*p.name),
                ty: module.type_name(p.ty),
            },
            other => other,
        };
        // A plain record is split into its fields so its where clauses can
        // prune partial assignments.
        if let (Ty::Named(tid), Some(fields)) = (p.ty, module.fields(p.ty)) {
            if matches!(module.type_def(tid).body, TypeDefBody::Record(_)) {
                let clauses = &module.type_def(tid).where_clauses;
                let last = fields.len().saturating_sub(1);
                for (fi, f) in fields.iter().enumerate() {
                    let choices = domain(module, f.ty, &mut cache).map_err(err)?;
                    let checks = clauses
                        .iter()
                        .filter(|c| last_field_read(c).unwrap_or(last).min(last) == fi)
                        .cloned()
                        .collect();
                    slots.push(Slot {
                        param: i,
                        field: Some(fi),
                        choices,
                        checks,
                    });
                }
                records.push(Some(fields.iter().map(|f| f.name.clone()).collect()));
                continue;
            }
        }
        slots.push(Slot {
            param: i,
            field: None,
            choices: domain(module, p.ty, &mut cache).map_err(err)?,
            checks: Vec::new(),
        });
        records.push(None);
    }
    let n = slots.len();
    let empty = slots.iter().any(|s| s.choices.is_empty());
    Ok(Inputs {
        module,
        slots,
        records,
        pos: vec![0; n],
        level: 0,
        started: false,
        done: empty,
    })
}

impl Inputs<'_> {
    fn record_value(&self, param: usize) -> Value {
        let names = self.records[param].as_ref().expect("split record");
        let fields = self
            .slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.param == param)
            .map(|(k, s)| {
                let choice = if k <= self.level { self.pos[k] } else { 0 };
                let fi = s.field.expect("field slot");
                (names[fi].clone(), s.choices[choice].clone())
            })
            .collect();
        Value::Record(fields)
    }

    fn admissible(&self, k: usize) -> bool {
        let slot = &self.slots[k];
        if slot.checks.is_empty() {
            return true;
        }
        let v = self.record_value(slot.param);
        let m = super::Machine { module: self.module };
        slot.checks.iter().all(|c| m.truth(c, core::slice::from_ref(&v)))
    }

    fn assemble(&self) -> Vec<Value> {
        let mut out = Vec::with_capacity(self.records.len());
        for (i, rec) in self.records.iter().enumerate() {
            if rec.is_some() {
                out.push(self.record_value(i));
            } else {
                let k = self.slots.iter().position(|s| s.param == i).unwrap();
                out.push(self.slots[k].choices[self.pos[k]].clone());
            }
        }
        out
    }
}

impl Iterator for Inputs<'_> {
    type Item = Vec<Value>;

    fn next(&mut self) -> Option<Vec<Value>> {
        if self.done {
            return None;
        }
        let n = self.slots.len();
        if n == 0 {
            self.done = true;
            return Some(Vec::new());
        }
        if self.started {
            self.pos[n - 1] += 1;
        }
        self.started = true;
        loop {
            let k = self.level;
            if self.pos[k] >= self.slots[k].choices.len() {
                if k == 0 {
                    self.done = true;
                    return None;
                }
                self.level -= 1;
                self.pos[self.level] += 1;
                continue;
            }
            if !self.admissible(k) {
                self.pos[k] += 1;
                continue;
            }
            if k == n - 1 {
                return Some(self.assemble());
            }
            self.level += 1;
            self.pos[self.level] = 0;
        }
    }
}

/// All valid values of `ty`.
fn domain(
    module: &ResolvedModule,
    ty: Ty,
    cache: &mut BTreeMap<Ty, Arc<Vec<Value>>>,
) -> Result<Arc<Vec<Value>>, EnumError> {
    if let Some(d) = cache.get(&ty) {
        return Ok(d.clone());
    }
    let raw: Vec<Value> = match module.shape(ty) {
        Shape::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Shape::Int => {
            let b = module.bounds_of(ty).ok_or_else(|| EnumError::NotEnumerable {
                param: String::new(),
                ty: module.type_name(ty),
            })?;
            let size: BigInt = &b.hi - &b.lo + 1;
            if size.to_u64().is_none_or(|s| s > MAX_DOMAIN) {
                return Err(EnumError::TooLarge {
                    ty: module.type_name(ty),
                    size,
                });
            }
            let lo = b.lo.clone();
            (0..size.to_u64().unwrap()).map(|i| Value::Int(&lo + i)).collect()
        }
        Shape::Record(_) => {
            let fields = module.fields(ty).expect("record shape");
            let mut acc: Vec<Vec<(Arc<str>, Value)>> = vec![Vec::new()];
            for f in fields {
                let d = domain(module, f.ty, cache)?;
                let mut next = Vec::with_capacity(acc.len() * d.len());
                for prefix in &acc {
                    for v in d.iter() {
                        let mut p = prefix.clone();
                        p.push((f.name.clone(), v.clone()));
                        next.push(p);
                    }
                }
                if next.len() as u64 > MAX_DOMAIN {
                    return Err(EnumError::TooLarge {
                        ty: module.type_name(ty),
                        size: BigInt::from(next.len()),
                    });
                }
                acc = next;
            }
            acc.into_iter().map(Value::Record).collect()
        }
    };
    let d: Arc<Vec<Value>> = Arc::new(
        raw.into_iter()
            .filter(|v| check_type_invariant(v, ty, module))
            .collect(),
    );
    cache.insert(ty, d.clone());
    Ok(d)
}

/// Highest field index a where clause reads directly from its record, or
/// `None` if it uses the record as a whole.
fn last_field_read(e: &TExpr) -> Option<usize> {
    fn walk(e: &TExpr, max: &mut usize) -> bool {
        match &e.kind {
            TExprKind::Field(base, idx, _) if matches!(base.kind, TExprKind::Local(0, _)) => {
                *max = (*max).max(*idx as usize);
                true
            }
            TExprKind::Local(..) => false,
            TExprKind::Int(_) | TExprKind::Bool(_) | TExprKind::Const(..) => true,
            TExprKind::Field(base, _, _) => walk(base, max),
            TExprKind::Unary(_, a) => walk(a, max),
            TExprKind::Binary(_, a, b) => walk(a, max) && walk(b, max),
            TExprKind::PropCall(_, _, args) => args.iter().all(|a| walk(a, max)),
            TExprKind::Record(fs) => fs.iter().all(|(_, _, v)| walk(v, max)),
        }
    }
    let mut max = 0;
    walk(e, &mut max).then_some(max)
}

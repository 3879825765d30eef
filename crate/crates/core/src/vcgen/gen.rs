use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::sites::{validity_kind, Target};
use super::{entry_name, post_checks, Obligation, ObligationKind, Sort, SymbolInfo, VcError};
use crate::frontend::{BinaryOp, UnaryOp};
use crate::logic::{LogicExpr, LogicOp, TRUE};
use crate::semantics::{CallExpr, ConstValue, FunctionDef, ResolvedModule, Rhs, Shape, TExpr, TExprKind, TStmt, Ty};
use crate::{SourceSpan, Span};

/// Symbolic value: a scalar term or a record of them.
#[derive(Clone, Debug)]
pub(crate) enum SymVal {
    Leaf(LogicExpr),
    Record(Vec<SymVal>),
}

impl SymVal {
    fn leaf(self) -> LogicExpr {
        match self {
            SymVal::Leaf(e) => e,
            SymVal::Record(_) => panic!("record used as a scalar"),
        }
    }

    fn leaves(&self, out: &mut Vec<LogicExpr>) {
        match self {
            SymVal::Leaf(e) => out.push(e.clone()),
            SymVal::Record(fs) => fs.iter().for_each(|f| f.leaves(out)),
        }
    }
}

fn equal(a: &SymVal, b: &SymVal) -> LogicExpr {
    match (a, b) {
        (SymVal::Leaf(x), SymVal::Leaf(y)) => LogicExpr::eq(x.clone(), y.clone()),
        (SymVal::Record(xs), SymVal::Record(ys)) => LogicExpr::conj(xs.iter().zip(ys).map(|(x, y)| equal(x, y))),
        _ => panic!("comparing values of different shapes"),
    }
}

enum Env<'a> {
    /// Locals are the current program state.
    State,
    /// Locals are bound to the given values by slot.
    Bound(&'a [SymVal]),
}

struct Check {
    kind: ObligationKind,
    span: Span,
    description: String,
    goal: LogicExpr,
}

/// Program-order key: statement start, then position within it.
type Key = (u32, u32, u32);

#[derive(Clone, Debug)]
struct Pending {
    key: Key,
    kind: ObligationKind,
    span: Span,
    description: String,
    hyps: Vec<LogicExpr>,
    goal: LogicExpr,
}

impl Pending {
    fn formula(&self) -> LogicExpr {
        LogicExpr::implies(LogicExpr::conj(self.hyps.iter().cloned()), self.goal.clone())
    }

    fn prepend(&mut self, facts: &[LogicExpr]) {
        let facts = facts.iter().filter(|f| **f != TRUE).cloned();
        self.hyps.splice(0..0, facts);
    }

    fn substitute(&mut self, map: &BTreeMap<Arc<str>, LogicExpr>) {
        for h in &mut self.hyps {
            *h = h.substitute(map);
        }
        self.goal = self.goal.substitute(map);
    }
}

pub(super) struct Gen<'m> {
    module: &'m ResolvedModule,
    func: &'m FunctionDef,
    /// Per-slot names, disambiguated when two slots share a source name.
    names: Vec<Arc<str>>,
    havocs: u32,
    symbols: BTreeMap<Arc<str>, SymbolInfo>,
    checks: bool,
}

impl<'m> Gen<'m> {
    pub(super) fn new(module: &'m ResolvedModule, func: &'m FunctionDef) -> Self {
        let mut names: Vec<Arc<str>> = Vec::with_capacity(func.locals.len());
        for l in &func.locals {
            if names.contains(&l.name) {
                names.push(Arc::from(format!("{}#{}", l.name, l.slot)));
            } else {
                names.push(l.name.clone());
            }
        }
        Gen {
            module,
            func,
            names,
            havocs: 0,
            symbols: BTreeMap::new(),
            checks: true,
        }
    }

    pub(super) fn wp(mut self, stmts: &[TStmt], post: &LogicExpr) -> LogicExpr {
        self.checks = false;
        let item = Pending {
            key: (0, 0, 0),
            kind: ObligationKind::Postcondition,
            span: Span::default(),
            description: String::new(),
            hyps: Vec::new(),
            goal: post.clone(),
        };
        let items = self.block(stmts, vec![item]);
        items.first().map(Pending::formula).unwrap_or(TRUE)
    }

    pub(super) fn function(mut self) -> Result<Vec<Obligation>, VcError> {
        let func = self.func;
        let mut items = self.block(&func.body, Vec::new());

        let entries: Vec<SymVal> = (0..func.params.len() as u32)
            .map(|slot| self.entry_tree(slot))
            .collect();
        let mut hyps = Vec::new();
        for (p, v) in func.params.iter().zip(&entries) {
            hyps.extend(self.validity(p.ty, v));
        }
        for r in &func.requires {
            hyps.push(self.spec(r, &entries));
        }
        hyps.retain(|h| *h != TRUE);

        let mut map = BTreeMap::new();
        for slot in 0..func.params.len() as u32 {
            bind(&mut map, &self.local_tree(slot), &entries[slot as usize]);
        }

        items.sort_by_key(|p| p.key);
        let file = self.module.file.clone();
        let mut ordinals: BTreeMap<ObligationKind, u32> = BTreeMap::new();
        let mut out = Vec::with_capacity(items.len());
        for mut item in items {
            item.substitute(&map);
            let ord = ordinals.entry(item.kind).or_insert(0);
            *ord += 1;
            let mut all = hyps.clone();
            all.extend(item.hyps);
            let mut used = item.goal.syms();
            for h in &all {
                used.extend(h.syms());
                if let Some(v) = h.vars().into_iter().next() {
                    return Err(dangling(func, &v));
                }
            }
            if let Some(v) = item.goal.vars().into_iter().next() {
                return Err(dangling(func, &v));
            }
            out.push(Obligation {
                id: format!("{}.{}.{}", func.name, item.kind.slug(), ord),
                function: func.name.clone(),
                kind: item.kind,
                span: SourceSpan {
                    file: file.clone(),
                    span: item.span,
                },
                description: item.description,
                hypotheses: all,
                goal: item.goal,
                symbols: used.iter().filter_map(|s| self.symbols.get(s).cloned()).collect(),
            });
        }
        Ok(out)
    }

    fn block(&mut self, stmts: &[TStmt], mut items: Vec<Pending>) -> Vec<Pending> {
        for s in stmts.iter().rev() {
            items = self.stmt(s, items);
        }
        items
    }

    fn stmt(&mut self, s: &TStmt, items: Vec<Pending>) -> Vec<Pending> {
        let key = (s.span().start_line, s.span().start_col);
        match s {
            TStmt::Decl { init: None, .. } => items,
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
                self.write(key, &targets, rhs, items)
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
                self.write(key, &targets, rhs, items)
            }
            TStmt::Return { values, .. } => {
                if !self.checks {
                    return items;
                }
                let mut pre = Vec::new();
                let vals: Vec<SymVal> = values
                    .iter()
                    .map(|v| self.eval(v, &Env::State, &TRUE, &mut pre))
                    .collect();
                let func = self.func;
                let mut env: Vec<SymVal> = (0..func.params.len() as u32)
                    .map(|slot| self.entry_tree(slot))
                    .collect();
                env.extend(vals.iter().cloned());
                for en in &func.ensures {
                    let goal = self.spec(en, &env);
                    pre.push(Check {
                        kind: ObligationKind::Postcondition,
                        span: en.span,
                        description: format!("postcondition of `{}`: {en}", func.name),
                        goal,
                    });
                }
                for ((ret, v), e) in func.returns.iter().zip(&vals).zip(values) {
                    if !self.module.is_constrained(ret.ty) {
                        continue;
                    }
                    let kind = validity_kind(self.module, ret.ty);
                    pre.push(Check {
                        kind,
                        span: e.span,
                        description: self.validity_text(kind, ret.ty, &format!("returned `{}`", ret.name)),
                        goal: LogicExpr::conj(self.validity(ret.ty, v)),
                    });
                }
                let mut out = Vec::new();
                self.add_checks(&mut out, pre, key, 0);
                out
            }
            TStmt::If {
                cond,
                then_body,
                else_body,
                ..
            } => {
                let mut pre = Vec::new();
                let c = self.eval(cond, &Env::State, &TRUE, &mut pre).leaf();
                let then_items = self.block(then_body, items.clone());
                let else_items = self.block(else_body, items);
                let mut merged: BTreeMap<Key, (Option<Pending>, Option<Pending>)> = BTreeMap::new();
                for p in then_items {
                    let key = p.key;
                    merged.entry(key).or_default().0 = Some(p);
                }
                for p in else_items {
                    let key = p.key;
                    merged.entry(key).or_default().1 = Some(p);
                }
                let not_c = LogicExpr::not(c.clone());
                let mut out: Vec<Pending> = merged
                    .into_values()
                    .map(|pair| match pair {
                        (Some(mut a), None) => {
                            a.prepend(core::slice::from_ref(&c));
                            a
                        }
                        (None, Some(mut b)) => {
                            b.prepend(core::slice::from_ref(&not_c));
                            b
                        }
                        (Some(a), Some(b)) => Pending {
                            goal: LogicExpr::and(
                                LogicExpr::implies(c.clone(), a.formula()),
                                LogicExpr::implies(not_c.clone(), b.formula()),
                            ),
                            hyps: Vec::new(),
                            ..a
                        },
                        (None, None) => unreachable!(),
                    })
                    .collect();
                self.add_checks(&mut out, pre, key, 0);
                out
            }
        }
    }

    /// A declaration with initializer or an assignment, possibly of a call.
    fn write(&mut self, key: (u32, u32), targets: &[Target<'_>], rhs: &Rhs, mut items: Vec<Pending>) -> Vec<Pending> {
        let mut pre = Vec::new();
        let mut assumptions = Vec::new();
        let (values, value_tys) = match rhs {
            Rhs::Exprs(es) => {
                let vals: Vec<SymVal> = es.iter().map(|e| self.eval(e, &Env::State, &TRUE, &mut pre)).collect();
                (vals, es.iter().map(|e| e.ty).collect::<Vec<_>>())
            }
            Rhs::Call(c) => self.call(c, targets, &mut pre, &mut assumptions),
        };

        let mut map = BTreeMap::new();
        for (t, v) in targets.iter().zip(&values) {
            let (_, loc) = self.location(t.slot, t.path.iter().map(|p| p.0));
            bind(&mut map, &loc, v);
        }

        if self.checks {
            let post: Vec<Check> = post_checks(self.module, self.func, targets, &value_tys)
                .into_iter()
                .map(|pc| {
                    let (_, v) = self.location(pc.slot, pc.path.iter().copied());
                    let goal = if pc.own_only {
                        LogicExpr::conj(self.own_clauses(pc.ty, &v))
                    } else {
                        LogicExpr::conj(self.validity(pc.ty, &v))
                    };
                    Check {
                        kind: pc.kind,
                        span: pc.span,
                        description: self.validity_text(pc.kind, pc.ty, &format!("`{}`", pc.what)),
                        goal,
                    }
                })
                .collect();
            self.add_checks(&mut items, post, key, pre.len() as u32);
        }
        for it in &mut items {
            it.substitute(&map);
            it.prepend(&assumptions);
        }
        self.add_checks(&mut items, pre, key, 0);
        items
    }

    /// Modular call summary: checks the arguments and the callee's requires,
    /// then havocs the results and assumes the ensures.
    fn call(
        &mut self,
        c: &CallExpr,
        targets: &[Target<'_>],
        pre: &mut Vec<Check>,
        assumptions: &mut Vec<LogicExpr>,
    ) -> (Vec<SymVal>, Vec<Ty>) {
        let module = self.module;
        let callee = module.function(c.func);
        let mut env = Vec::with_capacity(callee.locals.len());
        for (a, p) in c.args.iter().zip(&callee.params) {
            let v = self.eval(a, &Env::State, &TRUE, pre);
            if !self.module.flows_trivially(a.ty, p.ty) {
                let kind = validity_kind(self.module, p.ty);
                pre.push(Check {
                    kind,
                    span: a.span,
                    description: self.validity_text(kind, p.ty, &format!("argument `{}` of `{}`", p.name, callee.name)),
                    goal: LogicExpr::conj(self.validity(p.ty, &v)),
                });
            }
            env.push(v);
        }
        for r in &callee.requires {
            let goal = self.spec(r, &env);
            pre.push(Check {
                kind: ObligationKind::CalleePrecondition,
                span: c.span,
                description: format!("precondition of `{}`: {r}", callee.name),
                goal,
            });
        }
        self.havocs += 1;
        let version = self.havocs;
        let mut results = Vec::with_capacity(callee.returns.len());
        for (ret, t) in callee.returns.iter().zip(targets) {
            let (path, _) = self.location(t.slot, t.path.iter().map(|p| p.0));
            results.push(self.tree(ret.ty, &path, &mut |g, p, ty| g.symbol(p, ty, version)));
        }
        env.extend(results.iter().cloned());
        for en in &callee.ensures {
            assumptions.push(self.spec(en, &env));
        }
        for (ret, v) in callee.returns.iter().zip(&results) {
            assumptions.extend(self.validity(ret.ty, v));
        }
        (results, callee.returns.iter().map(|r| r.ty).collect())
    }

    /// Turns `checks` into new pending obligations, each assuming the
    /// earlier ones, and makes all of them hypotheses of `items`.
    fn add_checks(&self, items: &mut Vec<Pending>, checks: Vec<Check>, key: (u32, u32), seq0: u32) {
        if !self.checks || checks.is_empty() {
            return;
        }
        let goals: Vec<LogicExpr> = checks.iter().map(|c| c.goal.clone()).collect();
        for it in items.iter_mut() {
            it.prepend(&goals);
        }
        for (i, c) in checks.into_iter().enumerate() {
            let mut p = Pending {
                key: (key.0, key.1, seq0 + i as u32),
                kind: c.kind,
                span: c.span,
                description: c.description,
                hyps: Vec::new(),
                goal: c.goal,
            };
            p.prepend(&goals[..i]);
            items.push(p);
        }
    }

    fn validity_text(&self, kind: ObligationKind, ty: Ty, what: &str) -> String {
        let tname = self.module.type_name(ty);
        match kind {
            ObligationKind::RecordInvariant => format!("invariant of {tname} holds for {what}"),
            _ if self.module.bounds_of(ty).is_some() => {
                format!("{what} stays within {tname} (no underflow or overflow)")
            }
            _ => format!("{what} satisfies {tname}"),
        }
    }

    fn spec(&self, e: &TExpr, env: &[SymVal]) -> LogicExpr {
        let mut scratch = Vec::new();
        self.eval(e, &Env::Bound(env), &TRUE, &mut scratch).leaf()
    }

    /// Every where clause `v` must satisfy as a `ty`, including those of
    /// its fields.
    pub(crate) fn validity(&self, ty: Ty, v: &SymVal) -> Vec<LogicExpr> {
        let mut out = self.own_clauses(ty, v);
        if let (Some(fields), SymVal::Record(vs)) = (self.module.fields(ty), v) {
            for (f, fv) in fields.iter().zip(vs) {
                out.extend(self.validity(f.ty, fv));
            }
        }
        out
    }

    fn own_clauses(&self, ty: Ty, v: &SymVal) -> Vec<LogicExpr> {
        let mut out = Vec::new();
        for id in self.module.constraint_chain(ty) {
            for clause in &self.module.type_def(id).where_clauses {
                out.push(self.spec(clause, core::slice::from_ref(v)));
            }
        }
        out
    }

    fn eval(&self, e: &TExpr, env: &Env<'_>, guard: &LogicExpr, checks: &mut Vec<Check>) -> SymVal {
        match &e.kind {
            TExprKind::Int(n) => SymVal::Leaf(LogicExpr::Int(n.clone())),
            TExprKind::Bool(b) => SymVal::Leaf(LogicExpr::Bool(*b)),
            TExprKind::Const(_, ConstValue::Int(n)) => SymVal::Leaf(LogicExpr::Int(n.clone())),
            TExprKind::Const(_, ConstValue::Bool(b)) => SymVal::Leaf(LogicExpr::Bool(*b)),
            TExprKind::Local(slot, _) => match env {
                Env::State => self.local_tree(*slot),
                Env::Bound(vs) => vs[*slot as usize].clone(),
            },
            TExprKind::Field(base, idx, _) => match self.eval(base, env, guard, checks) {
                SymVal::Record(mut fs) => fs.swap_remove(*idx as usize),
                SymVal::Leaf(_) => panic!("field access on a scalar"),
            },
            TExprKind::Unary(op, a) => {
                let x = self.eval(a, env, guard, checks).leaf();
                SymVal::Leaf(match op {
                    UnaryOp::Neg => LogicExpr::neg(x),
                    UnaryOp::Not => LogicExpr::not(x),
                })
            }
            TExprKind::Binary(op, l, r) => {
                let lv = self.eval(l, env, guard, checks);
                let lop = match op {
                    BinaryOp::And | BinaryOp::Or | BinaryOp::Implies => {
                        let x = lv.leaf();
                        let cond = if *op == BinaryOp::Or {
                            LogicExpr::not(x.clone())
                        } else {
                            x.clone()
                        };
                        let g = LogicExpr::and(guard.clone(), cond);
                        let y = self.eval(r, env, &g, checks).leaf();
                        let lop = match op {
                            BinaryOp::And => LogicOp::And,
                            BinaryOp::Or => LogicOp::Or,
                            _ => LogicOp::Implies,
                        };
                        return SymVal::Leaf(LogicExpr::bin(lop, x, y));
                    }
                    BinaryOp::Eq | BinaryOp::Ne => {
                        let rv = self.eval(r, env, guard, checks);
                        return SymVal::Leaf(match (&lv, &rv) {
                            (SymVal::Leaf(x), SymVal::Leaf(y)) => LogicExpr::bin(
                                if *op == BinaryOp::Eq { LogicOp::Eq } else { LogicOp::Ne },
                                x.clone(),
                                y.clone(),
                            ),
                            _ if *op == BinaryOp::Eq => equal(&lv, &rv),
                            _ => LogicExpr::not(equal(&lv, &rv)),
                        });
                    }
                    BinaryOp::Add => LogicOp::Add,
                    BinaryOp::Sub => LogicOp::Sub,
                    BinaryOp::Mul => LogicOp::Mul,
                    BinaryOp::Div => LogicOp::Div,
                    BinaryOp::Rem => LogicOp::Rem,
                    BinaryOp::Lt => LogicOp::Lt,
                    BinaryOp::Le => LogicOp::Le,
                    BinaryOp::Gt => LogicOp::Gt,
                    BinaryOp::Ge => LogicOp::Ge,
                    BinaryOp::Pow => panic!("`**` survives only in constants"),
                };
                let x = lv.leaf();
                let y = self.eval(r, env, guard, checks).leaf();
                if matches!(lop, LogicOp::Div | LogicOp::Rem) {
                    checks.push(Check {
                        kind: ObligationKind::DivByZero,
                        span: e.span,
                        description: format!("divisor of `{e}` is nonzero"),
                        goal: LogicExpr::implies(
                            guard.clone(),
                            LogicExpr::bin(LogicOp::Ne, y.clone(), LogicExpr::int(0)),
                        ),
                    });
                }
                SymVal::Leaf(LogicExpr::bin(lop, x, y))
            }
            TExprKind::PropCall(id, _, args) => {
                let vals: Vec<SymVal> = args.iter().map(|a| self.eval(a, env, guard, checks)).collect();
                let body = &self.module.property(*id).body;
                self.eval(body, &Env::Bound(&vals), guard, checks)
            }
            TExprKind::Record(fields) => {
                let defs = self.module.fields(e.ty).expect("record literal of record type");
                let mut vals: Vec<Option<SymVal>> = vec![None; defs.len()];
                for (idx, name, fe) in fields {
                    let v = self.eval(fe, env, guard, checks);
                    let fty = defs[*idx as usize].ty;
                    if !self.module.flows_trivially(fe.ty, fty) {
                        let kind = validity_kind(self.module, fty);
                        checks.push(Check {
                            kind,
                            span: fe.span,
                            description: self.validity_text(kind, fty, &format!("field `{name}`")),
                            goal: LogicExpr::implies(guard.clone(), LogicExpr::conj(self.validity(fty, &v))),
                        });
                    }
                    vals[*idx as usize] = Some(v);
                }
                let rec = SymVal::Record(vals.into_iter().map(|v| v.expect("full literal")).collect());
                if self.module.has_own_clauses(e.ty) {
                    checks.push(Check {
                        kind: ObligationKind::RecordInvariant,
                        span: e.span,
                        description: self.validity_text(ObligationKind::RecordInvariant, e.ty, "the record literal"),
                        goal: LogicExpr::implies(guard.clone(), LogicExpr::conj(self.own_clauses(e.ty, &rec))),
                    });
                }
                rec
            }
        }
    }

    /// Leaf path and current value of a location.
    fn location(&self, slot: u32, path: impl Iterator<Item = u32>) -> (String, SymVal) {
        let mut name = String::from(&*self.names[slot as usize]);
        let mut ty = self.func.locals[slot as usize].ty;
        for idx in path {
            let f = &self.module.fields(ty).expect("field path on a record")[idx as usize];
            name.push('.');
            name.push_str(&f.name);
            ty = f.ty;
        }
        let v = self.var_tree(ty, &name);
        (name, v)
    }

    fn local_tree(&self, slot: u32) -> SymVal {
        self.var_tree(self.func.locals[slot as usize].ty, &self.names[slot as usize])
    }

    fn var_tree(&self, ty: Ty, path: &str) -> SymVal {
        match self.module.fields(ty) {
            Some(fields) => SymVal::Record(
                fields
                    .iter()
                    .map(|f| self.var_tree(f.ty, &format!("{path}.{}", f.name)))
                    .collect(),
            ),
            None => SymVal::Leaf(LogicExpr::Var(Arc::from(path))),
        }
    }

    fn entry_tree(&mut self, slot: u32) -> SymVal {
        let ty = self.func.locals[slot as usize].ty;
        let name = self.names[slot as usize].clone();
        self.tree(ty, &name, &mut |g, p, ty| g.symbol(p, ty, 0))
    }

    fn tree(&mut self, ty: Ty, path: &str, leaf: &mut impl FnMut(&mut Self, &str, Ty) -> LogicExpr) -> SymVal {
        match self.module.fields(ty) {
            Some(fields) => SymVal::Record(
                fields
                    .iter()
                    .map(|f| self.tree(f.ty, &format!("{path}.{}", f.name), leaf))
                    .collect(),
            ),
            None => SymVal::Leaf(leaf(self, path, ty)),
        }
    }

    fn symbol(&mut self, path: &str, ty: Ty, version: u32) -> LogicExpr {
        let name: Arc<str> = if version == 0 {
            Arc::from(entry_name(path))
        } else {
            Arc::from(format!("{path}!{version}"))
        };
        let sort = match self.module.shape(ty) {
            Shape::Bool => Sort::Bool,
            _ => Sort::Int,
        };
        self.symbols.entry(name.clone()).or_insert_with(|| SymbolInfo {
            name: name.clone(),
            path: Arc::from(path),
            version,
            sort,
            type_name: self.module.type_name(ty),
            range: self.module.bounds_of(ty).map(|b| (b.lo.clone(), b.hi.clone())),
        });
        LogicExpr::Sym(name)
    }
}

/// Maps every leaf variable of `loc` to the matching leaf of `v`.
fn bind(map: &mut BTreeMap<Arc<str>, LogicExpr>, loc: &SymVal, v: &SymVal) {
    let mut ls = Vec::new();
    let mut vs = Vec::new();
    loc.leaves(&mut ls);
    v.leaves(&mut vs);
    for (l, x) in ls.into_iter().zip(vs) {
        if let LogicExpr::Var(name) = l {
            map.insert(name, x);
        }
    }
}

fn dangling(func: &FunctionDef, var: &str) -> VcError {
    VcError::Unsupported(
        String::from(&*func.name),
        format!("variable `{var}` escapes to the entry state"),
    )
}

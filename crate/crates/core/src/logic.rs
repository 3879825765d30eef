//! First-order formulas over integers and booleans, the currency of the VC
//! generator and the SMT encoder.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use core::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LogicOp {
    Add,
    Sub,
    Mul,
    /// Integer division truncating toward zero.
    Div,
    /// Remainder of truncating division; takes the sign of the dividend.
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Implies,
}

impl LogicOp {
    pub fn symbol(self) -> &'static str {
        match self {
            LogicOp::Add => "+",
            LogicOp::Sub => "-",
            LogicOp::Mul => "*",
            LogicOp::Div => "/",
            LogicOp::Rem => "%",
            LogicOp::Lt => "<",
            LogicOp::Le => "<=",
            LogicOp::Gt => ">",
            LogicOp::Ge => ">=",
            LogicOp::Eq => "==",
            LogicOp::Ne => "!=",
            LogicOp::And => "&&",
            LogicOp::Or => "||",
            LogicOp::Implies => "==>",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            LogicOp::Implies => 1,
            LogicOp::Or => 2,
            LogicOp::And => 3,
            LogicOp::Lt | LogicOp::Le | LogicOp::Gt | LogicOp::Ge | LogicOp::Eq | LogicOp::Ne => 4,
            LogicOp::Add | LogicOp::Sub => 5,
            LogicOp::Mul | LogicOp::Div | LogicOp::Rem => 6,
        }
    }

    pub fn is_boolean(self) -> bool {
        matches!(
            self,
            LogicOp::Lt
                | LogicOp::Le
                | LogicOp::Gt
                | LogicOp::Ge
                | LogicOp::Eq
                | LogicOp::Ne
                | LogicOp::And
                | LogicOp::Or
                | LogicOp::Implies
        )
    }
}

/// A formula or term. Children are shared, so cloning is cheap.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LogicExpr {
    Int(BigInt),
    Bool(bool),
    /// A program location (leaf path such as `casino.pot`) whose value is
    /// still being transformed by weakest-precondition substitution.
    Var(Arc<str>),
    /// A fixed symbolic constant, e.g. the entry value `casino.pot!0` or the
    /// result of a call `a1.balance!1`.
    Sym(Arc<str>),
    Not(Arc<LogicExpr>),
    Neg(Arc<LogicExpr>),
    Bin(LogicOp, Arc<LogicExpr>, Arc<LogicExpr>),
    Ite(Arc<LogicExpr>, Arc<LogicExpr>, Arc<LogicExpr>),
}

pub const TRUE: LogicExpr = LogicExpr::Bool(true);
pub const FALSE: LogicExpr = LogicExpr::Bool(false);

impl LogicExpr {
    pub fn int(n: impl Into<BigInt>) -> Self {
        LogicExpr::Int(n.into())
    }

    pub fn var(name: &str) -> Self {
        LogicExpr::Var(Arc::from(name))
    }

    pub fn sym(name: &str) -> Self {
        LogicExpr::Sym(Arc::from(name))
    }

    /// Builds a binary node, folding boolean literals in connectives.
    pub fn bin(op: LogicOp, a: LogicExpr, b: LogicExpr) -> Self {
        use LogicExpr::Bool;
        match (op, &a, &b) {
            (LogicOp::And, Bool(true), _) => b,
            (LogicOp::And, _, Bool(true)) => a,
            (LogicOp::And, Bool(false), _) | (LogicOp::And, _, Bool(false)) => FALSE,
            (LogicOp::Or, Bool(false), _) => b,
            (LogicOp::Or, _, Bool(false)) => a,
            (LogicOp::Or, Bool(true), _) | (LogicOp::Or, _, Bool(true)) => TRUE,
            (LogicOp::Implies, Bool(true), _) => b,
            (LogicOp::Implies, Bool(false), _) | (LogicOp::Implies, _, Bool(true)) => TRUE,
            _ => LogicExpr::Bin(op, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn and(a: LogicExpr, b: LogicExpr) -> Self {
        Self::bin(LogicOp::And, a, b)
    }

    pub fn or(a: LogicExpr, b: LogicExpr) -> Self {
        Self::bin(LogicOp::Or, a, b)
    }

    pub fn implies(a: LogicExpr, b: LogicExpr) -> Self {
        Self::bin(LogicOp::Implies, a, b)
    }

    pub fn eq(a: LogicExpr, b: LogicExpr) -> Self {
        Self::bin(LogicOp::Eq, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: LogicExpr) -> Self {
        match a {
            LogicExpr::Bool(b) => LogicExpr::Bool(!b),
            LogicExpr::Not(inner) => (*inner).clone(),
            other => LogicExpr::Not(Arc::new(other)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: LogicExpr) -> Self {
        LogicExpr::Neg(Arc::new(a))
    }

    pub fn ite(c: LogicExpr, t: LogicExpr, e: LogicExpr) -> Self {
        match c {
            LogicExpr::Bool(true) => t,
            LogicExpr::Bool(false) => e,
            c => LogicExpr::Ite(Arc::new(c), Arc::new(t), Arc::new(e)),
        }
    }

    pub fn conj(items: impl IntoIterator<Item = LogicExpr>) -> Self {
        items.into_iter().fold(TRUE, LogicExpr::and)
    }

    /// Simultaneously replaces every `Var` found in `map`.
    pub fn substitute(&self, map: &BTreeMap<Arc<str>, LogicExpr>) -> LogicExpr {
        if map.is_empty() {
            return self.clone();
        }
        self.rewrite(&mut |e| match e {
            LogicExpr::Var(v) => map.get(v).cloned(),
            _ => None,
        })
    }

    /// Rebuilds the tree bottom-up, replacing any node for which `f`
    /// returns a value (the replacement is not visited again).
    pub fn rewrite(&self, f: &mut impl FnMut(&LogicExpr) -> Option<LogicExpr>) -> LogicExpr {
        if let Some(r) = f(self) {
            return r;
        }
        match self {
            LogicExpr::Int(_) | LogicExpr::Bool(_) | LogicExpr::Var(_) | LogicExpr::Sym(_) => self.clone(),
            LogicExpr::Not(a) => LogicExpr::not(a.rewrite(f)),
            LogicExpr::Neg(a) => LogicExpr::neg(a.rewrite(f)),
            LogicExpr::Bin(op, a, b) => LogicExpr::bin(*op, a.rewrite(f), b.rewrite(f)),
            LogicExpr::Ite(c, t, e) => LogicExpr::ite(c.rewrite(f), t.rewrite(f), e.rewrite(f)),
        }
    }

    pub fn visit(&self, f: &mut impl FnMut(&LogicExpr)) {
        f(self);
        match self {
            LogicExpr::Not(a) | LogicExpr::Neg(a) => a.visit(f),
            LogicExpr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            LogicExpr::Ite(c, t, e) => {
                c.visit(f);
                t.visit(f);
                e.visit(f);
            }
            _ => {}
        }
    }

    pub fn vars(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let LogicExpr::Var(v) = e {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn syms(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let LogicExpr::Sym(v) = e {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Evaluates under an assignment of symbols and variables. Returns
    /// `None` for unassigned names or division by zero.
    pub fn eval(&self, env: &dyn Fn(&str) -> Option<Scalar>) -> Option<Scalar> {
        use LogicExpr::*;
        Some(match self {
            Int(n) => Scalar::Int(n.clone()),
            Bool(b) => Scalar::Bool(*b),
            Var(v) | Sym(v) => env(v)?,
            Not(a) => Scalar::Bool(!a.eval(env)?.as_bool()?),
            Neg(a) => Scalar::Int(-a.eval(env)?.as_int()?),
            Ite(c, t, e) => {
                if c.eval(env)?.as_bool()? {
                    t.eval(env)?
                } else {
                    e.eval(env)?
                }
            }
            Bin(op, a, b) => {
                let x = a.eval(env)?;
                match op {
                    LogicOp::And => return Some(Scalar::Bool(x.as_bool()? && b.eval(env)?.as_bool()?)),
                    LogicOp::Or => return Some(Scalar::Bool(x.as_bool()? || b.eval(env)?.as_bool()?)),
                    LogicOp::Implies => return Some(Scalar::Bool(!x.as_bool()? || b.eval(env)?.as_bool()?)),
                    _ => {}
                }
                let y = b.eval(env)?;
                match op {
                    LogicOp::Eq => Scalar::Bool(x == y),
                    LogicOp::Ne => Scalar::Bool(x != y),
                    _ => {
                        let (x, y) = (x.as_int()?, y.as_int()?);
                        match op {
                            LogicOp::Add => Scalar::Int(x + y),
                            LogicOp::Sub => Scalar::Int(x - y),
                            LogicOp::Mul => Scalar::Int(x * y),
                            LogicOp::Div if y.is_zero() => return None,
                            LogicOp::Rem if y.is_zero() => return None,
                            LogicOp::Div => Scalar::Int(x / y),
                            LogicOp::Rem => Scalar::Int(x % y),
                            LogicOp::Lt => Scalar::Bool(x < y),
                            LogicOp::Le => Scalar::Bool(x <= y),
                            LogicOp::Gt => Scalar::Bool(x > y),
                            LogicOp::Ge => Scalar::Bool(x >= y),
                            _ => unreachable!(),
                        }
                    }
                }
            }
        })
    }
}

/// Integer or boolean value of a leaf.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scalar {
    Int(BigInt),
    Bool(bool),
}

impl Scalar {
    pub fn as_int(self) -> Option<BigInt> {
        match self {
            Scalar::Int(n) => Some(n),
            Scalar::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Scalar::Bool(b) => Some(b),
            Scalar::Int(_) => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(n) => write!(f, "{n}"),
            Scalar::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Truncating division as the interpreter computes it.
pub fn div_trunc(a: &BigInt, b: &BigInt) -> BigInt {
    a / b
}

/// Remainder matching [`div_trunc`].
pub fn rem_trunc(a: &BigInt, b: &BigInt) -> BigInt {
    a % b
}

impl fmt::Display for LogicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicExpr::Int(n) => write!(f, "{n}"),
            LogicExpr::Bool(b) => write!(f, "{b}"),
            LogicExpr::Var(v) | LogicExpr::Sym(v) => f.write_str(v),
            LogicExpr::Not(a) => {
                f.write_str("!")?;
                atom(f, a)
            }
            LogicExpr::Neg(a) => {
                f.write_str("-")?;
                atom(f, a)
            }
            LogicExpr::Ite(c, t, e) => write!(f, "(if {c} then {t} else {e})"),
            LogicExpr::Bin(op, a, b) => {
                let p = op.precedence();
                let right_assoc = *op == LogicOp::Implies;
                operand(f, a, |q| q < p || (q == p && right_assoc))?;
                write!(f, " {} ", op.symbol())?;
                operand(f, b, |q| q < p || (q == p && !right_assoc))
            }
        }
    }
}

fn atom(f: &mut fmt::Formatter<'_>, e: &LogicExpr) -> fmt::Result {
    if matches!(e, LogicExpr::Bin(..) | LogicExpr::Not(_) | LogicExpr::Neg(_)) {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn operand(f: &mut fmt::Formatter<'_>, e: &LogicExpr, parens: impl Fn(u8) -> bool) -> fmt::Result {
    match e {
        LogicExpr::Bin(op, ..) if parens(op.precedence()) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

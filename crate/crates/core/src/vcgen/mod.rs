//! Verification-condition generation.
//!
//! Each function body is walked backwards. The generator keeps a vector of
//! pending obligations over the program state at the current point and
//! transforms all of them by the weakest precondition of every statement,
//! adding new obligations at each check site. Record values are trees of
//! per-leaf variables (`casino.player.balance`), so assignment is plain
//! substitution.

mod gen;
mod sites;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use num_bigint::BigInt;

use crate::logic::LogicExpr;
use crate::semantics::{FunctionDef, ResolvedModule, TStmt};
use crate::SourceSpan;

pub(crate) use sites::{post_checks, validity_kind, Target};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObligationKind {
    CalleePrecondition,
    Postcondition,
    TypeConstraint,
    RecordInvariant,
    DivByZero,
}

impl ObligationKind {
    pub const ALL: [ObligationKind; 5] = [
        ObligationKind::CalleePrecondition,
        ObligationKind::Postcondition,
        ObligationKind::TypeConstraint,
        ObligationKind::RecordInvariant,
        ObligationKind::DivByZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObligationKind::CalleePrecondition => "CalleePrecondition",
            ObligationKind::Postcondition => "Postcondition",
            ObligationKind::TypeConstraint => "TypeConstraint",
            ObligationKind::RecordInvariant => "RecordInvariant",
            ObligationKind::DivByZero => "DivByZero",
        }
    }

    /// Component used in obligation ids.
    pub fn slug(self) -> &'static str {
        match self {
            ObligationKind::CalleePrecondition => "callee_pre",
            ObligationKind::Postcondition => "post",
            ObligationKind::TypeConstraint => "constraint",
            ObligationKind::RecordInvariant => "invariant",
            ObligationKind::DivByZero => "div_zero",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ObligationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Int,
    Bool,
}

/// A symbolic constant an obligation may mention.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolInfo {
    /// Name as it appears in formulas, e.g. `casino.pot!0`.
    pub name: Arc<str>,
    /// Source location path, e.g. `casino.pot`.
    pub path: Arc<str>,
    /// 0 for entry values, n for the result of the n-th call.
    pub version: u32,
    pub sort: Sort,
    /// Name of the leaf's declared type.
    pub type_name: String,
    /// Interval every value of the leaf's type lies in.
    pub range: Option<(BigInt, BigInt)>,
}

#[derive(Clone, Debug)]
pub struct Obligation {
    /// `function.kind.ordinal`, unique within a module.
    pub id: String,
    pub function: Arc<str>,
    pub kind: ObligationKind,
    pub span: SourceSpan,
    pub description: String,
    /// Facts available at the check site, in the order they were established.
    pub hypotheses: Vec<LogicExpr>,
    pub goal: LogicExpr,
    /// Symbols occurring in the hypotheses or goal.
    pub symbols: Vec<SymbolInfo>,
}

impl Obligation {
    /// The closed formula `h1 && ... && hn ==> goal`.
    pub fn formula(&self) -> LogicExpr {
        LogicExpr::implies(LogicExpr::conj(self.hypotheses.iter().cloned()), self.goal.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VcError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("unsupported statement in `{0}`: {1}")]
    Unsupported(String, String),
}

/// Obligations of one function, in program order.
pub fn generate_obligations(module: &ResolvedModule, function: &str) -> Result<Vec<Obligation>, VcError> {
    let id = module
        .function_by_name(function)
        .ok_or_else(|| VcError::UnknownFunction(function.into()))?;
    gen::Gen::new(module, module.function(id)).function()
}

/// Obligations of every function, in declaration order.
pub fn generate_all(module: &ResolvedModule) -> Result<Vec<Obligation>, VcError> {
    let mut out = Vec::new();
    for f in &module.functions {
        out.extend(gen::Gen::new(module, f).function()?);
    }
    Ok(out)
}

/// Weakest precondition of `stmts` (run in `func`) with respect to `post`.
///
/// Locations are `Var`s named by their leaf path. Calls are replaced by
/// their summaries: results become fresh symbols constrained by the callee's
/// ensures. No check obligations are produced.
pub fn wp(module: &ResolvedModule, func: &FunctionDef, stmts: &[TStmt], post: &LogicExpr) -> LogicExpr {
    gen::Gen::new(module, func).wp(stmts, post)
}

/// Human-readable dump, one block per obligation.
pub fn emit_obligations(obligations: &[Obligation]) -> String {
    let mut out = String::new();
    for ob in obligations {
        let _ = writeln!(out, "obligation {}", ob.id);
        let _ = writeln!(out, "  kind: {}", ob.kind);
        let _ = writeln!(out, "  at: {}:{}", ob.span.file, ob.span.span);
        let _ = writeln!(out, "  about: {}", ob.description);
        for h in &ob.hypotheses {
            let _ = writeln!(out, "  assume {h}");
        }
        let _ = writeln!(out, "  prove {}", ob.goal);
        out.push('\n');
    }
    out
}

/// Maps a symbol table by name, for decoders.
pub fn symbol_map(symbols: &[SymbolInfo]) -> BTreeMap<Arc<str>, SymbolInfo> {
    symbols.iter().map(|s| (s.name.clone(), s.clone())).collect()
}

pub(crate) fn entry_name(path: &str) -> String {
    format!("{path}!0")
}

//! Name resolution, typechecking and property expansion.
//!
//! The output is a [`ResolvedModule`]: every expression carries its static
//! type, variables are resolved to per-function slots, constants are fully
//! evaluated, and property calls can be expanded with [`inline_properties`].

mod check;
mod display;
mod inline;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::frontend::{BinaryOp, UnaryOp, Visibility};
use crate::Span;

pub use check::typecheck;
pub use inline::inline_properties;

/// Index into [`ResolvedModule::types`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(pub u32);

/// Index into [`ResolvedModule::functions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncId(pub u32);

/// Index into [`ResolvedModule::properties`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropId(pub u32);

/// Static type of an expression or location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    Int,
    Bool,
    Named(TypeId),
}

/// The structural shape a type reduces to once constrained types are
/// unwrapped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Int,
    Bool,
    Record(TypeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstValue {
    Int(BigInt),
    Bool(bool),
}

#[derive(Clone, Debug)]
pub struct TypeDef {
    pub name: Arc<str>,
    pub visibility: Visibility,
    pub body: TypeDefBody,
    /// Typed with a single implicit local (slot 0): the binder of a
    /// constrained type, or the record value itself (fields appear bare).
    pub where_clauses: Vec<TExpr>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum TypeDefBody {
    Record(Vec<FieldDef>),
    Constrained { base: Ty, binder: Arc<str> },
}

#[derive(Clone, Debug)]
pub struct FieldDef {
    pub name: Arc<str>,
    pub ty: Ty,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct ConstDef {
    pub name: Arc<str>,
    pub value: ConstValue,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct PropertyDef {
    pub name: Arc<str>,
    pub params: Vec<LocalDecl>,
    pub body: TExpr,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct LocalDecl {
    pub slot: u32,
    pub name: Arc<str>,
    pub ty: Ty,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct FunctionDef {
    pub name: Arc<str>,
    pub visibility: Visibility,
    /// Slots `0..params.len()`.
    pub params: Vec<LocalDecl>,
    /// Slots following the parameters; visible only in `ensures`.
    pub returns: Vec<LocalDecl>,
    pub requires: Vec<TExpr>,
    pub ensures: Vec<TExpr>,
    pub body: Vec<TStmt>,
    /// Every slot of the function, indexed by slot number.
    pub locals: Vec<LocalDecl>,
    pub span: Span,
}

/// A typed expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: Ty,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TExprKind {
    Int(BigInt),
    Bool(bool),
    Const(Arc<str>, ConstValue),
    Local(u32, Arc<str>),
    Field(Box<TExpr>, u32, Arc<str>),
    Unary(UnaryOp, Box<TExpr>),
    Binary(BinaryOp, Box<TExpr>, Box<TExpr>),
    PropCall(PropId, Arc<str>, Vec<TExpr>),
    /// Field values in source order, each tagged with its declared index.
    Record(Vec<(u32, Arc<str>, TExpr)>),
}

/// A write target: a local variable, possibly followed by a field path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LValue {
    pub slot: u32,
    pub name: Arc<str>,
    pub path: Vec<(u32, Arc<str>)>,
    /// Type of the written location.
    pub ty: Ty,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallExpr {
    pub func: FuncId,
    pub name: Arc<str>,
    pub args: Vec<TExpr>,
    pub span: Span,
}

/// Right-hand side of a declaration or assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Exprs(Vec<TExpr>),
    Call(CallExpr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TStmt {
    Decl {
        vars: Vec<(u32, Arc<str>, Ty, Span)>,
        init: Option<Rhs>,
        span: Span,
    },
    Assign {
        targets: Vec<LValue>,
        rhs: Rhs,
        span: Span,
    },
    Return {
        values: Vec<TExpr>,
        span: Span,
    },
    If {
        cond: TExpr,
        then_body: Vec<TStmt>,
        else_body: Vec<TStmt>,
        span: Span,
    },
}

impl TStmt {
    pub fn span(&self) -> Span {
        match self {
            TStmt::Decl { span, .. }
            | TStmt::Assign { span, .. }
            | TStmt::Return { span, .. }
            | TStmt::If { span, .. } => *span,
        }
    }
}

/// An integer type whose where clauses pin it to an interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedIntType {
    pub name: Arc<str>,
    pub lo: BigInt,
    pub hi: BigInt,
}

/// A typechecked module. Immutable once built.
#[derive(Clone, Debug)]
pub struct ResolvedModule {
    pub file: Arc<str>,
    pub types: Vec<TypeDef>,
    pub consts: Vec<ConstDef>,
    pub properties: Vec<PropertyDef>,
    pub functions: Vec<FunctionDef>,
    /// Interval of every int-shaped named type whose constraints (including
    /// those inherited from its base types) bound it on both sides.
    pub bounds: BTreeMap<TypeId, BoundedIntType>,
    /// Named types whose constraints are exactly captured by `bounds`.
    pub exact_bounds: BTreeMap<TypeId, bool>,
    names: BTreeMap<Arc<str>, Global>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Global {
    Type(TypeId),
    Const(u32),
    Property(PropId),
    Function(FuncId),
}

impl ResolvedModule {
    pub fn type_def(&self, id: TypeId) -> &TypeDef {
        &self.types[id.0 as usize]
    }

    pub fn type_by_name(&self, name: &str) -> Option<TypeId> {
        match self.names.get(name) {
            Some(Global::Type(id)) => Some(*id),
            _ => None,
        }
    }

    pub fn function(&self, id: FuncId) -> &FunctionDef {
        &self.functions[id.0 as usize]
    }

    pub fn function_by_name(&self, name: &str) -> Option<FuncId> {
        match self.names.get(name) {
            Some(Global::Function(id)) => Some(*id),
            _ => None,
        }
    }

    pub fn property(&self, id: PropId) -> &PropertyDef {
        &self.properties[id.0 as usize]
    }

    pub fn constant(&self, name: &str) -> Option<&ConstValue> {
        match self.names.get(name) {
            Some(Global::Const(i)) => Some(&self.consts[*i as usize].value),
            _ => None,
        }
    }

    pub fn type_name(&self, ty: Ty) -> String {
        match ty {
            Ty::Int => "int".into(),
            Ty::Bool => "bool".into(),
            Ty::Named(id) => String::from(&*self.type_def(id).name),
        }
    }

    pub fn shape(&self, mut ty: Ty) -> Shape {
        loop {
            match ty {
                Ty::Int => return Shape::Int,
                Ty::Bool => return Shape::Bool,
                Ty::Named(id) => match &self.type_def(id).body {
                    TypeDefBody::Record(_) => return Shape::Record(id),
                    TypeDefBody::Constrained { base, .. } => ty = *base,
                },
            }
        }
    }

    /// Fields of a record-shaped type.
    pub fn fields(&self, ty: Ty) -> Option<&[FieldDef]> {
        match self.shape(ty) {
            Shape::Record(id) => match &self.type_def(id).body {
                TypeDefBody::Record(f) => Some(f),
                TypeDefBody::Constrained { .. } => None,
            },
            _ => None,
        }
    }

    /// Named types whose where clauses apply directly to a value of `ty`,
    /// outermost first (a constrained type, then its base, and so on).
    pub fn constraint_chain(&self, mut ty: Ty) -> Vec<TypeId> {
        let mut out = Vec::new();
        while let Ty::Named(id) = ty {
            out.push(id);
            match &self.type_def(id).body {
                TypeDefBody::Record(_) => break,
                TypeDefBody::Constrained { base, .. } => ty = *base,
            }
        }
        out
    }

    /// Whether a value of `ty` can violate some where clause, directly or
    /// through one of its fields.
    pub fn is_constrained(&self, ty: Ty) -> bool {
        let chain = self.constraint_chain(ty);
        if chain.iter().any(|id| !self.type_def(*id).where_clauses.is_empty()) {
            return true;
        }
        match self.fields(ty) {
            Some(fields) => fields.iter().any(|f| self.is_constrained(f.ty)),
            None => false,
        }
    }

    /// Whether `ty` carries where clauses at its top level.
    pub fn has_own_clauses(&self, ty: Ty) -> bool {
        self.constraint_chain(ty)
            .iter()
            .any(|id| !self.type_def(*id).where_clauses.is_empty())
    }

    pub fn bounds_of(&self, ty: Ty) -> Option<&BoundedIntType> {
        match ty {
            Ty::Named(id) => self.bounds.get(&id),
            _ => None,
        }
    }

    /// Whether `ty`'s validity is exactly its interval.
    pub fn bounds_exact(&self, ty: Ty) -> bool {
        match ty {
            Ty::Named(id) => self.exact_bounds.get(&id).copied().unwrap_or(false),
            _ => false,
        }
    }

    /// Whether a value statically typed `from` always satisfies `to`'s
    /// constraints without a check.
    pub fn flows_trivially(&self, from: Ty, to: Ty) -> bool {
        from == to || !self.is_constrained(to)
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }
}

/// The public name of every declaration, for diagnostics.
pub(crate) fn describe_global(g: Global) -> &'static str {
    match g {
        Global::Type(_) => "type",
        Global::Const(_) => "constant",
        Global::Property(_) => "property",
        Global::Function(_) => "function",
    }
}

#[cfg(test)]
mod tests;

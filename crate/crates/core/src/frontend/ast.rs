//! Untyped syntax tree produced by the parser.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::Span;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModuleAst {
    pub decls: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub kind: DeclKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Type(TypeDecl),
    Const(ConstDecl),
    Property(PropertyDecl),
    Function(FunctionDecl),
}

impl DeclKind {
    pub fn name(&self) -> &str {
        match self {
            DeclKind::Type(t) => &t.name,
            DeclKind::Const(c) => &c.name,
            DeclKind::Property(p) => &p.name,
            DeclKind::Function(f) => &f.name,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Visibility {
    #[default]
    Default,
    Public,
    Private,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub visibility: Visibility,
    pub name: String,
    pub body: TypeBody,
    pub where_clauses: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeBody {
    Record(Vec<Field>),
    Constrained { base: TypeExpr, binder: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    pub ty: TypeExpr,
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeExpr {
    pub kind: TypeExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeExprKind {
    Int,
    Bool,
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: String,
    pub value: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub ty: TypeExpr,
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDecl {
    pub visibility: Visibility,
    pub name: String,
    pub params: Vec<Param>,
    pub returns: Vec<Param>,
    pub requires: Vec<Expr>,
    pub ensures: Vec<Expr>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    /// `int x = e`, `(Address a, Address b) = f(x)` or a bare `int x`.
    VarDecl {
        vars: Vec<Param>,
        init: Option<Vec<Expr>>,
    },
    /// `x = e`, `x.f = e` or `(a, b.c) = (e1, e2)`. Tuple assignment is simultaneous.
    Assign {
        targets: Vec<Expr>,
        values: Vec<Expr>,
    },
    Return(Vec<Expr>),
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(BigInt),
    Bool(bool),
    Var(String),
    Field(Box<Expr>, String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    Record(Vec<(String, Expr)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    /// `**`, only accepted inside constant declarations.
    Pow,
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

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Pow => "**",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
            BinaryOp::Implies => "==>",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Implies => 1,
            BinaryOp::Or => 2,
            BinaryOp::And => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge | BinaryOp::Eq | BinaryOp::Ne => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 6,
            BinaryOp::Pow => 7,
        }
    }

    pub fn is_right_assoc(self) -> bool {
        matches!(self, BinaryOp::Implies | BinaryOp::Pow)
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

impl ModuleAst {
    /// Copy of the tree with every span reset, for comparisons that ignore
    /// source positions.
    pub fn without_spans(&self) -> ModuleAst {
        let mut m = self.clone();
        for d in &mut m.decls {
            d.span = Span::default();
            match &mut d.kind {
                DeclKind::Type(t) => {
                    match &mut t.body {
                        TypeBody::Record(fields) => {
                            for f in fields {
                                f.span = Span::default();
                                f.ty.span = Span::default();
                            }
                        }
                        TypeBody::Constrained { base, .. } => base.span = Span::default(),
                    }
                    t.where_clauses.iter_mut().for_each(clear_expr);
                }
                DeclKind::Const(c) => clear_expr(&mut c.value),
                DeclKind::Property(p) => {
                    p.params.iter_mut().for_each(clear_param);
                    clear_expr(&mut p.body);
                }
                DeclKind::Function(f) => {
                    f.params.iter_mut().for_each(clear_param);
                    f.returns.iter_mut().for_each(clear_param);
                    f.requires.iter_mut().for_each(clear_expr);
                    f.ensures.iter_mut().for_each(clear_expr);
                    f.body.iter_mut().for_each(clear_stmt);
                }
            }
        }
        m
    }
}

fn clear_param(p: &mut Param) {
    p.span = Span::default();
    p.ty.span = Span::default();
}

fn clear_stmt(s: &mut Stmt) {
    s.span = Span::default();
    match &mut s.kind {
        StmtKind::VarDecl { vars, init } => {
            vars.iter_mut().for_each(clear_param);
            if let Some(init) = init {
                init.iter_mut().for_each(clear_expr);
            }
        }
        StmtKind::Assign { targets, values } => {
            targets.iter_mut().for_each(clear_expr);
            values.iter_mut().for_each(clear_expr);
        }
        StmtKind::Return(values) => values.iter_mut().for_each(clear_expr),
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            clear_expr(cond);
            then_body.iter_mut().for_each(clear_stmt);
            else_body.iter_mut().for_each(clear_stmt);
        }
    }
}

fn clear_expr(e: &mut Expr) {
    e.span = Span::default();
    match &mut e.kind {
        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) => {}
        ExprKind::Field(inner, _) | ExprKind::Unary(_, inner) => clear_expr(inner),
        ExprKind::Binary(_, l, r) => {
            clear_expr(l);
            clear_expr(r);
        }
        ExprKind::Call(_, args) => args.iter_mut().for_each(clear_expr),
        ExprKind::Record(fields) => fields.iter_mut().for_each(|(_, e)| clear_expr(e)),
    }
}

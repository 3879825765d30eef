//! Recursive-descent parser over the token stream from [`super::lexer`].

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{tokenize, Keyword, Punct, Tok, Token};
use crate::{Diagnostic, Diagnostics, Span};

type PResult<T> = Result<T, Diagnostic>;

/// Parses a whole `.csl` source file.
pub fn parse(file: &str, source: &str) -> Result<ModuleAst, Diagnostics> {
    let file: Arc<str> = Arc::from(file);
    let tokens = tokenize(&file, source).map_err(Diagnostics)?;
    let mut p = Parser {
        file,
        toks: tokens,
        pos: 0,
        allow_pow: false,
    };
    let mut decls = Vec::new();
    let mut errors = Vec::new();
    loop {
        while p.at(&Tok::Newline) {
            p.bump();
        }
        if p.at(&Tok::Eof) {
            break;
        }
        match p.decl() {
            Ok(d) => decls.push(d),
            Err(e) => {
                errors.push(e);
                p.recover();
            }
        }
    }
    if errors.is_empty() {
        Ok(ModuleAst { decls })
    } else {
        Err(Diagnostics(errors))
    }
}

struct Parser {
    file: Arc<str>,
    toks: Vec<Token>,
    pos: usize,
    allow_pow: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn at_p(&self, p: Punct) -> bool {
        self.at(&Tok::P(p))
    }

    fn at_kw(&self, k: Keyword) -> bool {
        self.at(&Tok::Kw(k))
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat_p(&mut self, p: Punct) -> bool {
        if self.at_p(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, span: Span, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::error(&self.file, span, msg))
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        self.err(
            self.span(),
            format!("syntax error: expected {expected}, found {}", self.peek()),
        )
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<Span> {
        if self.at(&t) {
            Ok(self.bump().span)
        } else {
            self.unexpected(what)
        }
    }

    fn expect_p(&mut self, p: Punct) -> PResult<Span> {
        self.expect(Tok::P(p), &format!("`{}`", p.as_str()))
    }

    fn expect_kw(&mut self, k: Keyword) -> PResult<Span> {
        self.expect(Tok::Kw(k), &format!("`{}`", k.as_str()))
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            Tok::Kw(k) => self.err(
                self.span(),
                format!("syntax error: expected {what}, found reserved keyword `{}`", k.as_str()),
            ),
            _ => self.unexpected(what),
        }
    }

    fn end_of_line(&mut self) -> PResult<()> {
        if self.at(&Tok::Eof) {
            return Ok(());
        }
        self.expect(Tok::Newline, "end of line").map(|_| ())
    }

    /// Skips to the start of the next top-level declaration.
    fn recover(&mut self) {
        let mut depth: i32 = 0;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Indent => depth += 1,
                Tok::Dedent => depth -= 1,
                Tok::Newline => {
                    self.bump();
                    while matches!(self.peek(), Tok::Dedent) {
                        depth -= 1;
                        self.bump();
                    }
                    if depth <= 0 && self.at_decl_start() {
                        return;
                    }
                    continue;
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn at_decl_start(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Kw(
                Keyword::Type
                    | Keyword::Const
                    | Keyword::Property
                    | Keyword::Function
                    | Keyword::Public
                    | Keyword::Private
            )
        )
    }

    // ---- declarations ----

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.span();
        let visibility = if self.at_kw(Keyword::Public) {
            self.bump();
            Visibility::Public
        } else if self.at_kw(Keyword::Private) {
            self.bump();
            Visibility::Private
        } else {
            Visibility::Default
        };
        let kind = match self.peek() {
            Tok::Kw(Keyword::Type) => DeclKind::Type(self.type_decl(visibility)?),
            Tok::Kw(Keyword::Function) => DeclKind::Function(self.function_decl(visibility)?),
            Tok::Kw(Keyword::Const) if visibility == Visibility::Default => DeclKind::Const(self.const_decl()?),
            Tok::Kw(Keyword::Property) if visibility == Visibility::Default => {
                DeclKind::Property(self.property_decl()?)
            }
            Tok::Kw(Keyword::Const | Keyword::Property) => {
                return self.err(start, "visibility modifiers apply only to types and functions")
            }
            Tok::Ident(_) | Tok::Kw(_) => {
                return self.err(
                    self.span(),
                    format!(
                    "syntax error: unknown declaration keyword {}; expected `type`, `const`, `property` or `function`",
                    self.peek()
                ),
                )
            }
            _ => return self.unexpected("a declaration"),
        };
        Ok(Decl {
            kind,
            span: start.to(self.decl_end()),
        })
    }

    fn decl_end(&self) -> Span {
        // last non-layout token consumed
        let mut i = self.pos;
        while i > 0 {
            i -= 1;
            if !matches!(self.toks[i].tok, Tok::Newline | Tok::Indent | Tok::Dedent) {
                return self.toks[i].span;
            }
        }
        self.span()
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Kw(Keyword::Int) => TypeExprKind::Int,
            Tok::Kw(Keyword::Bool) => TypeExprKind::Bool,
            Tok::Ident(name) => TypeExprKind::Named(name),
            _ => return self.unexpected("a type"),
        };
        self.bump();
        Ok(TypeExpr { kind, span })
    }

    fn type_decl(&mut self, visibility: Visibility) -> PResult<TypeDecl> {
        self.expect_kw(Keyword::Type)?;
        let (name, _) = self.ident("a type name")?;
        self.expect_kw(Keyword::Is)?;
        let body = if self.eat_p(Punct::LBrace) {
            let mut fields = Vec::new();
            loop {
                if self.at_p(Punct::RBrace) {
                    break;
                }
                let ty = self.type_expr()?;
                let (fname, fspan) = self.ident("a field name")?;
                fields.push(Field {
                    span: ty.span.to(fspan),
                    ty,
                    name: fname,
                });
                if !self.eat_p(Punct::Comma) {
                    break;
                }
            }
            self.expect_p(Punct::RBrace)?;
            TypeBody::Record(fields)
        } else if self.eat_p(Punct::LParen) {
            let base = self.type_expr()?;
            let (binder, _) = self.ident("a binder name")?;
            self.expect_p(Punct::RParen)?;
            TypeBody::Constrained { base, binder }
        } else {
            return self.unexpected("`{` or `(` after `is`");
        };
        let mut where_clauses = Vec::new();
        loop {
            if self.at(&Tok::Newline) && *self.peek_at(1) == Tok::Kw(Keyword::Where) {
                self.bump();
            }
            if self.at_kw(Keyword::Where) {
                self.bump();
                where_clauses.push(self.expr()?);
            } else {
                break;
            }
        }
        self.end_of_line()?;
        Ok(TypeDecl {
            visibility,
            name,
            body,
            where_clauses,
        })
    }

    fn const_decl(&mut self) -> PResult<ConstDecl> {
        self.expect_kw(Keyword::Const)?;
        let (name, _) = self.ident("a constant name")?;
        self.expect_p(Punct::Assign)?;
        self.allow_pow = true;
        let value = self.expr();
        self.allow_pow = false;
        let value = value?;
        self.end_of_line()?;
        Ok(ConstDecl { name, value })
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect_p(Punct::LParen)?;
        let mut params = Vec::new();
        if !self.at_p(Punct::RParen) {
            loop {
                let ty = self.type_expr()?;
                let (name, nspan) = self.ident("a parameter name")?;
                params.push(Param {
                    span: ty.span.to(nspan),
                    ty,
                    name,
                });
                if !self.eat_p(Punct::Comma) {
                    break;
                }
            }
        }
        self.expect_p(Punct::RParen)?;
        Ok(params)
    }

    fn property_decl(&mut self) -> PResult<PropertyDecl> {
        self.expect_kw(Keyword::Property)?;
        let (name, _) = self.ident("a property name")?;
        let params = self.params()?;
        self.expect_p(Punct::FatArrow)?;
        let body = self.expr()?;
        self.end_of_line()?;
        Ok(PropertyDecl { name, params, body })
    }

    fn function_decl(&mut self, visibility: Visibility) -> PResult<FunctionDecl> {
        self.expect_kw(Keyword::Function)?;
        let (name, _) = self.ident("a function name")?;
        let params = self.params()?;
        let returns = if self.eat_p(Punct::Arrow) {
            self.params()?
        } else {
            Vec::new()
        };
        let mut requires = Vec::new();
        let mut ensures = Vec::new();
        loop {
            if self.at(&Tok::Newline) && matches!(self.peek_at(1), Tok::Kw(Keyword::Requires | Keyword::Ensures)) {
                self.bump();
            }
            if self.at_kw(Keyword::Requires) {
                self.bump();
                requires.push(self.expr()?);
            } else if self.at_kw(Keyword::Ensures) {
                self.bump();
                ensures.push(self.expr()?);
            } else {
                break;
            }
        }
        self.expect_p(Punct::Colon)?;
        let body = self.block()?;
        Ok(FunctionDecl {
            visibility,
            name,
            params,
            returns,
            requires,
            ensures,
            body,
        })
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::Newline, "end of line after `:`")?;
        self.expect(Tok::Indent, "an indented block")?;
        let mut stmts = Vec::new();
        while !self.at(&Tok::Dedent) && !self.at(&Tok::Eof) {
            stmts.push(self.stmt()?);
        }
        if self.at(&Tok::Dedent) {
            self.bump();
        }
        Ok(stmts)
    }

    fn starts_type_at(&self, n: usize) -> bool {
        match self.peek_at(n) {
            Tok::Kw(Keyword::Int | Keyword::Bool) => true,
            Tok::Ident(_) => matches!(self.peek_at(n + 1), Tok::Ident(_)),
            _ => false,
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        match self.peek() {
            Tok::Kw(Keyword::Return) => {
                self.bump();
                let values = if self.at(&Tok::Newline) || self.at(&Tok::Eof) {
                    Vec::new()
                } else {
                    self.value_list()?
                };
                let span = start.to(self.prev_span());
                self.end_of_line()?;
                Ok(Stmt {
                    kind: StmtKind::Return(values),
                    span,
                })
            }
            Tok::Kw(Keyword::If) => self.if_stmt(),
            Tok::Kw(Keyword::Else) => self.err(start, "syntax error: `else` without matching `if`"),
            _ if self.starts_type_at(0) => {
                let ty = self.type_expr()?;
                let (name, nspan) = self.ident("a variable name")?;
                let vars = Vec::from([Param {
                    span: ty.span.to(nspan),
                    ty,
                    name,
                }]);
                self.var_decl_rest(start, vars)
            }
            Tok::P(Punct::LParen) if self.starts_type_at(1) => {
                let vars = self.params()?;
                if !self.at_p(Punct::Assign) {
                    return self.unexpected("`=` after declared variables");
                }
                self.var_decl_rest(start, vars)
            }
            Tok::Ident(_) | Tok::P(Punct::LParen) => self.assign(start),
            _ => self.unexpected("a statement"),
        }
    }

    fn var_decl_rest(&mut self, start: Span, vars: Vec<Param>) -> PResult<Stmt> {
        let init = if self.eat_p(Punct::Assign) {
            Some(self.value_list()?)
        } else {
            None
        };
        let span = start.to(self.prev_span());
        self.end_of_line()?;
        Ok(Stmt {
            kind: StmtKind::VarDecl { vars, init },
            span,
        })
    }

    fn assign(&mut self, start: Span) -> PResult<Stmt> {
        let targets = if self.eat_p(Punct::LParen) {
            let mut ts = Vec::new();
            loop {
                ts.push(self.postfix()?);
                if !self.eat_p(Punct::Comma) {
                    break;
                }
            }
            self.expect_p(Punct::RParen)?;
            ts
        } else {
            Vec::from([self.postfix()?])
        };
        if !self.at_p(Punct::Assign) {
            return self.unexpected("`=`");
        }
        self.bump();
        let values = self.value_list()?;
        let span = start.to(self.prev_span());
        self.end_of_line()?;
        Ok(Stmt {
            kind: StmtKind::Assign { targets, values },
            span,
        })
    }

    /// Either `(e1, e2, ...)`, `e1, e2, ...` or a single expression.
    fn value_list(&mut self) -> PResult<Vec<Expr>> {
        if self.at_p(Punct::LParen) {
            let save = self.pos;
            self.bump();
            if let Ok(first) = self.expr() {
                if self.at_p(Punct::Comma) {
                    let mut items = Vec::from([first]);
                    while self.eat_p(Punct::Comma) {
                        items.push(self.expr()?);
                    }
                    self.expect_p(Punct::RParen)?;
                    return Ok(items);
                }
            }
            self.pos = save;
        }
        let mut items = Vec::from([self.expr()?]);
        while self.eat_p(Punct::Comma) {
            items.push(self.expr()?);
        }
        Ok(items)
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw(Keyword::If)?;
        let cond = self.expr()?;
        self.expect_p(Punct::Colon)?;
        let then_body = self.block()?;
        let mut else_body = Vec::new();
        if self.at_kw(Keyword::Else) {
            self.bump();
            if self.at_kw(Keyword::If) {
                else_body.push(self.if_stmt()?);
            } else {
                self.expect_p(Punct::Colon)?;
                else_body = self.block()?;
            }
        }
        let end = self.decl_end();
        Ok(Stmt {
            kind: StmtKind::If {
                cond,
                then_body,
                else_body,
            },
            span: start.to(end),
        })
    }

    // ---- expressions ----

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek() {
            Tok::P(Punct::Plus) => BinaryOp::Add,
            Tok::P(Punct::Minus) => BinaryOp::Sub,
            Tok::P(Punct::Star) => BinaryOp::Mul,
            Tok::P(Punct::Slash) => BinaryOp::Div,
            Tok::P(Punct::Percent) => BinaryOp::Rem,
            Tok::P(Punct::StarStar) => BinaryOp::Pow,
            Tok::P(Punct::Lt) => BinaryOp::Lt,
            Tok::P(Punct::Le) => BinaryOp::Le,
            Tok::P(Punct::Gt) => BinaryOp::Gt,
            Tok::P(Punct::Ge) => BinaryOp::Ge,
            Tok::P(Punct::EqEq) => BinaryOp::Eq,
            Tok::P(Punct::NotEq) => BinaryOp::Ne,
            Tok::P(Punct::AndAnd) => BinaryOp::And,
            Tok::P(Punct::OrOr) => BinaryOp::Or,
            Tok::P(Punct::Implies) => BinaryOp::Implies,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let op_span = self.span();
            if op == BinaryOp::Pow && !self.allow_pow {
                return self.err(
                    op_span,
                    "exponent operator `**` is only allowed in constant declarations",
                );
            }
            self.bump();
            let next = if op.is_right_assoc() { prec } else { prec + 1 };
            let rhs = self.binary(next)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let op = match self.peek() {
            Tok::P(Punct::Minus) => UnaryOp::Neg,
            Tok::P(Punct::Bang) => UnaryOp::Not,
            _ => return self.postfix(),
        };
        self.bump();
        let inner = self.unary()?;
        let span = start.to(inner.span);
        Ok(Expr {
            kind: ExprKind::Unary(op, Box::new(inner)),
            span,
        })
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.at_p(Punct::Dot) {
            self.bump();
            let (field, fspan) = self.ident("a field name")?;
            let span = e.span.to(fspan);
            e = Expr {
                kind: ExprKind::Field(Box::new(e), field),
                span,
            };
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Int(n),
                    span: start,
                })
            }
            Tok::Kw(Keyword::True) | Tok::Kw(Keyword::False) => {
                let b = self.at_kw(Keyword::True);
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Bool(b),
                    span: start,
                })
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat_p(Punct::LParen) {
                    let mut args = Vec::new();
                    if !self.at_p(Punct::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_p(Punct::Comma) {
                                break;
                            }
                        }
                    }
                    let end = self.expect_p(Punct::RParen)?;
                    Ok(Expr {
                        kind: ExprKind::Call(name, args),
                        span: start.to(end),
                    })
                } else {
                    Ok(Expr {
                        kind: ExprKind::Var(name),
                        span: start,
                    })
                }
            }
            Tok::P(Punct::LParen) => {
                self.bump();
                let mut e = self.expr()?;
                let end = self.expect_p(Punct::RParen)?;
                e.span = start.to(end);
                Ok(e)
            }
            Tok::P(Punct::LBrace) => {
                self.bump();
                let mut fields = Vec::new();
                if !self.at_p(Punct::RBrace) {
                    loop {
                        let (name, _) = self.ident("a field name")?;
                        self.expect_p(Punct::Colon)?;
                        fields.push((name, self.expr()?));
                        if !self.eat_p(Punct::Comma) {
                            break;
                        }
                    }
                }
                let end = self.expect_p(Punct::RBrace)?;
                Ok(Expr {
                    kind: ExprKind::Record(fields),
                    span: start.to(end),
                })
            }
            _ => self.unexpected("an expression"),
        }
    }
}

/// Parses a single expression (used by tests and tooling).
pub fn parse_expr(file: &str, source: &str) -> Result<Expr, Diagnostics> {
    let file: Arc<str> = Arc::from(file);
    let tokens = tokenize(&file, source).map_err(Diagnostics)?;
    let mut p = Parser {
        file,
        toks: tokens,
        pos: 0,
        allow_pow: false,
    };
    let e = p.expr().map_err(|d| Diagnostics(Vec::from([d])))?;
    while p.at(&Tok::Newline) {
        p.bump();
    }
    if !p.at(&Tok::Eof) {
        return Err(Diagnostics(Vec::from([Diagnostic::error(
            &p.file,
            p.span(),
            format!("syntax error: unexpected {} after expression", p.peek()),
        )])));
    }
    Ok(e)
}

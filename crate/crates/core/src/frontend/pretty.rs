//! Canonical source rendering of a [`ModuleAst`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::ast::*;

/// Renders a module in canonical layout. Parsing the output yields the same
/// tree (modulo spans), and printing is idempotent.
pub fn pretty_print(module: &ModuleAst) -> String {
    let mut out = String::new();
    for (i, d) in module.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        decl(&mut out, d);
    }
    out
}

fn visibility(out: &mut String, v: Visibility) {
    match v {
        Visibility::Default => {}
        Visibility::Public => out.push_str("public "),
        Visibility::Private => out.push_str("private "),
    }
}

fn decl(out: &mut String, d: &Decl) {
    match &d.kind {
        DeclKind::Type(t) => {
            visibility(out, t.visibility);
            let _ = write!(out, "type {} is ", t.name);
            match &t.body {
                TypeBody::Record(fields) if fields.is_empty() => out.push_str("{}"),
                TypeBody::Record(fields) => {
                    out.push_str("{\n");
                    for (i, f) in fields.iter().enumerate() {
                        let sep = if i + 1 < fields.len() { "," } else { "" };
                        let _ = writeln!(out, "    {} {}{}", type_expr(&f.ty), f.name, sep);
                    }
                    out.push('}');
                }
                TypeBody::Constrained { base, binder } => {
                    let _ = write!(out, "({} {})", type_expr(base), binder);
                }
            }
            out.push('\n');
            for w in &t.where_clauses {
                let _ = writeln!(out, "where {}", expr_to_string(w));
            }
        }
        DeclKind::Const(c) => {
            let _ = writeln!(out, "const {} = {}", c.name, expr_to_string(&c.value));
        }
        DeclKind::Property(p) => {
            let _ = writeln!(
                out,
                "property {}({}) => {}",
                p.name,
                params(&p.params),
                expr_to_string(&p.body)
            );
        }
        DeclKind::Function(f) => {
            visibility(out, f.visibility);
            let _ = write!(out, "function {}({})", f.name, params(&f.params));
            if !f.returns.is_empty() {
                let _ = write!(out, " -> ({})", params(&f.returns));
            }
            for r in &f.requires {
                let _ = write!(out, "\nrequires {}", expr_to_string(r));
            }
            for e in &f.ensures {
                let _ = write!(out, "\nensures {}", expr_to_string(e));
            }
            out.push_str(":\n");
            block(out, &f.body, 1);
        }
    }
}

fn type_expr(t: &TypeExpr) -> &str {
    match &t.kind {
        TypeExprKind::Int => "int",
        TypeExprKind::Bool => "bool",
        TypeExprKind::Named(n) => n,
    }
}

fn params(ps: &[Param]) -> String {
    ps.iter()
        .map(|p| alloc::format!("{} {}", type_expr(&p.ty), p.name))
        .collect::<Vec<_>>()
        .join(", ")
}

fn values(vs: &[Expr]) -> String {
    let parts: Vec<String> = vs.iter().map(expr_to_string).collect();
    if parts.len() == 1 {
        parts.into_iter().next().unwrap_or_default()
    } else {
        alloc::format!("({})", parts.join(", "))
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn block(out: &mut String, stmts: &[Stmt], level: usize) {
    for s in stmts {
        stmt(out, s, level);
    }
}

fn stmt(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match &s.kind {
        StmtKind::VarDecl { vars, init } => {
            if vars.len() == 1 {
                let _ = write!(out, "{} {}", type_expr(&vars[0].ty), vars[0].name);
            } else {
                let _ = write!(out, "({})", params(vars));
            }
            if let Some(init) = init {
                let _ = write!(out, " = {}", values(init));
            }
            out.push('\n');
        }
        StmtKind::Assign { targets, values: vs } => {
            let _ = writeln!(out, "{} = {}", values(targets), values(vs));
        }
        StmtKind::Return(vs) if vs.is_empty() => out.push_str("return\n"),
        StmtKind::Return(vs) => {
            let _ = writeln!(out, "return {}", values(vs));
        }
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => if_chain(out, cond, then_body, else_body, level),
    }
}

fn if_chain(out: &mut String, cond: &Expr, then_body: &[Stmt], else_body: &[Stmt], level: usize) {
    let _ = writeln!(out, "if {}:", expr_to_string(cond));
    block(out, then_body, level + 1);
    if else_body.is_empty() {
        return;
    }
    indent(out, level);
    if let [Stmt {
        kind: StmtKind::If {
            cond,
            then_body,
            else_body,
        },
        ..
    }] = else_body
    {
        out.push_str("else ");
        if_chain(out, cond, then_body, else_body, level);
    } else {
        out.push_str("else:\n");
        block(out, else_body, level + 1);
    }
}

/// Renders an expression with the minimal parentheses needed to reparse it.
pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    expr(&mut s, e);
    s
}

fn expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(n) => out.push_str(&n.to_string()),
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Var(v) => out.push_str(v),
        ExprKind::Field(inner, f) => {
            atom(out, inner);
            out.push('.');
            out.push_str(f);
        }
        ExprKind::Unary(op, inner) => {
            out.push_str(match op {
                UnaryOp::Neg => "-",
                UnaryOp::Not => "!",
            });
            atom(out, inner);
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            operand(out, l, |q| q < p || (q == p && op.is_right_assoc()));
            let _ = write!(out, " {} ", op.symbol());
            operand(out, r, |q| q < p || (q == p && !op.is_right_assoc()));
        }
        ExprKind::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(out, a);
            }
            out.push(')');
        }
        ExprKind::Record(fields) => {
            out.push('{');
            for (i, (name, v)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{name}: ");
                expr(out, v);
            }
            out.push('}');
        }
    }
}

/// Operand of a unary operator or field access: anything but an atom is
/// parenthesized.
fn atom(out: &mut String, e: &Expr) {
    if matches!(e.kind, ExprKind::Binary(..) | ExprKind::Unary(..)) {
        out.push('(');
        expr(out, e);
        out.push(')');
    } else {
        expr(out, e);
    }
}

fn operand(out: &mut String, e: &Expr, needs_parens: impl Fn(u8) -> bool) {
    match &e.kind {
        ExprKind::Binary(op, ..) if needs_parens(op.precedence()) => {
            out.push('(');
            expr(out, e);
            out.push(')');
        }
        _ => expr(out, e),
    }
}

//! SMT-LIB2 encoding of obligations and decoding of solver responses.
//!
//! Integers are mathematical `Int`s; bounded types only contribute range
//! assumptions. Running the solver process lives in the `csl` crate.

pub mod sexpr;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;
use core::time::Duration;

use num_bigint::BigInt;

use crate::logic::{LogicExpr, LogicOp, Scalar};
use crate::vcgen::{Obligation, Sort, SymbolInfo};
use sexpr::SExpr;

/// A complete script plus the symbols it declares, keyed by SMT name.
#[derive(Clone, Debug)]
pub struct SmtScript {
    pub text: String,
    pub symbols: BTreeMap<String, SymbolInfo>,
}

/// Assignment of obligation inputs. Keys are source paths for entry values
/// (`casino.pot`) and `path!n` for results of the n-th call.
pub type Model = BTreeMap<String, Scalar>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverVerdict {
    Proved,
    Refuted(Model),
    Unknown(String),
    Timeout,
}

impl SolverVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            SolverVerdict::Proved => "proved",
            SolverVerdict::Refuted(_) => "refuted",
            SolverVerdict::Unknown(_) => "unknown",
            SolverVerdict::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub path: String,
    pub timeout: Duration,
    pub logic: String,
    /// Command-line arguments passed to the solver.
    pub args: Vec<String>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            path: "z3".into(),
            timeout: Duration::from_secs(10),
            logic: "ALL".into(),
            args: alloc::vec!["-in".into()],
        }
    }
}

/// Truncating division and its remainder in terms of SMT-LIB's Euclidean
/// `div`/`mod`.
const PRELUDE: &str = "\
(define-fun div_t ((a Int) (b Int)) Int (ite (>= a 0) (div a b) (- (div (- a) b))))
(define-fun rem_t ((a Int) (b Int)) Int (ite (>= a 0) (mod a b) (- (mod (- a) b))))
";

pub fn encode(ob: &Obligation) -> SmtScript {
    encode_with_logic(ob, "ALL")
}

pub fn encode_with_logic(ob: &Obligation, logic: &str) -> SmtScript {
    let mut text = String::new();
    let _ = writeln!(text, "; {} ({})", ob.id, ob.kind);
    let _ = writeln!(text, "(set-logic {logic})");
    text.push_str("(set-option :produce-models true)\n");
    text.push_str(PRELUDE);
    let mut symbols = BTreeMap::new();
    for s in &ob.symbols {
        let name = smt_symbol(&s.name);
        let sort = match s.sort {
            Sort::Int => "Int",
            Sort::Bool => "Bool",
        };
        let _ = writeln!(text, "(declare-const {name} {sort})");
        if let Some((lo, hi)) = &s.range {
            let _ = writeln!(
                text,
                "(assert (and (<= {} {name}) (<= {name} {})))",
                numeral(lo),
                numeral(hi)
            );
        }
        symbols.insert(name.trim_matches('|').to_string(), s.clone());
    }
    for h in &ob.hypotheses {
        let _ = writeln!(text, "(assert {})", term(h));
    }
    let _ = writeln!(text, "(assert (not {}))", term(&ob.goal));
    text.push_str("(check-sat)\n(get-model)\n");
    SmtScript { text, symbols }
}

/// SMT-LIB name for a formula symbol, `|quoted|` when needed.
pub fn smt_symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.as_bytes()[0].is_ascii_digit()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.into()
    } else {
        format!("|{}|", name.replace(['|', '\\'], "_"))
    }
}

fn numeral(n: &BigInt) -> String {
    if n.sign() == num_bigint::Sign::Minus {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

/// Renders a formula as an SMT-LIB term.
pub fn term(e: &LogicExpr) -> String {
    let mut out = String::new();
    write_term(&mut out, e);
    out
}

fn write_term(out: &mut String, e: &LogicExpr) {
    match e {
        LogicExpr::Int(n) => out.push_str(&numeral(n)),
        LogicExpr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        LogicExpr::Var(v) | LogicExpr::Sym(v) => out.push_str(&smt_symbol(v)),
        LogicExpr::Not(a) => app(out, "not", &[a]),
        LogicExpr::Neg(a) => app(out, "-", &[a]),
        LogicExpr::Ite(c, t, f) => app(out, "ite", &[c, t, f]),
        LogicExpr::Bin(LogicOp::Ne, a, b) => {
            out.push_str("(not ");
            app(out, "=", &[a, b]);
            out.push(')');
        }
        LogicExpr::Bin(op, a, b) => {
            let f = match op {
                LogicOp::Add => "+",
                LogicOp::Sub => "-",
                LogicOp::Mul => "*",
                LogicOp::Div => "div_t",
                LogicOp::Rem => "rem_t",
                LogicOp::Lt => "<",
                LogicOp::Le => "<=",
                LogicOp::Gt => ">",
                LogicOp::Ge => ">=",
                LogicOp::Eq => "=",
                LogicOp::And => "and",
                LogicOp::Or => "or",
                LogicOp::Implies => "=>",
                LogicOp::Ne => unreachable!(),
            };
            app(out, f, &[a, b]);
        }
    }
}

fn app(out: &mut String, f: &str, args: &[&LogicExpr]) {
    out.push('(');
    out.push_str(f);
    for a in args {
        out.push(' ');
        write_term(out, a);
    }
    out.push(')');
}

/// Model key of a symbol.
pub fn model_key(s: &SymbolInfo) -> String {
    if s.version == 0 {
        s.path.to_string()
    } else {
        format!("{}!{}", s.path, s.version)
    }
}

/// Maps the `define-fun`s of a model back to source paths. Symbols not in
/// `table` are ignored.
pub fn decode_model(raw: &str, table: &BTreeMap<String, SymbolInfo>) -> Result<Model, String> {
    let exprs = sexpr::parse_all(raw).map_err(|e| e.to_string())?;
    let mut model = Model::new();
    for e in &exprs {
        collect_defs(e, table, &mut model)?;
    }
    Ok(model)
}

fn collect_defs(e: &SExpr, table: &BTreeMap<String, SymbolInfo>, model: &mut Model) -> Result<(), String> {
    let Some(items) = e.as_list() else {
        return Ok(());
    };
    if items.first().and_then(SExpr::as_atom) == Some("define-fun") {
        let (Some(name), Some(value)) = (items.get(1).and_then(SExpr::as_atom), items.get(4)) else {
            return Err(format!("unexpected definition `{e}`"));
        };
        if let Some(info) = table.get(name) {
            let v = scalar(value).ok_or_else(|| format!("cannot read value `{value}` of `{name}`"))?;
            model.insert(model_key(info), v);
        }
        return Ok(());
    }
    for it in items {
        collect_defs(it, table, model)?;
    }
    Ok(())
}

fn scalar(e: &SExpr) -> Option<Scalar> {
    match e {
        SExpr::Atom(a) if a == "true" => Some(Scalar::Bool(true)),
        SExpr::Atom(a) if a == "false" => Some(Scalar::Bool(false)),
        SExpr::Atom(a) => a.parse::<BigInt>().ok().map(Scalar::Int),
        SExpr::List(l) if l.len() == 2 && l[0].as_atom() == Some("-") => match scalar(&l[1])? {
            Scalar::Int(n) => Some(Scalar::Int(-n)),
            Scalar::Bool(_) => None,
        },
        _ => None,
    }
}

/// Reads a solver's full stdout. `Err` means the output is not a verdict at
/// all, which callers treat as an infrastructure failure.
pub fn classify(output: &str, table: &BTreeMap<String, SymbolInfo>) -> Result<SolverVerdict, String> {
    let trimmed = output.trim_start();
    let first = trimmed.lines().next().unwrap_or("").trim();
    let rest = &trimmed[first.len()..];
    match first {
        "unsat" => Ok(SolverVerdict::Proved),
        "sat" => match decode_model(rest, table) {
            Ok(mut model) => {
                complete(&mut model, table);
                Ok(SolverVerdict::Refuted(model))
            }
            Err(reason) => Ok(SolverVerdict::Unknown(reason)),
        },
        "unknown" => Ok(SolverVerdict::Unknown("solver returned unknown".into())),
        "timeout" => Ok(SolverVerdict::Timeout),
        _ if first.is_empty() => Err("solver produced no output".into()),
        _ => Err(format!("unexpected solver output: {first}")),
    }
}

/// Gives symbols the solver left unconstrained a value in their range, so
/// the model covers every input.
fn complete(model: &mut Model, table: &BTreeMap<String, SymbolInfo>) {
    for info in table.values() {
        model.entry(model_key(info)).or_insert_with(|| match info.sort {
            Sort::Bool => Scalar::Bool(false),
            Sort::Int => Scalar::Int(info.range.as_ref().map(|(lo, _)| lo.clone()).unwrap_or_default()),
        });
    }
}

#[cfg(test)]
mod tests;

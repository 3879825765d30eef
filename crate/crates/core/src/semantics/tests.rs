use alloc::string::ToString;
use alloc::vec::Vec;

use super::*;
use crate::load;

const CASINO: &str = include_str!("../../../../corpus/casino.csl");

fn errors_of(src: &str) -> Vec<alloc::string::String> {
    match load("t.csl", src) {
        Ok(_) => Vec::new(),
        Err(d) => d.iter().map(|d| d.message.clone()).collect(),
    }
}

#[test]
fn casino_counts() {
    let m = load("casino.csl", CASINO).unwrap_or_else(|e| panic!("{e}"));
    assert_eq!(m.types.len(), 10);
    assert_eq!(m.properties.len(), 6);
    assert_eq!(m.functions.len(), 24);
}

#[test]
fn constants_are_exact() {
    let m = load("casino.csl", CASINO).unwrap();
    let max: BigInt = (BigInt::from(1) << 256u32) - 1;
    assert_eq!(m.constant("MAX_U256"), Some(&ConstValue::Int(max.clone())));
    assert_eq!(m.constant("BET_PLACED"), Some(&ConstValue::Int(2.into())));
    let u = m.type_by_name("uint256").unwrap();
    let b = m.bounds_of(Ty::Named(u)).unwrap();
    assert_eq!((b.lo.clone(), b.hi.clone()), (BigInt::from(0), max));
    assert!(m.bounds_exact(Ty::Named(u)));
    let s = m.bounds_of(Ty::Named(m.type_by_name("State").unwrap())).unwrap();
    assert_eq!((s.lo.clone(), s.hi.clone()), (BigInt::from(0), BigInt::from(2)));
}

#[test]
fn unknown_identifier() {
    let errs = errors_of("function f(int x) -> (int r):\n    return y\n");
    assert_eq!(errs.len(), 1);
    assert!(errs[0].contains("unknown identifier `y`"), "{errs:?}");
}

#[test]
fn tuple_arity_mismatch() {
    let src = "\
function g(int x) -> (int a, int b, int c):
    return (x, x, x)
function f(int x) -> (int r):
    (int a, int b) = g(x)
    return a
";
    let errs = errors_of(src);
    assert!(errs.iter().any(|e| e.contains("arity mismatch")), "{errs:?}");
}

#[test]
fn recursive_properties_rejected() {
    let src = "\
property p(int x) => q(x)
property q(int x) => x > 0 && p(x - 1)
";
    let errs = errors_of(src);
    assert!(errs.iter().any(|e| e.contains("recursive property")), "{errs:?}");
}

#[test]
fn partial_record_literal_rejected() {
    let src = "\
type P is {int a, int b}
function f() -> (P r):
    return {a: 1}
";
    let errs = errors_of(src);
    assert!(errs.iter().any(|e| e.contains("missing field(s) `b`")), "{errs:?}");
}

#[test]
fn typing_errors() {
    let cases = [
        ("function f(int x) -> (bool r):\n    return x\n", "type mismatch"),
        ("function f(int x) -> (int r):\n    return x.f\n", "non-record"),
        ("function f(int x) -> (int r):\n    int y\n    return y\n", "before being assigned"),
        ("function f(int x) -> (int r):\n    if x > 0:\n        return 1\n", "missing return"),
        ("function f(int x) -> (int r):\n    return x\n    x = 1\n", "unreachable"),
        ("property p(int x) => x > 0\nfunction f(int x) -> (bool r):\n    return p(x)\n", "only be used in specifications"),
        ("function g(int x) -> (int r):\n    return x\nfunction f(int x) -> (int r):\n    return g(x) + 1\n", "entire right-hand side"),
        ("function g(int x) -> (int r):\n    return x\nfunction f(int x) -> (int r)\nensures r == g(x):\n    return x\n", "cannot be called from a specification"),
        ("function f(int x) -> (int r)\nensures r / x == 1:\n    return x\n", "nonzero constant"),
        ("type T is {T next}\n", "recursive type"),
        ("const A = 1\nconst A = 2\n", "duplicate declaration"),
        ("function f(int x) -> (int r):\n    return r\n", "unknown identifier `r`"),
        ("type P is {int a}\nfunction f(P p) -> (P r):\n    (p, p.a) = (p, 1)\n    return p\n", "overlapping"),
        ("function f(int x) -> (int r):\n    int r2 = f(x)\n    return x\n", "recursive function calls"),
    ];
    for (src, needle) in cases {
        let errs = errors_of(src);
        assert!(errs.iter().any(|e| e.contains(needle)), "{src:?}: {errs:?}");
    }
}

#[test]
fn typecheck_is_deterministic() {
    let src = "function f(int x) -> (int r):\n    return y + z\nfunction g() -> (bool b):\n    return 1\n";
    let a = load("t.csl", src).unwrap_err().to_string();
    let b = load("t.csl", src).unwrap_err().to_string();
    assert_eq!(a, b);
}

fn requires_of(m: &ResolvedModule, f: &str) -> Vec<TExpr> {
    m.function(m.function_by_name(f).unwrap()).requires.clone()
}

#[test]
fn inline_in_state() {
    let m = load("casino.csl", CASINO).unwrap();
    let r = &requires_of(&m, "playerWins")[0];
    assert_eq!(r.to_string(), "inState(casino, BET_PLACED)");
    assert_eq!(inline_properties(r, &m).to_string(), "casino.state == BET_PLACED");
}

#[test]
fn inline_is_transitive_and_idempotent() {
    let src = "\
property zero() => 0 == 0
property pos(int x) => x > 0 && zero()
property both(int x, int y) => pos(y) && pos(x) && zero()
function f(int x, int y) -> (int r)
requires both(y, x)
requires zero() || zero():
    return x
";
    let m = load("t.csl", src).unwrap();
    let rs = requires_of(&m, "f");
    let once = inline_properties(&rs[0], &m);
    assert_eq!(once.to_string(), "x > 0 && 0 == 0 && (y > 0 && 0 == 0) && 0 == 0");
    assert_eq!(inline_properties(&once, &m), once);
    assert_eq!(inline_properties(&rs[1], &m).to_string(), "0 == 0 || 0 == 0");
}

#[test]
fn inline_avoids_capture() {
    // The formals are named like the caller's variables but swapped.
    let src = "\
property lt(int x, int y) => x < y
function f(int y, int x) -> (int r)
requires lt(y, x + 1):
    return x
";
    let m = load("t.csl", src).unwrap();
    let r = inline_properties(&requires_of(&m, "f")[0], &m);
    assert_eq!(r.to_string(), "y < x + 1");
}

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::load;
use crate::semantics::ResolvedModule;

const CASINO: &str = include_str!("../../../../corpus/casino.csl");

fn casino() -> ResolvedModule {
    load("casino.csl", CASINO).unwrap()
}

fn addr(a: u32, balance: u64) -> String {
    format!("{{address: {a}, balance: {balance}}}")
}

fn casino_literal(state: u32, pot: u64, wager: u64, contract: u64, player: u64) -> String {
    format!(
        "{{address: {}, state: {state}, operator: {}, pot: {pot}, timeout: 0, secretNumber: 7, \
         player: {}, wager: {{value: {wager}, guess: 1}}, msg: {{sender: {}, value: 0}}, \
         block: {{coinbase: {}}}, tx: {{origin: {}}}, destroyed: false}}",
        addr(0, contract),
        addr(1, 500),
        addr(2, player),
        addr(1, 500),
        addr(3, 0),
        addr(3, 0),
    )
}

fn casino_value(m: &ResolvedModule, text: &str) -> Value {
    let ty = Ty::Named(m.type_by_name("Casino").unwrap());
    parse_value(text, ty, m).unwrap()
}

fn int_at(v: &Value, path: &str) -> BigInt {
    v.get(path).and_then(Value::as_int).cloned().unwrap()
}

#[test]
fn player_wins_pays_twice_the_wager() {
    let m = casino();
    let (pot, wager, contract, player) = (100u64, 30u64, 130u64, 50u64);
    let c = casino_value(&m, &casino_literal(2, pot, wager, contract, player));
    let out = match eval_function(&m, "playerWins", std::slice::from_ref(&c)).unwrap() {
        CallOutcome::Returned(v) => v,
        CallOutcome::Reverted(v) => panic!("{v}"),
    };
    // Expected state computed by hand from the four ensures clauses.
    let o = &out[0];
    assert_eq!(int_at(o, "pot"), BigInt::from(pot - wager));
    assert_eq!(int_at(o, "wager.value"), BigInt::from(0));
    assert_eq!(int_at(o, "player.balance"), BigInt::from(player + 2 * wager));
    assert_eq!(int_at(o, "address.balance"), BigInt::from(contract - 2 * wager));
    assert_eq!(
        [70, 0, 110, 70].map(BigInt::from),
        [
            int_at(o, "pot"),
            int_at(o, "wager.value"),
            int_at(o, "player.balance"),
            int_at(o, "address.balance")
        ]
    );
}

#[test]
fn player_wins_reverts_without_funds() {
    let m = casino();
    // 2 * 80 > 100: the second requires fails before anything runs.
    let c = casino_value(&m, &casino_literal(2, 20, 80, 100, 50));
    let before = c.clone();
    match eval_function(&m, "playerWins", std::slice::from_ref(&c)).unwrap() {
        CallOutcome::Reverted(v) => {
            assert_eq!(v.kind, ViolationKind::EntryRequires);
            assert!(v.message.contains("casino.wager.value * 2 <= casino.address.balance"));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(c, before);
}

#[test]
fn zero_transfer_is_identity() {
    let m = casino();
    let ty = Ty::Named(m.type_by_name("Address").unwrap());
    let to = parse_value(&addr(1, 5), ty, &m).unwrap();
    let from = parse_value(&addr(2, 9), ty, &m).unwrap();
    let out = eval_function(&m, "transfer", &[to.clone(), from.clone(), Value::int(0)]).unwrap();
    assert_eq!(out, CallOutcome::Returned(vec![to, from]));
}

#[test]
fn type_invariants() {
    let m = casino();
    let u = Ty::Named(m.type_by_name("uint256").unwrap());
    let max: BigInt = (BigInt::from(1) << 256u32) - 1;
    assert!(check_type_invariant(&Value::Int(max.clone()), u, &m));
    assert!(!check_type_invariant(&Value::Int(max + 1), u, &m));
    assert!(!check_type_invariant(&Value::int(-1), u, &m));
    let bad = casino_value(&m, &casino_literal(2, 5, 5, 11, 0));
    let cty = Ty::Named(m.type_by_name("Casino").unwrap());
    assert!(!check_type_invariant(&bad, cty, &m));
    let good = casino_value(&m, &casino_literal(2, 5, 5, 10, 0));
    assert!(check_type_invariant(&good, cty, &m));
}

#[test]
fn arithmetic_is_exact() {
    let src = "const M = 2 ** 256 - 1\nfunction f(int x) -> (int r):\n    return x + 1\n";
    let m = load("t.csl", src).unwrap();
    let max: BigInt = (BigInt::from(1) << 256u32) - 1;
    let out = eval_function(&m, "f", &[Value::Int(max)]).unwrap();
    assert_eq!(out, CallOutcome::Returned(vec![Value::Int(BigInt::from(1) << 256u32)]));
}

#[test]
fn division_truncates_and_checks_zero() {
    let src = "function f(int x, int y) -> (int q, int r):\n    return (x / y, x % y)\n";
    let m = load("t.csl", src).unwrap();
    let out = eval_function(&m, "f", &[Value::int(-7), Value::int(2)]).unwrap();
    assert_eq!(out, CallOutcome::Returned(vec![Value::int(-3), Value::int(-1)]));
    match eval_function(&m, "f", &[Value::int(1), Value::int(0)]).unwrap() {
        CallOutcome::Reverted(v) => {
            assert_eq!(v.kind, ViolationKind::Check(ObligationKind::DivByZero));
            assert_eq!(v.span.span.start_line, 2);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn sequential_update_breaks_the_invariant_midway() {
    let src = format!(
        "{CASINO}
function seq(Casino casino) -> (Casino out)
requires inState(casino, BET_PLACED):
    casino.pot = casino.pot - casino.wager.value
    casino.wager.value = 0
    return casino
"
    );
    let m = load("t.csl", &src).unwrap();
    let c = casino_value(&m, &casino_literal(2, 100, 30, 130, 50));
    match eval_function(&m, "seq", &[c]).unwrap() {
        CallOutcome::Reverted(v) => {
            assert_eq!(v.kind, ViolationKind::Check(ObligationKind::RecordInvariant));
            assert_eq!(v.function.as_ref(), "seq");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn underflow_is_reported_with_its_direction() {
    let src = "\
type nat is (int n) where n >= 0 && n <= 10
function f(nat a, nat b) -> (nat r):
    nat d = a - b
    return d
";
    let m = load("t.csl", src).unwrap();
    match eval_function(&m, "f", &[Value::int(1), Value::int(2)]).unwrap() {
        CallOutcome::Reverted(v) => {
            assert_eq!(v.kind, ViolationKind::Check(ObligationKind::TypeConstraint));
            assert!(v.message.starts_with("underflow"), "{}", v.message);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn enumeration_counts() {
    let src = "\
type q is (int n) where n >= 0 && n <= 3
type bit is (int n) where n >= 0 && n <= 1
type P is {bit a, bit b}
type E is {bit a, bit b}
where a == b
function one(q x) -> (q r):
    return x
function two(P p) -> (P r):
    return p
function eq(E e) -> (E r):
    return e
function mixed(bool f, E e, q x) -> (q r):
    return x
function unbounded(int x) -> (int r):
    return x
";
    let m = load("t.csl", src).unwrap();
    let count = |f: &str| enumerate_inputs(&m, f).unwrap().count();
    assert_eq!(count("one"), 4);
    assert_eq!(count("two"), 4);
    assert_eq!(count("eq"), 2);
    assert_eq!(count("mixed"), 16);
    let all: Vec<Vec<Value>> = enumerate_inputs(&m, "eq").unwrap().collect();
    assert_eq!(format!("{}", all[1][0]), "{a: 1, b: 1}");
    assert!(matches!(
        enumerate_inputs(&m, "unbounded"),
        Err(EnumError::NotEnumerable { .. })
    ));
}

#[test]
fn literal_errors() {
    let m = casino();
    let ty = Ty::Named(m.type_by_name("Address").unwrap());
    assert!(parse_value("{address: 1}", ty, &m).is_err());
    assert!(parse_value("{address: 1, balance: 2, x: 3}", ty, &m).is_err());
    assert!(parse_value("{address: true, balance: 2}", ty, &m).is_err());
    assert_eq!(
        parse_value("{ balance: -2, address: BET_PLACED }", ty, &m)
            .unwrap()
            .to_string(),
        "{address: 2, balance: -2}"
    );
}

use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;

use super::*;
use crate::vcgen::{generate_obligations, ObligationKind};
use crate::{load, SourceSpan, Span};

fn uint_symbol(name: &str, path: &str) -> SymbolInfo {
    SymbolInfo {
        name: Arc::from(name),
        path: Arc::from(path),
        version: 0,
        sort: Sort::Int,
        type_name: "uint256".into(),
        range: Some((BigInt::from(0), (BigInt::from(1) << 256u32) - 1)),
    }
}

fn obligation(hyps: Vec<LogicExpr>, goal: LogicExpr, symbols: Vec<SymbolInfo>) -> Obligation {
    Obligation {
        id: "f.post.1".into(),
        function: Arc::from("f"),
        kind: ObligationKind::Postcondition,
        span: SourceSpan {
            file: Arc::from("t.csl"),
            span: Span::point(1, 1),
        },
        description: "test".into(),
        hypotheses: hyps,
        goal,
        symbols,
    }
}

#[test]
fn range_assumption_uses_full_decimal_bound() {
    let ob = obligation(
        vec![],
        LogicExpr::bin(LogicOp::Ge, LogicExpr::sym("v!0"), LogicExpr::int(0)),
        vec![uint_symbol("v!0", "v")],
    );
    let s = encode(&ob);
    assert!(s
        .text
        .contains("(<= v!0 115792089237316195423570985008687907853269984665640564039457584007913129639935)"));
    assert!(s.text.contains("(declare-const v!0 Int)"));
    assert!(s.symbols.contains_key("v!0"));
}

#[test]
fn goal_is_negated_and_checked_once() {
    let ob = obligation(
        vec![LogicExpr::sym("b!0"), LogicExpr::sym("b!0")],
        crate::logic::TRUE,
        vec![],
    );
    let s = encode(&ob);
    assert!(s.text.contains("(assert (not true))"));
    assert_eq!(s.text.matches("(check-sat)").count(), 1);
    assert!(s.text.trim_end().ends_with("(check-sat)\n(get-model)"));
}

#[test]
fn casino_scripts_have_no_bit_vectors() {
    let m = load("casino.csl", include_str!("../../../../corpus/casino.csl")).unwrap();
    for ob in generate_obligations(&m, "playerWins").unwrap() {
        let s = encode(&ob);
        assert!(!s.text.contains("BitVec") && !s.text.contains("bv"), "{}", ob.id);
        assert_eq!(s.text.matches("(check-sat)").count(), 1);
        assert_eq!(s.symbols.len(), ob.symbols.len());
    }
}

#[test]
fn awkward_names_are_quoted() {
    assert_eq!(smt_symbol("casino.pot!0"), "casino.pot!0");
    assert_eq!(smt_symbol("x#3!0"), "|x#3!0|");
    assert_eq!(smt_symbol("1x"), "|1x|");
}

#[test]
fn terms_use_truncating_helpers() {
    let e = LogicExpr::bin(
        LogicOp::Ne,
        LogicExpr::bin(LogicOp::Rem, LogicExpr::sym("a"), LogicExpr::int(-2)),
        LogicExpr::neg(LogicExpr::sym("b")),
    );
    assert_eq!(term(&e), "(not (= (rem_t a (- 2)) (- b)))");
}

fn table() -> BTreeMap<String, SymbolInfo> {
    let mut t = BTreeMap::new();
    t.insert("casino.pot!0".to_string(), uint_symbol("casino.pot!0", "casino.pot"));
    let mut s = uint_symbol("a1.balance!1", "a1.balance");
    s.version = 1;
    t.insert("a1.balance!1".to_string(), s);
    t
}

#[test]
fn decodes_models() {
    let m = decode_model("((define-fun casino.pot!0 () Int 70))", &table()).unwrap();
    assert_eq!(m.get("casino.pot"), Some(&Scalar::Int(70.into())));
    assert!(decode_model("()", &table()).unwrap().is_empty());
    let m = decode_model(
        "(\n  (define-fun other () Int 1)\n  (define-fun a1.balance!1 () Int\n    (- 6))\n)",
        &table(),
    )
    .unwrap();
    assert_eq!(m.len(), 1);
    assert_eq!(m.get("a1.balance!1"), Some(&Scalar::Int((-6).into())));
    assert!(decode_model("((define-fun casino.pot!0 () Int (/ 1 2)))", &table()).is_err());
}

#[test]
fn classification() {
    let t = table();
    assert_eq!(classify("unsat\n(error \"no model\")\n", &t), Ok(SolverVerdict::Proved));
    match classify("sat\n((define-fun casino.pot!0 () Int 5))\n", &t).unwrap() {
        SolverVerdict::Refuted(m) => {
            assert_eq!(m.get("casino.pot"), Some(&Scalar::Int(5.into())));
            // Completed with the lower end of its range.
            assert_eq!(m.get("a1.balance!1"), Some(&Scalar::Int(0.into())));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(classify("unknown\n", &t), Ok(SolverVerdict::Unknown(_))));
    assert!(classify("", &t).is_err());
    assert!(classify("(error \"bad\")", &t).is_err());
}

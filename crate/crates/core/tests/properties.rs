use std::collections::BTreeMap;

use csl_core::interp::{check_type_invariant, enumerate_inputs, eval_function, CallOutcome, Value};
use csl_core::logic::{LogicExpr, LogicOp, Scalar};
use csl_core::semantics::Ty;
use csl_core::{load, parse, pretty_print, BigInt};
use proptest::prelude::*;

const CASINO: &str = include_str!("../../../corpus/casino.csl");

// ---------------------------------------------------------------------------
// Generators

fn int_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0i64..4).prop_map(|n| n.to_string()),
        prop::sample::select(vec!["a", "b", "c"]).prop_map(str::to_owned),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*"]),
                inner.clone(),
                any::<bool>()
            )
                .prop_map(|(l, op, r, paren)| if paren {
                    format!("({l} {op} {r})")
                } else {
                    format!("{l} {op} {r}")
                }),
            inner.prop_map(|e| format!("-({e})")),
        ]
    })
}

fn bool_expr() -> impl Strategy<Value = String> {
    let cmp = (
        int_expr(),
        prop::sample::select(vec!["<", "<=", "==", "!=", ">", ">="]),
        int_expr(),
    )
        .prop_map(|(l, op, r)| format!("({l}) {op} ({r})"));
    cmp.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(vec!["&&", "||", "==>"]),
                inner.clone(),
                any::<bool>()
            )
                .prop_map(|(l, op, r, paren)| if paren {
                    format!("({l} {op} {r})")
                } else {
                    format!("{l} {op} {r}")
                }),
            inner.prop_map(|e| format!("!({e})")),
        ]
    })
}

#[derive(Clone, Debug)]
enum Stmt {
    Assign(&'static str, String),
    Swap(&'static str, &'static str, String, String),
    If(String, Vec<Stmt>, Vec<Stmt>),
}

fn var() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["a", "b", "c"])
}

fn stmt() -> impl Strategy<Value = Stmt> {
    let simple = prop_oneof![
        (var(), int_expr()).prop_map(|(v, e)| Stmt::Assign(v, e)),
        (var(), var(), int_expr(), int_expr())
            .prop_filter("distinct targets", |(x, y, _, _)| x != y)
            .prop_map(|(x, y, e1, e2)| Stmt::Swap(x, y, e1, e2)),
    ];
    simple.prop_recursive(2, 10, 3, |inner| {
        (
            bool_expr(),
            prop::collection::vec(inner.clone(), 1..3),
            prop::collection::vec(inner, 1..3),
        )
            .prop_map(|(c, t, e)| Stmt::If(c, t, e))
    })
}

fn render(stmts: &[Stmt], depth: usize, out: &mut String) {
    let pad = "    ".repeat(depth);
    for s in stmts {
        match s {
            Stmt::Assign(v, e) => out.push_str(&format!("{pad}{v} = {e}\n")),
            Stmt::Swap(x, y, e1, e2) => out.push_str(&format!("{pad}({x}, {y}) = ({e1}, {e2})\n")),
            Stmt::If(c, t, e) => {
                out.push_str(&format!("{pad}if {c}:\n"));
                render(t, depth + 1, out);
                out.push_str(&format!("{pad}else:\n"));
                render(e, depth + 1, out);
            }
        }
    }
}

fn program(stmts: &[Stmt]) -> String {
    let mut src = String::from("function f(int a, int b, int c) -> (int ra, int rb, int rc):\n");
    render(stmts, 1, &mut src);
    src.push_str("    return (a, b, c)\n");
    src
}

/// `k1*a + k2*b + k3*c <op> k`
fn linear_post() -> impl Strategy<Value = LogicExpr> {
    (
        prop::array::uniform3(-2i64..3),
        prop::sample::select(vec![LogicOp::Lt, LogicOp::Le, LogicOp::Eq, LogicOp::Ne, LogicOp::Ge]),
        -6i64..7,
    )
        .prop_map(|(ks, op, k)| {
            let mut sum = LogicExpr::int(0);
            for (coef, v) in ks.iter().zip(["a", "b", "c"]) {
                let term = LogicExpr::bin(LogicOp::Mul, LogicExpr::int(*coef), LogicExpr::var(v));
                sum = LogicExpr::bin(LogicOp::Add, sum, term);
            }
            LogicExpr::bin(op, sum, LogicExpr::int(k))
        })
}

// ---------------------------------------------------------------------------
// Properties

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printed_expressions_parse_back(e in bool_expr()) {
        let src = format!("function f(int a, int b, int c) -> (bool r)\nensures {e}:\n    return true\n");
        let ast = match parse("t.csl", &src) {
            Ok(a) => a,
            Err(_) => return Err(TestCaseError::reject("comparison chains do not parse")),
        };
        let printed = pretty_print(&ast);
        let again = parse("t.csl", &printed).expect("printed source parses");
        prop_assert_eq!(again.without_spans(), ast.without_spans());
        prop_assert_eq!(pretty_print(&again), printed);
    }

    #[test]
    fn printed_programs_parse_back(body in prop::collection::vec(stmt(), 1..4)) {
        let src = program(&body);
        if let Ok(ast) = parse("t.csl", &src) {
            let again = parse("t.csl", &pretty_print(&ast)).expect("printed source parses");
            prop_assert_eq!(again.without_spans(), ast.without_spans());
        }
    }

    /// On loop-free integer code wp(s, Q) holds in exactly the states from
    /// which running s ends in Q.
    #[test]
    fn wp_agrees_with_execution(
        body in prop::collection::vec(stmt(), 1..4),
        post in linear_post(),
        start in prop::array::uniform3(-3i64..4),
    ) {
        let src = program(&body);
        let Ok(m) = load("t.csl", &src) else {
            return Err(TestCaseError::reject("comparison chains do not parse"));
        };
        let f = m.function(m.function_by_name("f").unwrap());
        let stmts = &f.body[..f.body.len() - 1];
        let pre = csl_core::vcgen::wp(&m, f, stmts, &post);

        let env: BTreeMap<&str, BigInt> = ["a", "b", "c"].into_iter().zip(start.map(BigInt::from)).collect();
        let expected = pre
            .eval(&|n| env.get(n).cloned().map(Scalar::Int))
            .and_then(|s| s.as_bool());

        let args: Vec<Value> = start.iter().map(|n| Value::int(*n)).collect();
        let out = match eval_function(&m, "f", &args).unwrap() {
            CallOutcome::Returned(v) => v,
            CallOutcome::Reverted(v) => panic!("integer code reverted: {v}"),
        };
        let fin: BTreeMap<&str, BigInt> = ["a", "b", "c"]
            .into_iter()
            .zip(out.iter().map(|v| v.as_int().unwrap().clone()))
            .collect();
        let actual = post
            .eval(&|n| fin.get(n).cloned().map(Scalar::Int))
            .and_then(|s| s.as_bool());
        prop_assert_eq!(expected, actual, "wp = {}\n{}", pre, src);
    }

    /// Damaged sources are rejected with in-range positions, and the same
    /// way every time.
    #[test]
    fn diagnostics_stay_in_range(
        pos in 0usize..CASINO.len(),
        junk in prop::sample::select(vec!["(", ")", ":", "x", "\n", "    ", "==", "while ", "**", "{", "}", "1", ".", "\t", "uint256"]),
    ) {
        let mut src = CASINO.to_owned();
        let pos = (0..=pos).rev().find(|p| src.is_char_boundary(*p)).unwrap();
        src.insert_str(pos, junk);
        let lines = src.lines().count() as u32 + 1;
        if let Err(diags) = load("t.csl", &src) {
            prop_assert!(!diags.is_empty());
            for d in diags.iter() {
                prop_assert!(d.span.span.start_line >= 1 && d.span.span.start_line <= lines, "{}", d);
                prop_assert!(d.span.span.start_col >= 1, "{}", d);
            }
            prop_assert_eq!(load("t.csl", &src).unwrap_err(), diags);
        }
    }

    /// Enumeration matches a brute-force count of valid pairs.
    #[test]
    fn enumeration_matches_brute_force(
        lo in 0i64..3,
        width in 0i64..4,
        clause in 0usize..4,
        k in 0i64..6,
    ) {
        let hi = lo + width;
        let (text, keep): (String, Box<dyn Fn(i64, i64) -> bool>) = match clause {
            0 => ("a <= b".into(), Box::new(|a, b| a <= b)),
            1 => ("a != b".into(), Box::new(|a, b| a != b)),
            2 => (format!("a + b == {k}"), Box::new(move |a, b| a + b == k)),
            _ => ("true".into(), Box::new(|_, _| true)),
        };
        let src = format!(
            "type t is (int n) where n >= {lo} && n <= {hi}\ntype R is {{t a, t b}}\nwhere {text}\nfunction f(R r, bool x) -> (bool y):\n    return x\n"
        );
        let m = load("t.csl", &src).unwrap();
        let got: Vec<Vec<Value>> = enumerate_inputs(&m, "f").unwrap().collect();
        let mut want = 0;
        for a in lo..=hi {
            for b in lo..=hi {
                if keep(a, b) {
                    want += 2;
                }
            }
        }
        prop_assert_eq!(got.len(), want);
        let rty = Ty::Named(m.type_by_name("R").unwrap());
        for args in &got {
            prop_assert!(check_type_invariant(&args[0], rty, &m));
        }
        let mut dedup = got.clone();
        dedup.sort_by_key(|v| format!("{v:?}"));
        dedup.dedup();
        prop_assert_eq!(dedup.len(), got.len());
    }

    /// Evaluation is a pure function of its inputs.
    #[test]
    fn transfer_is_deterministic(
        to in 0u64..1000, from in 0u64..1000, amount in 0u64..1200,
    ) {
        let m = load("casino.csl", CASINO).unwrap();
        let acct = |a: i64, b: u64| Value::Record(vec![("address".into(), Value::int(a)), ("balance".into(), Value::int(b))]);
        let args = vec![acct(1, to), acct(2, from), Value::int(amount)];
        let snapshot = args.clone();
        let first = eval_function(&m, "transfer", &args).unwrap();
        prop_assert_eq!(&args, &snapshot);
        prop_assert_eq!(&eval_function(&m, "transfer", &args).unwrap(), &first);
        match first {
            CallOutcome::Returned(v) => {
                prop_assert!(amount <= from);
                let total = v[0].get("balance").unwrap().as_int().unwrap() + v[1].get("balance").unwrap().as_int().unwrap();
                prop_assert_eq!(total, BigInt::from(to + from));
            }
            CallOutcome::Reverted(_) => prop_assert!(amount > from),
        }
    }
}

use std::path::Path;

use csl::regress::run_bug_regressions;
use csl::verify::{verify_module, VerifyOptions};
use csl_core::frontend::ast::DeclKind;
use csl_core::logic::Scalar;
use csl_core::smt::SolverVerdict;
use csl_core::vcgen::ObligationKind;
use csl_core::{parse, BigInt, ModuleAst};

fn corpus_dir() -> String {
    format!("{}/../../corpus", env!("CARGO_MANIFEST_DIR"))
}

fn read(file: &str) -> String {
    std::fs::read_to_string(format!("{}/{file}", corpus_dir())).unwrap()
}

/// Functions and properties, without positions.
fn behaviour(file: &str, source: &str) -> ModuleAst {
    let ast = parse(file, source).unwrap();
    ModuleAst {
        decls: ast
            .decls
            .into_iter()
            .filter(|d| matches!(d.kind, DeclKind::Function(_) | DeclKind::Property(_)))
            .collect(),
    }
    .without_spans()
}

#[test]
fn small_twins_differ_only_in_scale() {
    for (full, small) in [
        ("casino.csl", "casino_small.csl"),
        ("casino_bug_decidebet.csl", "casino_small_bug_decidebet.csl"),
        ("casino_bug_removefrompot.csl", "casino_small_bug_removefrompot.csl"),
        ("casino_bug_transfer.csl", "casino_small_bug_transfer.csl"),
    ] {
        let renamed = read(full)
            .replace("MAX_U256", "MAX_U2")
            .replace("MAX256", "MAX2")
            .replace("uint256", "uint2");
        assert_eq!(
            behaviour(full, &renamed),
            behaviour(small, &read(small)),
            "{small} drifted from {full}"
        );
    }
}

#[test]
fn bug_variants_differ_from_the_fix() {
    let fixed = behaviour("casino.csl", &read("casino.csl"));
    for bug in [
        "casino_bug_decidebet.csl",
        "casino_bug_removefrompot.csl",
        "casino_bug_transfer.csl",
    ] {
        assert_ne!(behaviour(bug, &read(bug)), fixed, "{bug}");
    }
}

#[test]
fn overflow_counterexample_is_the_maximum() {
    let loaded = csl::load_file(Path::new(&format!("{}/golden/uint256_overflow.csl", corpus_dir()))).unwrap();
    let opts = VerifyOptions {
        function: Some("increment".into()),
        ..Default::default()
    };
    let report = verify_module(&loaded.module, loaded.stats(), &opts).unwrap();
    let refuted: Vec<_> = report
        .results()
        .filter(|r| matches!(r.verdict, SolverVerdict::Refuted(_)))
        .collect();
    assert_eq!(refuted.len(), 1);
    assert_eq!(refuted[0].obligation.kind, ObligationKind::TypeConstraint);
    let SolverVerdict::Refuted(model) = &refuted[0].verdict else {
        unreachable!()
    };
    let max = (BigInt::from(1) << 256u32) - 1;
    assert_eq!(model.get("x"), Some(&Scalar::Int(max)));
}

#[test]
fn regressions_are_stable() {
    let opts = VerifyOptions::default();
    let dir = Path::new(&corpus_dir()).to_owned();
    let a = run_bug_regressions(&dir, &opts).unwrap();
    let b = run_bug_regressions(&dir, &opts).unwrap();
    assert!(a.passed(), "{}", a.render());
    let hits = |r: &csl::regress::RegressionReport| -> Vec<Vec<(String, ObligationKind)>> {
        r.entries.iter().map(|e| e.hits.clone()).collect()
    };
    assert_eq!(hits(&a), hits(&b));
}

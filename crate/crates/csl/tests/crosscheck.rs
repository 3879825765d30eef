use csl::crosscheck::{crosscheck, Agreement, CrosscheckError, Verdict};
use csl::verify::VerifyOptions;
use csl_core::vcgen::ObligationKind;

const SMALL: &str = "\
type nibble is (int n)
where n >= 0 && n <= 3

function clamp(nibble x) -> (nibble y)
ensures y <= 2:
    if x > 2:
        return 2
    return x

function bump(nibble x) -> (nibble y)
ensures y == x + 1:
    return x + 1

function twice(nibble x) -> (nibble y)
requires x <= 1:
    nibble once = bump(x)
    return once * 2

function never(nibble x) -> (nibble y)
requires x > 5:
    return x
";

fn options() -> VerifyOptions {
    VerifyOptions {
        jobs: Some(2),
        ..Default::default()
    }
}

#[test]
fn verdicts_agree_with_enumeration() {
    let loaded = csl::load_source("small.csl", SMALL.to_owned()).unwrap();
    let report = crosscheck(&loaded, &options()).unwrap();
    assert!(report.is_consistent(), "{}", report.render());

    let clamp = report.function("clamp").unwrap();
    assert_eq!(clamp.verdict, Verdict::Proved);
    assert_eq!((clamp.inputs, clamp.admitted), (4, 4));
    assert!(clamp.violations.is_empty());

    let bump = report.function("bump").unwrap();
    assert_eq!(bump.verdict, Verdict::Refuted(vec![ObligationKind::TypeConstraint]));
    assert_eq!(bump.violations.get(&ObligationKind::TypeConstraint), Some(&1));
    let (args, _) = bump.example.as_ref().unwrap();
    assert_eq!(args[0].to_string(), "3");

    // For x = 1 the doubled result leaves the range.
    let twice = report.function("twice").unwrap();
    assert_eq!(twice.admitted, 2);
    assert_eq!(twice.verdict, Verdict::Refuted(vec![ObligationKind::TypeConstraint]));
    assert_eq!(twice.violations.get(&ObligationKind::TypeConstraint), Some(&1));
    assert!(twice.in_callees.is_empty());

    assert!(!report.replays.is_empty());
    assert!(report.replays.iter().all(|r| r.reproduced), "{}", report.render());
}

#[test]
fn unsatisfiable_requires_is_vacuous() {
    let loaded = csl::load_source("small.csl", SMALL.to_owned()).unwrap();
    let opts = VerifyOptions {
        function: Some("never".into()),
        ..options()
    };
    let report = crosscheck(&loaded, &opts).unwrap();
    assert_eq!(report.functions.len(), 1);
    let never = &report.functions[0];
    assert_eq!(never.verdict, Verdict::Proved);
    assert_eq!(never.admitted, 0);
    assert_eq!(never.status, Agreement::Vacuous);
    assert!(report.is_consistent());
}

#[test]
fn unbounded_parameters_cannot_be_enumerated() {
    let src = "const MAX = 2 ** 256 - 1\ntype uint256 is (int n)\nwhere n >= 0 && n <= MAX\n\nfunction id(uint256 x) -> (uint256 y):\n    return x\n";
    let loaded = csl::load_source("wide.csl", src.to_owned()).unwrap();
    let e = crosscheck(&loaded, &options()).unwrap_err();
    assert!(
        matches!(e, CrosscheckError::Enumerate { ref function, .. } if function == "id"),
        "{e}"
    );
}

#[test]
fn wrong_verdict_is_a_disagreement() {
    use csl::crosscheck::check_function;
    use csl::verify::verify_module;
    use csl_core::smt::SolverVerdict;

    let loaded = csl::load_source("small.csl", SMALL.to_owned()).unwrap();
    let mut verification = verify_module(&loaded.module, loaded.stats(), &options()).unwrap();
    // Pretend the solver proved everything.
    for f in &mut verification.functions {
        for r in &mut f.obligations {
            r.verdict = SolverVerdict::Proved;
        }
    }
    let bump = verification.function("bump").unwrap();
    let check = check_function(&loaded.module, bump, &verification).unwrap();
    assert!(matches!(check.status, Agreement::Disagree(_)), "{:?}", check.status);
}

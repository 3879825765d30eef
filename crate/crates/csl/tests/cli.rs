use std::process::Command;

use csl::cli::{run_cli, EXIT_FAILURE, EXIT_INFRA, EXIT_OK, EXIT_USAGE};

fn corpus(file: &str) -> String {
    format!("{}/../../corpus/{file}", env!("CARGO_MANIFEST_DIR"))
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn csl(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(std::iter::once("csl").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

#[test]
fn proved_function_exits_zero() {
    let r = csl(&["verify", &corpus("casino.csl"), "--function", "transfer"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert!(r.out.contains("transfer.post.1"));
    assert!(r.out.contains("0 refuted"));
}

#[test]
fn underflow_is_reported_against_transfer() {
    let r = csl(&["verify", &corpus("casino_bug_transfer.csl"), "--function", "transfer"]);
    assert_eq!(r.code, EXIT_FAILURE, "{}{}", r.out, r.err);
    let refuted: Vec<&str> = r
        .out
        .lines()
        .filter(|l| l.trim_start().starts_with("refuted"))
        .collect();
    assert_eq!(refuted.len(), 1, "{}", r.out);
    assert!(refuted[0].contains("transfer.constraint."), "{}", r.out);
    assert!(r.out.contains("underflow"), "{}", r.out);
    assert!(r.out.contains("counterexample:"), "{}", r.out);
}

#[test]
fn json_report_matches_console_report() {
    let file = corpus("casino_bug_decidebet.csl");
    let text = csl(&["verify", &file, "--function", "decideBet"]);
    let json = csl(&["verify", &file, "--function", "decideBet", "--json"]);
    assert_eq!(text.code, EXIT_FAILURE);
    assert_eq!(json.code, EXIT_FAILURE);
    let v: serde_json::Value = serde_json::from_str(&json.out).unwrap();
    assert_eq!(v["module"], file.as_str());
    let funcs = v["functions"].as_array().unwrap();
    assert_eq!(funcs.len(), 1);
    assert_eq!(funcs[0]["name"], "decideBet");
    let obs = funcs[0]["obligations"].as_array().unwrap();
    for ob in obs {
        for key in ["id", "kind", "verdict", "ms"] {
            assert!(ob.get(key).is_some(), "missing {key} in {ob}");
        }
        let line = format!("{} {}", ob["verdict"].as_str().unwrap(), ob["id"].as_str().unwrap());
        let shown = text
            .out
            .lines()
            .any(|l| l.split_whitespace().take(2).collect::<Vec<_>>().join(" ") == line);
        assert!(shown, "`{line}` not in console output");
    }
    let stats = &v["stats"];
    assert_eq!(stats["obligations"].as_u64().unwrap() as usize, obs.len());
    assert_eq!(stats["refuted"], 1);
    assert_eq!(stats["functions"], 24);
    assert!(stats["spec_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn emitted_scripts_are_named_by_obligation() {
    let dir = tempfile::tempdir().unwrap();
    let r = csl(&[
        "verify",
        &corpus("casino.csl"),
        "--function",
        "transfer",
        "--emit-smt",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let ids: Vec<&str> = r
        .out
        .lines()
        .filter_map(|l| l.split_whitespace().nth(1))
        .filter(|w| w.starts_with("transfer."))
        .collect();
    assert!(!ids.is_empty());
    for id in ids {
        let text = std::fs::read_to_string(dir.path().join(format!("{id}.smt2"))).unwrap();
        assert!(text.starts_with(&format!("; {id} ")), "{text}");
        assert!(text.contains("(set-logic ALL)"));
        assert!(text.contains("(check-sat)"));
    }
}

#[test]
fn obligations_can_be_listed_without_a_solver() {
    let r = csl(&[
        "verify",
        &corpus("casino.csl"),
        "--function",
        "playerWins",
        "--emit-obligations",
        "--solver",
        "/nonexistent",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    for n in 1..=4 {
        assert!(r.out.contains(&format!("playerWins.post.{n}")), "{}", r.out);
    }
}

#[test]
fn run_prints_results_and_reverts() {
    let file = corpus("casino.csl");
    let ok = csl(&[
        "run",
        &file,
        "--function",
        "transfer",
        "--args",
        "{address: 1, balance: 10}",
        "{address: 2, balance: 5}",
        "3",
    ]);
    assert_eq!(ok.code, EXIT_OK, "{}", ok.err);
    assert!(ok.out.starts_with("returned"));
    assert!(ok.out.contains("13") && ok.out.contains('2'), "{}", ok.out);

    let bad = csl(&[
        "run",
        &file,
        "--function",
        "transfer",
        "--args",
        "{address: 1, balance: 10}",
        "{address: 2, balance: 5}",
        "6",
    ]);
    assert_eq!(bad.code, EXIT_FAILURE);
    assert!(bad.out.starts_with("reverted"), "{}", bad.out);
}

#[test]
fn stats_reports_declarations() {
    let r = csl(&["stats", &corpus("casino.csl"), "--json"]);
    assert_eq!(r.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["types"], 10);
    assert_eq!(v["properties"], 6);
    assert_eq!(v["functions"], 24);
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(csl(&[]).code, EXIT_USAGE);
    assert_eq!(csl(&["verify"]).code, EXIT_USAGE);
    assert_eq!(
        csl(&["verify", &corpus("casino.csl"), "--timeout", "0"]).code,
        EXIT_USAGE
    );
    assert_eq!(csl(&["verify", &corpus("casino.csl"), "--jobs", "0"]).code, EXIT_USAGE);
    let r = csl(&["run", &corpus("casino.csl"), "--function", "nope", "--args"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("nope"));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.csl");
    std::fs::write(&broken, "function f(int x) -> (int y):\n    return x x\n").unwrap();
    let r = csl(&["verify", broken.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("broken.csl:2:"), "{}", r.err);
}

#[test]
fn infrastructure_errors_exit_three() {
    let file = corpus("casino.csl");
    let r = csl(&["verify", &file, "--function", "transfer", "--solver", "/nonexistent"]);
    assert_eq!(r.code, EXIT_INFRA);
    assert!(r.err.contains("/nonexistent"));
    assert_eq!(csl(&["verify", "/nonexistent/file.csl"]).code, EXIT_INFRA);
}

#[test]
fn tiny_timeouts_give_up_instead_of_failing() {
    let r = csl(&[
        "verify",
        &corpus("casino.csl"),
        "--function",
        "playerWins",
        "--timeout",
        "0.001",
    ]);
    assert_eq!(r.code, EXIT_FAILURE);
    assert!(r.out.contains("timeout"), "{}", r.out);
    assert!(!r.out.contains("refuted  "), "{}", r.out);
}

#[test]
fn binary_exit_status_follows_the_report() {
    let bin = env!("CARGO_BIN_EXE_csl");
    let ok = Command::new(bin)
        .args(["stats", &corpus("casino.csl")])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let fail = Command::new(bin)
        .args(["verify", &corpus("casino_bug_decidebet.csl"), "--function", "decideBet"])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(EXIT_FAILURE));
    let usage = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(EXIT_USAGE));
}

//! Small-scope crosscheck: verifier verdicts against exhaustive execution.
//!
//! Every function is run on every type-valid input. Inputs rejected by the
//! requires clauses are skipped; on the rest, a function the verifier
//! proves must never fail one of its own checks, and a function with a
//! refuted obligation must fail at least one check of a refuted kind.
//! Finally each counterexample model is replayed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use csl_core::interp::{
    enumerate_inputs, eval_function, CallOutcome, EnumError, InterpError, RuntimeViolation, Value, ViolationKind,
};
use csl_core::smt::SolverVerdict;
use csl_core::vcgen::ObligationKind;
use csl_core::ResolvedModule;

use crate::replay::{replay, Replay};
use crate::verify::{verify_module, FunctionReport, VerificationReport, VerifyError, VerifyOptions};
use crate::Loaded;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proved,
    Refuted(Vec<ObligationKind>),
    /// Some obligation is unknown or timed out and none is refuted.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    /// No enumerated input satisfies the requires clauses.
    Vacuous,
    Disagree(String),
}

#[derive(Clone, Debug)]
pub struct FunctionCheck {
    pub name: String,
    pub verdict: Verdict,
    /// Type-valid inputs enumerated.
    pub inputs: u64,
    /// Inputs that pass the requires clauses.
    pub admitted: u64,
    /// Failed checks of the function itself, by kind.
    pub violations: BTreeMap<ObligationKind, u64>,
    /// First failing input of the function itself.
    pub example: Option<(Vec<Value>, RuntimeViolation)>,
    /// Failed checks inside callees, by callee.
    pub in_callees: BTreeMap<String, u64>,
    pub status: Agreement,
}

#[derive(Clone, Debug)]
pub struct CrosscheckReport {
    pub module: String,
    pub verification: VerificationReport,
    pub functions: Vec<FunctionCheck>,
    pub replays: Vec<Replay>,
    pub elapsed: Duration,
}

impl CrosscheckReport {
    pub fn disagreements(&self) -> usize {
        self.functions
            .iter()
            .filter(|f| matches!(f.status, Agreement::Disagree(_)))
            .count()
            + self.replays.iter().filter(|r| !r.reproduced).count()
    }

    pub fn is_consistent(&self) -> bool {
        self.disagreements() == 0
    }

    pub fn function(&self, name: &str) -> Option<&FunctionCheck> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for f in &self.functions {
            let verdict = match &f.verdict {
                Verdict::Proved => "proved".to_owned(),
                Verdict::Refuted(kinds) => {
                    let k: Vec<&str> = kinds.iter().map(|k| k.name()).collect();
                    format!("refuted ({})", k.join(", "))
                }
                Verdict::Inconclusive => "inconclusive".to_owned(),
            };
            let status = match &f.status {
                Agreement::Agree => "agree".to_owned(),
                Agreement::Vacuous => "vacuous".to_owned(),
                Agreement::Disagree(why) => format!("DISAGREE: {why}"),
            };
            let found: u64 = f.violations.values().sum();
            let _ = writeln!(
                out,
                "{:<20} {:<32} inputs {:>8}, admitted {:>8}, violations {:>6}  {}",
                f.name, verdict, f.inputs, f.admitted, found, status
            );
            if let Some((args, v)) = &f.example {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                let _ = writeln!(out, "    e.g. ({}) -> {v}", args.join(", "));
            }
        }
        for r in &self.replays {
            let what = match r.violation() {
                Some(v) => format!("{} at {}", v.kind, v.span),
                None => "returned normally".to_owned(),
            };
            let mark = if r.reproduced { "replayed" } else { "NOT REPLAYED" };
            let _ = writeln!(out, "{mark:<12} {:<32} {what}", r.id);
        }
        let _ = writeln!(
            out,
            "{}: {} functions, {} counterexamples, {} disagreements ({:.2} s)",
            self.module,
            self.functions.len(),
            self.replays.len(),
            self.disagreements(),
            self.elapsed.as_secs_f64()
        );
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CrosscheckError {
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("cannot enumerate inputs of `{function}`: {source}")]
    Enumerate {
        function: String,
        #[source]
        source: EnumError,
    },
    #[error("cannot run `{function}`: {source}")]
    Interp {
        function: String,
        #[source]
        source: InterpError,
    },
}

pub fn crosscheck(loaded: &Loaded, opts: &VerifyOptions) -> Result<CrosscheckReport, CrosscheckError> {
    let names: Vec<&str> = match &opts.function {
        Some(n) => vec![n.as_str()],
        None => loaded.module.functions.iter().map(|f| &*f.name).collect(),
    };
    crosscheck_functions(loaded, opts, &names)
}

/// Crosschecks only `names`. The whole module is still verified, so a
/// failure inside a callee can be blamed on it.
pub fn crosscheck_functions(
    loaded: &Loaded,
    opts: &VerifyOptions,
    names: &[&str],
) -> Result<CrosscheckReport, CrosscheckError> {
    let start = Instant::now();
    let module = &loaded.module;
    // Fail on unenumerable signatures before spending solver time.
    for name in names {
        enumerate_inputs(module, name).map_err(|source| CrosscheckError::Enumerate {
            function: (*name).to_owned(),
            source,
        })?;
    }
    let whole = VerifyOptions {
        function: None,
        ..opts.clone()
    };
    let verification = verify_module(module, loaded.stats(), &whole)?;
    let selected: Vec<&FunctionReport> = verification
        .functions
        .iter()
        .filter(|f| names.contains(&f.name.as_str()))
        .collect();

    let jobs = opts
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, selected.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<BTreeMap<usize, Result<FunctionCheck, CrosscheckError>>> = Mutex::default();
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(f) = selected.get(i) else { break };
                let r = check_function(module, f, &verification);
                results.lock().unwrap().insert(i, r);
            });
        }
    });
    let functions = results
        .into_inner()
        .unwrap()
        .into_values()
        .collect::<Result<Vec<_>, _>>()?;

    let mut replays = Vec::new();
    for r in selected.iter().flat_map(|f| &f.obligations) {
        if let SolverVerdict::Refuted(model) = &r.verdict {
            replays.push(
                replay(module, &r.obligation, model).map_err(|source| CrosscheckError::Interp {
                    function: r.obligation.function.to_string(),
                    source,
                })?,
            );
        }
    }
    Ok(CrosscheckReport {
        module: verification.module.clone(),
        verification,
        functions,
        replays,
        elapsed: start.elapsed(),
    })
}

fn verdict_of(f: &FunctionReport) -> Verdict {
    let refuted = f.refuted_kinds();
    if !refuted.is_empty() {
        Verdict::Refuted(refuted)
    } else if f.all_proved() {
        Verdict::Proved
    } else {
        Verdict::Inconclusive
    }
}

/// Runs one function on all its inputs and compares with its verdict.
pub fn check_function(
    module: &ResolvedModule,
    report: &FunctionReport,
    all: &VerificationReport,
) -> Result<FunctionCheck, CrosscheckError> {
    let name = report.name.as_str();
    let inputs = enumerate_inputs(module, name).map_err(|source| CrosscheckError::Enumerate {
        function: name.to_owned(),
        source,
    })?;
    let mut check = FunctionCheck {
        name: name.to_owned(),
        verdict: verdict_of(report),
        inputs: 0,
        admitted: 0,
        violations: BTreeMap::new(),
        example: None,
        in_callees: BTreeMap::new(),
        status: Agreement::Agree,
    };
    let mut rejected = None;
    for args in inputs {
        check.inputs += 1;
        let outcome = eval_function(module, name, &args).map_err(|source| CrosscheckError::Interp {
            function: name.to_owned(),
            source,
        })?;
        let v = match outcome {
            CallOutcome::Returned(_) => {
                check.admitted += 1;
                continue;
            }
            CallOutcome::Reverted(v) => v,
        };
        match v.kind {
            ViolationKind::EntryRequires => continue,
            ViolationKind::EntryConstraint => {
                rejected.get_or_insert(v);
                continue;
            }
            ViolationKind::Check(kind) => {
                check.admitted += 1;
                if *v.function == *name {
                    *check.violations.entry(kind).or_default() += 1;
                    if check.example.is_none() {
                        check.example = Some((args, v));
                    }
                } else {
                    *check.in_callees.entry(v.function.to_string()).or_default() += 1;
                }
            }
        }
    }

    check.status = if let Some(v) = rejected {
        Agreement::Disagree(format!("an enumerated input is not type-valid: {v}"))
    } else if let Some(callee) = check
        .in_callees
        .keys()
        .find(|c| all.function(c).is_none_or(FunctionReport::all_proved))
    {
        Agreement::Disagree(format!("a check fails inside `{callee}`, which the verifier proves"))
    } else {
        match &check.verdict {
            Verdict::Proved if !check.violations.is_empty() => {
                Agreement::Disagree("proved, but the interpreter finds violations".into())
            }
            Verdict::Refuted(kinds) if !kinds.iter().any(|k| check.violations.contains_key(k)) => {
                Agreement::Disagree("refuted, but no input fails a check of a refuted kind".into())
            }
            Verdict::Inconclusive => Agreement::Disagree("the verifier is inconclusive".into()),
            _ if check.admitted == 0 => Agreement::Vacuous,
            _ => Agreement::Agree,
        }
    };
    Ok(check)
}

//! Whole-module verification and its report.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use csl_core::smt::{encode_with_logic, SolverConfig, SolverVerdict};
use csl_core::vcgen::{generate_obligations, Obligation, ObligationKind, VcError};
use csl_core::ResolvedModule;
use serde::Serialize;

use crate::solver::{solve, SolverError};
use crate::stats::CorpusStats;

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub solver: SolverConfig,
    /// Concurrent solver processes; defaults to the number of CPUs.
    pub jobs: Option<usize>,
    /// Restrict the run to one function.
    pub function: Option<String>,
    /// Write every script to `DIR/<obligation-id>.smt2`.
    pub emit_smt: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Vc(#[from] VcError),
    #[error("obligation {id}: {source}")]
    Solver {
        id: String,
        #[source]
        source: SolverError,
    },
    #[error("cannot write {}: {source}", path.display())]
    Emit {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug)]
pub struct ObligationResult {
    pub obligation: Obligation,
    pub verdict: SolverVerdict,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct FunctionReport {
    pub name: String,
    pub obligations: Vec<ObligationResult>,
}

impl FunctionReport {
    pub fn all_proved(&self) -> bool {
        self.obligations.iter().all(|o| o.verdict == SolverVerdict::Proved)
    }

    /// Kinds of the refuted obligations.
    pub fn refuted_kinds(&self) -> Vec<ObligationKind> {
        let mut kinds: Vec<ObligationKind> = self
            .obligations
            .iter()
            .filter(|o| matches!(o.verdict, SolverVerdict::Refuted(_)))
            .map(|o| o.obligation.kind)
            .collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub obligations: usize,
    pub proved: usize,
    pub refuted: usize,
    pub unknown: usize,
    pub timeout: usize,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub module: String,
    /// Every function, in declaration order.
    pub functions: Vec<FunctionReport>,
    pub stats: CorpusStats,
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn results(&self) -> impl Iterator<Item = &ObligationResult> {
        self.functions.iter().flat_map(|f| f.obligations.iter())
    }

    pub fn function(&self, name: &str) -> Option<&FunctionReport> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn totals(&self) -> Totals {
        let mut t = Totals::default();
        for r in self.results() {
            t.obligations += 1;
            match r.verdict {
                SolverVerdict::Proved => t.proved += 1,
                SolverVerdict::Refuted(_) => t.refuted += 1,
                SolverVerdict::Unknown(_) => t.unknown += 1,
                SolverVerdict::Timeout => t.timeout += 1,
            }
        }
        t
    }

    pub fn all_proved(&self) -> bool {
        self.results().all(|r| r.verdict == SolverVerdict::Proved)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Ob<'a> {
            id: &'a str,
            kind: &'static str,
            verdict: &'static str,
            ms: u64,
        }
        #[derive(Serialize)]
        struct Func<'a> {
            name: &'a str,
            obligations: Vec<Ob<'a>>,
        }
        #[derive(Serialize)]
        struct Stats<'a> {
            #[serde(flatten)]
            totals: Totals,
            elapsed_ms: u64,
            #[serde(flatten)]
            corpus: &'a CorpusStats,
            spec_ratio: f64,
        }
        #[derive(Serialize)]
        struct Report<'a> {
            module: &'a str,
            functions: Vec<Func<'a>>,
            stats: Stats<'a>,
        }
        let report = Report {
            module: &self.module,
            functions: self
                .functions
                .iter()
                .map(|f| Func {
                    name: &f.name,
                    obligations: f
                        .obligations
                        .iter()
                        .map(|r| Ob {
                            id: &r.obligation.id,
                            kind: r.obligation.kind.name(),
                            verdict: r.verdict.label(),
                            ms: millis(r.elapsed),
                        })
                        .collect(),
                })
                .collect(),
            stats: Stats {
                totals: self.totals(),
                elapsed_ms: millis(self.elapsed),
                corpus: &self.stats,
                spec_ratio: self.stats.spec_ratio(),
            },
        };
        serde_json::to_value(report).expect("report serializes")
    }

    /// Console rendering: one line per obligation, details for failures.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for f in &self.functions {
            let _ = writeln!(out, "{}", f.name);
            for r in &f.obligations {
                let ob = &r.obligation;
                let _ = writeln!(
                    out,
                    "  {:<8} {:<32} {:>6} ms",
                    r.verdict.label(),
                    ob.id,
                    millis(r.elapsed)
                );
                if r.verdict == SolverVerdict::Proved {
                    continue;
                }
                let _ = writeln!(out, "           {}: {} at {}", ob.kind, ob.description, ob.span);
                match &r.verdict {
                    SolverVerdict::Refuted(model) if !model.is_empty() => {
                        let cex: Vec<String> = model.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                        let _ = writeln!(out, "           counterexample: {}", cex.join(", "));
                    }
                    SolverVerdict::Unknown(reason) => {
                        let _ = writeln!(out, "           solver: {reason}");
                    }
                    _ => {}
                }
            }
        }
        let t = self.totals();
        let _ = writeln!(
            out,
            "{}: {} obligations, {} proved, {} refuted, {} unknown, {} timeout ({:.2} s)",
            self.module,
            t.obligations,
            t.proved,
            t.refuted,
            t.unknown,
            t.timeout,
            self.elapsed.as_secs_f64()
        );
        out
    }
}

fn millis(d: Duration) -> u64 {
    d.as_millis().try_into().unwrap_or(u64::MAX)
}

/// Generates and discharges every obligation of `module`.
pub fn verify_module(
    module: &ResolvedModule,
    stats: CorpusStats,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let funcs: Vec<&str> = match &opts.function {
        Some(name) => {
            if module.function_by_name(name).is_none() {
                return Err(VcError::UnknownFunction(name.clone()).into());
            }
            vec![name.as_str()]
        }
        None => module.functions.iter().map(|f| &*f.name).collect(),
    };
    let mut obligations = Vec::new();
    let mut owners = Vec::new();
    for (i, f) in funcs.iter().enumerate() {
        for ob in generate_obligations(module, f)? {
            obligations.push(ob);
            owners.push(i);
        }
    }
    if let Some(dir) = &opts.emit_smt {
        let emit = |path: PathBuf, source| VerifyError::Emit { path, source };
        std::fs::create_dir_all(dir).map_err(|e| emit(dir.clone(), e))?;
        for ob in &obligations {
            let path = dir.join(format!("{}.smt2", ob.id));
            let script = encode_with_logic(ob, &opts.solver.logic);
            std::fs::write(&path, script.text).map_err(|e| emit(path, e))?;
        }
    }

    let results = solve_all(&obligations, opts)?;
    let mut functions: Vec<FunctionReport> = funcs
        .iter()
        .map(|f| FunctionReport {
            name: (*f).to_owned(),
            obligations: Vec::new(),
        })
        .collect();
    for ((ob, owner), (verdict, elapsed)) in obligations.into_iter().zip(owners).zip(results) {
        functions[owner].obligations.push(ObligationResult {
            obligation: ob,
            verdict,
            elapsed,
        });
    }
    Ok(VerificationReport {
        module: module.file.to_string(),
        functions,
        stats,
        elapsed: start.elapsed(),
    })
}

type Solved = Result<(SolverVerdict, Duration), VerifyError>;

/// Solves `obligations` on a pool of worker threads; results come back in
/// input order.
pub fn solve_all(
    obligations: &[Obligation],
    opts: &VerifyOptions,
) -> Result<Vec<(SolverVerdict, Duration)>, VerifyError> {
    let jobs = opts
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, obligations.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Solved>>> = Mutex::new((0..obligations.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(ob) = obligations.get(i) else { break };
                let script = encode_with_logic(ob, &opts.solver.logic);
                let t = Instant::now();
                let res = solve(&script, &opts.solver)
                    .map(|v| (v, t.elapsed()))
                    .map_err(|source| VerifyError::Solver {
                        id: ob.id.clone(),
                        source,
                    });
                let failed = res.is_err();
                slots.lock().unwrap()[i] = Some(res);
                if failed {
                    // Stop handing out work; the whole run is void.
                    next.store(obligations.len(), Ordering::Relaxed);
                }
            });
        }
    });
    let slots = slots.into_inner().unwrap();
    if let Some(err) = slots.iter().position(|s| matches!(s, Some(Err(_)))) {
        let mut slots = slots;
        return Err(slots.swap_remove(err).unwrap().unwrap_err());
    }
    Ok(slots
        .into_iter()
        .map(|s| s.expect("every obligation solved").expect("no errors"))
        .collect())
}

//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use csl_core::interp::{eval_function, parse_value, CallOutcome};
use csl_core::vcgen::{emit_obligations, generate_obligations};

use crate::crosscheck::{crosscheck, CrosscheckError};
use crate::regress::{run_bug_regressions, RegressError};
use crate::solver;
use crate::verify::{verify_module, VerifyError, VerifyOptions};
use crate::{load_file, LoadError, Loaded};

pub const EXIT_OK: i32 = 0;
/// Verification, crosscheck or regression failure, or a reverted run.
pub const EXIT_FAILURE: i32 = 1;
/// Bad command line or invalid source.
pub const EXIT_USAGE: i32 = 2;
/// The environment failed: unreadable file, missing or crashing solver.
pub const EXIT_INFRA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "csl", version, about = "Verifier and interpreter for CSL contracts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prove every obligation of a file.
    Verify {
        file: PathBuf,
        #[arg(long)]
        function: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write each SMT script to DIR/<obligation-id>.smt2.
        #[arg(long, value_name = "DIR")]
        emit_smt: Option<PathBuf>,
        /// Print the obligations instead of solving them.
        #[arg(long)]
        emit_obligations: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run one function on literal arguments.
    Run {
        file: PathBuf,
        #[arg(long)]
        function: String,
        /// One literal per parameter, e.g. `5`, `true`, `{address: 1, balance: 0}`.
        #[arg(long, num_args = 0.., allow_hyphen_values = true)]
        args: Vec<String>,
    },
    /// Compare verifier verdicts with exhaustive execution.
    Crosscheck {
        file: PathBuf,
        #[arg(long)]
        function: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check that the known contract bugs are found.
    Regress {
        /// Directory holding the casino corpus.
        #[arg(long, default_value = "corpus")]
        corpus: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Declaration and line counts of a file.
    Stats {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Solver executable; defaults to $CSL_SOLVER, then `z3`.
    #[arg(long)]
    pub solver: Option<String>,
    /// Per-obligation time limit in seconds.
    #[arg(long, value_parser = parse_timeout)]
    pub timeout: Option<Duration>,
    /// Concurrent solver processes.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
}

impl SolverArgs {
    fn options(&self, function: Option<String>) -> VerifyOptions {
        VerifyOptions {
            solver: solver::config(self.solver.as_deref(), self.timeout),
            jobs: self.jobs.map(|j| j as usize),
            function,
            emit_smt: None,
        }
    }
}

fn parse_timeout(s: &str) -> Result<Duration, String> {
    let secs: f64 = s.parse().map_err(|_| format!("`{s}` is not a number of seconds"))?;
    if secs.is_finite() && secs > 0.0 {
        Ok(Duration::from_secs_f64(secs))
    } else {
        Err("timeout must be positive".into())
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let code = match e {
            LoadError::Io { .. } => EXIT_INFRA,
            LoadError::Invalid(_) => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        let code = match e {
            VerifyError::Vc(_) => EXIT_USAGE,
            VerifyError::Solver { .. } | VerifyError::Emit { .. } => EXIT_INFRA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CrosscheckError> for Failure {
    fn from(e: CrosscheckError) -> Self {
        match e {
            CrosscheckError::Verify(v) => v.into(),
            other => Failure {
                code: EXIT_USAGE,
                message: other.to_string(),
            },
        }
    }
}

impl From<RegressError> for Failure {
    fn from(e: RegressError) -> Self {
        match e {
            RegressError::Load(LoadError::Invalid(_)) | RegressError::Load(LoadError::Io { .. }) => Failure {
                code: EXIT_INFRA,
                message: e.to_string(),
            },
            RegressError::Verify { path, source } => {
                let f = Failure::from(source);
                Failure {
                    code: f.code,
                    message: format!("{}: {}", path.display(), f.message),
                }
            }
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

fn status(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    Ok(load_file(path)?)
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Verify {
            file,
            function,
            solver,
            emit_smt,
            emit_obligations: dump,
            json,
        } => {
            let loaded = load(&file)?;
            if dump {
                let names: Vec<String> = match &function {
                    Some(f) => vec![f.clone()],
                    None => loaded.module.functions.iter().map(|f| f.name.to_string()).collect(),
                };
                for name in names {
                    let obs = generate_obligations(&loaded.module, &name).map_err(|e| usage(e.to_string()))?;
                    let _ = write!(out, "{}", emit_obligations(&obs));
                }
                return Ok(EXIT_OK);
            }
            let mut opts = solver.options(function);
            opts.emit_smt = emit_smt;
            let report = verify_module(&loaded.module, loaded.stats(), &opts)?;
            if json {
                let _ = writeln!(out, "{:#}", report.to_json());
            } else {
                let _ = write!(out, "{}", report.render());
            }
            Ok(status(report.all_proved()))
        }
        Command::Run { file, function, args } => {
            let loaded = load(&file)?;
            let module = &loaded.module;
            let id = module
                .function_by_name(&function)
                .ok_or_else(|| usage(format!("unknown function `{function}`")))?;
            let params = &module.function(id).params;
            if params.len() != args.len() {
                return Err(usage(format!(
                    "`{function}` takes {} argument(s), {} given",
                    params.len(),
                    args.len()
                )));
            }
            let mut values = Vec::new();
            for (p, text) in params.iter().zip(&args) {
                let v = parse_value(text, p.ty, module).map_err(|e| usage(format!("argument `{}`: {e}", p.name)))?;
                values.push(v);
            }
            match eval_function(module, &function, &values).map_err(|e| usage(e.to_string()))? {
                CallOutcome::Returned(vals) => {
                    let shown: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
                    let _ = writeln!(out, "returned {}", shown.join(", "));
                    Ok(EXIT_OK)
                }
                CallOutcome::Reverted(v) => {
                    let _ = writeln!(out, "reverted: {v}");
                    Ok(EXIT_FAILURE)
                }
            }
        }
        Command::Crosscheck { file, function, solver } => {
            let loaded = load(&file)?;
            let report = crosscheck(&loaded, &solver.options(function))?;
            let _ = write!(out, "{}", report.render());
            Ok(status(report.is_consistent()))
        }
        Command::Regress { corpus, solver } => {
            let report = run_bug_regressions(&corpus, &solver.options(None))?;
            let _ = write!(out, "{}", report.render());
            Ok(status(report.passed()))
        }
        Command::Stats { file, json } => {
            let loaded = load(&file)?;
            let s = loaded.stats();
            if json {
                let mut v = serde_json::to_value(&s).expect("stats serialize");
                v["spec_ratio"] = serde_json::json!(s.spec_ratio());
                let _ = writeln!(out, "{v:#}");
            } else {
                let _ = writeln!(out, "types       {}", s.types);
                let _ = writeln!(out, "properties  {}", s.properties);
                let _ = writeln!(out, "functions   {}", s.functions);
                let _ = writeln!(out, "constants   {}", s.constants);
                let _ = writeln!(out, "lines       {}", s.lines);
                let _ = writeln!(out, "spec lines  {} ({:.1}%)", s.spec_lines, 100.0 * s.spec_ratio());
            }
            Ok(EXIT_OK)
        }
    }
}

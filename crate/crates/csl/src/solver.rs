//! Runs an external SMT solver, one process per script.

use std::io::{Read, Write};
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use csl_core::smt::{classify, SmtScript, SolverConfig, SolverVerdict};

/// Environment variable consulted when no `--solver` flag is given.
pub const SOLVER_ENV: &str = "CSL_SOLVER";

const POLL: Duration = Duration::from_millis(2);

/// Failures of the solving infrastructure. None of these is a verdict.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("solver `{0}` not found")]
    NotFound(String),
    #[error("cannot run solver `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver `{path}` failed ({status}): {detail}")]
    Crashed {
        path: String,
        status: String,
        detail: String,
    },
}

/// Solver configuration from an optional command-line path, falling back to
/// `CSL_SOLVER` and then to `z3` on the search path.
pub fn config(path: Option<&str>, timeout: Option<Duration>) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    if let Some(p) = path.map(str::to_owned).or_else(|| std::env::var(SOLVER_ENV).ok()) {
        cfg.path = p;
    }
    if let Some(t) = timeout {
        cfg.timeout = t;
    }
    cfg
}

/// Feeds `script` to a fresh solver process and classifies its answer. The
/// process is killed once `cfg.timeout` elapses.
pub fn solve(script: &SmtScript, cfg: &SolverConfig) -> Result<SolverVerdict, SolverError> {
    let io = |source| SolverError::Io {
        path: cfg.path.clone(),
        source,
    };
    let mut child = match Command::new(&cfg.path)
        .args(&cfg.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(SolverError::NotFound(cfg.path.clone())),
        Err(e) => return Err(io(e)),
    };
    let start = Instant::now();

    let mut stdin = child.stdin.take().expect("piped stdin");
    let text = script.text.clone();
    let writer = thread::spawn(move || {
        // A solver that exits early closes the pipe; its output tells why.
        let _ = stdin.write_all(text.as_bytes());
    });
    let stdout = drain(child.stdout.take().expect("piped stdout"));
    let stderr = drain(child.stderr.take().expect("piped stderr"));

    let status = loop {
        if let Some(status) = child.try_wait().map_err(io)? {
            break status;
        }
        if start.elapsed() >= cfg.timeout {
            let _ = child.kill();
            let _ = child.wait();
            let _ = writer.join();
            return Ok(SolverVerdict::Timeout);
        }
        thread::sleep(POLL);
    };
    let _ = writer.join();
    let out = stdout.join().unwrap_or_default();
    let err = stderr.join().unwrap_or_default();

    // z3 exits non-zero after `unsat` because `(get-model)` then fails, so
    // only the first line of output decides.
    classify(&out, &script.symbols).map_err(|reason| crashed(&cfg.path, status, &reason, &err))
}

fn drain(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

fn crashed(path: &str, status: ExitStatus, reason: &str, stderr: &str) -> SolverError {
    let detail = match stderr.trim() {
        "" => reason.to_owned(),
        e => format!("{reason}; stderr: {}", e.lines().next().unwrap_or(e)),
    };
    SolverError::Crashed {
        path: path.to_owned(),
        status: status.to_string(),
        detail,
    }
}

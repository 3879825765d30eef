//! Regression suite over the known bugs of the casino contract.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use csl_core::smt::SolverVerdict;
use csl_core::vcgen::ObligationKind;

use crate::verify::{verify_module, VerificationReport, VerifyError, VerifyOptions};
use crate::{load_file, LoadError};

/// A buggy corpus file and where its bug must be reported.
#[derive(Clone, Copy, Debug)]
pub struct BugCase {
    pub file: &'static str,
    pub function: &'static str,
    /// Any of these kinds counts as detection.
    pub kinds: &'static [ObligationKind],
    pub summary: &'static str,
}

pub const BUG_CASES: [BugCase; 3] = [
    BugCase {
        file: "casino_bug_decidebet.csl",
        function: "decideBet",
        kinds: &[ObligationKind::Postcondition],
        summary: "ensures promises the winner only the wager back, playerWins pays twice the wager",
    },
    BugCase {
        file: "casino_bug_removefrompot.csl",
        function: "removeFromPot",
        kinds: &[ObligationKind::Postcondition, ObligationKind::RecordInvariant],
        summary: "removeFromPot also accepts money through payable",
    },
    BugCase {
        file: "casino_bug_transfer.csl",
        function: "transfer",
        kinds: &[ObligationKind::TypeConstraint],
        summary: "transfer checks the receiver's balance instead of the sender's",
    },
];

/// The corrected contract, which must prove completely.
pub const FIXED_FILE: &str = "casino.csl";

#[derive(Clone, Debug)]
pub struct RegressionEntry {
    pub case: BugCase,
    /// Refuted obligations of the expected function with an expected kind.
    pub hits: Vec<(String, ObligationKind)>,
    pub report: VerificationReport,
}

impl RegressionEntry {
    pub fn detected(&self) -> bool {
        !self.hits.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct RegressionReport {
    pub entries: Vec<RegressionEntry>,
    /// Obligations of the fixed contract that did not prove.
    pub false_positives: Vec<String>,
}

impl RegressionReport {
    pub fn detected(&self) -> usize {
        self.entries.iter().filter(|e| e.detected()).count()
    }

    pub fn passed(&self) -> bool {
        self.detected() == self.entries.len() && self.false_positives.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let mark = if e.detected() { "detected" } else { "MISSED" };
            let kinds: Vec<&str> = e.case.kinds.iter().map(|k| k.name()).collect();
            let _ = writeln!(
                out,
                "{mark:<9} {} ({}): {}",
                e.case.function,
                kinds.join("/"),
                e.case.summary
            );
            for (id, kind) in &e.hits {
                let _ = writeln!(out, "          refuted {id} [{kind}] in {}", e.case.file);
            }
        }
        let fp = if self.false_positives.is_empty() {
            "no false positives on the fixed contract".to_owned()
        } else {
            format!("fixed contract fails: {}", self.false_positives.join(", "))
        };
        let _ = writeln!(out, "{}/{} bugs detected, {fp}", self.detected(), self.entries.len());
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RegressError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{}: {source}", path.display())]
    Verify {
        path: PathBuf,
        #[source]
        source: VerifyError,
    },
}

fn verify_file(path: &Path, opts: &VerifyOptions) -> Result<VerificationReport, RegressError> {
    let loaded = load_file(path)?;
    verify_module(&loaded.module, loaded.stats(), opts).map_err(|source| RegressError::Verify {
        path: path.to_owned(),
        source,
    })
}

/// Verifies the three bug files and the fixed contract found in `dir`.
pub fn run_bug_regressions(dir: &Path, opts: &VerifyOptions) -> Result<RegressionReport, RegressError> {
    let mut entries = Vec::new();
    for case in BUG_CASES {
        let report = verify_file(&dir.join(case.file), opts)?;
        let hits = report
            .function(case.function)
            .map(|f| {
                f.obligations
                    .iter()
                    .filter(|r| {
                        matches!(r.verdict, SolverVerdict::Refuted(_)) && case.kinds.contains(&r.obligation.kind)
                    })
                    .map(|r| (r.obligation.id.clone(), r.obligation.kind))
                    .collect()
            })
            .unwrap_or_default();
        entries.push(RegressionEntry { case, hits, report });
    }
    let fixed = verify_file(&dir.join(FIXED_FILE), opts)?;
    let false_positives = fixed
        .results()
        .filter(|r| r.verdict != SolverVerdict::Proved)
        .map(|r| r.obligation.id.clone())
        .collect();
    Ok(RegressionReport {
        entries,
        false_positives,
    })
}

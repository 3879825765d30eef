//! Command-line side of the CSL toolchain: solver processes, file handling,
//! reports and the harnesses that compare the verifier with the reference
//! interpreter.

pub mod cli;
pub mod crosscheck;
pub mod regress;
pub mod replay;
pub mod scenario;
pub mod solver;
pub mod stats;
pub mod verify;

use std::path::{Path, PathBuf};

use csl_core::{Diagnostics, ModuleAst, ResolvedModule};

pub use stats::{corpus_stats, CorpusStats};

/// A source file after parsing and typechecking.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub source: String,
    pub ast: ModuleAst,
    pub module: ResolvedModule,
}

impl Loaded {
    pub fn stats(&self) -> CorpusStats {
        corpus_stats(&self.source, &self.ast)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(Diagnostics),
}

pub fn load_source(name: &str, source: String) -> Result<Loaded, LoadError> {
    let ast = csl_core::parse(name, &source).map_err(LoadError::Invalid)?;
    let module = csl_core::typecheck(name, &ast).map_err(LoadError::Invalid)?;
    Ok(Loaded { source, ast, module })
}

pub fn load_file(path: &Path) -> Result<Loaded, LoadError> {
    let source = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    load_source(&path.display().to_string(), source)
}

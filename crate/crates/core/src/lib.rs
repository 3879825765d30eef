//! Core of the CSL contract language toolchain.
//!
//! CSL is a small, indentation-sensitive contract language with records,
//! constrained integer types, `requires`/`ensures` clauses and pure
//! specification `property` predicates. This crate holds everything that is
//! pure computation:
//!
//! * [`frontend`]: lexer, parser and pretty printer.
//! * [`semantics`]: name resolution, typechecking and property expansion.
//! * [`vcgen`]: weakest-precondition generation of proof obligations.
//! * [`smt`]: SMT-LIB2 encoding of obligations and decoding of solver output.
//! * [`interp`]: concrete reference interpreter and small-scope input enumeration.
//!
//! Spawning solver processes, reading files and the command line live in the
//! `csl` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod frontend;
pub mod interp;
pub mod logic;
pub mod semantics;
pub mod smt;
pub mod vcgen;

pub use diagnostics::{Diagnostic, Diagnostics, Severity, SourceSpan, Span};
pub use frontend::{parse, pretty_print, ModuleAst};
pub use semantics::{typecheck, ResolvedModule};

pub use num_bigint::BigInt;

/// Parses and typechecks `source` in one step.
pub fn load(file: &str, source: &str) -> Result<ResolvedModule, Diagnostics> {
    let ast = parse(file, source)?;
    typecheck(file, &ast)
}

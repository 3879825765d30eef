//! Size statistics of a source file.

use std::collections::BTreeSet;

use csl_core::frontend::{DeclKind, ModuleAst};
use serde::Serialize;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub types: usize,
    pub properties: usize,
    pub functions: usize,
    pub constants: usize,
    /// Lines that hold code, i.e. neither blank nor comment-only.
    pub lines: usize,
    /// Code lines belonging to type or property declarations or to
    /// requires/ensures clauses.
    pub spec_lines: usize,
}

impl CorpusStats {
    pub fn spec_ratio(&self) -> f64 {
        if self.lines == 0 {
            0.0
        } else {
            self.spec_lines as f64 / self.lines as f64
        }
    }
}

pub fn corpus_stats(source: &str, ast: &ModuleAst) -> CorpusStats {
    let code: Vec<bool> = source
        .lines()
        .map(|l| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with("//")
        })
        .collect();
    let mut spec = BTreeSet::new();
    let mut cover = |start: u32, end: u32| {
        for line in start..=end {
            if code.get(line as usize - 1).copied().unwrap_or(false) {
                spec.insert(line);
            }
        }
    };
    let mut stats = CorpusStats::default();
    for d in &ast.decls {
        match &d.kind {
            DeclKind::Type(_) => {
                stats.types += 1;
                cover(d.span.start_line, d.span.end_line);
            }
            DeclKind::Property(_) => {
                stats.properties += 1;
                cover(d.span.start_line, d.span.end_line);
            }
            DeclKind::Const(_) => stats.constants += 1,
            DeclKind::Function(f) => {
                stats.functions += 1;
                for e in f.requires.iter().chain(&f.ensures) {
                    cover(e.span.start_line, e.span.end_line);
                }
            }
        }
    }
    stats.lines = code.iter().filter(|c| **c).count();
    stats.spec_lines = spec.len();
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_spec_lines() {
        let src = "\
// comment
type nat is (int n)
where n >= 0

property pos(nat n) => n > 0

function f(nat x) -> (nat y)
requires x < 10
ensures y == x:
    return x
";
        let ast = csl_core::parse("t.csl", src).unwrap();
        let s = corpus_stats(src, &ast);
        assert_eq!((s.types, s.properties, s.functions, s.constants), (1, 1, 1, 0));
        assert_eq!(s.lines, 7);
        assert_eq!(s.spec_lines, 5);
    }
}

//! Line-oriented tokenizer with significant indentation.
//!
//! Physical lines are joined into one logical line while a `(` or `{` is
//! open, or when a line ends with a binary operator, `=`, `,` or `=>`.
//! Each logical line ends in [`Tok::Newline`]; changes of indentation
//! between logical lines produce [`Tok::Indent`] / [`Tok::Dedent`].

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;

use crate::{Diagnostic, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keyword {
    Type,
    Is,
    Where,
    Const,
    Property,
    Function,
    Public,
    Private,
    Requires,
    Ensures,
    Return,
    If,
    Else,
    True,
    False,
    Int,
    Bool,
}

impl Keyword {
    fn from_str(s: &str) -> Option<Keyword> {
        Some(match s {
            "type" => Keyword::Type,
            "is" => Keyword::Is,
            "where" => Keyword::Where,
            "const" => Keyword::Const,
            "property" => Keyword::Property,
            "function" => Keyword::Function,
            "public" => Keyword::Public,
            "private" => Keyword::Private,
            "requires" => Keyword::Requires,
            "ensures" => Keyword::Ensures,
            "return" => Keyword::Return,
            "if" => Keyword::If,
            "else" => Keyword::Else,
            "true" => Keyword::True,
            "false" => Keyword::False,
            "int" => Keyword::Int,
            "bool" => Keyword::Bool,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Type => "type",
            Keyword::Is => "is",
            Keyword::Where => "where",
            Keyword::Const => "const",
            Keyword::Property => "property",
            Keyword::Function => "function",
            Keyword::Public => "public",
            Keyword::Private => "private",
            Keyword::Requires => "requires",
            Keyword::Ensures => "ensures",
            Keyword::Return => "return",
            Keyword::If => "if",
            Keyword::Else => "else",
            Keyword::True => "true",
            Keyword::False => "false",
            Keyword::Int => "int",
            Keyword::Bool => "bool",
        }
    }
}

const LOOP_KEYWORDS: [&str; 3] = ["while", "for", "do"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Punct {
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    StarStar,
    Slash,
    Percent,
    Bang,
    AndAnd,
    OrOr,
    Implies,
    FatArrow,
    Arrow,
}

impl Punct {
    pub fn as_str(self) -> &'static str {
        match self {
            Punct::LParen => "(",
            Punct::RParen => ")",
            Punct::LBrace => "{",
            Punct::RBrace => "}",
            Punct::Comma => ",",
            Punct::Colon => ":",
            Punct::Dot => ".",
            Punct::Assign => "=",
            Punct::EqEq => "==",
            Punct::NotEq => "!=",
            Punct::Lt => "<",
            Punct::Le => "<=",
            Punct::Gt => ">",
            Punct::Ge => ">=",
            Punct::Plus => "+",
            Punct::Minus => "-",
            Punct::Star => "*",
            Punct::StarStar => "**",
            Punct::Slash => "/",
            Punct::Percent => "%",
            Punct::Bang => "!",
            Punct::AndAnd => "&&",
            Punct::OrOr => "||",
            Punct::Implies => "==>",
            Punct::FatArrow => "=>",
            Punct::Arrow => "->",
        }
    }

    /// A line ending in one of these continues on the next physical line.
    fn continues_line(self) -> bool {
        !matches!(
            self,
            Punct::RParen | Punct::RBrace | Punct::Colon | Punct::Dot | Punct::Bang
        )
    }
}

// Longest match first.
const PUNCTS: [(&str, Punct); 26] = [
    ("==>", Punct::Implies),
    ("**", Punct::StarStar),
    ("==", Punct::EqEq),
    ("!=", Punct::NotEq),
    ("<=", Punct::Le),
    (">=", Punct::Ge),
    ("&&", Punct::AndAnd),
    ("||", Punct::OrOr),
    ("=>", Punct::FatArrow),
    ("->", Punct::Arrow),
    ("(", Punct::LParen),
    (")", Punct::RParen),
    ("{", Punct::LBrace),
    ("}", Punct::RBrace),
    (",", Punct::Comma),
    (":", Punct::Colon),
    (".", Punct::Dot),
    ("=", Punct::Assign),
    ("<", Punct::Lt),
    (">", Punct::Gt),
    ("+", Punct::Plus),
    ("-", Punct::Minus),
    ("*", Punct::Star),
    ("/", Punct::Slash),
    ("%", Punct::Percent),
    ("!", Punct::Bang),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Kw(Keyword),
    P(Punct),
    Newline,
    Indent,
    Dedent,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::Kw(k) => write!(f, "keyword `{}`", k.as_str()),
            Tok::P(p) => write!(f, "`{}`", p.as_str()),
            Tok::Newline => f.write_str("end of line"),
            Tok::Indent => f.write_str("indentation"),
            Tok::Dedent => f.write_str("end of block"),
            Tok::Eof => f.write_str("end of file"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn tokenize(file: &Arc<str>, source: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut lx = Lexer {
        file: file.clone(),
        tokens: Vec::new(),
        errors: Vec::new(),
        indents: Vec::from([0u32]),
        depth: 0,
        continuing: false,
    };
    let mut last_line = 0u32;
    for (idx, raw) in source.split('\n').enumerate() {
        let line_no = idx as u32 + 1;
        last_line = line_no;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        lx.line(line_no, line);
    }
    let end = Span::point(last_line.max(1), 1);
    if lx.depth > 0 {
        lx.errors
            .push(Diagnostic::error(&lx.file, end, "unclosed bracket at end of file"));
    }
    if lx.needs_newline() {
        lx.push(Tok::Newline, end);
    }
    while lx.indents.len() > 1 {
        lx.indents.pop();
        lx.push(Tok::Dedent, end);
    }
    lx.push(Tok::Eof, end);
    if lx.errors.is_empty() {
        Ok(lx.tokens)
    } else {
        Err(lx.errors)
    }
}

struct Lexer {
    file: Arc<str>,
    tokens: Vec<Token>,
    errors: Vec<Diagnostic>,
    indents: Vec<u32>,
    depth: u32,
    continuing: bool,
}

impl Lexer {
    fn push(&mut self, tok: Tok, span: Span) {
        self.tokens.push(Token { tok, span });
    }

    fn needs_newline(&self) -> bool {
        !matches!(
            self.tokens.last().map(|t| &t.tok),
            None | Some(Tok::Newline) | Some(Tok::Indent) | Some(Tok::Dedent)
        )
    }

    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.errors.push(Diagnostic::error(&self.file, span, msg));
    }

    fn line(&mut self, line_no: u32, line: &str) {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() && (chars[i] == ' ' || chars[i] == '\t') {
            if chars[i] == '\t' {
                self.error(
                    Span::point(line_no, i as u32 + 1),
                    "tab character in indentation (use spaces)",
                );
            }
            i += 1;
        }
        let blank = i == chars.len() || (chars[i] == '/' && chars.get(i + 1) == Some(&'/'));
        if blank {
            return;
        }

        if !self.continuing && self.depth == 0 {
            let width = i as u32;
            let here = Span::point(line_no, 1);
            let current = *self.indents.last().unwrap();
            if width > current {
                self.indents.push(width);
                self.push(Tok::Indent, here);
            } else if width < current {
                while *self.indents.last().unwrap() > width {
                    self.indents.pop();
                    self.push(Tok::Dedent, here);
                }
                if *self.indents.last().unwrap() != width {
                    self.error(here, "inconsistent indentation: does not match any outer block");
                }
            }
        }

        let mut last_punct: Option<Punct> = None;
        let col = |i: usize| i as u32 + 1;
        while i < chars.len() {
            let c = chars[i];
            if c == ' ' || c == '\t' {
                i += 1;
                continue;
            }
            if c == '/' && chars.get(i + 1) == Some(&'/') {
                break;
            }
            let start = i;
            if c.is_ascii_digit() {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let span = Span::new(line_no, col(start), line_no, col(i - 1));
                if i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '_') {
                    self.error(span, format!("malformed number `{text}`"));
                }
                let value = text.parse::<BigInt>().unwrap_or_default();
                self.push(Tok::Int(value), span);
                last_punct = None;
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let span = Span::new(line_no, col(start), line_no, col(i - 1));
                if LOOP_KEYWORDS.contains(&text.as_str()) {
                    self.error(span, format!("loops unsupported: `{text}` is not part of the language"));
                }
                let tok = match Keyword::from_str(&text) {
                    Some(k) => Tok::Kw(k),
                    None => Tok::Ident(text),
                };
                self.push(tok, span);
                last_punct = None;
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            match PUNCTS.iter().find(|(s, _)| rest.starts_with(s)) {
                Some(&(s, p)) => {
                    let len = s.len();
                    let span = Span::new(line_no, col(i), line_no, col(i + len - 1));
                    match p {
                        Punct::LParen | Punct::LBrace => self.depth += 1,
                        Punct::RParen | Punct::RBrace => {
                            if self.depth == 0 {
                                self.error(span, format!("unmatched `{s}`"));
                            } else {
                                self.depth -= 1;
                            }
                        }
                        _ => {}
                    }
                    self.push(Tok::P(p), span);
                    last_punct = Some(p);
                    i += len;
                }
                None => {
                    self.error(Span::point(line_no, col(i)), format!("unexpected character `{c}`"));
                    i += 1;
                }
            }
        }

        self.continuing = last_punct.is_some_and(Punct::continues_line);
        if self.depth == 0 && !self.continuing {
            let end = Span::point(line_no, chars.len() as u32 + 1);
            self.push(Tok::Newline, end);
        }
    }
}

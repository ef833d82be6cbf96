//! Tokenizer shared by the expression parser and the C-subset front end.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    /// 1-based line.
    pub line: u32,
    /// 1-based byte column.
    pub column: u32,
}

impl Pos {
    pub const fn new(line: u32, column: u32) -> Self {
        Pos { line, column }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(u64),
    Ident(String),
    /// A backslash keyword such as `\result`; the text excludes the backslash.
    Keyword(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Keyword(s) => write!(f, "`\\{s}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub offset: usize,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub offset: usize,
    pub pos: Pos,
    pub message: String,
}

// Longest first.
const PUNCTS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "(", ")", "{", "}", "[", "]", ";", ",", "?", ":", "+", "-", "*", "/", "%", "<", ">", "&",
    "^", "|", "!", "~", "=", ".",
];

/// Tokenizes `src`. Comments are skipped. Lines starting with `#` are skipped
/// when they are `#include` directives or line markers, and rejected otherwise.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut line_start = 0usize;
    let mut at_line_start = true;
    while i < bytes.len() {
        let c = bytes[i];
        let pos = Pos::new(line, (i - line_start) as u32 + 1);
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            at_line_start = true;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' && at_line_start {
            let end = src[i..].find('\n').map_or(bytes.len(), |n| i + n);
            let directive = src[i + 1..end].trim_start();
            let skippable = directive.starts_with("include")
                || directive.starts_with(|ch: char| ch.is_ascii_digit())
                || directive.starts_with("line");
            if !skippable {
                return Err(LexError {
                    offset: i,
                    pos,
                    message: "preprocessor directives are not supported; preprocess the input first".into(),
                });
            }
            i = end;
            continue;
        }
        at_line_start = false;
        if src[i..].starts_with("//") {
            i = src[i..].find('\n').map_or(bytes.len(), |n| i + n);
            continue;
        }
        if src[i..].starts_with("/*") {
            let Some(n) = src[i + 2..].find("*/") else {
                return Err(LexError {
                    offset: i,
                    pos,
                    message: "unterminated comment".into(),
                });
            };
            let end = i + 2 + n + 2;
            for (j, b) in bytes[i..end].iter().enumerate() {
                if *b == b'\n' {
                    line += 1;
                    line_start = i + j + 1;
                }
            }
            i = end;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let (radix, digits_start) = if c == b'0' && matches!(bytes.get(i + 1), Some(b'x' | b'X')) {
                (16, i + 2)
            } else if c == b'0' {
                (8, i)
            } else {
                (10, i)
            };
            i = digits_start;
            while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                i += 1;
            }
            let text = &src[digits_start..i];
            let value = u64::from_str_radix(text, radix).map_err(|_| LexError {
                offset: start,
                pos,
                message: format!("invalid integer literal `{}`", &src[start..i]),
            })?;
            out.push(Token {
                tok: Tok::Int(value),
                offset: start,
                pos,
            });
            continue;
        }
        if c == b'_' || c.is_ascii_alphabetic() || c == b'\\' {
            let start = i;
            i += 1;
            while i < bytes.len() && (bytes[i] == b'_' || bytes[i].is_ascii_alphanumeric()) {
                i += 1;
            }
            let tok = if c == b'\\' {
                if i == start + 1 {
                    return Err(LexError {
                        offset: start,
                        pos,
                        message: "stray `\\`".into(),
                    });
                }
                Tok::Keyword(src[start + 1..i].to_owned())
            } else {
                Tok::Ident(src[start..i].to_owned())
            };
            out.push(Token {
                tok,
                offset: start,
                pos,
            });
            continue;
        }
        match PUNCTS.iter().find(|p| src[i..].starts_with(**p)) {
            Some(p) => {
                out.push(Token {
                    tok: Tok::Punct(p),
                    offset: i,
                    pos,
                });
                i += p.len();
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(LexError {
                    offset: i,
                    pos,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: bytes.len(),
        pos: Pos::new(line, (bytes.len() - line_start) as u32 + 1),
    });
    Ok(out)
}

/// Cursor over a token list ending in [`Tok::Eof`].
#[derive(Debug, Clone)]
pub struct Cursor<'t> {
    toks: &'t [Token],
    idx: usize,
}

impl<'t> Cursor<'t> {
    pub fn new(toks: &'t [Token]) -> Self {
        debug_assert!(matches!(toks.last(), Some(Token { tok: Tok::Eof, .. })));
        Cursor { toks, idx: 0 }
    }

    pub fn peek(&self) -> &'t Token {
        &self.toks[self.idx.min(self.toks.len() - 1)]
    }

    pub fn peek_at(&self, ahead: usize) -> &'t Token {
        &self.toks[(self.idx + ahead).min(self.toks.len() - 1)]
    }

    pub fn bump(&mut self) -> &'t Token {
        let t = self.peek();
        if self.idx < self.toks.len() - 1 {
            self.idx += 1;
        }
        t
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    pub fn is_ident(&self, name: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(n) if n == name)
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }
}

//! Minimal s-expression reader with line/column tracking.
//!
//! Formula, branch, and domain syntax all ride on this reader. Atoms are
//! maximal runs of non-delimiter characters; `(` and `)` delimit lists;
//! whitespace separates tokens; `;` starts a comment running to end of
//! line.

use crate::{Error, Result};

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

/// Parsed s-expression node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    /// The atom text, or an error naming what was expected.
    pub fn atom(&self, what: &str) -> Result<&str> {
        match self {
            SExpr::Atom(s, _) => Ok(s),
            SExpr::List(_, p) => Err(Error::parse(p.line, p.col, format!("expected {what}, found a list"))),
        }
    }

    /// The list items, or an error naming what was expected.
    pub fn list(&self, what: &str) -> Result<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Ok(items),
            SExpr::Atom(s, p) => {
                Err(Error::parse(p.line, p.col, format!("expected {what}, found atom `{s}`")))
            }
        }
    }

    /// Head atom of a list (its operator), or an error.
    pub fn head(&self) -> Result<(&str, &[SExpr], Pos)> {
        let items = self.list("a form")?;
        let pos = self.pos();
        match items.first() {
            Some(SExpr::Atom(h, _)) => Ok((h.as_str(), &items[1..], pos)),
            Some(other) => {
                let p = other.pos();
                Err(Error::parse(p.line, p.col, "expected an operator atom"))
            }
            None => Err(Error::parse(pos.line, pos.col, "empty form")),
        }
    }
}

struct Reader<'a> {
    src: &'a [u8],
    i: usize,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader { src: src.as_bytes(), i: 0, line: 1, col: 1 }
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.i).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.i += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b';') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn read(&mut self) -> Result<SExpr> {
        self.skip_trivia();
        let pos = self.pos();
        match self.peek() {
            None => Err(Error::parse(pos.line, pos.col, "unexpected end of input")),
            Some(b'(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        None => {
                            return Err(Error::parse(pos.line, pos.col, "unclosed `(`"));
                        }
                        Some(b')') => {
                            self.bump();
                            return Ok(SExpr::List(items, pos));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(b')') => Err(Error::parse(pos.line, pos.col, "unmatched `)`")),
            Some(_) => {
                let mut text = String::new();
                while let Some(b) = self.peek() {
                    if b.is_ascii_whitespace() || b == b'(' || b == b')' || b == b';' {
                        break;
                    }
                    text.push(self.bump().unwrap() as char);
                }
                Ok(SExpr::Atom(text, pos))
            }
        }
    }
}

/// Read exactly one s-expression; trailing trivia is allowed.
pub fn read_one(src: &str) -> Result<SExpr> {
    let mut r = Reader::new(src);
    let e = r.read()?;
    r.skip_trivia();
    if r.peek().is_some() {
        let p = r.pos();
        return Err(Error::parse(p.line, p.col, "trailing input after formula"));
    }
    Ok(e)
}

//! Concrete syntax for terms.
//!
//! ```text
//! term ::= '\' IDENT '.' term | app
//! app  ::= atom { atom }
//! atom ::= IDENT | '#' IDENT | '(' term ')'
//! ```
//!
//! Application is left-associative and an abstraction body extends as far
//! right as possible. Variables are bare identifiers, constants are
//! `#`-prefixed. In the extended (encoding) calculus the two tag constants
//! spell `#%app` and `#%lm`; the base grammar rejects them.

use std::fmt;

use lambda_core::hoas::{EConst, TermPrime};
use lambda_core::{ConstName, Term, VarName};

#[derive(Debug, Clone, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at {}:{}: expected {}, found {}",
            self.line,
            self.col,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    Ident(String),
    /// `#`-prefixed constant; `tag` marks the reserved `%` spelling.
    Const { label: String, tag: bool },
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Lambda => "'\\'".into(),
            Tok::Dot => "'.'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Const { label, tag } => {
                if *tag {
                    format!("tag constant #%{label}")
                } else {
                    format!("constant #{label}")
                }
            }
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn error(&self, expected: &[&str], found: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.into(),
        }
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn lex_ident(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek_char() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.bump(c);
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_string()
    }

    fn next_token(&mut self) -> Result<Spanned, ParseError> {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.bump(c);
            } else {
                break;
            }
        }
        let (line, col) = (self.line, self.col);
        let tok = match self.peek_char() {
            None => Tok::Eof,
            Some('\\') | Some('λ') => {
                self.bump(self.peek_char().unwrap());
                Tok::Lambda
            }
            Some('.') => {
                self.bump('.');
                Tok::Dot
            }
            Some('(') => {
                self.bump('(');
                Tok::LParen
            }
            Some(')') => {
                self.bump(')');
                Tok::RParen
            }
            Some('#') => {
                self.bump('#');
                let tag = if self.peek_char() == Some('%') {
                    self.bump('%');
                    true
                } else {
                    false
                };
                match self.peek_char() {
                    Some(c) if c.is_ascii_alphabetic() => {
                        let label = self.lex_ident();
                        Tok::Const { label, tag }
                    }
                    other => {
                        return Err(self.error(
                            &["constant label"],
                            other.map(|c| c.to_string()).unwrap_or("end of input".into()),
                        ))
                    }
                }
            }
            Some(c) if c.is_ascii_alphabetic() => Tok::Ident(self.lex_ident()),
            Some(c) => {
                return Err(self.error(
                    &["'\\'", "identifier", "'#'", "'('"],
                    format!("{c:?}"),
                ))
            }
        };
        Ok(Spanned { tok, line, col })
    }
}

struct Parser {
    toks: Vec<Spanned>,
    idx: usize,
    allow_tags: bool,
}

impl Parser {
    fn new(src: &str, allow_tags: bool) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let mut toks = Vec::new();
        loop {
            let t = lexer.next_token()?;
            let eof = t.tok == Tok::Eof;
            toks.push(t);
            if eof {
                break;
            }
        }
        Ok(Parser {
            toks,
            idx: 0,
            allow_tags,
        })
    }

    fn peek(&self) -> &Spanned {
        &self.toks[self.idx]
    }

    fn advance(&mut self) -> &Spanned {
        let t = &self.toks[self.idx];
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.line,
            col: t.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        }
    }

    fn term(&mut self) -> Result<TermPrime, ParseError> {
        if self.peek().tok == Tok::Lambda {
            self.advance();
            let binder = match &self.peek().tok {
                Tok::Ident(s) => {
                    let v = VarName::from_ident(s);
                    self.advance();
                    v
                }
                _ => return Err(self.error(&["binder identifier"])),
            };
            if self.peek().tok != Tok::Dot {
                return Err(self.error(&["'.'"]));
            }
            self.advance();
            let body = self.term()?;
            Ok(Term::lm(binder, body))
        } else {
            self.application()
        }
    }

    fn application(&mut self) -> Result<TermPrime, ParseError> {
        let mut acc = self.atom()?;
        loop {
            match &self.peek().tok {
                Tok::Ident(_) | Tok::Const { .. } | Tok::LParen => {
                    let arg = self.atom()?;
                    acc = Term::app(acc, arg);
                }
                Tok::Lambda => {
                    // an abstraction in argument position must be parenthesized
                    return Err(self.error(&["atom", "end of application"]));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn atom(&mut self) -> Result<TermPrime, ParseError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(Term::var(VarName::from_ident(&s)))
            }
            Tok::Const { label, tag } => {
                if tag && !self.allow_tags {
                    return Err(self.error(&["constant without '%'"]));
                }
                self.advance();
                let c = if tag {
                    match label.as_str() {
                        "app" => EConst::CtApp,
                        "lm" => EConst::CtLm,
                        _ => {
                            self.idx -= 1;
                            return Err(self.error(&["#%app", "#%lm"]));
                        }
                    }
                } else {
                    EConst::Base(ConstName::new(label))
                };
                Ok(Term::ct(c))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.term()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.error(&["')'"]));
                }
                self.advance();
                Ok(inner)
            }
            _ => Err(self.error(&["identifier", "'#'", "'('", "'\\'"])),
        }
    }

    fn finish(mut self, allow_tags: bool) -> Result<TermPrime, ParseError> {
        self.allow_tags = allow_tags;
        let t = self.term()?;
        if self.peek().tok != Tok::Eof {
            return Err(self.error(&["end of input"]));
        }
        Ok(t)
    }
}

/// Parses a term of the base calculus.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let p = Parser::new(src, false)?;
    let t = p.finish(false)?;
    Ok(strip_tags(&t))
}

/// Parses a term of the extended (encoding) calculus; `#%app` and `#%lm`
/// denote the tags.
pub fn parse_term_prime(src: &str) -> Result<TermPrime, ParseError> {
    let p = Parser::new(src, true)?;
    p.finish(true)
}

fn strip_tags(t: &TermPrime) -> Term {
    t.map_consts(&|c| match c {
        EConst::Base(b) => b.clone(),
        _ => unreachable!("base parser rejects tags"),
    })
}

//! Recursive-descent parser for the property language.
//!
//! Grammar, loosest first (`&` binds tighter than `|`, prefixes tightest):
//!
//! ```text
//! formula := or
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "EX" unary | "EF" unary | "EG" unary
//!          | "E" "[" or "U" or "]" | "(" formula ")" | ATOM
//! ```
//!
//! Atoms are state names: identifiers over letters, digits, `_`, and `.`,
//! starting with a letter or `_`. `EX`, `EF`, `EG`, and `E` (before `[`)
//! are keywords, not atoms.

use std::sync::Arc;

use thiserror::Error;

use crate::ast::CtlFormula;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character {found:?} at offset {at}")]
    BadChar { found: char, at: usize },
    #[error("expected {expected} at offset {at}, found {found}")]
    Unexpected { expected: &'static str, found: String, at: usize },
    #[error("input ended while expecting {expected}")]
    Eof { expected: &'static str },
    #[error("trailing input at offset {at}: {found}")]
    Trailing { found: String, at: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("{s:?}"),
            Tok::Bang => "'!'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
        }
    }
}

fn lex(input: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(at, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '!' => {
                chars.next();
                out.push((Tok::Bang, at));
            }
            '&' => {
                chars.next();
                out.push((Tok::Amp, at));
            }
            '|' => {
                chars.next();
                out.push((Tok::Pipe, at));
            }
            '(' => {
                chars.next();
                out.push((Tok::LParen, at));
            }
            ')' => {
                chars.next();
                out.push((Tok::RParen, at));
            }
            '[' => {
                chars.next();
                out.push((Tok::LBracket, at));
            }
            ']' => {
                chars.next();
                out.push((Tok::RBracket, at));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(name), at));
            }
            other => return Err(ParseError::BadChar { found: other, at }),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self, expected: &'static str) -> Result<(Tok, usize), ParseError> {
        let item = self.toks.get(self.pos).cloned();
        self.pos += 1;
        item.ok_or(ParseError::Eof { expected })
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), ParseError> {
        let (tok, at) = self.next(expected)?;
        if tok == want {
            Ok(())
        } else {
            Err(ParseError::Unexpected { expected, found: tok.describe(), at })
        }
    }

    fn or(&mut self) -> Result<Arc<CtlFormula>, ParseError> {
        let mut acc = self.and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            acc = CtlFormula::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Arc<CtlFormula>, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            acc = CtlFormula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Arc<CtlFormula>, ParseError> {
        let (tok, at) = self.next("a formula")?;
        match tok {
            Tok::Bang => Ok(CtlFormula::not(self.unary()?)),
            Tok::LParen => {
                let inner = self.or()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "EX" => Ok(CtlFormula::ex(self.unary()?)),
                "EF" => Ok(CtlFormula::ef(self.unary()?)),
                "EG" => Ok(CtlFormula::eg(self.unary()?)),
                "E" if self.peek() == Some(&Tok::LBracket) => {
                    self.pos += 1;
                    let hold = self.or()?;
                    let (sep, sep_at) = self.next("'U'")?;
                    if sep != Tok::Ident("U".into()) {
                        return Err(ParseError::Unexpected {
                            expected: "'U'",
                            found: sep.describe(),
                            at: sep_at,
                        });
                    }
                    let goal = self.or()?;
                    self.expect(Tok::RBracket, "']'")?;
                    Ok(Arc::new(CtlFormula::Eu(hold, goal)))
                }
                _ => Ok(CtlFormula::atom(name)),
            },
            other => Err(ParseError::Unexpected {
                expected: "a formula",
                found: other.describe(),
                at,
            }),
        }
    }
}

/// Parses a formula, requiring the whole input to be consumed.
pub fn parse(input: &str) -> Result<Arc<CtlFormula>, ParseError> {
    let mut parser = Parser { toks: lex(input)?, pos: 0 };
    let formula = parser.or()?;
    if let Some((tok, at)) = parser.toks.get(parser.pos) {
        return Err(ParseError::Trailing { found: tok.describe(), at: *at });
    }
    Ok(formula)
}

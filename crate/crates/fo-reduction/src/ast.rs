//! First-order logic over a linear order: syntax, parsing, and negation
//! normal form.
//!
//! Atoms compare variables with `<` and `=`; quantifiers are written
//! `E x. f` and `A x. f` and scope as far right as precedence allows. The
//! compiler downstream consumes sentences in negation normal form, where
//! negation has been pushed into the atoms and eliminated using the order
//! dualities: over a linear order, not(x < y) is (x = y) | (y < x) and
//! not(x = y) is (x < y) | (y < x).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Raw formula as parsed; may contain negation anywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoFormula {
    Exists(String, Box<FoFormula>),
    Forall(String, Box<FoFormula>),
    Not(Box<FoFormula>),
    And(Box<FoFormula>, Box<FoFormula>),
    Or(Box<FoFormula>, Box<FoFormula>),
    Lt(String, String),
    Eq(String, String),
}

/// Negation-free formula; the compiler's input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NnfFormula {
    Exists(String, Box<NnfFormula>),
    Forall(String, Box<NnfFormula>),
    And(Box<NnfFormula>, Box<NnfFormula>),
    Or(Box<NnfFormula>, Box<NnfFormula>),
    Lt(String, String),
    Eq(String, String),
}

impl FoFormula {
    /// Variables with a free occurrence.
    pub fn free_variables(&self) -> BTreeSet<String> {
        fn walk(f: &FoFormula, bound: &mut Vec<String>, free: &mut BTreeSet<String>) {
            match f {
                FoFormula::Exists(x, body) | FoFormula::Forall(x, body) => {
                    bound.push(x.clone());
                    walk(body, bound, free);
                    bound.pop();
                }
                FoFormula::Not(a) => walk(a, bound, free),
                FoFormula::And(a, b) | FoFormula::Or(a, b) => {
                    walk(a, bound, free);
                    walk(b, bound, free);
                }
                FoFormula::Lt(x, y) | FoFormula::Eq(x, y) => {
                    for v in [x, y] {
                        if !bound.contains(v) {
                            free.insert(v.clone());
                        }
                    }
                }
            }
        }
        let mut free = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut free);
        free
    }
}

impl NnfFormula {
    pub fn free_variables(&self) -> BTreeSet<String> {
        to_formula(self).free_variables()
    }

    /// Number of quantifiers.
    pub fn quantifier_count(&self) -> u32 {
        match self {
            NnfFormula::Exists(_, body) | NnfFormula::Forall(_, body) => {
                1 + body.quantifier_count()
            }
            NnfFormula::And(a, b) | NnfFormula::Or(a, b) => {
                a.quantifier_count() + b.quantifier_count()
            }
            NnfFormula::Lt(..) | NnfFormula::Eq(..) => 0,
        }
    }
}

fn to_formula(f: &NnfFormula) -> FoFormula {
    match f {
        NnfFormula::Exists(x, b) => FoFormula::Exists(x.clone(), Box::new(to_formula(b))),
        NnfFormula::Forall(x, b) => FoFormula::Forall(x.clone(), Box::new(to_formula(b))),
        NnfFormula::And(a, b) => {
            FoFormula::And(Box::new(to_formula(a)), Box::new(to_formula(b)))
        }
        NnfFormula::Or(a, b) => FoFormula::Or(Box::new(to_formula(a)), Box::new(to_formula(b))),
        NnfFormula::Lt(x, y) => FoFormula::Lt(x.clone(), y.clone()),
        NnfFormula::Eq(x, y) => FoFormula::Eq(x.clone(), y.clone()),
    }
}

/// Pushes negation into the atoms and eliminates it via the linear-order
/// dualities.
pub fn to_nnf(f: &FoFormula) -> NnfFormula {
    fn pos(f: &FoFormula) -> NnfFormula {
        match f {
            FoFormula::Exists(x, b) => NnfFormula::Exists(x.clone(), Box::new(pos(b))),
            FoFormula::Forall(x, b) => NnfFormula::Forall(x.clone(), Box::new(pos(b))),
            FoFormula::Not(a) => neg(a),
            FoFormula::And(a, b) => NnfFormula::And(Box::new(pos(a)), Box::new(pos(b))),
            FoFormula::Or(a, b) => NnfFormula::Or(Box::new(pos(a)), Box::new(pos(b))),
            FoFormula::Lt(x, y) => NnfFormula::Lt(x.clone(), y.clone()),
            FoFormula::Eq(x, y) => NnfFormula::Eq(x.clone(), y.clone()),
        }
    }
    fn neg(f: &FoFormula) -> NnfFormula {
        match f {
            FoFormula::Exists(x, b) => NnfFormula::Forall(x.clone(), Box::new(neg(b))),
            FoFormula::Forall(x, b) => NnfFormula::Exists(x.clone(), Box::new(neg(b))),
            FoFormula::Not(a) => pos(a),
            FoFormula::And(a, b) => NnfFormula::Or(Box::new(neg(a)), Box::new(neg(b))),
            FoFormula::Or(a, b) => NnfFormula::And(Box::new(neg(a)), Box::new(neg(b))),
            FoFormula::Lt(x, y) => NnfFormula::Or(
                Box::new(NnfFormula::Eq(x.clone(), y.clone())),
                Box::new(NnfFormula::Lt(y.clone(), x.clone())),
            ),
            FoFormula::Eq(x, y) => NnfFormula::Or(
                Box::new(NnfFormula::Lt(x.clone(), y.clone())),
                Box::new(NnfFormula::Lt(y.clone(), x.clone())),
            ),
        }
    }
    pos(f)
}

fn fo_level(f: &FoFormula) -> u8 {
    match f {
        FoFormula::Exists(..) | FoFormula::Forall(..) | FoFormula::Or(..) => 0,
        FoFormula::And(..) => 1,
        FoFormula::Not(_) => 2,
        FoFormula::Lt(..) | FoFormula::Eq(..) => 3,
    }
}

fn write_fo(f: &FoFormula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if fo_level(f) < min {
        out.write_str("(")?;
        write_fo(f, 0, out)?;
        return out.write_str(")");
    }
    match f {
        FoFormula::Exists(x, b) => {
            write!(out, "E {x}. ")?;
            write_fo(b, 0, out)
        }
        FoFormula::Forall(x, b) => {
            write!(out, "A {x}. ")?;
            write_fo(b, 0, out)
        }
        FoFormula::Not(a) => {
            out.write_str("!")?;
            write_fo(a, 2, out)
        }
        FoFormula::And(a, b) => {
            write_fo(a, 1, out)?;
            out.write_str(" & ")?;
            write_fo(b, 2, out)
        }
        FoFormula::Or(a, b) => {
            // A quantifier on the left would swallow the rest.
            write_fo(a, 1, out)?;
            out.write_str(" | ")?;
            write_fo(b, 1, out)
        }
        FoFormula::Lt(x, y) => write!(out, "{x} < {y}"),
        FoFormula::Eq(x, y) => write!(out, "{x} = {y}"),
    }
}

impl fmt::Display for FoFormula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_fo(self, 0, out)
    }
}

impl fmt::Display for NnfFormula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        to_formula(self).fmt(out)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FoParseError {
    #[error("unexpected character {found:?} at offset {at}")]
    BadChar { found: char, at: usize },
    #[error("expected {expected} at offset {at}, found {found:?}")]
    Unexpected { expected: &'static str, found: String, at: usize },
    #[error("input ended while expecting {expected}")]
    Eof { expected: &'static str },
    #[error("trailing input at offset {at}: {found:?}")]
    Trailing { found: String, at: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bang,
    Amp,
    Pipe,
    Less,
    Equal,
    Dot,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Bang => "!".into(),
            Tok::Amp => "&".into(),
            Tok::Pipe => "|".into(),
            Tok::Less => "<".into(),
            Tok::Equal => "=".into(),
            Tok::Dot => ".".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn lex(input: &str) -> Result<Vec<(Tok, usize)>, FoParseError> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(at, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '<' => Tok::Less,
            '=' => Tok::Equal,
            '.' => Tok::Dot,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(name), at));
                continue;
            }
            other => return Err(FoParseError::BadChar { found: other, at }),
        };
        chars.next();
        out.push((tok, at));
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

    fn next(&mut self, expected: &'static str) -> Result<(Tok, usize), FoParseError> {
        let item = self.toks.get(self.pos).cloned();
        self.pos += 1;
        item.ok_or(FoParseError::Eof { expected })
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), FoParseError> {
        let (tok, at) = self.next(expected)?;
        if tok == want {
            Ok(())
        } else {
            Err(FoParseError::Unexpected { expected, found: tok.describe(), at })
        }
    }

    fn variable(&mut self) -> Result<String, FoParseError> {
        let (tok, at) = self.next("a variable")?;
        match tok {
            Tok::Ident(name) if name != "E" && name != "A" => Ok(name),
            other => Err(FoParseError::Unexpected {
                expected: "a variable",
                found: other.describe(),
                at,
            }),
        }
    }

    fn or(&mut self) -> Result<FoFormula, FoParseError> {
        let mut acc = self.and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            acc = FoFormula::Or(Box::new(acc), Box::new(self.and()?));
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<FoFormula, FoParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            acc = FoFormula::And(Box::new(acc), Box::new(self.unary()?));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<FoFormula, FoParseError> {
        let (tok, at) = self.next("a formula")?;
        match tok {
            Tok::Bang => Ok(FoFormula::Not(Box::new(self.unary()?))),
            Tok::LParen => {
                let inner = self.or()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "E" || name == "A" => {
                let var = self.variable()?;
                self.expect(Tok::Dot, "'.'")?;
                // Maximal scope: the body runs to the end of the enclosing
                // precedence level.
                let body = Box::new(self.or()?);
                Ok(if name == "E" {
                    FoFormula::Exists(var, body)
                } else {
                    FoFormula::Forall(var, body)
                })
            }
            Tok::Ident(left) => {
                let (op, at) = self.next("'<' or '='")?;
                let make = match op {
                    Tok::Less => FoFormula::Lt,
                    Tok::Equal => FoFormula::Eq,
                    other => {
                        return Err(FoParseError::Unexpected {
                            expected: "'<' or '='",
                            found: other.describe(),
                            at,
                        })
                    }
                };
                Ok(make(left, self.variable()?))
            }
            other => Err(FoParseError::Unexpected {
                expected: "a formula",
                found: other.describe(),
                at,
            }),
        }
    }
}

/// Parses a formula, requiring the whole input to be consumed.
pub fn parse_fo(input: &str) -> Result<FoFormula, FoParseError> {
    let mut parser = Parser { toks: lex(input)?, pos: 0 };
    let formula = parser.or()?;
    if let Some((tok, at)) = parser.toks.get(parser.pos) {
        return Err(FoParseError::Trailing { found: tok.describe(), at: *at });
    }
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(x: &str, b: FoFormula) -> FoFormula {
        FoFormula::Exists(x.into(), Box::new(b))
    }
    fn fa(x: &str, b: FoFormula) -> FoFormula {
        FoFormula::Forall(x.into(), Box::new(b))
    }
    fn lt(x: &str, y: &str) -> FoFormula {
        FoFormula::Lt(x.into(), y.into())
    }
    fn eq(x: &str, y: &str) -> FoFormula {
        FoFormula::Eq(x.into(), y.into())
    }

    #[test]
    fn quantifiers_scope_maximally() {
        let f = parse_fo("E x. x = x & x < x").unwrap();
        assert_eq!(
            f,
            ex("x", FoFormula::And(Box::new(eq("x", "x")), Box::new(lt("x", "x"))))
        );
    }

    #[test]
    fn parentheses_stop_the_scope() {
        let f = parse_fo("(E x. x = x) & E y. y = y").unwrap();
        assert_eq!(
            f,
            FoFormula::And(Box::new(ex("x", eq("x", "x"))), Box::new(ex("y", eq("y", "y"))))
        );
    }

    #[test]
    fn nested_quantifiers_parse() {
        let f = parse_fo("A x. E y. x < y").unwrap();
        assert_eq!(f, fa("x", ex("y", lt("x", "y"))));
    }

    #[test]
    fn nnf_duals_for_atoms() {
        let f = to_nnf(&parse_fo("!(x < y)").unwrap());
        assert_eq!(
            f,
            NnfFormula::Or(
                Box::new(NnfFormula::Eq("x".into(), "y".into())),
                Box::new(NnfFormula::Lt("y".into(), "x".into())),
            )
        );
        let f = to_nnf(&parse_fo("!(x = y)").unwrap());
        assert_eq!(
            f,
            NnfFormula::Or(
                Box::new(NnfFormula::Lt("x".into(), "y".into())),
                Box::new(NnfFormula::Lt("y".into(), "x".into())),
            )
        );
    }

    #[test]
    fn nnf_swaps_quantifiers_and_connectives() {
        let f = to_nnf(&parse_fo("!(E x. x = x & x < x)").unwrap());
        assert_eq!(
            f,
            NnfFormula::Forall(
                "x".into(),
                Box::new(NnfFormula::Or(
                    Box::new(NnfFormula::Or(
                        Box::new(NnfFormula::Lt("x".into(), "x".into())),
                        Box::new(NnfFormula::Lt("x".into(), "x".into())),
                    )),
                    Box::new(NnfFormula::Or(
                        Box::new(NnfFormula::Eq("x".into(), "x".into())),
                        Box::new(NnfFormula::Lt("x".into(), "x".into())),
                    )),
                )),
            )
        );
    }

    #[test]
    fn double_negation_cancels() {
        let raw = parse_fo("!!(x < y)").unwrap();
        assert_eq!(to_nnf(&raw), NnfFormula::Lt("x".into(), "y".into()));
    }

    #[test]
    fn free_variables_ignore_bound_ones() {
        let f = parse_fo("E x. x < y & A y. y = z").unwrap();
        let free = f.free_variables();
        assert_eq!(free.into_iter().collect::<Vec<_>>(), vec!["y", "z"]);
    }

    #[test]
    fn display_reparses() {
        for input in [
            "E x. x = x",
            "A x. E y. x < y",
            "E x. (x = y | y < x) & x < z",
            "!(E x. x < x) | A y. y = y",
            "(E x. x = x) & y < z",
        ] {
            let once = parse_fo(input).unwrap();
            let again = parse_fo(&once.to_string()).unwrap();
            assert_eq!(once, again, "round trip changed {input:?}");
        }
    }

    #[test]
    fn parse_errors() {
        assert!(parse_fo("E x x = x").is_err(), "missing dot");
        assert!(parse_fo("x <").is_err());
        assert!(parse_fo("E E. x = x").is_err(), "keyword as variable");
        assert!(parse_fo("x + y").is_err());
        assert!(parse_fo("x = y extra").is_err());
    }
}

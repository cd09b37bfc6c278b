//! Stack alphabet symbols and transition guards.
//!
//! Symbols carry their role in the encodings directly (counter bits with a
//! level, the `zeta` separator, the filler `a`) so that compilers never have
//! to re-parse spellings. Free-form letters (Turing machine letters, logical
//! variables) share the [`StackSymbol::Named`] variant: the document format
//! spells both verbatim and every operation treats them identically.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// One symbol of the stack alphabet, plus the `bottom` sentinel.
///
/// `Bottom` terminates every stack word and is never pushed or popped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StackSymbol {
    /// The stack-bottom sentinel, spelled `bot` in words and `⊥` in guards.
    Bottom,
    /// A level-`level` counter bit; `one` selects the b (1) polarity.
    CounterBit { level: u8, one: bool },
    /// The configuration separator, spelled `zeta`.
    Zeta,
    /// The unary filler used by valuation words, spelled `a`.
    FillerA,
    /// A free-form letter: a Turing machine letter or a logical variable.
    Named(Arc<str>),
}

impl StackSymbol {
    /// Counter bit with value 0 at the given level.
    pub fn bit_a(level: u8) -> Self {
        StackSymbol::CounterBit { level, one: false }
    }

    /// Counter bit with value 1 at the given level.
    pub fn bit_b(level: u8) -> Self {
        StackSymbol::CounterBit { level, one: true }
    }

    /// A Turing machine letter (alias of [`StackSymbol::named`]).
    pub fn tm_letter(name: &str) -> Self {
        Self::named(name)
    }

    /// A logical variable (alias of [`StackSymbol::named`]).
    pub fn variable(name: &str) -> Self {
        Self::named(name)
    }

    /// A free-form named symbol.
    pub fn named(name: &str) -> Self {
        StackSymbol::Named(Arc::from(name))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, StackSymbol::Bottom)
    }

    /// True for counter bits of any level up to `max_level`.
    pub fn is_counter_bit_up_to(&self, max_level: u8) -> bool {
        matches!(self, StackSymbol::CounterBit { level, .. } if *level <= max_level)
    }

    /// Canonical document spelling (`bot`, `a1`/`b1`, `zeta`, `a`, names verbatim).
    pub fn spelling(&self) -> String {
        match self {
            StackSymbol::Bottom => "bot".to_owned(),
            StackSymbol::CounterBit { level, one: false } => format!("a{level}"),
            StackSymbol::CounterBit { level, one: true } => format!("b{level}"),
            StackSymbol::Zeta => "zeta".to_owned(),
            StackSymbol::FillerA => "a".to_owned(),
            StackSymbol::Named(name) => name.to_string(),
        }
    }

    /// Parses a document spelling. `_` is not a symbol (it only appears in
    /// guard position); `bot` and `⊥` both denote the bottom sentinel.
    pub fn parse(text: &str) -> Result<Self, SymbolParseError> {
        match text {
            "" => Err(SymbolParseError::Empty),
            "_" => Err(SymbolParseError::WildcardIsNotASymbol),
            "bot" | "⊥" => Ok(StackSymbol::Bottom),
            "zeta" => Ok(StackSymbol::Zeta),
            "a" => Ok(StackSymbol::FillerA),
            _ => {
                if let Some(bit) = parse_counter_bit(text) {
                    return bit;
                }
                Ok(StackSymbol::named(text))
            }
        }
    }

    /// True if `name` would collide with a reserved document spelling and is
    /// therefore unusable as a machine letter or variable name.
    pub fn name_is_reserved(name: &str) -> bool {
        matches!(name, "" | "_" | "bot" | "⊥" | "zeta" | "a") || parse_counter_bit(name).is_some()
    }
}

fn parse_counter_bit(text: &str) -> Option<Result<StackSymbol, SymbolParseError>> {
    let mut chars = text.chars();
    let polarity = match chars.next() {
        Some('a') => false,
        Some('b') => true,
        _ => return None,
    };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(match digits.parse::<u8>() {
        Ok(level) if level >= 1 => Ok(StackSymbol::CounterBit { level, one: polarity }),
        _ => Err(SymbolParseError::BadCounterLevel(text.to_owned())),
    })
}

impl fmt::Display for StackSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spelling())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolParseError {
    #[error("empty symbol")]
    Empty,
    #[error("`_` is a wildcard guard, not a symbol")]
    WildcardIsNotASymbol,
    #[error("counter bit `{0}` has an unusable level (must fit 1..=255)")]
    BadCounterLevel(String),
}

/// A guard on the top of a stack: either a concrete symbol (which may be the
/// bottom sentinel) or a wildcard that matches anything.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Guard<S> {
    Wildcard,
    Symbol(S),
}

impl<S: PartialEq> Guard<S> {
    pub fn matches(&self, top: &S) -> bool {
        match self {
            Guard::Wildcard => true,
            Guard::Symbol(sym) => sym == top,
        }
    }
}

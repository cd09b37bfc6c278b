//! Nested counter words and the machine fragments that test them.
//!
//! The verification pipeline spells huge numbers as nested counter words on
//! the stacks: level-1 counters are plain binary over `a1`/`b1`, and each
//! higher level tags every bit with an address spelled one level down. This
//! crate owns the word arithmetic (encode, decode, validate, increment) and
//! the subroutine fragments that check the matching properties inside a
//! multi-pushdown system: minimality and maximality of the top counter,
//! equality and successorship across the two stacks, and well-formedness.
//! Each fragment comes with a companion branching-time formula; a host
//! configuration satisfies the property exactly when the formula fails at
//! it, so the caller asserts the negation.

pub mod gadgets;
pub mod words;

use thiserror::Error;

pub use gadgets::{
    build_counter_gadgets, emit_counter_gadgets, Family, GadgetLibrary, GadgetSet, LevelGadgets,
    Orientation, Sinks, SizeReport,
};
pub use words::{
    decode_counter, encode_counter, increment_counter, is_valid_counter, max_value, tow,
    CounterParams, TowError, MAX_BIT_LENGTH,
};

#[derive(Debug, Error)]
pub enum CounterError {
    #[error("bad counter parameters: {0}")]
    BadParams(String),
    #[error("counter parameters exceed the scale guard (level {level}, base {base})")]
    ScaleGuard { level: u8, base: u32 },
    #[error("value {value} exceeds the largest encodable value {max}")]
    Overflow { value: String, max: String },
    #[error("not a valid counter word: {0}")]
    InvalidWord(String),
    #[error("cannot increment the maximal counter value")]
    IncrementOverflow,
    #[error("letter `{0}` is part of the counter alphabet and cannot delimit counters")]
    ReservedLetter(String),
    #[error(transparent)]
    Build(#[from] mpds_core::BuildError),
}

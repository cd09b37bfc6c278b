//! First-order logic over ordered naturals, compiled to bounded-phase games.
//!
//! Sentences use existential and universal quantifiers over the atoms `x < y`
//! and `x = y`. A sentence is parsed, pushed into negation normal form, and
//! compiled into a two-stack game system: player 0 wins the resulting parity
//! game under a `2q + 1` phase budget (for `q` quantifiers) exactly when the
//! sentence holds over `{0, .., N}`, where `N` is determined by the stack cap
//! the game is unfolded with.

pub mod ast;
pub mod compile;

pub use ast::{parse_fo, to_nnf, FoFormula, FoParseError, NnfFormula};
pub use compile::{
    atomic_verdict_trace, compile_fo, encode_valuation, AtomEntry, AtomKind, CompileError,
    CompiledFo, TraceError,
};

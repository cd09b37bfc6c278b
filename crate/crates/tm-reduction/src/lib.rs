//! Compiles space-bounded Turing machines into two-stack systems whose CTL
//! model-checking answers machine acceptance.
//!
//! A machine configuration (tape, control state, head cell) becomes a
//! stack word: every string position carries its nested-counter address,
//! blocks descend from the largest address on top down to zero, and a
//! `zeta` letter terminates the word. The control state occupies its own
//! addressed position immediately left of the scanned cell. On top of the
//! counter fragments this crate emits configuration gadgets (validity,
//! equality, one-step succession, initial and final shape) and wires two
//! acceptance loops: one whose formula uses an until operator and one that
//! stays in the next/eventually fragment. Both formulas hold at the start
//! state exactly when the machine accepts the input within the addressable
//! tape.
//!
//! Companion formulas follow the refutation convention used by the counter
//! fragments: a predicate HOLDS of the stack contents exactly when its
//! formula does NOT hold at the anchor.

pub mod compile;
pub mod encode;
pub mod gadgets;
pub mod machine;

use num_bigint::BigUint;
use thiserror::Error;

pub use compile::{compile_tm, compile_tm_with, AcceptanceWiring, CompileReport, TmCompilation};
pub use encode::{
    config_word_len, decode_tm_config, encode_tm_config, initial_config, is_valid_config,
    tape_cells, TmConfig,
};
pub use gadgets::{build_config_gadgets, emit_config_gadgets, ConfigGadgets, ConfigLibrary};
pub use machine::{Direction, TmAction, TmMachine, TmTransition};

/// Errors from machine loading, configuration encoding, or compilation.
#[derive(Debug, Error)]
pub enum TmError {
    #[error("malformed machine document: {0}")]
    Parse(String),
    #[error("bad machine: {0}")]
    BadMachine(String),
    #[error("name `{0}` is reserved for the encoding alphabet")]
    ReservedName(String),
    #[error("input letter `{0}` is not in the tape alphabet")]
    BadInput(String),
    #[error("input needs {needed} cells but the level-{level} tape has {cells}")]
    InputTooLong { needed: usize, cells: u64, level: u8 },
    #[error("tape of {0} cells is too large to materialize")]
    TapeTooLarge(BigUint),
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Counter(#[from] counters::CounterError),
    #[error(transparent)]
    Build(#[from] mpds_core::BuildError),
}

//! Multi-pushdown system (MPDS) semantics.
//!
//! An MPDS is a finite control with `l` stacks over a shared alphabet;
//! transitions are internal moves, guarded pushes, exact-symbol pops, and
//! guarded no-ops. This crate defines the system and configuration types,
//! the one-step move relation, context/phase counting for transition words,
//! the JSON document format, and a hash-cons interner for stack words that
//! the graph builders key their nodes on.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; all operations are pure functions.

pub mod config;
pub mod counting;
pub mod doc;
pub mod interner;
pub mod symbol;
pub mod system;

pub use config::{step, step_index, successors, Configuration, StackWord, StepError, WordError};
pub use counting::{
    context_count, context_decomposition, phase_count, phase_decomposition, RunBlock, RunWordError,
};
pub use doc::{DocError, MpdsDoc, TransitionDoc};
pub use interner::{StackId, StackInterner, EMPTY_STACK};
pub use symbol::{Guard, StackSymbol, SymbolParseError};
pub use system::{
    scoped_name, Action, BuildError, Diagnostic, DiagnosticKind, MpdsSystem, Player, StateId,
    SymbolId, SystemBuilder, Transition, BOTTOM,
};

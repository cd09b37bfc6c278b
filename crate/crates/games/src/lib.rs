//! Bounded-phase parity games over multi-pushdown systems.
//!
//! [`build_phase_game`] unrolls a game system into a finite arena whose
//! positions track the configuration, the stack owning the current pop
//! phase, and the remaining phase budget; [`solve`] computes winners and
//! memoryless strategies with the recursive region algorithm. The arena and
//! the solver are independent layers: the solver works on any
//! [`ParityGame`], which tests exploit by feeding it random games.

pub mod parity;
pub mod phase;

pub use parity::{solve, ParityGame, Solution};
pub use phase::{build_phase_game, GameBuildError, PhaseBounds, PhaseGame};

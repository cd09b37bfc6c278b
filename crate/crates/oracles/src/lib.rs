//! Brute-force reference implementations used only by tests.
//!
//! Every oracle favors obviousness over speed and shares type definitions,
//! but no logic, with the module it checks: run enumeration keeps explicit
//! stacks and recomputes context charges from whole words, decomposition
//! minima come from literal enumeration of cuts, the CTL reference iterates
//! whole-vector fixpoints, the parity reference enumerates strategy
//! profiles, and the TM reference walks the explicit configuration space.

pub mod ctl_naive;
pub mod decomp;
pub mod fo_eval;
pub mod gen;
pub mod parity_brute;
pub mod runs;

pub use ctl_naive::ctl_naive;
pub use decomp::{min_blocks_dp, min_blocks_recursive, DecompDp};
pub use fo_eval::{fo_eval, fo_eval_capped};
pub use gen::{
    never_alternates, random_formula, random_game, random_graph, random_sentence, random_system,
};
pub use parity_brute::{parity_brute, verify_strategy};
pub use runs::{enumerate_runs, NodeKey, RunSpace};

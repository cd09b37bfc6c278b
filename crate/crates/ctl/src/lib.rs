//! Branching-time property language and model checker.
//!
//! The crate has three parts: an `Arc`-shared formula syntax tree
//! ([`CtlFormula`]), a parser for the concrete syntax (`!`, `&`, `|`, `EX`,
//! `EF`, `EG`, `E[ .. U .. ]`), and a set-based checker ([`check`]) that
//! labels every node of a compressed-sparse-row graph with the subformulas
//! it satisfies. Propositions are resolved to node labels by a caller
//! closure, so the checker is independent of how the graph was explored.

pub mod ast;
pub mod checker;
pub mod parser;

pub use ast::CtlFormula;
pub use checker::{check, check_at, CheckError, GraphView};
pub use parser::{parse, ParseError};

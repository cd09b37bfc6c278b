//! Space-bounded Turing machine descriptions and their JSON document format.
//!
//! Machines are nondeterministic: several transitions may share a (state,
//! letter) pair. Each transition either rewrites the scanned cell or moves
//! the head one cell, never both; the document format cannot express a
//! combined action. State and tape letter names become stack symbols in the
//! compiled system, so spellings reserved for the encoding alphabet
//! (counter bits, `zeta`, `bot`, ...) are rejected up front.

use std::collections::BTreeSet;

use mpds_core::StackSymbol;
use serde::{Deserialize, Serialize};

use crate::TmError;

/// Head movement direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

/// What a transition does: rewrite the scanned cell or move the head.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TmAction {
    /// Replace the scanned letter and stay put.
    Write(String),
    /// Move the head one cell without writing.
    Move(Direction),
}

/// One transition: in state `from` scanning `read`, switch to `to` and
/// perform `action`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmTransition {
    pub from: String,
    pub read: String,
    pub to: String,
    pub action: TmAction,
}

/// A nondeterministic Turing machine as loaded from a document.
///
/// `states` and `tape_alphabet` must be disjoint: both kinds of name share
/// the encoded configuration alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmMachine {
    pub states: Vec<String>,
    pub tape_alphabet: Vec<String>,
    pub blank: String,
    pub initial: String,
    pub finals: Vec<String>,
    pub transitions: Vec<TmTransition>,
}

impl TmMachine {
    /// Parses and validates a machine document.
    pub fn from_json(text: &str) -> Result<Self, TmError> {
        let m: TmMachine =
            serde_json::from_str(text).map_err(|e| TmError::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// Checks the structural well-formedness rules. `from_json` calls this;
    /// hand-built machines should too before compilation.
    pub fn validate(&self) -> Result<(), TmError> {
        if self.states.is_empty() {
            return Err(TmError::BadMachine("no states".into()));
        }
        if self.tape_alphabet.is_empty() {
            return Err(TmError::BadMachine("empty tape alphabet".into()));
        }
        let mut seen = BTreeSet::new();
        for name in self.states.iter().chain(&self.tape_alphabet) {
            if StackSymbol::name_is_reserved(name) {
                return Err(TmError::ReservedName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(TmError::BadMachine(format!(
                    "name `{name}` appears twice across states and tape alphabet"
                )));
            }
        }
        if !self.tape_alphabet.contains(&self.blank) {
            return Err(TmError::BadMachine(format!(
                "blank `{}` is not a tape letter",
                self.blank
            )));
        }
        if !self.states.contains(&self.initial) {
            return Err(TmError::BadMachine(format!(
                "initial state `{}` is not declared",
                self.initial
            )));
        }
        for f in &self.finals {
            if !self.states.contains(f) {
                return Err(TmError::BadMachine(format!(
                    "final state `{f}` is not declared"
                )));
            }
        }
        for t in &self.transitions {
            if !self.states.contains(&t.from) {
                return Err(TmError::BadMachine(format!(
                    "transition from undeclared state `{}`",
                    t.from
                )));
            }
            if !self.states.contains(&t.to) {
                return Err(TmError::BadMachine(format!(
                    "transition to undeclared state `{}`",
                    t.to
                )));
            }
            if !self.tape_alphabet.contains(&t.read) {
                return Err(TmError::BadMachine(format!(
                    "transition reads undeclared letter `{}`",
                    t.read
                )));
            }
            if let TmAction::Write(sym) = &t.action {
                if !self.tape_alphabet.contains(sym) {
                    return Err(TmError::BadMachine(format!(
                        "transition writes undeclared letter `{sym}`"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_state(&self, name: &str) -> bool {
        self.states.iter().any(|s| s == name)
    }

    pub fn is_tape_letter(&self, name: &str) -> bool {
        self.tape_alphabet.iter().any(|s| s == name)
    }

    pub fn is_final(&self, name: &str) -> bool {
        self.finals.iter().any(|s| s == name)
    }

    /// Transitions enabled in `state` scanning `read`.
    pub fn transitions_on<'a>(
        &'a self,
        state: &'a str,
        read: &'a str,
    ) -> impl Iterator<Item = &'a TmTransition> {
        self.transitions
            .iter()
            .filter(move |t| t.from == state && t.read == read)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip() -> &'static str {
        r#"{
            "states": ["s", "t"],
            "tape_alphabet": ["0", "1"],
            "blank": "0",
            "initial": "s",
            "finals": ["t"],
            "transitions": [
                {"from": "s", "read": "1", "to": "t", "action": {"write": "0"}},
                {"from": "s", "read": "0", "to": "s", "action": {"move": "R"}},
                {"from": "t", "read": "0", "to": "t", "action": {"move": "L"}}
            ]
        }"#
    }

    #[test]
    fn parses_the_document_format() {
        let m = TmMachine::from_json(flip()).unwrap();
        assert_eq!(m.states.len(), 2);
        assert_eq!(m.transitions[0].action, TmAction::Write("0".into()));
        assert_eq!(m.transitions[1].action, TmAction::Move(Direction::Right));
        assert_eq!(m.transitions_on("s", "1").count(), 1);
        assert_eq!(m.transitions_on("t", "1").count(), 0);
    }

    #[test]
    fn serializes_actions_with_external_tags() {
        let m = TmMachine::from_json(flip()).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains(r#""write":"0""#));
        assert!(text.contains(r#""move":"R""#));
        let back = TmMachine::from_json(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_reserved_and_overlapping_names() {
        let mut m = TmMachine::from_json(flip()).unwrap();
        m.states[0] = "zeta".into();
        assert!(matches!(m.validate(), Err(TmError::ReservedName(_))));

        let mut m = TmMachine::from_json(flip()).unwrap();
        m.states[0] = "0".into();
        assert!(matches!(m.validate(), Err(TmError::BadMachine(_))));

        let mut m = TmMachine::from_json(flip()).unwrap();
        m.tape_alphabet[1] = "a1".into();
        assert!(matches!(m.validate(), Err(TmError::ReservedName(_))));
    }

    #[test]
    fn rejects_dangling_references() {
        let mut m = TmMachine::from_json(flip()).unwrap();
        m.blank = "2".into();
        assert!(m.validate().is_err());

        let mut m = TmMachine::from_json(flip()).unwrap();
        m.transitions[0].to = "u".into();
        assert!(m.validate().is_err());

        let mut m = TmMachine::from_json(flip()).unwrap();
        m.transitions[0].action = TmAction::Write("9".into());
        assert!(m.validate().is_err());
    }

    #[test]
    fn write_and_move_cannot_be_combined_in_the_format() {
        let text = r#"{"from": "s", "read": "0", "to": "t",
                       "action": {"write": "1", "move": "R"}}"#;
        assert!(serde_json::from_str::<TmTransition>(text).is_err());
    }
}

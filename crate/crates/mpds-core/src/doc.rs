//! The MPDS document format consumed and produced by the CLI.
//!
//! A document is JSON with fields `states`, `stacks`, `alphabet`, `initial`,
//! `transitions`, and optional `owner` / `priority` maps. Transition objects
//! carry `{kind, from, to, stack?, guard?, symbol?}`; guards spell the
//! wildcard as `"_"` and the bottom sentinel as `"⊥"` (accepted as `"bot"`
//! too); stack indices are 1-based.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::symbol::{Guard, StackSymbol};
use crate::system::{
    Action, Diagnostic, DiagnosticKind, MpdsSystem, Player, SymbolId, SystemBuilder, BOTTOM,
};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MpdsDoc {
    pub states: Vec<String>,
    pub stacks: u8,
    pub alphabet: Vec<String>,
    pub initial: String,
    pub transitions: Vec<TransitionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<BTreeMap<String, u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<BTreeMap<String, u32>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TransitionDoc {
    pub kind: String,
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stack: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum DocError {
    #[error("document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document violates system invariants:\n{}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("  - {d}")).collect::<Vec<_>>().join("\n")
}

impl MpdsDoc {
    pub fn from_json(text: &str) -> Result<Self, DocError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    /// Name-level structural checks; empty iff the document can be compiled.
    pub fn validate(&self) -> Vec<Diagnostic> {
        fn diag(out: &mut Vec<Diagnostic>, kind: DiagnosticKind, message: String) {
            out.push(Diagnostic { kind, message });
        }
        let mut out = Vec::new();
        let has_state = |name: &str| self.states.iter().any(|s| s == name);
        let mut symbols = Vec::new();
        for spelling in &self.alphabet {
            match StackSymbol::parse(spelling) {
                Ok(StackSymbol::Bottom) => {} // implicit; tolerated in the listing
                Ok(sym) => symbols.push(sym),
                Err(err) => diag(
                    &mut out,
                    DiagnosticKind::UndeclaredSymbol,
                    format!("alphabet entry `{spelling}`: {err}"),
                ),
            }
        }
        let has_symbol = |sym: &StackSymbol| symbols.contains(sym);
        if !has_state(&self.initial) {
            diag(
                &mut out,
                DiagnosticKind::BadInitial,
                format!("initial state `{}` is not declared", self.initial),
            );
        }
        for (i, t) in self.transitions.iter().enumerate() {
            for (role, name) in [("from", &t.from), ("to", &t.to)] {
                if !has_state(name) {
                    diag(
                        &mut out,
                        DiagnosticKind::UndeclaredState,
                        format!("transition {i} {role}-state `{name}` is not declared"),
                    );
                }
            }
            let needs_stack = t.kind != "internal";
            match t.stack {
                Some(s) if needs_stack => {
                    if s < 1 || s > self.stacks {
                        diag(
                            &mut out,
                            DiagnosticKind::BadStackIndex,
                            format!("transition {i} stack {s} out of 1..={}", self.stacks),
                        );
                    }
                }
                None if needs_stack => diag(
                    &mut out,
                    DiagnosticKind::BadStackIndex,
                    format!("transition {i} ({}) is missing its stack index", t.kind),
                ),
                _ => {}
            }
            let check_symbol = |spelling: &str, role: &str, out: &mut Vec<Diagnostic>| {
                match StackSymbol::parse(spelling) {
                    Ok(StackSymbol::Bottom) => out.push(Diagnostic {
                        kind: DiagnosticKind::BottomMoved,
                        message: format!("transition {i} {role}s the bottom sentinel"),
                    }),
                    Ok(sym) => {
                        if !has_symbol(&sym) {
                            out.push(Diagnostic {
                                kind: DiagnosticKind::UndeclaredSymbol,
                                message: format!(
                                    "transition {i} {role} symbol `{spelling}` is not in the alphabet"
                                ),
                            });
                        }
                    }
                    Err(err) => out.push(Diagnostic {
                        kind: DiagnosticKind::UndeclaredSymbol,
                        message: format!("transition {i} {role} symbol `{spelling}`: {err}"),
                    }),
                }
            };
            let check_guard = |spelling: &str, out: &mut Vec<Diagnostic>| {
                if spelling == "_" {
                    return;
                }
                match StackSymbol::parse(spelling) {
                    Ok(StackSymbol::Bottom) => {}
                    Ok(sym) => {
                        if !has_symbol(&sym) {
                            out.push(Diagnostic {
                                kind: DiagnosticKind::UndeclaredSymbol,
                                message: format!(
                                    "transition {i} guard `{spelling}` is not in the alphabet"
                                ),
                            });
                        }
                    }
                    Err(err) => out.push(Diagnostic {
                        kind: DiagnosticKind::UndeclaredSymbol,
                        message: format!("transition {i} guard `{spelling}`: {err}"),
                    }),
                }
            };
            match t.kind.as_str() {
                "internal" => {}
                "push" => {
                    match &t.symbol {
                        Some(s) => check_symbol(s, "push", &mut out),
                        None => out.push(Diagnostic {
                            kind: DiagnosticKind::UndeclaredSymbol,
                            message: format!("transition {i} push is missing its symbol"),
                        }),
                    }
                    if let Some(g) = &t.guard {
                        check_guard(g, &mut out);
                    }
                }
                "pop" => match &t.symbol {
                    Some(s) => check_symbol(s, "pop", &mut out),
                    None => out.push(Diagnostic {
                        kind: DiagnosticKind::UndeclaredSymbol,
                        message: format!("transition {i} pop is missing its symbol"),
                    }),
                },
                "guarded-noop" | "noop" => {
                    if let Some(g) = &t.guard {
                        check_guard(g, &mut out);
                    }
                }
                other => out.push(Diagnostic {
                    kind: DiagnosticKind::UndeclaredSymbol,
                    message: format!("transition {i} has unknown kind `{other}`"),
                }),
            }
        }
        let owner_keys: Option<Vec<&String>> = self.owner.as_ref().map(|m| m.keys().collect());
        let priority_keys: Option<Vec<&String>> =
            self.priority.as_ref().map(|m| m.keys().collect());
        for (name, keys, kind) in [
            ("owner", owner_keys, DiagnosticKind::PartialOwner),
            ("priority", priority_keys, DiagnosticKind::PartialPriority),
        ] {
            if let Some(keys) = keys {
                for state in &keys {
                    if !has_state(state) {
                        diag(
                            &mut out,
                            DiagnosticKind::UndeclaredState,
                            format!("{name} map names undeclared state `{state}`"),
                        );
                    }
                }
                if keys.len() != self.states.len() {
                    diag(
                        &mut out,
                        kind,
                        format!("{name} map covers {} of {} states", keys.len(), self.states.len()),
                    );
                }
            }
        }
        if let Some(owner) = &self.owner {
            for (state, player) in owner {
                if *player > 1 {
                    diag(
                        &mut out,
                        DiagnosticKind::PartialOwner,
                        format!("owner of `{state}` must be 0 or 1, got {player}"),
                    );
                }
            }
        }
        out
    }

    /// Compiles the document; fails with the full diagnostic list if any
    /// structural check fails.
    pub fn to_system(&self) -> Result<MpdsSystem, DocError> {
        let diags = self.validate();
        if !diags.is_empty() {
            return Err(DocError::Invalid(diags));
        }
        let mut b = SystemBuilder::new(self.stacks);
        for name in &self.states {
            // Duplicate declarations collapse silently; ids follow first mention.
            b.state(name.clone());
        }
        for spelling in &self.alphabet {
            let sym = StackSymbol::parse(spelling).expect("validated");
            if !sym.is_bottom() {
                b.symbol(sym);
            }
        }
        let initial = b.lookup_state(&self.initial).expect("validated");
        b.set_initial(initial);
        for t in &self.transitions {
            let from = b.lookup_state(&t.from).expect("validated");
            let to = b.lookup_state(&t.to).expect("validated");
            let stack = t.stack.map(|s| s - 1);
            let guard = |b: &mut SystemBuilder, g: &Option<String>| -> Guard<SymbolId> {
                match g.as_deref() {
                    None | Some("_") => Guard::Wildcard,
                    Some(spelling) => {
                        let sym = StackSymbol::parse(spelling).expect("validated");
                        if sym.is_bottom() {
                            Guard::Symbol(BOTTOM)
                        } else {
                            Guard::Symbol(b.symbol(sym))
                        }
                    }
                }
            };
            match t.kind.as_str() {
                "internal" => b.internal(from, to),
                "push" => {
                    let g = guard(&mut b, &t.guard);
                    let sym = StackSymbol::parse(t.symbol.as_deref().expect("validated"))
                        .expect("validated");
                    let sym = b.symbol(sym);
                    b.push(from, to, stack.expect("validated"), g, sym).expect("validated");
                }
                "pop" => {
                    let sym = StackSymbol::parse(t.symbol.as_deref().expect("validated"))
                        .expect("validated");
                    let sym = b.symbol(sym);
                    b.pop(from, to, stack.expect("validated"), sym).expect("validated");
                }
                "guarded-noop" | "noop" => {
                    let g = guard(&mut b, &t.guard);
                    b.noop(from, to, stack.expect("validated"), g).expect("validated");
                }
                _ => unreachable!("validated"),
            }
        }
        if let Some(owner) = &self.owner {
            for (state, player) in owner {
                let id = b.lookup_state(state).expect("validated");
                b.set_owner(id, Player::from_index(*player).expect("validated"));
            }
        }
        if let Some(priority) = &self.priority {
            for (state, p) in priority {
                let id = b.lookup_state(state).expect("validated");
                b.set_priority(id, *p);
            }
        }
        b.build().map_err(|e| match e {
            crate::system::BuildError::Invalid(diags) => DocError::Invalid(diags),
            other => DocError::Invalid(vec![Diagnostic {
                kind: DiagnosticKind::BadInitial,
                message: other.to_string(),
            }]),
        })
    }

    /// Renders a system back into document form.
    pub fn from_system(sys: &MpdsSystem) -> MpdsDoc {
        let guard_spelling = |g: &Guard<SymbolId>| match g {
            Guard::Wildcard => "_".to_owned(),
            Guard::Symbol(BOTTOM) => "⊥".to_owned(),
            Guard::Symbol(s) => sys.symbol(*s).spelling(),
        };
        let transitions = sys
            .transitions()
            .iter()
            .map(|t| match &t.action {
                Action::Internal => TransitionDoc {
                    kind: "internal".into(),
                    from: sys.state_name(t.from).into(),
                    to: sys.state_name(t.to).into(),
                    stack: None,
                    guard: None,
                    symbol: None,
                },
                Action::Push { stack, guard, symbol } => TransitionDoc {
                    kind: "push".into(),
                    from: sys.state_name(t.from).into(),
                    to: sys.state_name(t.to).into(),
                    stack: Some(stack + 1),
                    guard: Some(guard_spelling(guard)),
                    symbol: Some(sys.symbol(*symbol).spelling()),
                },
                Action::Pop { stack, symbol } => TransitionDoc {
                    kind: "pop".into(),
                    from: sys.state_name(t.from).into(),
                    to: sys.state_name(t.to).into(),
                    stack: Some(stack + 1),
                    guard: None,
                    symbol: Some(sys.symbol(*symbol).spelling()),
                },
                Action::Noop { stack, guard } => TransitionDoc {
                    kind: "guarded-noop".into(),
                    from: sys.state_name(t.from).into(),
                    to: sys.state_name(t.to).into(),
                    stack: Some(stack + 1),
                    guard: Some(guard_spelling(guard)),
                    symbol: None,
                },
            })
            .collect();
        MpdsDoc {
            states: sys.state_names().map(str::to_owned).collect(),
            stacks: sys.stack_count(),
            alphabet: sys.alphabet().map(|(_, s)| s.spelling()).collect(),
            initial: sys.state_name(sys.initial()).to_owned(),
            transitions,
            owner: if sys.owner_map().is_empty() {
                None
            } else {
                Some(
                    sys.owner_map()
                        .iter()
                        .map(|(&s, &p)| {
                            (sys.state_name(crate::system::StateId(s)).to_owned(), p.index() as u8)
                        })
                        .collect(),
                )
            },
            priority: if sys.priority_map().is_empty() {
                None
            } else {
                Some(
                    sys.priority_map()
                        .iter()
                        .map(|(&s, &p)| (sys.state_name(crate::system::StateId(s)).to_owned(), p))
                        .collect(),
                )
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"{
        "states": ["q0", "q1"],
        "stacks": 2,
        "alphabet": ["x", "a1"],
        "initial": "q0",
        "transitions": [
            {"kind": "internal", "from": "q0", "to": "q1"},
            {"kind": "push", "from": "q0", "to": "q1", "stack": 1, "guard": "_", "symbol": "x"},
            {"kind": "pop", "from": "q1", "to": "q0", "stack": 1, "symbol": "x"},
            {"kind": "guarded-noop", "from": "q1", "to": "q1", "stack": 2, "guard": "⊥"}
        ]
    }"#;

    #[test]
    fn round_trip_through_system() {
        let doc = MpdsDoc::from_json(TOY).unwrap();
        assert!(doc.validate().is_empty());
        let sys = doc.to_system().unwrap();
        assert_eq!(sys.state_count(), 2);
        assert_eq!(sys.transitions().len(), 4);
        let doc2 = MpdsDoc::from_system(&sys);
        let sys2 = doc2.to_system().unwrap();
        assert_eq!(MpdsDoc::from_system(&sys2), doc2);
    }

    #[test]
    fn undeclared_state_is_one_diagnostic() {
        let mut doc = MpdsDoc::from_json(TOY).unwrap();
        doc.transitions.push(TransitionDoc {
            kind: "internal".into(),
            from: "q0".into(),
            to: "ghost".into(),
            stack: None,
            guard: None,
            symbol: None,
        });
        let diags = doc.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::UndeclaredState);
    }

    #[test]
    fn partial_owner_is_flagged() {
        let mut doc = MpdsDoc::from_json(TOY).unwrap();
        doc.owner = Some([("q0".to_owned(), 0u8)].into_iter().collect());
        let diags = doc.validate();
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::PartialOwner));
    }

    #[test]
    fn bottom_push_is_rejected() {
        let mut doc = MpdsDoc::from_json(TOY).unwrap();
        doc.transitions[1].symbol = Some("bot".into());
        assert!(doc.validate().iter().any(|d| d.kind == DiagnosticKind::BottomMoved));
    }

    #[test]
    fn noop_alias_is_accepted_but_canonical_kind_is_emitted() {
        let doc = MpdsDoc::from_json(&TOY.replace("guarded-noop", "noop")).unwrap();
        let sys = doc.to_system().unwrap();
        let doc2 = MpdsDoc::from_system(&sys);
        assert_eq!(doc2.transitions[3].kind, "guarded-noop");
    }

    #[test]
    fn guard_spellings() {
        let doc = MpdsDoc::from_json(TOY).unwrap();
        let sys = doc.to_system().unwrap();
        let doc2 = MpdsDoc::from_system(&sys);
        assert_eq!(doc2.transitions[1].guard.as_deref(), Some("_"));
        assert_eq!(doc2.transitions[3].guard.as_deref(), Some("⊥"));
        // `bot` parses as the bottom guard too.
        let doc3 = MpdsDoc::from_json(&TOY.replace("⊥", "bot")).unwrap();
        assert!(doc3.validate().is_empty());
        let sys3 = doc3.to_system().unwrap();
        assert_eq!(MpdsDoc::from_system(&sys3).transitions[3].guard.as_deref(), Some("⊥"));
    }
}

//! System definition: states, alphabet, transitions, optional game annotations.
//!
//! States and symbols are interned into dense `u32` ids at construction time;
//! all hot-path code works on ids and resolves names only at the edges
//! (documents, reports, error messages). Declaration order is preserved
//! everywhere, which is what makes downstream exploration canonical.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexSet;
use rustc_hash::FxBuildHasher;

use crate::symbol::{Guard, StackSymbol};

/// Dense index of a control state within its [`MpdsSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

/// Dense index of a stack symbol within its [`MpdsSystem`].
///
/// Id 0 is always the bottom sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

/// The id every system assigns to [`StackSymbol::Bottom`].
pub const BOTTOM: SymbolId = SymbolId(0);

/// Owner of a game state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Zero,
    One,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Zero => Player::One,
            Player::One => Player::Zero,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::Zero => 0,
            Player::One => 1,
        }
    }

    pub fn from_index(i: u8) -> Option<Player> {
        match i {
            0 => Some(Player::Zero),
            1 => Some(Player::One),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Zero => f.write_str("player0"),
            Player::One => f.write_str("player1"),
        }
    }
}

/// What a transition does to the stacks. Stack indices are 0-based here;
/// the document format and all printed output use 1-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    /// Change control state only.
    Internal,
    /// Test the top of `stack` against `guard`, then push `symbol` onto it.
    Push { stack: u8, guard: Guard<SymbolId>, symbol: SymbolId },
    /// Pop `symbol` from `stack`; enabled only when it is the exact top.
    Pop { stack: u8, symbol: SymbolId },
    /// Test the top of `stack` against `guard` without changing it.
    Noop { stack: u8, guard: Guard<SymbolId> },
}

impl Action {
    /// The stack this action touches, if any.
    pub fn stack(&self) -> Option<u8> {
        match self {
            Action::Internal => None,
            Action::Push { stack, .. } | Action::Pop { stack, .. } | Action::Noop { stack, .. } => {
                Some(*stack)
            }
        }
    }

    /// True when the action extends any context/phase block: internal moves
    /// and guarded-noops never commit a block to a stack.
    pub fn is_counting_transparent(&self) -> bool {
        matches!(self, Action::Internal | Action::Noop { .. })
    }

    pub fn is_pop(&self) -> bool {
        matches!(self, Action::Pop { .. })
    }

    pub fn is_push(&self) -> bool {
        matches!(self, Action::Push { .. })
    }
}

/// One transition of the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: StateId,
    pub to: StateId,
    pub action: Action,
}

/// A multi-pushdown system: finite control, `stack_count` stacks, a shared
/// stack alphabet, and optionally total owner/priority maps (game mode).
#[derive(Clone, Debug)]
pub struct MpdsSystem {
    states: IndexSet<String, FxBuildHasher>,
    symbols: IndexSet<StackSymbol, FxBuildHasher>,
    stack_count: u8,
    initial: StateId,
    transitions: Vec<Transition>,
    /// Transition indices grouped by from-state, declaration order inside.
    by_state: Vec<Vec<u32>>,
    owner: BTreeMap<u32, Player>,
    priority: BTreeMap<u32, u32>,
}

impl MpdsSystem {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn stack_count(&self) -> u8 {
        self.stack_count
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, index: u32) -> &Transition {
        &self.transitions[index as usize]
    }

    /// Indices of the transitions leaving `state`, in declaration order.
    pub fn transitions_from(&self, state: StateId) -> &[u32] {
        &self.by_state[state.0 as usize]
    }

    pub fn state_name(&self, id: StateId) -> &str {
        self.states.get_index(id.0 as usize).expect("state id in range")
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.get_index_of(name).map(|i| StateId(i as u32))
    }

    pub fn state_names(&self) -> impl Iterator<Item = &str> {
        self.states.iter().map(String::as_str)
    }

    pub fn symbol(&self, id: SymbolId) -> &StackSymbol {
        self.symbols.get_index(id.0 as usize).expect("symbol id in range")
    }

    pub fn symbol_id(&self, sym: &StackSymbol) -> Option<SymbolId> {
        self.symbols.get_index_of(sym).map(|i| SymbolId(i as u32))
    }

    /// All symbols including the bottom sentinel at index 0.
    pub fn symbols(&self) -> impl Iterator<Item = (SymbolId, &StackSymbol)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (SymbolId(i as u32), s))
    }

    /// Declared alphabet (bottom excluded).
    pub fn alphabet(&self) -> impl Iterator<Item = (SymbolId, &StackSymbol)> {
        self.symbols().skip(1)
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn owner_map(&self) -> &BTreeMap<u32, Player> {
        &self.owner
    }

    pub fn priority_map(&self) -> &BTreeMap<u32, u32> {
        &self.priority
    }

    pub fn owner(&self, state: StateId) -> Option<Player> {
        self.owner.get(&state.0).copied()
    }

    pub fn priority(&self, state: StateId) -> Option<u32> {
        self.priority.get(&state.0).copied()
    }

    /// True when any game annotation is present.
    pub fn is_game(&self) -> bool {
        !self.owner.is_empty() || !self.priority.is_empty()
    }

    /// Structural diagnostics; empty iff all system invariants hold.
    ///
    /// Builder-constructed systems are well-formed by construction, but
    /// document-loaded systems and hand-assembled test fixtures go through
    /// the same checks.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let nstates = self.states.len() as u32;
        let nsyms = self.symbols.len() as u32;
        let mut diag = |kind: DiagnosticKind, message: String| {
            out.push(Diagnostic { kind, message });
        };
        if self.initial.0 >= nstates {
            diag(
                DiagnosticKind::BadInitial,
                format!("initial state id {} out of range", self.initial.0),
            );
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if t.from.0 >= nstates || t.to.0 >= nstates {
                diag(
                    DiagnosticKind::UndeclaredState,
                    format!("transition {i} references an undeclared state"),
                );
            }
            if let Some(stack) = t.action.stack() {
                if stack >= self.stack_count {
                    diag(
                        DiagnosticKind::BadStackIndex,
                        format!(
                            "transition {i} touches stack {} but the system has {}",
                            stack + 1,
                            self.stack_count
                        ),
                    );
                }
            }
            let mut check_sym = |id: SymbolId, role: &str| {
                if id.0 >= nsyms {
                    diag(
                        DiagnosticKind::UndeclaredSymbol,
                        format!("transition {i} {role} references an undeclared symbol"),
                    );
                } else if id == BOTTOM && role != "guard" {
                    diag(
                        DiagnosticKind::BottomMoved,
                        format!("transition {i} {role}s the bottom sentinel"),
                    );
                }
            };
            match t.action {
                Action::Internal => {}
                Action::Push { guard, symbol, .. } => {
                    if let Guard::Symbol(g) = guard {
                        check_sym(g, "guard");
                    }
                    check_sym(symbol, "push");
                }
                Action::Pop { symbol, .. } => check_sym(symbol, "pop"),
                Action::Noop { guard, .. } => {
                    if let Guard::Symbol(g) = guard {
                        check_sym(g, "guard");
                    }
                }
            }
        }
        if !self.owner.is_empty() && self.owner.len() != self.states.len() {
            diag(
                DiagnosticKind::PartialOwner,
                format!(
                    "owner map covers {} of {} states",
                    self.owner.len(),
                    self.states.len()
                ),
            );
        }
        if !self.priority.is_empty() && self.priority.len() != self.states.len() {
            diag(
                DiagnosticKind::PartialPriority,
                format!(
                    "priority map covers {} of {} states",
                    self.priority.len(),
                    self.states.len()
                ),
            );
        }
        out
    }

    /// Human-readable rendering of one transition, for traces and errors.
    pub fn describe_transition(&self, index: u32) -> String {
        let t = self.transition(index);
        let from = self.state_name(t.from);
        let to = self.state_name(t.to);
        let guard_str = |g: &Guard<SymbolId>| match g {
            Guard::Wildcard => "_".to_owned(),
            Guard::Symbol(BOTTOM) => "⊥".to_owned(),
            Guard::Symbol(s) => self.symbol(*s).spelling(),
        };
        match &t.action {
            Action::Internal => format!("{from} -> {to}"),
            Action::Push { stack, guard, symbol } => format!(
                "{from} -[push {} @{} if {}]-> {to}",
                self.symbol(*symbol).spelling(),
                stack + 1,
                guard_str(guard)
            ),
            Action::Pop { stack, symbol } => format!(
                "{from} -[pop {} @{}]-> {to}",
                self.symbol(*symbol).spelling(),
                stack + 1
            ),
            Action::Noop { stack, guard } => {
                format!("{from} -[noop @{} if {}]-> {to}", stack + 1, guard_str(guard))
            }
        }
    }
}

/// A structural problem found by [`MpdsSystem::validate`] or document checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    UndeclaredState,
    UndeclaredSymbol,
    BadStackIndex,
    BottomMoved,
    BadInitial,
    PartialOwner,
    PartialPriority,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("unknown state name `{0}`")]
    UnknownState(String),
    #[error("stack index {index} out of range (system has {count} stacks)")]
    StackOutOfRange { index: u8, count: u8 },
    #[error("the bottom sentinel cannot be pushed or popped")]
    BottomMoved,
    #[error("no initial state set")]
    NoInitial,
    #[error("system invariants violated: {0:?}")]
    Invalid(Vec<Diagnostic>),
}

/// Incremental constructor used by the reduction compilers and by tests.
///
/// Ids are assigned in insertion order, so emitting from sorted containers
/// yields byte-identical systems across runs.
pub struct SystemBuilder {
    states: IndexSet<String, FxBuildHasher>,
    symbols: IndexSet<StackSymbol, FxBuildHasher>,
    stack_count: u8,
    initial: Option<StateId>,
    transitions: Vec<Transition>,
    owner: BTreeMap<u32, Player>,
    priority: BTreeMap<u32, u32>,
}

impl SystemBuilder {
    pub fn new(stack_count: u8) -> Self {
        let mut symbols = IndexSet::default();
        symbols.insert(StackSymbol::Bottom);
        SystemBuilder {
            states: IndexSet::default(),
            symbols,
            stack_count,
            initial: None,
            transitions: Vec::new(),
            owner: BTreeMap::new(),
            priority: BTreeMap::new(),
        }
    }

    /// Declares a fresh state; errors if the name exists. Compilers rely on
    /// this to guarantee generated names never collide.
    pub fn fresh_state(&mut self, name: impl Into<String>) -> Result<StateId, BuildError> {
        let name = name.into();
        let (idx, inserted) = self.states.insert_full(name.clone());
        if !inserted {
            return Err(BuildError::DuplicateState(name));
        }
        Ok(StateId(idx as u32))
    }

    /// Declares or retrieves a state by name.
    pub fn state(&mut self, name: impl Into<String>) -> StateId {
        let (idx, _) = self.states.insert_full(name.into());
        StateId(idx as u32)
    }

    pub fn lookup_state(&self, name: &str) -> Option<StateId> {
        self.states.get_index_of(name).map(|i| StateId(i as u32))
    }

    /// Declares or retrieves a symbol.
    pub fn symbol(&mut self, sym: StackSymbol) -> SymbolId {
        let (idx, _) = self.symbols.insert_full(sym);
        SymbolId(idx as u32)
    }

    pub fn set_initial(&mut self, state: StateId) {
        self.initial = Some(state);
    }

    pub fn set_owner(&mut self, state: StateId, player: Player) {
        self.owner.insert(state.0, player);
    }

    pub fn set_priority(&mut self, state: StateId, priority: u32) {
        self.priority.insert(state.0, priority);
    }

    pub fn stack_count(&self) -> u8 {
        self.stack_count
    }

    fn check_stack(&self, stack: u8) -> Result<(), BuildError> {
        if stack >= self.stack_count {
            return Err(BuildError::StackOutOfRange { index: stack, count: self.stack_count });
        }
        Ok(())
    }

    pub fn internal(&mut self, from: StateId, to: StateId) {
        self.transitions.push(Transition { from, to, action: Action::Internal });
    }

    pub fn push(
        &mut self,
        from: StateId,
        to: StateId,
        stack: u8,
        guard: Guard<SymbolId>,
        symbol: SymbolId,
    ) -> Result<(), BuildError> {
        self.check_stack(stack)?;
        if symbol == BOTTOM {
            return Err(BuildError::BottomMoved);
        }
        self.transitions.push(Transition {
            from,
            to,
            action: Action::Push { stack, guard, symbol },
        });
        Ok(())
    }

    pub fn pop(
        &mut self,
        from: StateId,
        to: StateId,
        stack: u8,
        symbol: SymbolId,
    ) -> Result<(), BuildError> {
        self.check_stack(stack)?;
        if symbol == BOTTOM {
            return Err(BuildError::BottomMoved);
        }
        self.transitions.push(Transition { from, to, action: Action::Pop { stack, symbol } });
        Ok(())
    }

    pub fn noop(
        &mut self,
        from: StateId,
        to: StateId,
        stack: u8,
        guard: Guard<SymbolId>,
    ) -> Result<(), BuildError> {
        self.check_stack(stack)?;
        self.transitions.push(Transition { from, to, action: Action::Noop { stack, guard } });
        Ok(())
    }

    pub fn build(self) -> Result<MpdsSystem, BuildError> {
        let initial = self.initial.ok_or(BuildError::NoInitial)?;
        let mut by_state = vec![Vec::new(); self.states.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            by_state[t.from.0 as usize].push(i as u32);
        }
        let sys = MpdsSystem {
            states: self.states,
            symbols: self.symbols,
            stack_count: self.stack_count,
            initial,
            transitions: self.transitions,
            by_state,
            owner: self.owner,
            priority: self.priority,
        };
        let diagnostics = sys.validate();
        if !diagnostics.is_empty() {
            return Err(BuildError::Invalid(diagnostics));
        }
        Ok(sys)
    }
}

/// Joins name parts with `.` into a namespaced state name.
pub fn scoped_name(parts: &[&str]) -> String {
    parts.join(".")
}

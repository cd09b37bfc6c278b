//! Configurations and the one-step move relation.
//!
//! A configuration is a control state plus one bottom-terminated word per
//! stack. Words are exposed top-first (matching how encodings are written
//! down) but stored bottom-first so push and pop are O(1).

use std::fmt;

use crate::symbol::{Guard, StackSymbol};
use crate::system::{Action, MpdsSystem, StateId, Transition};

/// One stack's content. Physically bottom-first with the sentinel at
/// index 0; logically (display, construction, iteration) top-first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StackWord(Vec<StackSymbol>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("stack word must contain exactly one bottom sentinel, at its last position")]
    MisplacedBottom,
    #[error("cannot push or pop the bottom sentinel")]
    BottomMoved,
}

impl StackWord {
    /// The empty stack: just the bottom sentinel.
    pub fn empty() -> Self {
        StackWord(vec![StackSymbol::Bottom])
    }

    /// Builds a word from top-first symbols; the input must end with exactly
    /// one bottom sentinel (e.g. `[b1, a1, bot]`).
    pub fn from_top_first<I>(symbols: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = StackSymbol>,
    {
        let mut rev: Vec<StackSymbol> = symbols.into_iter().collect();
        rev.reverse();
        match rev.first() {
            Some(StackSymbol::Bottom) => {}
            _ => return Err(WordError::MisplacedBottom),
        }
        if rev[1..].iter().any(StackSymbol::is_bottom) {
            return Err(WordError::MisplacedBottom);
        }
        Ok(StackWord(rev))
    }

    /// Builds a word from the top-first non-bottom prefix; the sentinel is
    /// appended automatically.
    pub fn from_prefix<I>(symbols: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = StackSymbol>,
    {
        let mut rev: Vec<StackSymbol> = symbols.into_iter().collect();
        if rev.iter().any(StackSymbol::is_bottom) {
            return Err(WordError::MisplacedBottom);
        }
        rev.push(StackSymbol::Bottom);
        rev.reverse();
        Ok(StackWord(rev))
    }

    pub fn top(&self) -> &StackSymbol {
        self.0.last().expect("stack word is never empty")
    }

    pub fn is_bottom_only(&self) -> bool {
        self.0.len() == 1
    }

    /// Number of symbols above the sentinel.
    pub fn height(&self) -> usize {
        self.0.len() - 1
    }

    pub fn push(&mut self, sym: StackSymbol) -> Result<(), WordError> {
        if sym.is_bottom() {
            return Err(WordError::BottomMoved);
        }
        self.0.push(sym);
        Ok(())
    }

    /// Removes and returns the top symbol; errors on a bottom-only stack.
    pub fn pop(&mut self) -> Result<StackSymbol, WordError> {
        if self.is_bottom_only() {
            return Err(WordError::BottomMoved);
        }
        Ok(self.0.pop().expect("non-empty"))
    }

    /// Symbols from top to bottom, sentinel last.
    pub fn iter_top_first(&self) -> impl Iterator<Item = &StackSymbol> {
        self.0.iter().rev()
    }

    /// The non-bottom prefix, top first.
    pub fn prefix_top_first(&self) -> impl Iterator<Item = &StackSymbol> {
        self.0[1..].iter().rev()
    }
}

impl fmt::Display for StackWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for sym in self.iter_top_first() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{sym}")?;
        }
        Ok(())
    }
}

/// A control state plus one word per stack.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub stacks: Vec<StackWord>,
}

impl Configuration {
    /// The initial configuration: initial state, all stacks empty.
    pub fn initial(sys: &MpdsSystem) -> Self {
        Configuration {
            state: sys.initial(),
            stacks: (0..sys.stack_count()).map(|_| StackWord::empty()).collect(),
        }
    }

    pub fn at_state(state: StateId, stacks: Vec<StackWord>) -> Self {
        Configuration { state, stacks }
    }

    pub fn display<'a>(&'a self, sys: &'a MpdsSystem) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Configuration, &'a MpdsSystem);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}(", self.1.state_name(self.0.state))?;
                for (i, stack) in self.0.stacks.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{stack}")?;
                }
                f.write_str(")")
            }
        }
        D(self, sys)
    }
}

/// Why a transition is not enabled at a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error("transition source state differs from the configuration's state")]
    StateMismatch,
    #[error("top symbol differs from a non-wildcard guard")]
    GuardMismatch,
    #[error("pop attempted on an empty stack")]
    PopOnBottom,
}

/// Applies one transition. All stacks other than the touched one are
/// returned bit-identical.
pub fn step(sys: &MpdsSystem, c: &Configuration, t: &Transition) -> Result<Configuration, StepError> {
    if c.state != t.from {
        return Err(StepError::StateMismatch);
    }
    let mut next = c.clone();
    next.state = t.to;
    match t.action {
        Action::Internal => {}
        Action::Push { stack, guard, symbol } => {
            let word = &mut next.stacks[stack as usize];
            let guard = resolve_guard(sys, guard);
            if !guard.matches(word.top()) {
                return Err(StepError::GuardMismatch);
            }
            word.push(sys.symbol(symbol).clone()).expect("push symbol is never bottom");
        }
        Action::Pop { stack, symbol } => {
            let word = &mut next.stacks[stack as usize];
            if word.is_bottom_only() {
                return Err(StepError::PopOnBottom);
            }
            if word.top() != sys.symbol(symbol) {
                return Err(StepError::GuardMismatch);
            }
            word.pop().expect("checked non-empty");
        }
        Action::Noop { stack, guard } => {
            let word = &next.stacks[stack as usize];
            let guard = resolve_guard(sys, guard);
            if !guard.matches(word.top()) {
                return Err(StepError::GuardMismatch);
            }
        }
    }
    Ok(next)
}

/// Applies the transition with the given index.
pub fn step_index(sys: &MpdsSystem, c: &Configuration, index: u32) -> Result<Configuration, StepError> {
    step(sys, c, sys.transition(index))
}

fn resolve_guard(sys: &MpdsSystem, guard: Guard<crate::system::SymbolId>) -> Guard<StackSymbol> {
    match guard {
        Guard::Wildcard => Guard::Wildcard,
        Guard::Symbol(id) => Guard::Symbol(sys.symbol(id).clone()),
    }
}

/// All enabled one-step moves at `c`, in transition declaration order.
pub fn successors(sys: &MpdsSystem, c: &Configuration) -> Vec<(u32, Configuration)> {
    let mut out = Vec::new();
    for &idx in sys.transitions_from(c.state) {
        if let Ok(next) = step(sys, c, sys.transition(idx)) {
            out.push((idx, next));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Guard;
    use crate::system::{SystemBuilder, BOTTOM};

    /// Two states, two stacks: an internal move, a guarded push, a pop, and
    /// a bottom-guarded noop.
    fn toy() -> MpdsSystem {
        let mut b = SystemBuilder::new(2);
        let q = b.fresh_state("q").unwrap();
        let r = b.fresh_state("r").unwrap();
        let a = b.symbol(StackSymbol::named("a_sym"));
        let bsym = b.symbol(StackSymbol::named("b_sym"));
        b.set_initial(q);
        b.internal(q, r);
        b.push(q, r, 0, Guard::Symbol(a), bsym).unwrap();
        b.pop(q, r, 0, a).unwrap();
        b.noop(q, r, 1, Guard::Symbol(BOTTOM)).unwrap();
        b.push(q, r, 1, Guard::Wildcard, a).unwrap();
        b.build().unwrap()
    }

    fn word(sys: &MpdsSystem, names: &[&str]) -> StackWord {
        let _ = sys;
        StackWord::from_prefix(names.iter().map(|n| StackSymbol::named(n))).unwrap()
    }

    #[test]
    fn internal_step_keeps_stacks() {
        let sys = toy();
        let c = Configuration::initial(&sys);
        let next = step(&sys, &c, sys.transition(0)).unwrap();
        assert_eq!(next.state, StateId(1));
        assert_eq!(next.stacks, c.stacks);
    }

    #[test]
    fn push_matches_guard_and_prepends() {
        let sys = toy();
        let c = Configuration {
            state: StateId(0),
            stacks: vec![word(&sys, &["a_sym"]), StackWord::empty()],
        };
        let next = step(&sys, &c, sys.transition(1)).unwrap();
        let tops: Vec<String> = next.stacks[0].iter_top_first().map(|s| s.spelling()).collect();
        assert_eq!(tops, vec!["b_sym", "a_sym", "bot"]);
        assert_eq!(next.stacks[1], c.stacks[1]);
    }

    #[test]
    fn push_guard_mismatch() {
        let sys = toy();
        let c = Configuration::initial(&sys);
        assert_eq!(step(&sys, &c, sys.transition(1)), Err(StepError::GuardMismatch));
    }

    #[test]
    fn pop_removes_top() {
        let sys = toy();
        let c = Configuration {
            state: StateId(0),
            stacks: vec![word(&sys, &["a_sym"]), StackWord::empty()],
        };
        let next = step(&sys, &c, sys.transition(2)).unwrap();
        assert!(next.stacks[0].is_bottom_only());
    }

    #[test]
    fn pop_on_bottom_is_its_own_error() {
        let sys = toy();
        let c = Configuration::initial(&sys);
        assert_eq!(step(&sys, &c, sys.transition(2)), Err(StepError::PopOnBottom));
    }

    #[test]
    fn pop_wrong_top_is_guard_mismatch() {
        let sys = toy();
        let c = Configuration {
            state: StateId(0),
            stacks: vec![word(&sys, &["b_sym"]), StackWord::empty()],
        };
        assert_eq!(step(&sys, &c, sys.transition(2)), Err(StepError::GuardMismatch));
    }

    #[test]
    fn state_mismatch_reported() {
        let sys = toy();
        let mut c = Configuration::initial(&sys);
        c.state = StateId(1);
        assert_eq!(step(&sys, &c, sys.transition(0)), Err(StepError::StateMismatch));
    }

    #[test]
    fn bottom_guarded_noop_fires_only_on_empty_stack() {
        let sys = toy();
        let empty = Configuration::initial(&sys);
        assert!(step(&sys, &empty, sys.transition(3)).is_ok());
        let full = Configuration {
            state: StateId(0),
            stacks: vec![StackWord::empty(), word(&sys, &["a_sym"])],
        };
        assert_eq!(step(&sys, &full, sys.transition(3)), Err(StepError::GuardMismatch));
    }

    #[test]
    fn successors_follow_declaration_order_and_filter_guards() {
        let sys = toy();
        let c = Configuration::initial(&sys);
        // Push on stack 1 has guard a_sym (disabled on empty stack); pop on
        // empty stack disabled; internal, bottom-noop, wildcard-push enabled.
        let succs = successors(&sys, &c);
        let indices: Vec<u32> = succs.iter().map(|(i, _)| *i).collect();
        assert_eq!(indices, vec![0, 3, 4]);
    }

    #[test]
    fn untouched_stacks_are_bit_identical() {
        let sys = toy();
        let c = Configuration {
            state: StateId(0),
            stacks: vec![word(&sys, &["a_sym"]), word(&sys, &["b_sym", "a_sym"])],
        };
        for (idx, next) in successors(&sys, &c) {
            if let Some(stack) = sys.transition(idx).action.stack() {
                for i in 0..2u8 {
                    if i != stack {
                        assert_eq!(next.stacks[i as usize], c.stacks[i as usize]);
                    }
                }
            } else {
                assert_eq!(next.stacks, c.stacks);
            }
        }
    }

    #[test]
    fn word_construction_validates_bottom() {
        assert!(StackWord::from_top_first(vec![StackSymbol::named("x")]).is_err());
        assert!(StackWord::from_top_first(vec![
            StackSymbol::Bottom,
            StackSymbol::named("x")
        ])
        .is_err());
        let w = StackWord::from_top_first(vec![StackSymbol::named("x"), StackSymbol::Bottom])
            .unwrap();
        assert_eq!(w.height(), 1);
        assert_eq!(w.top(), &StackSymbol::named("x"));
    }
}

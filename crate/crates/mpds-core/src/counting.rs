//! Context and phase counting for transition words.
//!
//! A run word splits into blocks: for contexts, a block touches at most one
//! stack (internal moves and guarded-noops extend any block); for phases,
//! only pops commit a block to a stack and pushes anywhere are free. Both
//! counts are the minimal number of blocks over all decompositions; the
//! greedy left-to-right assignment below attains the minimum because a block
//! never benefits from ending earlier than forced.

use crate::system::{Action, MpdsSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RunWordError {
    #[error("transition index {index} at word position {pos} is out of range")]
    BadIndex { pos: usize, index: u32 },
    #[error("word is not chainable at position {pos}: to-state differs from the next from-state")]
    NotChainable { pos: usize },
}

/// One block of a decomposition: a half-open range of word positions plus
/// the stack the block is committed to (`None` when it never touched one).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunBlock {
    pub start: usize,
    pub end: usize,
    pub stack: Option<u8>,
}

fn check_chainable(sys: &MpdsSystem, word: &[u32]) -> Result<(), RunWordError> {
    let count = sys.transitions().len() as u32;
    for (pos, &index) in word.iter().enumerate() {
        if index >= count {
            return Err(RunWordError::BadIndex { pos, index });
        }
        if pos + 1 < word.len() {
            let next = word[pos + 1];
            if next < count && sys.transition(index).to != sys.transition(next).from {
                return Err(RunWordError::NotChainable { pos });
            }
        }
    }
    Ok(())
}

/// Which stack an action binds its block to, under the given notion.
fn binding_stack(action: &Action, phases: bool) -> Option<u8> {
    if action.is_counting_transparent() {
        return None;
    }
    if phases && !action.is_pop() {
        return None;
    }
    action.stack()
}

fn decompose(sys: &MpdsSystem, word: &[u32], phases: bool) -> Result<Vec<RunBlock>, RunWordError> {
    check_chainable(sys, word)?;
    let mut blocks: Vec<RunBlock> = Vec::new();
    for (pos, &index) in word.iter().enumerate() {
        let bind = binding_stack(&sys.transition(index).action, phases);
        match blocks.last_mut() {
            None => blocks.push(RunBlock { start: pos, end: pos + 1, stack: bind }),
            Some(block) => match (block.stack, bind) {
                (_, None) | (None, _) => {
                    block.end = pos + 1;
                    block.stack = block.stack.or(bind);
                }
                (Some(current), Some(next)) if current == next => block.end = pos + 1,
                _ => blocks.push(RunBlock { start: pos, end: pos + 1, stack: bind }),
            },
        }
    }
    Ok(blocks)
}

/// Minimal context decomposition of a chainable word (greedy, provably
/// minimal). Exposed for callers that need a concrete split.
pub fn context_decomposition(sys: &MpdsSystem, word: &[u32]) -> Result<Vec<RunBlock>, RunWordError> {
    decompose(sys, word, false)
}

/// Minimal phase decomposition of a chainable word.
pub fn phase_decomposition(sys: &MpdsSystem, word: &[u32]) -> Result<Vec<RunBlock>, RunWordError> {
    decompose(sys, word, true)
}

/// Minimal number of contexts covering the word; the empty word needs 0.
pub fn context_count(sys: &MpdsSystem, word: &[u32]) -> Result<u32, RunWordError> {
    Ok(context_decomposition(sys, word)?.len() as u32)
}

/// Minimal number of phases covering the word; the empty word needs 0 and
/// any nonempty pop-free word needs exactly 1.
pub fn phase_count(sys: &MpdsSystem, word: &[u32]) -> Result<u32, RunWordError> {
    Ok(phase_decomposition(sys, word)?.len() as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{Guard, StackSymbol};
    use crate::system::SystemBuilder;

    /// One state, two stacks, one transition per action shape so that any
    /// action word is a chainable transition word.
    ///
    /// Indices: 0 internal, 1 push@1, 2 push@2, 3 pop@1, 4 pop@2,
    /// 5 noop@1, 6 noop@2.
    pub(crate) fn action_system() -> MpdsSystem {
        let mut b = SystemBuilder::new(2);
        let q = b.fresh_state("q").unwrap();
        let x = b.symbol(StackSymbol::named("x"));
        b.set_initial(q);
        b.internal(q, q);
        b.push(q, q, 0, Guard::Wildcard, x).unwrap();
        b.push(q, q, 1, Guard::Wildcard, x).unwrap();
        b.pop(q, q, 0, x).unwrap();
        b.pop(q, q, 1, x).unwrap();
        b.noop(q, q, 0, Guard::Wildcard).unwrap();
        b.noop(q, q, 1, Guard::Wildcard).unwrap();
        b.build().unwrap()
    }

    const INTERNAL: u32 = 0;
    const PUSH1: u32 = 1;
    const PUSH2: u32 = 2;
    const POP1: u32 = 3;
    const POP2: u32 = 4;
    const NOOP1: u32 = 5;

    #[test]
    fn empty_word_counts_zero() {
        let sys = action_system();
        assert_eq!(context_count(&sys, &[]).unwrap(), 0);
        assert_eq!(phase_count(&sys, &[]).unwrap(), 0);
    }

    #[test]
    fn alternating_pushes_need_three_contexts() {
        let sys = action_system();
        assert_eq!(context_count(&sys, &[PUSH1, PUSH2, PUSH1]).unwrap(), 3);
    }

    #[test]
    fn internals_extend_a_single_context() {
        let sys = action_system();
        assert_eq!(context_count(&sys, &[INTERNAL, POP1, INTERNAL, POP1]).unwrap(), 1);
    }

    #[test]
    fn noops_extend_any_block() {
        let sys = action_system();
        assert_eq!(context_count(&sys, &[POP1, NOOP1, POP2]).unwrap(), 2);
        assert_eq!(context_count(&sys, &[POP2, NOOP1, POP2]).unwrap(), 1);
    }

    #[test]
    fn nonempty_transparent_word_counts_one() {
        let sys = action_system();
        assert_eq!(context_count(&sys, &[INTERNAL]).unwrap(), 1);
        assert_eq!(context_count(&sys, &[NOOP1, INTERNAL]).unwrap(), 1);
        assert_eq!(phase_count(&sys, &[INTERNAL]).unwrap(), 1);
    }

    #[test]
    fn phases_charge_only_pops() {
        let sys = action_system();
        assert_eq!(phase_count(&sys, &[POP1, PUSH2, POP2, POP1]).unwrap(), 3);
        assert_eq!(phase_count(&sys, &[POP1, PUSH2, POP1, POP1]).unwrap(), 1);
        assert_eq!(phase_count(&sys, &[PUSH1, PUSH2, PUSH1]).unwrap(), 1);
    }

    #[test]
    fn phase_never_exceeds_context() {
        let sys = action_system();
        // Small exhaustive sweep; the full length-8 sweep lives in the
        // acceptance suite.
        let actions = [0u32, 1, 2, 3, 4, 5, 6];
        let mut words = vec![vec![]];
        for _ in 0..4 {
            let mut next = Vec::new();
            for w in &words {
                for &a in &actions {
                    let mut w2 = w.clone();
                    w2.push(a);
                    next.push(w2);
                }
            }
            for w in &next {
                let c = context_count(&sys, w).unwrap();
                let p = phase_count(&sys, w).unwrap();
                assert!(p <= c, "word {w:?}: phases {p} > contexts {c}");
            }
            words = next;
        }
    }

    #[test]
    fn decomposition_covers_word() {
        let sys = action_system();
        let word = [PUSH1, INTERNAL, POP1, PUSH2, NOOP1, POP2, POP1];
        let blocks = context_decomposition(&sys, &word).unwrap();
        assert_eq!(blocks.first().unwrap().start, 0);
        assert_eq!(blocks.last().unwrap().end, word.len());
        for pair in blocks.windows(2) {
            assert_eq!(pair[0].end, pair[1].start);
        }
    }

    #[test]
    fn bad_index_is_reported() {
        let sys = action_system();
        assert_eq!(
            context_count(&sys, &[99]),
            Err(RunWordError::BadIndex { pos: 0, index: 99 })
        );
    }

    #[test]
    fn non_chainable_word_is_reported() {
        let mut b = SystemBuilder::new(1);
        let q = b.fresh_state("q").unwrap();
        let r = b.fresh_state("r").unwrap();
        b.set_initial(q);
        b.internal(q, r); // 0
        b.internal(q, q); // 1: cannot follow 0 (r ≠ q)
        let sys = b.build().unwrap();
        assert_eq!(
            context_count(&sys, &[0, 1]),
            Err(RunWordError::NotChainable { pos: 0 })
        );
    }
}

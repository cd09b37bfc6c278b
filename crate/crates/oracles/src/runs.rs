//! Exhaustive bounded-run enumeration.
//!
//! Enumerates every run of a system whose greedy context count stays within
//! the bound and whose stacks stay within the height cap, collecting the set
//! of reached (configuration, contexts, current-stack) keys and the edges
//! between them. Stacks are explicit symbol vectors and the context charge
//! of every run prefix is recomputed from the whole word, so none of the
//! explorer's incremental bookkeeping is shared.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use mpds_core::{step_index, Configuration, MpdsSystem, StackSymbol};

/// Canonical node key: state id, stacks as top-first symbol spellings,
/// greedy context count, current stack (`None` until the first stack access).
pub type NodeKey = (u32, Vec<Vec<String>>, u32, Option<u8>);

/// The enumerated space, in canonical (ordered) containers.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct RunSpace {
    pub nodes: BTreeSet<NodeKey>,
    pub edges: BTreeSet<(NodeKey, u32, NodeKey)>,
    pub frontier: BTreeSet<NodeKey>,
}

fn stacks_of(c: &Configuration) -> Vec<Vec<String>> {
    c.stacks
        .iter()
        .map(|w| w.prefix_top_first().map(StackSymbol::spelling).collect())
        .collect()
}

/// Greedy context fold over a transition word, written independently of the
/// counting module: returns (blocks, current stack of the last block).
fn context_fold(sys: &MpdsSystem, word: &[u32]) -> (u32, Option<u8>) {
    let mut blocks = 0u32;
    let mut current: Option<u8> = None;
    for &idx in word {
        let action = &sys.transition(idx).action;
        if blocks == 0 {
            blocks = 1;
        }
        if action.is_counting_transparent() {
            continue;
        }
        let stack = action.stack().expect("stack actions name a stack");
        match current {
            None => current = Some(stack),
            Some(s) if s == stack => {}
            Some(_) => {
                blocks += 1;
                current = Some(stack);
            }
        }
    }
    (blocks, current)
}

/// Enumerates all runs within `context_bound` and `stack_cap`.
///
/// Feasible only for small systems; the caller promises the bounded space
/// is finite (it always is: stacks are capped, so keys are finite).
pub fn enumerate_runs(
    sys: &MpdsSystem,
    init: &Configuration,
    context_bound: u32,
    stack_cap: usize,
) -> RunSpace {
    let mut space = RunSpace::default();
    // One representative word per discovered key; contexts are recomputed
    // from the whole word on every extension.
    let mut queue: VecDeque<(Configuration, Vec<u32>)> = VecDeque::new();
    let mut words: BTreeMap<NodeKey, Vec<u32>> = BTreeMap::new();

    let init_key = (init.state.0, stacks_of(init), 0, None);
    space.nodes.insert(init_key.clone());
    words.insert(init_key, Vec::new());
    queue.push_back((init.clone(), Vec::new()));

    while let Some((config, word)) = queue.pop_front() {
        let (ctx, cur) = context_fold(sys, &word);
        let key = (config.state.0, stacks_of(&config), ctx, cur);
        let mut suppressed = false;
        for &idx in sys.transitions_from(config.state) {
            let Ok(next) = step_index(sys, &config, idx) else { continue };
            let mut next_word = word.clone();
            next_word.push(idx);
            let (nctx, ncur) = context_fold(sys, &next_word);
            let too_tall = next.stacks.iter().any(|w| w.height() > stack_cap);
            if nctx > context_bound || too_tall {
                suppressed = true;
                continue;
            }
            let next_key = (next.state.0, stacks_of(&next), nctx, ncur);
            space.edges.insert((key.clone(), idx, next_key.clone()));
            if space.nodes.insert(next_key.clone()) {
                words.insert(next_key, next_word.clone());
                queue.push_back((next, next_word));
            }
        }
        if suppressed {
            space.frontier.insert(key);
        }
    }
    space
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpds_core::{Guard, StackSymbol, SystemBuilder};

    #[test]
    fn transition_free_system_is_one_node() {
        let mut b = SystemBuilder::new(2);
        let q = b.fresh_state("q").unwrap();
        b.set_initial(q);
        let sys = b.build().unwrap();
        let space = enumerate_runs(&sys, &Configuration::initial(&sys), 3, 5);
        assert_eq!(space.nodes.len(), 1);
        assert!(space.edges.is_empty());
        assert!(space.frontier.is_empty());
    }

    #[test]
    fn push_self_loop_respects_stack_cap() {
        let mut b = SystemBuilder::new(1);
        let q = b.fresh_state("q").unwrap();
        let x = b.symbol(StackSymbol::named("x"));
        b.set_initial(q);
        b.push(q, q, 0, Guard::Wildcard, x).unwrap();
        let sys = b.build().unwrap();
        let space = enumerate_runs(&sys, &Configuration::initial(&sys), 3, 3);
        // Chain of heights 0..=3; the tallest node is frontier.
        assert_eq!(space.nodes.len(), 4);
        assert_eq!(space.edges.len(), 3);
        assert_eq!(space.frontier.len(), 1);
        let frontier = space.frontier.iter().next().unwrap();
        assert_eq!(frontier.1[0].len(), 3);
    }

    #[test]
    fn alternating_stacks_stop_at_context_bound() {
        let mut b = SystemBuilder::new(2);
        let q = b.fresh_state("q").unwrap();
        let x = b.symbol(StackSymbol::named("x"));
        b.set_initial(q);
        b.push(q, q, 0, Guard::Symbol(mpds_core::BOTTOM), x).unwrap();
        b.push(q, q, 1, Guard::Symbol(mpds_core::BOTTOM), x).unwrap();
        let sys = b.build().unwrap();
        let space = enumerate_runs(&sys, &Configuration::initial(&sys), 2, 5);
        let max_ctx = space.nodes.iter().map(|k| k.2).max().unwrap();
        assert_eq!(max_ctx, 2);
        // push@1;push@2 and push@2;push@1 both reach context 2.
        assert!(space.nodes.iter().any(|k| k.2 == 2));
    }
}

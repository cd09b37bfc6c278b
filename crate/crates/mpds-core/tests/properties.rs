//! Property tests for the semantics engine: frame conditions of `step`,
//! successor enumeration, and minimality of the greedy block counting.

use mpds_core::{
    context_count, phase_count, step, successors, Action, Configuration, Guard, MpdsSystem,
    StackSymbol, StackWord, StateId, SystemBuilder,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct RawTransition {
    from: u8,
    to: u8,
    kind: u8,
    stack: u8,
    guard: u8, // 0 = wildcard, 1 = bottom, 2.. = symbol index + 2
    symbol: u8,
}

fn raw_transition(states: u8, symbols: u8) -> impl Strategy<Value = RawTransition> {
    (0..states, 0..states, 0u8..4, 0u8..2, 0..symbols + 2, 0..symbols).prop_map(
        |(from, to, kind, stack, guard, symbol)| RawTransition { from, to, kind, stack, guard, symbol },
    )
}

fn build_system(transitions: &[RawTransition], states: u8, symbols: u8) -> MpdsSystem {
    let mut b = SystemBuilder::new(2);
    for s in 0..states {
        b.state(format!("q{s}"));
    }
    let syms: Vec<_> = (0..symbols)
        .map(|i| b.symbol(StackSymbol::named(&format!("s{i}"))))
        .collect();
    b.set_initial(StateId(0));
    for t in transitions {
        let from = StateId(t.from as u32);
        let to = StateId(t.to as u32);
        let guard = match t.guard {
            0 => Guard::Wildcard,
            1 => Guard::Symbol(mpds_core::BOTTOM),
            g => Guard::Symbol(syms[(g - 2) as usize]),
        };
        match t.kind {
            0 => b.internal(from, to),
            1 => b.push(from, to, t.stack, guard, syms[t.symbol as usize]).unwrap(),
            2 => b.pop(from, to, t.stack, syms[t.symbol as usize]).unwrap(),
            _ => b.noop(from, to, t.stack, guard).unwrap(),
        }
    }
    b.build().unwrap()
}

fn config_strategy(states: u8, symbols: u8) -> impl Strategy<Value = (u8, Vec<u8>, Vec<u8>)> {
    (
        0..states,
        proptest::collection::vec(0..symbols, 0..4),
        proptest::collection::vec(0..symbols, 0..4),
    )
}

fn make_config(sys: &MpdsSystem, raw: &(u8, Vec<u8>, Vec<u8>)) -> Configuration {
    let word = |ids: &[u8]| {
        StackWord::from_prefix(ids.iter().map(|i| StackSymbol::named(&format!("s{i}")))).unwrap()
    };
    let _ = sys;
    Configuration::at_state(StateId(raw.0 as u32), vec![word(&raw.1), word(&raw.2)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn step_frame_conditions(
        raw_ts in proptest::collection::vec(raw_transition(4, 3), 1..10),
        raw_config in config_strategy(4, 3),
    ) {
        let sys = build_system(&raw_ts, 4, 3);
        let c = make_config(&sys, &raw_config);
        for t in sys.transitions() {
            if let Ok(next) = step(&sys, &c, t) {
                // Every stack word still has its sentinel exactly at the bottom.
                for w in &next.stacks {
                    let symbols: Vec<_> = w.iter_top_first().collect();
                    prop_assert!(symbols.last().unwrap().is_bottom());
                    prop_assert_eq!(symbols.iter().filter(|s| s.is_bottom()).count(), 1);
                }
                // Untouched stacks are bit-identical.
                for i in 0..2usize {
                    if t.action.stack() != Some(i as u8) {
                        prop_assert_eq!(&next.stacks[i], &c.stacks[i]);
                    }
                }
                prop_assert_eq!(next.state, t.to);
            }
        }
    }

    #[test]
    fn successors_match_naive_filter(
        raw_ts in proptest::collection::vec(raw_transition(4, 3), 1..10),
        raw_config in config_strategy(4, 3),
    ) {
        let sys = build_system(&raw_ts, 4, 3);
        let c = make_config(&sys, &raw_config);
        let fast = successors(&sys, &c);
        let naive: Vec<(u32, Configuration)> = (0..sys.transitions().len() as u32)
            .filter_map(|i| step(&sys, &c, sys.transition(i)).ok().map(|n| (i, n)))
            .collect();
        prop_assert_eq!(fast, naive);
    }

    #[test]
    fn greedy_counts_are_minimal(
        raw_ts in proptest::collection::vec(raw_transition(3, 2), 1..8),
        seed in proptest::collection::vec(0usize..64, 0..8),
    ) {
        let sys = build_system(&raw_ts, 3, 2);
        // Assemble a chainable word by walking from a random state.
        let mut word = Vec::new();
        let mut state = StateId((seed.first().copied().unwrap_or(0) % 3) as u32);
        for pick in &seed {
            let outgoing = sys.transitions_from(state);
            if outgoing.is_empty() {
                break;
            }
            let idx = outgoing[pick % outgoing.len()];
            word.push(idx);
            state = sys.transition(idx).to;
        }
        let ctx = context_count(&sys, &word).unwrap();
        let ph = phase_count(&sys, &word).unwrap();
        prop_assert!(ph <= ctx);
        prop_assert_eq!(ctx, min_blocks(&sys, &word, false));
        prop_assert_eq!(ph, min_blocks(&sys, &word, true));
    }
}

/// Test-local exhaustive decomposition: minimal number of blocks over all
/// ways to split the word, trying every stack assignment per block.
fn min_blocks(sys: &MpdsSystem, word: &[u32], phases: bool) -> u32 {
    fn binding(action: &Action, phases: bool) -> Option<u8> {
        if action.is_counting_transparent() || (phases && !action.is_pop()) {
            None
        } else {
            action.stack()
        }
    }
    fn solve(sys: &MpdsSystem, word: &[u32], phases: bool, memo: &mut Vec<Option<u32>>) -> u32 {
        let n = word.len();
        if n == 0 {
            return 0;
        }
        if let Some(v) = memo[n] {
            return v;
        }
        let mut best = u32::MAX;
        // First block = word[..i] for every legal cut.
        let mut stack: Option<u8> = None;
        for i in 1..=n {
            let bind = binding(&sys.transition(word[i - 1]).action, phases);
            match (stack, bind) {
                (Some(s), Some(b)) if s != b => break,
                (None, b) => stack = b,
                _ => {}
            }
            best = best.min(1 + solve(sys, &word[i..], phases, memo));
        }
        memo[n] = Some(best);
        best
    }
    let mut memo = vec![None; word.len() + 1];
    solve(sys, word, phases, &mut memo)
}

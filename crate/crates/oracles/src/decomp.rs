//! Exhaustive block-decomposition minima for transition words.
//!
//! Two references for the greedy context/phase counters: a literal recursion
//! over every way to cut the word into legal blocks, and a forward dynamic
//! program over (position, committed stack) that is fast enough for the full
//! length-8 sweep. The recursion is the ground truth; the DP is checked
//! against it exhaustively for short words in this module's tests.

use mpds_core::{Action, MpdsSystem};

fn binding(action: &Action, phases: bool) -> Option<u8> {
    if action.is_counting_transparent() || (phases && !action.is_pop()) {
        None
    } else {
        action.stack()
    }
}

/// Minimal number of blocks over all decompositions, by literal enumeration
/// of every cut (memoized on the suffix).
pub fn min_blocks_recursive(sys: &MpdsSystem, word: &[u32], phases: bool) -> u32 {
    fn solve(sys: &MpdsSystem, word: &[u32], phases: bool, memo: &mut [Option<u32>]) -> u32 {
        let n = word.len();
        if n == 0 {
            return 0;
        }
        if let Some(v) = memo[n] {
            return v;
        }
        let mut best = u32::MAX;
        let mut stack: Option<u8> = None;
        for i in 1..=n {
            // The first block is word[..i]; legal iff all its binding stacks agree.
            match (stack, binding(&sys.transition(word[i - 1]).action, phases)) {
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

/// Forward-DP state for incremental sweeps: minimal blocks to cover the
/// prefix consumed so far, per committed stack of the open block.
///
/// Index 0 = no block yet (empty prefix only), 1 = open block uncommitted,
/// 2+s = open block committed to stack s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompDp {
    best: Vec<u32>, // length 2 + stack_count
}

const INF: u32 = u32::MAX / 2;

impl DecompDp {
    pub fn start(stack_count: u8) -> Self {
        let mut best = vec![INF; 2 + stack_count as usize];
        best[0] = 0;
        DecompDp { best }
    }

    /// Extends the prefix by one action; considers both "extend the open
    /// block" and "start a new block" for every compatible predecessor.
    pub fn step(&self, sys: &MpdsSystem, transition: u32, phases: bool) -> DecompDp {
        let bind = binding(&sys.transition(transition).action, phases);
        let n = self.best.len();
        let mut next = vec![INF; n];
        for (slot, &cost) in self.best.iter().enumerate() {
            if cost >= INF {
                continue;
            }
            match bind {
                None => {
                    // Transparent: extends any open block without committing.
                    if slot >= 1 {
                        next[slot] = next[slot].min(cost);
                    }
                    // Or opens a fresh (still uncommitted) block.
                    next[1] = next[1].min(cost + 1);
                }
                Some(s) => {
                    let target = 2 + s as usize;
                    // Extends an open block that is uncommitted or on s.
                    if slot == 1 || slot == target {
                        next[target] = next[target].min(cost);
                    }
                    // Or opens a fresh block on s.
                    next[target] = next[target].min(cost + 1);
                }
            }
        }
        DecompDp { best: next }
    }

    /// Minimal blocks over all decompositions of the consumed prefix.
    pub fn minimum(&self) -> u32 {
        self.best.iter().copied().min().expect("non-empty")
    }
}

/// Convenience wrapper: exhaustive minimum via the forward DP.
pub fn min_blocks_dp(sys: &MpdsSystem, word: &[u32], phases: bool) -> u32 {
    let mut dp = DecompDp::start(sys.stack_count());
    for &t in word {
        dp = dp.step(sys, t, phases);
    }
    dp.minimum()
}

//! Bounded-phase game arena construction.
//!
//! A game position is a configuration plus two phase registers: the stack
//! whose pops opened the current phase (`None` before the first pop), and
//! the remaining phase budget `k >= 1`. Moves follow the system's
//! transitions with the phase discipline layered on top:
//!
//! - internal moves, pushes, and guarded noops never touch the registers;
//! - the first pop of the play fixes the phase stack and keeps the budget;
//! - pops on the phase stack stay in the phase;
//! - a pop on another stack opens a new phase, spending one budget unit,
//!   and is simply unavailable when the budget is down to its last unit.
//!
//! A position with no moves loses for its owner. That covers genuine
//! deadlocks, budget exhaustion, and truncation: when a cap (stack height
//! or position count) suppresses a successor, the position is marked as
//! frontier and keeps no edges at all, so the bounded game stays
//! pessimistic for whoever stands there rather than guessing at the cut
//! part of the arena.

use fixedbitset::FixedBitSet;
use indexmap::IndexSet;
use mpds_core::{
    Action, Configuration, MpdsSystem, Player, StackId, StackInterner, StateId, BOTTOM,
};
use rustc_hash::{FxBuildHasher, FxHashSet};
use smallvec::SmallVec;
use thiserror::Error;

use crate::parity::{solve, ParityGame, Solution};

/// Key layout: state, phase stack register (0 = none, else stack + 1),
/// remaining budget, then one interned stack id per stack.
type PosKey = SmallVec<[u32; 7]>;

#[derive(Debug, Error)]
pub enum GameBuildError {
    #[error("system is not a game: every state needs an owner and a priority")]
    NotAGame,
    #[error("phase bound must be at least 1")]
    BadPhaseBound,
}

/// Exploration limits for the arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseBounds {
    /// Maximum number of phases across any play, at least 1.
    pub phase_bound: u32,
    /// Maximum stack height; taller pushes truncate the position.
    pub stack_cap: u32,
    /// Maximum number of positions; further discoveries truncate sources.
    pub node_cap: usize,
}

impl PhaseBounds {
    pub fn new(phase_bound: u32, stack_cap: u32) -> Self {
        PhaseBounds { phase_bound, stack_cap, node_cap: usize::MAX }
    }

    pub fn with_node_cap(mut self, node_cap: usize) -> Self {
        self.node_cap = node_cap;
        self
    }
}

/// The explored arena: a parity game whose positions carry configurations
/// and phase registers. Position 0 is the start.
pub struct PhaseGame {
    keys: IndexSet<PosKey, FxBuildHasher>,
    interner: StackInterner,
    stack_count: u8,
    game: ParityGame,
    /// Transition index per edge, parallel to the game's successor slots.
    edge_tindex: Vec<u32>,
    frontier: FixedBitSet,
    capped: bool,
    bounds: PhaseBounds,
}

impl PhaseGame {
    pub fn position_count(&self) -> usize {
        self.keys.len()
    }

    pub fn game(&self) -> &ParityGame {
        &self.game
    }

    pub fn bounds(&self) -> PhaseBounds {
        self.bounds
    }

    pub fn initial(&self) -> u32 {
        0
    }

    fn key(&self, v: u32) -> &PosKey {
        self.keys.get_index(v as usize).expect("position id in range")
    }

    pub fn position_state(&self, v: u32) -> StateId {
        StateId(self.key(v)[0])
    }

    /// Stack whose pops own the current phase, `None` before the first pop.
    pub fn position_phase_stack(&self, v: u32) -> Option<u8> {
        match self.key(v)[1] {
            0 => None,
            s => Some((s - 1) as u8),
        }
    }

    /// Remaining phase budget, counting the current phase.
    pub fn position_budget(&self, v: u32) -> u32 {
        self.key(v)[2]
    }

    pub fn materialize(&self, v: u32, sys: &MpdsSystem) -> Configuration {
        let key = self.key(v);
        let stacks = (0..self.stack_count as usize)
            .map(|s| self.interner.materialize(StackId(key[3 + s]), sys))
            .collect();
        Configuration { state: StateId(key[0]), stacks }
    }

    /// Successors as (transition index, target position) pairs, in slot order.
    pub fn successors(&self, v: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        let targets = self.game.successors(v);
        let base = self.game.edge_base(v);
        targets
            .iter()
            .enumerate()
            .map(move |(slot, &t)| (self.edge_tindex[base + slot], t))
    }

    /// The transition behind a winning move: `slot` indexes `successors(v)`.
    pub fn edge_transition(&self, v: u32, slot: u32) -> u32 {
        self.edge_tindex[self.game.edge_base(v) + slot as usize]
    }

    pub fn is_frontier(&self, v: u32) -> bool {
        self.frontier.contains(v as usize)
    }

    pub fn frontier_count(&self) -> usize {
        self.frontier.count_ones(..)
    }

    pub fn capped(&self) -> bool {
        self.capped
    }

    /// Solves the arena from every position.
    pub fn solve(&self) -> Solution {
        solve(&self.game)
    }

    /// The winner at the start position.
    pub fn winner_from_start(&self, solution: &Solution) -> Player {
        solution.winner[0]
    }
}

/// Explores the bounded-phase arena from `init`.
///
/// Requires a game system: total owner and priority assignments. The start
/// position carries the full phase budget and no phase stack.
pub fn build_phase_game(
    sys: &MpdsSystem,
    init: &Configuration,
    bounds: PhaseBounds,
) -> Result<PhaseGame, GameBuildError> {
    if !sys.is_game() {
        return Err(GameBuildError::NotAGame);
    }
    if bounds.phase_bound == 0 {
        return Err(GameBuildError::BadPhaseBound);
    }

    let stack_count = sys.stack_count();
    let mut keys: IndexSet<PosKey, FxBuildHasher> = IndexSet::default();
    let mut interner = StackInterner::new();

    let mut start: PosKey = SmallVec::with_capacity(3 + stack_count as usize);
    start.push(init.state.0);
    start.push(0);
    start.push(bounds.phase_bound);
    for word in &init.stacks {
        start.push(interner.intern(word, sys).0);
    }
    keys.insert(start);

    let mut owners = Vec::new();
    let mut priorities = Vec::new();
    let mut succ_offsets = vec![0u32];
    let mut succ_targets = Vec::new();
    let mut edge_tindex = Vec::new();
    let mut frontier_ids = Vec::new();
    let mut capped = false;

    let mut v = 0usize;
    while v < keys.len() {
        let key = keys.get_index(v).unwrap().clone();
        let state = StateId(key[0]);
        let phase_stack = key[1];
        let budget = key[2];
        owners.push(sys.owner(state).expect("total owners checked"));
        priorities.push(sys.priority(state).expect("total priorities checked"));

        // First pass: compute every available move, noting truncation.
        let mut moves: Vec<(u32, PosKey)> = Vec::new();
        let mut truncated = false;
        for &tidx in sys.transitions_from(state) {
            let t = sys.transition(tidx);
            let mut next = key.clone();
            next[0] = t.to.0;
            match t.action {
                Action::Internal => {}
                Action::Noop { stack, guard } => {
                    let top = interner.top(StackId(key[3 + stack as usize]));
                    if !guard.matches(&top) {
                        continue;
                    }
                }
                Action::Push { stack, guard, symbol } => {
                    let id = StackId(key[3 + stack as usize]);
                    if !guard.matches(&interner.top(id)) {
                        continue;
                    }
                    if interner.height(id) + 1 > bounds.stack_cap {
                        truncated = true;
                        continue;
                    }
                    next[3 + stack as usize] = interner.push(id, symbol).0;
                }
                Action::Pop { stack, symbol } => {
                    let id = StackId(key[3 + stack as usize]);
                    let top = interner.top(id);
                    if top == BOTTOM || top != symbol {
                        continue;
                    }
                    let register = stack as u32 + 1;
                    if phase_stack == 0 {
                        next[1] = register;
                    } else if phase_stack == register {
                        // Same phase.
                    } else if budget > 1 {
                        next[1] = register;
                        next[2] = budget - 1;
                    } else {
                        // Out of budget: the move does not exist in the
                        // bounded game. Not truncation.
                        continue;
                    }
                    next[3 + stack as usize] =
                        interner.pop(id).expect("guarded pop has a symbol above bottom").0;
                }
            }
            moves.push((tidx, next));
        }

        // Second pass: admit the node's edges only if none were truncated
        // and the position budget allows every new target.
        if !truncated {
            let mut fresh: FxHashSet<&PosKey> = FxHashSet::default();
            for (_, next) in &moves {
                if !keys.contains(next) {
                    fresh.insert(next);
                }
            }
            if keys.len() + fresh.len() > bounds.node_cap {
                capped = true;
                truncated = true;
            }
        }
        if truncated {
            frontier_ids.push(v as u32);
        } else {
            for (tidx, next) in moves {
                let (target, _) = keys.insert_full(next);
                succ_targets.push(target as u32);
                edge_tindex.push(tidx);
            }
        }
        succ_offsets.push(succ_targets.len() as u32);
        v += 1;
    }

    let mut frontier = FixedBitSet::with_capacity(keys.len());
    for id in frontier_ids {
        frontier.insert(id as usize);
    }
    let game = ParityGame::from_csr(owners, priorities, succ_offsets, succ_targets);
    Ok(PhaseGame {
        keys,
        interner,
        stack_count,
        game,
        edge_tindex,
        frontier,
        capped,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpds_core::{Guard, StackSymbol, SystemBuilder};

    /// Two-stack system: q pushes x on either stack or pops either stack.
    fn crossing_system() -> MpdsSystem {
        let mut b = SystemBuilder::new(2);
        let q = b.fresh_state("q").unwrap();
        let x = b.symbol(StackSymbol::named("x"));
        b.set_initial(q);
        b.set_owner(q, Player::Zero);
        b.set_priority(q, 0);
        b.push(q, q, 0, Guard::Wildcard, x).unwrap();
        b.push(q, q, 1, Guard::Wildcard, x).unwrap();
        b.pop(q, q, 0, x).unwrap();
        b.pop(q, q, 1, x).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn game_requires_total_owner_and_priority() {
        let mut b = SystemBuilder::new(1);
        let q = b.fresh_state("q").unwrap();
        b.set_initial(q);
        let sys = b.build().unwrap();
        let err = build_phase_game(
            &sys,
            &Configuration::initial(&sys),
            PhaseBounds::new(2, 4),
        );
        assert!(matches!(err, Err(GameBuildError::NotAGame)));
    }

    #[test]
    fn budgets_never_increase_and_pops_spend_them() {
        let sys = crossing_system();
        let g = build_phase_game(
            &sys,
            &Configuration::initial(&sys),
            PhaseBounds::new(2, 2),
        )
        .unwrap();
        for v in 0..g.position_count() as u32 {
            let budget = g.position_budget(v);
            assert!(budget >= 1 && budget <= 2);
            for (_, target) in g.successors(v) {
                assert!(g.position_budget(target) <= budget, "budget grew");
            }
        }
        // Some position actually spends budget: pop on stack 1 after a
        // phase opened on stack 2 or vice versa.
        assert!((0..g.position_count() as u32).any(|v| g.position_budget(v) == 1));
    }

    #[test]
    fn first_pop_fixes_the_phase_register() {
        let sys = crossing_system();
        let g = build_phase_game(
            &sys,
            &Configuration::initial(&sys),
            PhaseBounds::new(2, 2),
        )
        .unwrap();
        assert_eq!(g.position_phase_stack(g.initial()), None);
        for v in 0..g.position_count() as u32 {
            for (tidx, target) in g.successors(v) {
                let action = &sys.transition(tidx).action;
                match (g.position_phase_stack(v), action) {
                    (None, Action::Pop { stack, .. }) => {
                        assert_eq!(g.position_phase_stack(target), Some(*stack));
                    }
                    (None, _) => assert_eq!(g.position_phase_stack(target), None),
                    (Some(i), Action::Pop { stack, .. }) => {
                        assert_eq!(g.position_phase_stack(target), Some(*stack));
                        if *stack != i {
                            assert_eq!(g.position_budget(target), g.position_budget(v) - 1);
                        }
                    }
                    (Some(i), _) => assert_eq!(g.position_phase_stack(target), Some(i)),
                }
            }
        }
    }

    #[test]
    fn exhausted_budget_blocks_cross_stack_pops() {
        let sys = crossing_system();
        let g = build_phase_game(
            &sys,
            &Configuration::initial(&sys),
            PhaseBounds::new(1, 2),
        )
        .unwrap();
        for v in 0..g.position_count() as u32 {
            assert_eq!(g.position_budget(v), 1);
            if let Some(i) = g.position_phase_stack(v) {
                for (tidx, _) in g.successors(v) {
                    if let Action::Pop { stack, .. } = sys.transition(tidx).action {
                        assert_eq!(stack, i, "cross-stack pop with spent budget");
                    }
                }
            }
        }
    }

    #[test]
    fn truncated_positions_keep_no_edges() {
        // Single state forever pushing: the tallest position is frontier.
        let mut b = SystemBuilder::new(1);
        let q = b.fresh_state("q").unwrap();
        let x = b.symbol(StackSymbol::named("x"));
        b.set_initial(q);
        b.set_owner(q, Player::One);
        b.set_priority(q, 0);
        b.push(q, q, 0, Guard::Wildcard, x).unwrap();
        let sys = b.build().unwrap();
        let g = build_phase_game(
            &sys,
            &Configuration::initial(&sys),
            PhaseBounds::new(1, 3),
        )
        .unwrap();
        assert_eq!(g.position_count(), 4);
        assert_eq!(g.frontier_count(), 1);
        let tall = (0..4u32).find(|&v| g.is_frontier(v)).unwrap();
        assert_eq!(g.successors(tall).count(), 0);
        assert!(!g.capped());
        // The frontier deadlock is owned by player 1, so player 0 wins it.
        let sol = g.solve();
        assert_eq!(sol.winner[tall as usize], Player::Zero);
    }

    #[test]
    fn node_cap_truncates_and_reports() {
        let sys = crossing_system();
        let g = build_phase_game(
            &sys,
            &Configuration::initial(&sys),
            PhaseBounds::new(2, 8).with_node_cap(5),
        )
        .unwrap();
        assert!(g.capped());
        assert!(g.position_count() <= 5);
        assert!(g.frontier_count() > 0);
    }

    #[test]
    fn pop_free_systems_never_spend_budget() {
        let mut b = SystemBuilder::new(2);
        let q = b.fresh_state("q").unwrap();
        let r = b.fresh_state("r").unwrap();
        let x = b.symbol(StackSymbol::named("x"));
        b.set_initial(q);
        for s in [q, r] {
            b.set_owner(s, Player::Zero);
            b.set_priority(s, 1);
        }
        b.push(q, r, 0, Guard::Wildcard, x).unwrap();
        b.push(r, q, 1, Guard::Wildcard, x).unwrap();
        b.internal(q, r);
        let sys = b.build().unwrap();
        let g = build_phase_game(
            &sys,
            &Configuration::initial(&sys),
            PhaseBounds::new(3, 4),
        )
        .unwrap();
        for v in 0..g.position_count() as u32 {
            assert_eq!(g.position_budget(v), 3);
            assert_eq!(g.position_phase_stack(v), None);
        }
    }
}

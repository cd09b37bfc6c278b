//! Parity games and a recursive region solver.
//!
//! Games are finite directed graphs where every position has an owner and a
//! priority; player 0 wins an infinite play iff the maximum priority seen
//! infinitely often is even, and a player who cannot move loses at once.
//! The solver is the classic recursive region decomposition: peel the
//! attractor of the maximum priority, solve the rest, and re-solve against
//! the opponent's attractor when the remainder is not uniformly won. No
//! quasi-polynomial machinery; the bounded games here are small and the
//! recursive algorithm keeps strategies easy to extract and audit.
//!
//! Deadlocks are handled by a pre-pass: before the recursion, each player's
//! attractor to the empty set (seeded by opponent-owned deadlocks) is
//! carved out of the game, which leaves every remaining position with at
//! least one outgoing edge. Attractor removal preserves that totality, so
//! the recursion never sees a stuck position.

use fixedbitset::FixedBitSet;
use mpds_core::Player;

/// A parity game in compressed-sparse-row form.
#[derive(Debug, Clone)]
pub struct ParityGame {
    owners: Vec<Player>,
    priorities: Vec<u32>,
    succ_offsets: Vec<u32>,
    succ_targets: Vec<u32>,
}

impl ParityGame {
    /// Builds a game from adjacency lists. Slot order within a list is
    /// preserved and is the tiebreak order for strategy extraction.
    pub fn from_lists(owners: Vec<Player>, priorities: Vec<u32>, edges: &[Vec<u32>]) -> Self {
        assert_eq!(owners.len(), priorities.len());
        assert_eq!(owners.len(), edges.len());
        let mut succ_offsets = vec![0u32];
        let mut succ_targets = Vec::new();
        for row in edges {
            for &t in row {
                assert!((t as usize) < owners.len(), "edge target out of range");
                succ_targets.push(t);
            }
            succ_offsets.push(succ_targets.len() as u32);
        }
        ParityGame { owners, priorities, succ_offsets, succ_targets }
    }

    pub(crate) fn from_csr(
        owners: Vec<Player>,
        priorities: Vec<u32>,
        succ_offsets: Vec<u32>,
        succ_targets: Vec<u32>,
    ) -> Self {
        ParityGame { owners, priorities, succ_offsets, succ_targets }
    }

    pub fn position_count(&self) -> usize {
        self.owners.len()
    }

    pub fn owner(&self, v: u32) -> Player {
        self.owners[v as usize]
    }

    pub fn priority(&self, v: u32) -> u32 {
        self.priorities[v as usize]
    }

    pub fn successors(&self, v: u32) -> &[u32] {
        let lo = self.succ_offsets[v as usize] as usize;
        let hi = self.succ_offsets[v as usize + 1] as usize;
        &self.succ_targets[lo..hi]
    }

    /// Global index of position `v`'s first edge; slot `s` of `v` is edge
    /// `edge_base(v) + s` in any array parallel to the edge list.
    pub fn edge_base(&self, v: u32) -> usize {
        self.succ_offsets[v as usize] as usize
    }

    /// Predecessor lists, used by the attractor computation.
    fn reverse(&self) -> (Vec<u32>, Vec<u32>) {
        let n = self.position_count();
        let mut offsets = vec![0u32; n + 1];
        for &t in &self.succ_targets {
            offsets[t as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut preds = vec![0u32; self.succ_targets.len()];
        for src in 0..n as u32 {
            for &dst in self.successors(src) {
                preds[fill[dst as usize] as usize] = src;
                fill[dst as usize] += 1;
            }
        }
        (offsets, preds)
    }
}

/// Winner and winning move per position.
///
/// `strategy[v]` is the chosen slot into `successors(v)` when the winner of
/// `v` also owns `v`; losers' moves are not recorded, and deadlocked
/// positions (lost by their owner) have no move to record. Ties are broken
/// toward the lowest slot, so the strategy is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub winner: Vec<Player>,
    pub strategy: Vec<Option<u32>>,
}

impl Solution {
    pub fn region(&self, player: Player) -> impl Iterator<Item = u32> + '_ {
        self.winner
            .iter()
            .enumerate()
            .filter(move |(_, &w)| w == player)
            .map(|(v, _)| v as u32)
    }
}

struct Solver<'g> {
    game: &'g ParityGame,
    pred_offsets: Vec<u32>,
    pred_targets: Vec<u32>,
    winner: Vec<Player>,
    strategy: Vec<Option<u32>>,
}

impl<'g> Solver<'g> {
    fn predecessors(&self, v: u32) -> &[u32] {
        let lo = self.pred_offsets[v as usize] as usize;
        let hi = self.pred_offsets[v as usize + 1] as usize;
        &self.pred_targets[lo..hi]
    }

    /// Attractor of `base` for `player` within `alive`, layered so that the
    /// recorded strategy slot is the lowest-indexed edge into an earlier
    /// layer. Deadlocked opponent positions join via the vacuous forced
    /// case, so `base` may be empty. When `record`, attracting moves are
    /// written into the strategy (used when the attractor is part of
    /// `player`'s final region).
    fn attractor(&mut self, player: Player, base: &FixedBitSet, alive: &FixedBitSet, record: bool) -> FixedBitSet {
        let n = self.game.position_count();
        let mut set = base.clone();
        set.intersect_with(alive);

        // Remaining alive successors per opponent position; 0 means forced.
        let mut escapes = vec![0u32; n];
        let mut layer: Vec<u32> = Vec::new();
        for v in alive.ones() {
            let v = v as u32;
            if set.contains(v as usize) {
                layer.push(v);
                continue;
            }
            if self.game.owner(v) != player {
                let alive_succ = self
                    .game
                    .successors(v)
                    .iter()
                    .filter(|&&s| alive.contains(s as usize))
                    .count() as u32;
                escapes[v as usize] = alive_succ;
                if alive_succ == 0 {
                    set.insert(v as usize);
                    layer.push(v);
                }
            }
        }

        // Marks the additions of the layer being built, so the recorded
        // slot always points at a strictly earlier layer (which makes the
        // attracting strategy well-founded and order-independent).
        let mut pending = FixedBitSet::with_capacity(n);
        while !layer.is_empty() {
            let mut next: Vec<u32> = Vec::new();
            for &v in &layer {
                for &p in self.predecessors(v) {
                    if !alive.contains(p as usize) || set.contains(p as usize) {
                        continue;
                    }
                    if self.game.owner(p) == player {
                        set.insert(p as usize);
                        pending.insert(p as usize);
                        next.push(p);
                    } else {
                        escapes[p as usize] -= 1;
                        if escapes[p as usize] == 0 {
                            set.insert(p as usize);
                            pending.insert(p as usize);
                            next.push(p);
                        }
                    }
                }
            }
            if record {
                for &v in &next {
                    if self.game.owner(v) != player {
                        continue;
                    }
                    let slot = self
                        .game
                        .successors(v)
                        .iter()
                        .position(|&s| set.contains(s as usize) && !pending.contains(s as usize));
                    self.strategy[v as usize] = slot.map(|s| s as u32);
                }
            }
            for &v in &next {
                pending.remove(v as usize);
            }
            layer = next;
        }
        set
    }

    /// Classic recursion over a total subgame (every alive position keeps
    /// at least one alive successor).
    fn zielonka(&mut self, alive: &FixedBitSet) -> (FixedBitSet, FixedBitSet) {
        let n = self.game.position_count();
        if alive.is_clear() {
            return (FixedBitSet::with_capacity(n), FixedBitSet::with_capacity(n));
        }
        let top = alive.ones().map(|v| self.game.priority(v as u32)).max().unwrap();
        let favored = if top % 2 == 0 { Player::Zero } else { Player::One };

        let mut base = FixedBitSet::with_capacity(n);
        for v in alive.ones() {
            if self.game.priority(v as u32) == top {
                base.insert(v);
            }
        }
        let head = self.attractor(favored, &base, alive, true);
        let mut rest = alive.clone();
        rest.difference_with(&head);
        let (sub0, sub1) = self.zielonka(&rest);
        let (sub_favored, sub_other) = match favored {
            Player::Zero => (&sub0, &sub1),
            Player::One => (&sub1, &sub0),
        };

        if sub_other.is_clear() {
            // The favored player wins everywhere: attractor moves stand,
            // top-priority positions stay inside the level, the rest uses
            // the subgame strategy already recorded.
            for v in base.ones() {
                let v = v as u32;
                if self.game.owner(v) == favored {
                    let slot = self
                        .game
                        .successors(v)
                        .iter()
                        .position(|&s| alive.contains(s as usize))
                        .expect("total subgame position has an alive move");
                    self.strategy[v as usize] = Some(slot as u32);
                }
            }
            let _ = sub_favored;
            let mut all = alive.clone();
            let empty = FixedBitSet::with_capacity(n);
            return match favored {
                Player::Zero => (std::mem::take(&mut all), empty),
                Player::One => (empty, std::mem::take(&mut all)),
            };
        }

        let opponent = favored.opponent();
        let trap = self.attractor(opponent, sub_other, alive, true);
        let mut rest2 = alive.clone();
        rest2.difference_with(&trap);
        let (mut fin0, mut fin1) = self.zielonka(&rest2);
        match opponent {
            Player::Zero => fin0.union_with(&trap),
            Player::One => fin1.union_with(&trap),
        }
        (fin0, fin1)
    }
}

/// Solves the game from every position.
pub fn solve(game: &ParityGame) -> Solution {
    let n = game.position_count();
    let (pred_offsets, pred_targets) = game.reverse();
    let mut solver = Solver {
        game,
        pred_offsets,
        pred_targets,
        winner: vec![Player::Zero; n],
        strategy: vec![None; n],
    };

    // Deadlock pre-pass: each player absorbs the positions from which they
    // can force the opponent into a stuck position.
    let mut alive = FixedBitSet::with_capacity(n);
    alive.insert_range(..);
    let empty = FixedBitSet::with_capacity(n);
    let forced0 = solver.attractor(Player::Zero, &empty, &alive, true);
    alive.difference_with(&forced0);
    let forced1 = solver.attractor(Player::One, &empty, &alive, true);
    alive.difference_with(&forced1);

    let (won0, _won1) = solver.zielonka(&alive);
    for v in 0..n {
        let in_zero = forced0.contains(v) || won0.contains(v);
        solver.winner[v] = if in_zero { Player::Zero } else { Player::One };
    }
    // Strategy entries recorded while a position sat in a tentative region
    // it did not end up in are dropped; only winner-owned moves remain.
    for v in 0..n {
        if game.owner(v as u32) != solver.winner[v] {
            solver.strategy[v] = None;
        }
    }
    Solution { winner: solver.winner, strategy: solver.strategy }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(list: &[u8]) -> Vec<Player> {
        list.iter().map(|&o| if o == 0 { Player::Zero } else { Player::One }).collect()
    }

    #[test]
    fn deadlock_loses_for_its_owner() {
        let game = ParityGame::from_lists(p(&[0]), vec![0], &[vec![]]);
        assert_eq!(solve(&game).winner, vec![Player::One]);
        let game = ParityGame::from_lists(p(&[1]), vec![7], &[vec![]]);
        assert_eq!(solve(&game).winner, vec![Player::Zero]);
    }

    #[test]
    fn self_loop_parity_decides() {
        let game = ParityGame::from_lists(p(&[0]), vec![0], &[vec![0]]);
        assert_eq!(solve(&game).winner, vec![Player::Zero]);
        let game = ParityGame::from_lists(p(&[0]), vec![1], &[vec![0]]);
        assert_eq!(solve(&game).winner, vec![Player::One]);
        let game = ParityGame::from_lists(p(&[1]), vec![2], &[vec![0]]);
        assert_eq!(solve(&game).winner, vec![Player::Zero]);
    }

    #[test]
    fn chooser_picks_the_even_loop() {
        // 0 chooses between an odd loop (slot 0) and an even loop (slot 1).
        let game = ParityGame::from_lists(
            p(&[0, 0, 0]),
            vec![0, 1, 2],
            &[vec![1, 2], vec![1], vec![2]],
        );
        let sol = solve(&game);
        assert_eq!(sol.winner, vec![Player::Zero, Player::One, Player::Zero]);
        assert_eq!(sol.strategy[0], Some(1), "move to the even loop");
    }

    #[test]
    fn forcing_into_a_deadlock_wins() {
        // 1 owns position 0 with its only edge into a 1-owned deadlock.
        let game = ParityGame::from_lists(p(&[1, 1]), vec![1, 1], &[vec![1], vec![]]);
        assert_eq!(solve(&game).winner, vec![Player::Zero, Player::Zero]);
    }

    #[test]
    fn escape_from_a_deadlock_is_taken() {
        // 1 owns position 0 and can choose a priority-1 loop over a deadlock.
        let game = ParityGame::from_lists(p(&[1, 1]), vec![1, 1], &[vec![1, 0], vec![]]);
        let sol = solve(&game);
        assert_eq!(sol.winner, vec![Player::One, Player::Zero]);
        assert_eq!(sol.strategy[0], Some(1), "loop instead of the deadlock");
    }

    #[test]
    fn alternating_cycle_takes_the_maximum() {
        // Forced 2-cycle with priorities 1 and 2: max is even, 0 wins.
        let game = ParityGame::from_lists(p(&[0, 1]), vec![1, 2], &[vec![1], vec![0]]);
        assert_eq!(solve(&game).winner, vec![Player::Zero, Player::Zero]);
        // Priorities 1 and 3: max odd, 1 wins.
        let game = ParityGame::from_lists(p(&[0, 1]), vec![1, 3], &[vec![1], vec![0]]);
        assert_eq!(solve(&game).winner, vec![Player::One, Player::One]);
    }

    #[test]
    fn opponent_trap_branch_is_exercised() {
        // Position 2 is an odd loop 1 can retreat to; 0's region must
        // exclude the trap even though the top priority favors 0.
        let game = ParityGame::from_lists(
            p(&[1, 0, 1]),
            vec![4, 0, 1],
            &[vec![1, 2], vec![0], vec![2]],
        );
        let sol = solve(&game);
        assert_eq!(sol.winner, vec![Player::One, Player::One, Player::One]);
        assert_eq!(sol.strategy[0], Some(1), "retreat into the odd loop");
    }
}

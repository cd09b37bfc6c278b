//! Strategy-enumeration reference for parity games, plus a replay check
//! that audits a solver's regions and strategy directly against the game
//! semantics.
//!
//! `parity_brute` ranges over every memoryless strategy profile and decides
//! each play by its lasso cycle, so it is exponential and only fit for tiny
//! games; `verify_strategy` scales further because it only inspects the
//! cycles of the strategy-restricted subgraph.

/// Winner (0 or 1) per position by brute force over memoryless strategies.
///
/// A player owns a choice at each of their positions with at least one
/// edge; a play that reaches a position with no edges loses for its owner;
/// an infinite play is decided by the maximum priority on its lasso cycle.
pub fn parity_brute(owners: &[u8], priorities: &[u32], edges: &[Vec<u32>]) -> Vec<u8> {
    let n = owners.len();
    let choosers = |player: u8| -> Vec<usize> {
        (0..n).filter(|&v| owners[v] == player && !edges[v].is_empty()).collect()
    };
    let zero_sites = choosers(0);
    let one_sites = choosers(1);

    let mut won_by_zero = vec![false; n];
    let mut s0 = vec![0usize; zero_sites.len()];
    loop {
        // Against this player-0 strategy, try every player-1 answer.
        let mut zero_wins_everywhere = vec![true; n];
        let mut s1 = vec![0usize; one_sites.len()];
        loop {
            for start in 0..n {
                if zero_wins_everywhere[start] && play_winner(start, owners, priorities, edges, &zero_sites, &s0, &one_sites, &s1) == 1 {
                    zero_wins_everywhere[start] = false;
                }
            }
            if !bump(&mut s1, &one_sites, edges) {
                break;
            }
        }
        for v in 0..n {
            won_by_zero[v] |= zero_wins_everywhere[v];
        }
        if !bump(&mut s0, &zero_sites, edges) {
            break;
        }
    }
    won_by_zero.iter().map(|&w| if w { 0 } else { 1 }).collect()
}

/// Advances a mixed-radix strategy counter; false when it wraps around.
fn bump(digits: &mut [usize], sites: &[usize], edges: &[Vec<u32>]) -> bool {
    for (d, &site) in digits.iter_mut().zip(sites) {
        *d += 1;
        if *d < edges[site].len() {
            return true;
        }
        *d = 0;
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn play_winner(
    start: usize,
    owners: &[u8],
    priorities: &[u32],
    edges: &[Vec<u32>],
    zero_sites: &[usize],
    s0: &[usize],
    one_sites: &[usize],
    s1: &[usize],
) -> u8 {
    let choice = |v: usize| -> Option<usize> {
        if edges[v].is_empty() {
            return None;
        }
        let slot = if owners[v] == 0 {
            s0[zero_sites.iter().position(|&s| s == v).unwrap()]
        } else {
            s1[one_sites.iter().position(|&s| s == v).unwrap()]
        };
        Some(edges[v][slot] as usize)
    };

    let mut seen_at = vec![usize::MAX; owners.len()];
    let mut path = Vec::new();
    let mut at = start;
    loop {
        if seen_at[at] != usize::MAX {
            let cycle = &path[seen_at[at]..];
            let max = cycle.iter().map(|&v| priorities[v]).max().unwrap();
            return (max % 2) as u8;
        }
        seen_at[at] = path.len();
        path.push(at);
        match choice(at) {
            Some(next) => at = next,
            None => return 1 - owners[at],
        }
    }
}

/// Audits winners and a winner-side strategy against the game.
///
/// Checks that each region is closed (the winner's strategy stays inside
/// it, the loser cannot leave it), that winner-owned positions always have
/// a recorded move, and that every simple cycle of the strategy-restricted
/// region has the winner's parity. Only usable on small games: cycle
/// enumeration is exponential.
pub fn verify_strategy(
    owners: &[u8],
    priorities: &[u32],
    edges: &[Vec<u32>],
    winners: &[u8],
    strategy: &[Option<u32>],
) -> Result<(), String> {
    let n = owners.len();
    // Restricted successor relation inside each winner's region.
    let mut restricted: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let w = winners[v];
        if owners[v] == w {
            let slot = strategy[v]
                .ok_or_else(|| format!("position {v}: winner owns it but has no move"))?
                as usize;
            let target = *edges[v]
                .get(slot)
                .ok_or_else(|| format!("position {v}: strategy slot {slot} out of range"))?
                as usize;
            if winners[target] != w {
                return Err(format!("position {v}: strategy leaves the winning region"));
            }
            restricted[v].push(target);
        } else {
            if strategy[v].is_some() {
                return Err(format!("position {v}: loser-owned position has a recorded move"));
            }
            for &t in &edges[v] {
                if winners[t as usize] != w {
                    return Err(format!(
                        "position {v}: the loser can escape to position {t}"
                    ));
                }
                restricted[v].push(t as usize);
            }
        }
    }

    // Every simple cycle in a region must have the region's parity.
    let mut path: Vec<usize> = Vec::new();
    let mut on_path = vec![false; n];
    fn dfs(
        v: usize,
        root: usize,
        restricted: &[Vec<usize>],
        priorities: &[u32],
        winners: &[u8],
        path: &mut Vec<usize>,
        on_path: &mut [bool],
    ) -> Result<(), String> {
        path.push(v);
        on_path[v] = true;
        for &t in &restricted[v] {
            if t == root {
                let max = path.iter().map(|&u| priorities[u]).max().unwrap();
                if (max % 2) as u8 != winners[root] {
                    return Err(format!(
                        "cycle {:?} has max priority {max}, wrong for player {}",
                        path, winners[root]
                    ));
                }
            } else if t > root && !on_path[t] {
                dfs(t, root, restricted, priorities, winners, path, on_path)?;
            }
        }
        path.pop();
        on_path[v] = false;
        Ok(())
    }
    for root in 0..n {
        dfs(root, root, &restricted, priorities, winners, &mut path, &mut on_path)?;
    }
    Ok(())
}

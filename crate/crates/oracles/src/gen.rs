//! Seeded random instance generators shared by test suites.
//!
//! Everything is driven by a caller-supplied ChaCha RNG so corpora are
//! reproducible byte-for-byte across runs and thread counts.

use std::sync::Arc;

use ctl::CtlFormula;
use fo_reduction::{FoFormula, NnfFormula};
use mpds_core::{Guard, MpdsSystem, StackSymbol, StateId, SystemBuilder};
use rand::Rng;

/// A random MPDS with up to `max_states` states, exactly `stacks` stacks,
/// and up to `max_transitions` transitions over a 2-symbol alphabet.
/// Guards are biased toward wildcard so pushes usually fire.
pub fn random_system<R: Rng>(
    rng: &mut R,
    max_states: u32,
    stacks: u8,
    max_transitions: usize,
) -> MpdsSystem {
    let nstates = rng.gen_range(1..=max_states);
    let ntrans = rng.gen_range(0..=max_transitions);
    let mut b = SystemBuilder::new(stacks);
    for s in 0..nstates {
        b.state(format!("q{s}"));
    }
    let syms = [b.symbol(StackSymbol::named("x")), b.symbol(StackSymbol::named("y"))];
    b.set_initial(StateId(0));
    for _ in 0..ntrans {
        let from = StateId(rng.gen_range(0..nstates));
        let to = StateId(rng.gen_range(0..nstates));
        let stack = rng.gen_range(0..stacks);
        let sym = syms[rng.gen_range(0..syms.len())];
        let guard = match rng.gen_range(0..4) {
            0 => Guard::Symbol(mpds_core::BOTTOM),
            1 => Guard::Symbol(syms[rng.gen_range(0..syms.len())]),
            _ => Guard::Wildcard,
        };
        match rng.gen_range(0..4) {
            0 => b.internal(from, to),
            1 => b.push(from, to, stack, guard, sym).unwrap(),
            2 => b.pop(from, to, stack, sym).unwrap(),
            _ => b.noop(from, to, stack, guard).unwrap(),
        }
    }
    b.build().unwrap()
}

/// A random labeled digraph: successor lists (out-degree ≤ `max_degree`)
/// plus a label per node drawn from `labels`.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    max_nodes: usize,
    max_degree: usize,
    labels: &[&str],
) -> (Vec<Vec<u32>>, Vec<String>) {
    let n = rng.gen_range(1..=max_nodes);
    let succs = (0..n)
        .map(|_| {
            let d = rng.gen_range(0..=max_degree);
            (0..d).map(|_| rng.gen_range(0..n as u32)).collect()
        })
        .collect();
    let labelling = (0..n)
        .map(|_| labels[rng.gen_range(0..labels.len())].to_owned())
        .collect();
    (succs, labelling)
}

/// A random formula of the given depth over the given atoms, exercising
/// every operator with equal weight below the root.
pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[&str], depth: u32) -> Arc<CtlFormula> {
    let atom = |rng: &mut R| CtlFormula::atom(atoms[rng.gen_range(0..atoms.len())]);
    if depth == 0 {
        return atom(rng);
    }
    match rng.gen_range(0..8) {
        0 => atom(rng),
        1 => CtlFormula::not(random_formula(rng, atoms, depth - 1)),
        2 => CtlFormula::and(
            random_formula(rng, atoms, depth - 1),
            random_formula(rng, atoms, depth - 1),
        ),
        3 => CtlFormula::or(
            random_formula(rng, atoms, depth - 1),
            random_formula(rng, atoms, depth - 1),
        ),
        4 => CtlFormula::ex(random_formula(rng, atoms, depth - 1)),
        5 => CtlFormula::ef(random_formula(rng, atoms, depth - 1)),
        6 => CtlFormula::eg(random_formula(rng, atoms, depth - 1)),
        _ => CtlFormula::eu(
            random_formula(rng, atoms, depth - 1),
            random_formula(rng, atoms, depth - 1),
        ),
    }
}

/// A random closed first-order sentence: quantifiers draw names from
/// `pool` (shadowing allowed), atoms only mention bound variables, and at
/// most `max_quantifiers` binders appear. Negation is generated so callers
/// exercise normalization.
pub fn random_sentence<R: Rng>(
    rng: &mut R,
    pool: &[&str],
    max_quantifiers: u32,
    depth: u32,
) -> FoFormula {
    fn quantify<R: Rng>(
        rng: &mut R,
        pool: &[&str],
        bound: &mut Vec<String>,
        quota: &mut u32,
        depth: u32,
    ) -> FoFormula {
        let name = pool[rng.gen_range(0..pool.len())].to_owned();
        *quota -= 1;
        bound.push(name.clone());
        let body = Box::new(go(rng, pool, bound, quota, depth.saturating_sub(1)));
        bound.pop();
        if rng.gen_bool(0.5) {
            FoFormula::Exists(name, body)
        } else {
            FoFormula::Forall(name, body)
        }
    }
    fn atom<R: Rng>(rng: &mut R, bound: &[String]) -> FoFormula {
        let x = bound[rng.gen_range(0..bound.len())].clone();
        let y = bound[rng.gen_range(0..bound.len())].clone();
        if rng.gen_bool(0.5) {
            FoFormula::Lt(x, y)
        } else {
            FoFormula::Eq(x, y)
        }
    }
    fn go<R: Rng>(
        rng: &mut R,
        pool: &[&str],
        bound: &mut Vec<String>,
        quota: &mut u32,
        depth: u32,
    ) -> FoFormula {
        if bound.is_empty() {
            return quantify(rng, pool, bound, quota, depth);
        }
        if depth == 0 {
            return atom(rng, bound);
        }
        match rng.gen_range(0..8) {
            0 | 1 if *quota > 0 => quantify(rng, pool, bound, quota, depth),
            2 => FoFormula::And(
                Box::new(go(rng, pool, bound, quota, depth - 1)),
                Box::new(go(rng, pool, bound, quota, depth - 1)),
            ),
            3 => FoFormula::Or(
                Box::new(go(rng, pool, bound, quota, depth - 1)),
                Box::new(go(rng, pool, bound, quota, depth - 1)),
            ),
            4 => FoFormula::Not(Box::new(go(rng, pool, bound, quota, depth - 1))),
            _ => atom(rng, bound),
        }
    }
    let mut quota = max_quantifiers.max(1);
    go(rng, pool, &mut Vec::new(), &mut quota, depth)
}

/// True when no quantifier is nested under one of the opposite kind, the
/// fragment on which a stack cap cannot be turned against the inner
/// quantifier's owner.
pub fn never_alternates(f: &NnfFormula) -> bool {
    /// (contains ∃, contains ∀), or None on an alternation.
    fn scan(f: &NnfFormula) -> Option<(bool, bool)> {
        match f {
            NnfFormula::Exists(_, body) => {
                let (_, any_forall) = scan(body)?;
                if any_forall {
                    return None;
                }
                Some((true, false))
            }
            NnfFormula::Forall(_, body) => {
                let (any_exists, _) = scan(body)?;
                if any_exists {
                    return None;
                }
                Some((false, true))
            }
            NnfFormula::And(a, b) | NnfFormula::Or(a, b) => {
                let (e1, a1) = scan(a)?;
                let (e2, a2) = scan(b)?;
                Some((e1 || e2, a1 || a2))
            }
            NnfFormula::Lt(..) | NnfFormula::Eq(..) => Some((false, false)),
        }
    }
    scan(f).is_some()
}

/// A random parity game: owner, priority, and successor list per position.
pub fn random_game<R: Rng>(
    rng: &mut R,
    max_positions: usize,
    max_priority: u32,
    max_degree: usize,
) -> (Vec<u8>, Vec<u32>, Vec<Vec<u32>>) {
    let n = rng.gen_range(1..=max_positions);
    let owners = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
    let priorities = (0..n).map(|_| rng.gen_range(0..=max_priority)).collect();
    let edges = (0..n)
        .map(|_| {
            let d = rng.gen_range(0..=max_degree);
            (0..d).map(|_| rng.gen_range(0..n as u32)).collect()
        })
        .collect();
    (owners, priorities, edges)
}

//! Bounded exploration of MPDS configuration graphs.
//!
//! The configuration space of an MPDS is generally infinite; this crate
//! builds finite truncations under a context bound, a stack-height cap, a
//! node cap, and a step (BFS depth) cap. Node identity is the triple
//! (configuration, contexts used, current stack): the same configuration
//! reached under different context budgets has different futures.
//!
//! Exploration is breadth-first with node ids assigned in discovery order.
//! Successor computation within a layer may run on a thread pool, but ids
//! are assigned in a sequential merge over the layer in canonical order, so
//! the output is bit-identical for every thread count.

use fixedbitset::FixedBitSet;
use indexmap::IndexSet;
use mpds_core::{
    Action, Configuration, Guard, MpdsSystem, StackId, StackInterner, StateId, SymbolId,
};
use rustc_hash::FxBuildHasher;
use smallvec::SmallVec;

pub mod dump;

pub use dump::{dump, EdgeDump, GraphDump, NodeDump};

/// Caps for one exploration. `stack_cap` bounds non-bottom symbols per
/// stack; `step_cap` bounds BFS depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExplorationBounds {
    pub context_bound: u32,
    pub stack_cap: u32,
    pub node_cap: usize,
    pub step_cap: u32,
}

impl ExplorationBounds {
    /// Context and stack caps with effectively-unbounded node and step caps.
    pub fn new(context_bound: u32, stack_cap: u32) -> Self {
        ExplorationBounds {
            context_bound,
            stack_cap,
            node_cap: usize::MAX,
            step_cap: u32::MAX,
        }
    }

    pub fn with_node_cap(mut self, node_cap: usize) -> Self {
        self.node_cap = node_cap;
        self
    }

    pub fn with_step_cap(mut self, step_cap: u32) -> Self {
        self.step_cap = step_cap;
        self
    }
}

/// Key layout: [state, meta, stack ids...]; meta packs contexts (high 16
/// bits) and current stack + 1 (low 16 bits, 0 = none).
type NodeKey = SmallVec<[u32; 6]>;

const NO_STACK: u32 = 0;

fn pack_meta(contexts: u32, current: Option<u8>) -> u32 {
    (contexts << 16) | current.map_or(NO_STACK, |s| s as u32 + 1)
}

fn meta_contexts(meta: u32) -> u32 {
    meta >> 16
}

fn meta_current(meta: u32) -> Option<u8> {
    match meta & 0xffff {
        0 => None,
        s => Some((s - 1) as u8),
    }
}

/// Charged context count and block stack after one more action.
fn charge(contexts: u32, current: Option<u8>, action: &Action) -> (u32, Option<u8>) {
    let contexts = contexts.max(1);
    if action.is_counting_transparent() {
        return (contexts, current);
    }
    let stack = action.stack().expect("stack action");
    match current {
        None => (contexts, Some(stack)),
        Some(s) if s == stack => (contexts, current),
        Some(_) => (contexts + 1, Some(stack)),
    }
}

/// Same fold for phases: only pops commit the block.
fn charge_phase(phases: u32, current: Option<u8>, action: &Action) -> (u32, Option<u8>) {
    let phases = phases.max(1);
    if !action.is_pop() {
        return (phases, current);
    }
    let stack = action.stack().expect("pop names a stack");
    match current {
        None => (phases, Some(stack)),
        Some(s) if s == stack => (phases, current),
        Some(_) => (phases + 1, Some(stack)),
    }
}

/// A finite truncation of the configuration graph.
pub struct ConfigGraph {
    stack_count: u8,
    keys: IndexSet<NodeKey, FxBuildHasher>,
    interner: StackInterner,
    succ_offsets: Vec<u32>,
    succ_tindex: Vec<u32>,
    succ_target: Vec<u32>,
    parents: Vec<(u32, u32)>,
    depths: Vec<u32>,
    phase_meta: Vec<u32>,
    frontier: FixedBitSet,
    capped: bool,
    bounds: ExplorationBounds,
}

const NO_PARENT: u32 = u32::MAX;

impl ConfigGraph {
    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ_target.len()
    }

    pub fn bounds(&self) -> &ExplorationBounds {
        &self.bounds
    }

    /// Node id of the initial configuration.
    pub fn initial(&self) -> u32 {
        0
    }

    fn key(&self, node: u32) -> &NodeKey {
        self.keys.get_index(node as usize).expect("node id in range")
    }

    pub fn node_state(&self, node: u32) -> StateId {
        StateId(self.key(node)[0])
    }

    pub fn node_contexts(&self, node: u32) -> u32 {
        meta_contexts(self.key(node)[1])
    }

    pub fn node_current_stack(&self, node: u32) -> Option<u8> {
        meta_current(self.key(node)[1])
    }

    pub fn node_stack(&self, node: u32, stack: u8) -> StackId {
        StackId(self.key(node)[2 + stack as usize])
    }

    /// Phase count charged along the canonical BFS discovery path.
    pub fn node_phases(&self, node: u32) -> u32 {
        meta_contexts(self.phase_meta[node as usize])
    }

    pub fn node_depth(&self, node: u32) -> u32 {
        self.depths[node as usize]
    }

    pub fn interner(&self) -> &StackInterner {
        &self.interner
    }

    /// Expands a node back into an explicit configuration.
    pub fn materialize(&self, node: u32, sys: &MpdsSystem) -> Configuration {
        let key = self.key(node);
        let stacks = (0..self.stack_count)
            .map(|s| self.interner.materialize(StackId(key[2 + s as usize]), sys))
            .collect();
        Configuration::at_state(StateId(key[0]), stacks)
    }

    /// CSR successor structure: edge range of `node` is
    /// `succ_offsets[node]..succ_offsets[node+1]`.
    pub fn succ_offsets(&self) -> &[u32] {
        &self.succ_offsets
    }

    pub fn succ_targets(&self) -> &[u32] {
        &self.succ_target
    }

    pub fn succ_tindices(&self) -> &[u32] {
        &self.succ_tindex
    }

    pub fn successors(&self, node: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        let lo = self.succ_offsets[node as usize] as usize;
        let hi = self.succ_offsets[node as usize + 1] as usize;
        (lo..hi).map(move |e| (self.succ_tindex[e], self.succ_target[e]))
    }

    pub fn is_frontier(&self, node: u32) -> bool {
        self.frontier.contains(node as usize)
    }

    pub fn frontier_count(&self) -> usize {
        self.frontier.count_ones(..)
    }

    /// True when the node cap cut the search off.
    pub fn capped(&self) -> bool {
        self.capped
    }

    /// True when any answer computed on this graph is an under-approximation.
    pub fn truncated(&self) -> bool {
        self.capped || self.frontier_count() > 0
    }

    /// Control-state label per node, for checkers that want a flat slice.
    pub fn state_labels(&self) -> Vec<u32> {
        (0..self.node_count() as u32).map(|n| self.key(n)[0]).collect()
    }

    /// Largest context count on any node.
    pub fn max_contexts_seen(&self) -> u32 {
        (0..self.node_count() as u32).map(|n| self.node_contexts(n)).max().unwrap_or(0)
    }

    /// Largest discovery-path phase count on any node.
    pub fn max_phases_seen(&self) -> u32 {
        (0..self.node_count() as u32).map(|n| self.node_phases(n)).max().unwrap_or(0)
    }

    /// The transition word of the BFS discovery path to `node`.
    pub fn witness_word(&self, node: u32) -> Vec<u32> {
        let mut word = Vec::new();
        let mut cursor = node;
        while self.parents[cursor as usize].0 != NO_PARENT {
            let (parent, tidx) = self.parents[cursor as usize];
            word.push(tidx);
            cursor = parent;
        }
        word.reverse();
        word
    }
}

/// Shortest witness to a control state satisfying `target`, if reachable.
pub fn reachable(
    g: &ConfigGraph,
    target: impl Fn(StateId) -> bool,
) -> (bool, Option<Vec<u32>>) {
    // Node ids are BFS-ordered, so the first hit has minimal depth.
    for node in 0..g.node_count() as u32 {
        if target(g.node_state(node)) {
            return (true, Some(g.witness_word(node)));
        }
    }
    (false, None)
}

/// What one transition does to a node, precomputed read-only.
enum SuccStacks {
    Same,
    Pop { stack: u8, parent: u32 },
    Push { stack: u8, symbol: SymbolId },
}

struct Fired {
    tidx: u32,
    key_template: (u32, u32), // (state, meta)
    stacks: SuccStacks,
}

struct Expansion {
    fired: SmallVec<[Fired; 4]>,
    suppressed: bool,
}

/// Computes the bound-respecting successors of one node; pure reads only.
fn expand(
    sys: &MpdsSystem,
    interner: &StackInterner,
    key: &NodeKey,
    depth: u32,
    bounds: &ExplorationBounds,
) -> Expansion {
    let state = StateId(key[0]);
    let contexts = meta_contexts(key[1]);
    let current = meta_current(key[1]);
    let mut fired: SmallVec<[Fired; 4]> = SmallVec::new();
    let mut suppressed = false;
    let depth_ok = depth < bounds.step_cap;
    for &tidx in sys.transitions_from(state) {
        let t = sys.transition(tidx);
        let top = |stack: u8| interner.top(StackId(key[2 + stack as usize]));
        let guard_ok = |guard: &Guard<SymbolId>, stack: u8| match guard {
            Guard::Wildcard => true,
            Guard::Symbol(s) => *s == top(stack),
        };
        let stacks = match &t.action {
            Action::Internal => Some(SuccStacks::Same),
            Action::Noop { stack, guard } => {
                if guard_ok(guard, *stack) {
                    Some(SuccStacks::Same)
                } else {
                    None
                }
            }
            Action::Pop { stack, symbol } => {
                let id = StackId(key[2 + *stack as usize]);
                if interner.top(id) == *symbol {
                    Some(SuccStacks::Pop {
                        stack: *stack,
                        parent: interner.pop(id).expect("top is not bottom").0,
                    })
                } else {
                    None
                }
            }
            Action::Push { stack, guard, symbol } => {
                if guard_ok(guard, *stack) {
                    Some(SuccStacks::Push { stack: *stack, symbol: *symbol })
                } else {
                    None
                }
            }
        };
        let Some(stacks) = stacks else { continue };
        let (nctx, ncur) = charge(contexts, current, &t.action);
        let too_tall = match &stacks {
            SuccStacks::Push { stack, .. } => {
                interner.height(StackId(key[2 + *stack as usize])) + 1 > bounds.stack_cap
            }
            _ => false,
        };
        if !depth_ok || nctx > bounds.context_bound || too_tall {
            suppressed = true;
            continue;
        }
        fired.push(Fired {
            tidx,
            key_template: (t.to.0, pack_meta(nctx, ncur)),
            stacks,
        });
    }
    Expansion { fired, suppressed }
}

/// Explores with an explicit worker count (0 = whatever pool is current).
pub fn explore_with_threads(
    sys: &MpdsSystem,
    init: &Configuration,
    bounds: ExplorationBounds,
    threads: usize,
) -> ConfigGraph {
    if threads <= 1 {
        explore_inner(sys, init, bounds, false)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| explore_inner(sys, init, bounds, true))
    }
}

/// Explores on the current rayon pool.
pub fn explore(sys: &MpdsSystem, init: &Configuration, bounds: ExplorationBounds) -> ConfigGraph {
    explore_inner(sys, init, bounds, true)
}

fn explore_inner(
    sys: &MpdsSystem,
    init: &Configuration,
    bounds: ExplorationBounds,
    parallel: bool,
) -> ConfigGraph {
    use rayon::prelude::*;

    let stack_count = sys.stack_count();
    let mut interner = StackInterner::new();
    let mut keys: IndexSet<NodeKey, FxBuildHasher> = IndexSet::default();

    let mut init_key: NodeKey = SmallVec::new();
    init_key.push(init.state.0);
    init_key.push(pack_meta(0, None));
    for w in &init.stacks {
        init_key.push(interner.intern(w, sys).0);
    }
    keys.insert(init_key);

    let mut parents = vec![(NO_PARENT, 0u32)];
    let mut depths = vec![0u32];
    let mut phase_meta = vec![pack_meta(0, None)];
    let mut succ_offsets: Vec<u32> = vec![0];
    let mut succ_tindex: Vec<u32> = Vec::new();
    let mut succ_target: Vec<u32> = Vec::new();
    let mut frontier_nodes: Vec<u32> = Vec::new();
    let mut capped = false;

    let mut layer: Vec<u32> = vec![0];
    let mut next_layer: Vec<u32> = Vec::new();

    while !layer.is_empty() {
        let depth = depths[layer[0] as usize];
        // Read-only expansion of the whole layer.
        let expansions: Vec<Expansion> = if parallel && layer.len() >= 64 {
            layer
                .par_iter()
                .map(|&n| expand(sys, &interner, keys.get_index(n as usize).unwrap(), depth, &bounds))
                .collect()
        } else {
            layer
                .iter()
                .map(|&n| expand(sys, &interner, keys.get_index(n as usize).unwrap(), depth, &bounds))
                .collect()
        };
        // Sequential merge in canonical order.
        for (&node, expansion) in layer.iter().zip(&expansions) {
            debug_assert_eq!(succ_offsets.len() as u32, node + 1);
            let mut suppressed = expansion.suppressed;
            let node_phase = phase_meta[node as usize];
            for f in &expansion.fired {
                let mut key: NodeKey = SmallVec::new();
                key.push(f.key_template.0);
                key.push(f.key_template.1);
                let base = keys.get_index(node as usize).unwrap();
                for s in 0..stack_count {
                    key.push(base[2 + s as usize]);
                }
                match f.stacks {
                    SuccStacks::Same => {}
                    SuccStacks::Pop { stack, parent } => key[2 + stack as usize] = parent,
                    SuccStacks::Push { stack, symbol } => {
                        let old = StackId(key[2 + stack as usize]);
                        key[2 + stack as usize] = interner.push(old, symbol).0;
                    }
                }
                let existing = keys.get_index_of(&key);
                let target = match existing {
                    Some(id) => id as u32,
                    None => {
                        if keys.len() >= bounds.node_cap {
                            capped = true;
                            suppressed = true;
                            continue;
                        }
                        let (id, _) = keys.insert_full(key);
                        parents.push((node, f.tidx));
                        depths.push(depth + 1);
                        let action = &sys.transition(f.tidx).action;
                        let (ph, pcur) = charge_phase(
                            meta_contexts(node_phase),
                            meta_current(node_phase),
                            action,
                        );
                        phase_meta.push(pack_meta(ph, pcur));
                        next_layer.push(id as u32);
                        id as u32
                    }
                };
                succ_tindex.push(f.tidx);
                succ_target.push(target);
            }
            succ_offsets.push(succ_target.len() as u32);
            if suppressed {
                frontier_nodes.push(node);
            }
        }
        layer = std::mem::take(&mut next_layer);
    }
    // Nodes discovered but never expanded (the merge stopped early only via
    // node_cap inside a layer) still need offsets; in the current scheme the
    // loop expands every discovered node, so just close the CSR.
    while succ_offsets.len() <= keys.len() {
        succ_offsets.push(succ_target.len() as u32);
    }

    let mut frontier = FixedBitSet::with_capacity(keys.len());
    for n in frontier_nodes {
        frontier.insert(n as usize);
    }
    ConfigGraph {
        stack_count,
        keys,
        interner,
        succ_offsets,
        succ_tindex,
        succ_target,
        parents,
        depths,
        phase_meta,
        frontier,
        capped,
        bounds,
    }
}

/// Result of the stability protocol: the same query answered at `stack_cap`
/// and `stack_cap + delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stability<T> {
    pub base: T,
    pub widened: T,
    pub stable: bool,
}

/// Re-runs the exploration with a widened stack cap and reports whether the
/// caller's answer changed.
pub fn answer_stable<T: Eq>(
    sys: &MpdsSystem,
    init: &Configuration,
    bounds: ExplorationBounds,
    delta: u32,
    answer: impl Fn(&ConfigGraph) -> T,
) -> Stability<T> {
    let g1 = explore(sys, init, bounds);
    let mut widened = bounds;
    widened.stack_cap += delta;
    let g2 = explore(sys, init, widened);
    let base = answer(&g1);
    let wide = answer(&g2);
    let stable = base == wide;
    Stability { base, widened: wide, stable }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpds_core::{StackSymbol, SystemBuilder, BOTTOM};

    fn push_loop() -> MpdsSystem {
        let mut b = SystemBuilder::new(1);
        let q = b.fresh_state("q").unwrap();
        let x = b.symbol(StackSymbol::named("x"));
        b.set_initial(q);
        b.push(q, q, 0, Guard::Wildcard, x).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn transition_free_system() {
        let mut b = SystemBuilder::new(2);
        let q = b.fresh_state("q").unwrap();
        b.set_initial(q);
        let sys = b.build().unwrap();
        let g = explore(&sys, &Configuration::initial(&sys), ExplorationBounds::new(3, 5));
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.frontier_count(), 0);
        assert!(!g.truncated());
    }

    #[test]
    fn push_chain_hits_stack_cap() {
        let sys = push_loop();
        let g = explore(&sys, &Configuration::initial(&sys), ExplorationBounds::new(8, 3));
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.frontier_count(), 1);
        assert!(g.is_frontier(3));
        assert!(g.truncated());
    }

    #[test]
    fn alternating_stacks_respect_context_bound() {
        let mut b = SystemBuilder::new(2);
        let q = b.fresh_state("q").unwrap();
        let x = b.symbol(StackSymbol::named("x"));
        b.set_initial(q);
        b.push(q, q, 0, Guard::Symbol(BOTTOM), x).unwrap();
        b.push(q, q, 1, Guard::Symbol(BOTTOM), x).unwrap();
        let sys = b.build().unwrap();
        let g = explore(&sys, &Configuration::initial(&sys), ExplorationBounds::new(2, 5));
        let mut seen = std::collections::BTreeSet::new();
        for n in 0..g.node_count() as u32 {
            seen.insert(g.node_contexts(n));
        }
        assert_eq!(seen, [0u32, 1, 2].into_iter().collect());
    }

    #[test]
    fn node_cap_marks_graph_capped() {
        let sys = push_loop();
        let g = explore(
            &sys,
            &Configuration::initial(&sys),
            ExplorationBounds::new(8, 100).with_node_cap(5),
        );
        assert_eq!(g.node_count(), 5);
        assert!(g.capped());
        assert!(g.truncated());
    }

    #[test]
    fn step_cap_limits_depth() {
        let sys = push_loop();
        let g = explore(
            &sys,
            &Configuration::initial(&sys),
            ExplorationBounds::new(8, 100).with_step_cap(2),
        );
        assert_eq!(g.node_count(), 3);
        assert!(g.is_frontier(2));
    }

    #[test]
    fn witness_replays_via_step() {
        let mut b = SystemBuilder::new(2);
        let q = b.fresh_state("q").unwrap();
        let r = b.fresh_state("r").unwrap();
        let s = b.fresh_state("s").unwrap();
        let x = b.symbol(StackSymbol::named("x"));
        b.set_initial(q);
        b.push(q, r, 0, Guard::Wildcard, x).unwrap();
        b.push(r, s, 1, Guard::Wildcard, x).unwrap();
        b.pop(s, s, 1, x).unwrap();
        let sys = b.build().unwrap();
        let g = explore(&sys, &Configuration::initial(&sys), ExplorationBounds::new(4, 4));
        let (found, witness) = reachable(&g, |st| sys.state_name(st) == "s");
        assert!(found);
        let word = witness.unwrap();
        let mut c = Configuration::initial(&sys);
        for &tidx in &word {
            c = mpds_core::step_index(&sys, &c, tidx).unwrap();
        }
        assert_eq!(sys.state_name(c.state), "s");
        assert_eq!(mpds_core::context_count(&sys, &word).unwrap(), 2);
    }

    #[test]
    fn initial_state_is_reachable_with_empty_witness() {
        let sys = push_loop();
        let g = explore(&sys, &Configuration::initial(&sys), ExplorationBounds::new(2, 2));
        let (found, witness) = reachable(&g, |st| st == sys.initial());
        assert!(found);
        assert_eq!(witness.unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn unreachable_state_reports_none() {
        let mut b = SystemBuilder::new(1);
        let q = b.fresh_state("q").unwrap();
        let _ghost = b.fresh_state("ghost").unwrap();
        b.set_initial(q);
        let sys = b.build().unwrap();
        let g = explore(&sys, &Configuration::initial(&sys), ExplorationBounds::new(2, 2));
        let (found, witness) = reachable(&g, |st| sys.state_name(st) == "ghost");
        assert!(!found);
        assert!(witness.is_none());
    }

    #[test]
    fn stability_detects_cap_sensitivity() {
        let sys = push_loop();
        let bounds = ExplorationBounds::new(8, 2);
        let outcome = answer_stable(&sys, &Configuration::initial(&sys), bounds, 2, |g| {
            g.node_count()
        });
        assert!(!outcome.stable);
        assert_eq!(outcome.base, 3);
        assert_eq!(outcome.widened, 5);
    }

    #[test]
    fn phases_follow_discovery_paths() {
        let mut b = SystemBuilder::new(2);
        let q = b.fresh_state("q").unwrap();
        let x = b.symbol(StackSymbol::named("x"));
        b.set_initial(q);
        b.push(q, q, 0, Guard::Wildcard, x).unwrap();
        b.push(q, q, 1, Guard::Wildcard, x).unwrap();
        b.pop(q, q, 0, x).unwrap();
        b.pop(q, q, 1, x).unwrap();
        let sys = b.build().unwrap();
        let g = explore(&sys, &Configuration::initial(&sys), ExplorationBounds::new(3, 2));
        // Pushes alone never open a second phase.
        assert!(g.max_phases_seen() <= g.max_contexts_seen());
    }
}

//! Set-based model checking over an explored configuration graph.
//!
//! The checker works on a borrowed compressed-sparse-row view of the graph,
//! so it does not depend on how the graph was produced. Formulas are
//! flattened into a hash-consed arena (structurally equal subtrees are
//! evaluated once), each subformula's satisfying set is a bitset, and child
//! sets are dropped as soon as the last parent that needs them is done.
//!
//! Path semantics are over maximal paths: a deadlocked node satisfies
//! `EG phi` when it satisfies `phi`, because the finite path ending there
//! cannot leave `phi`. `EX`, `EF`, and `E[ .. U .. ]` need witnesses, so a
//! deadlock satisfies them only via the zero-step cases of `EF`/`EU`.

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::ast::CtlFormula;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("unknown proposition {0:?}: no control state has that name")]
    UnknownProposition(String),
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
}

/// Borrowed graph in compressed-sparse-row form.
///
/// `succ_offsets` has one entry per node plus a final sentinel; the
/// successors of node `n` are `succ_targets[succ_offsets[n]..succ_offsets[n + 1]]`.
/// `labels[n]` is the proposition label of node `n` (for explored systems,
/// the control state id).
pub struct GraphView<'a> {
    succ_offsets: &'a [u32],
    succ_targets: &'a [u32],
    labels: &'a [u32],
}

impl<'a> GraphView<'a> {
    pub fn new(
        succ_offsets: &'a [u32],
        succ_targets: &'a [u32],
        labels: &'a [u32],
    ) -> Result<Self, CheckError> {
        if succ_offsets.len() != labels.len() + 1 {
            return Err(CheckError::MalformedGraph(format!(
                "offset array has {} entries for {} nodes",
                succ_offsets.len(),
                labels.len()
            )));
        }
        if succ_offsets.last().copied().unwrap_or(0) as usize != succ_targets.len() {
            return Err(CheckError::MalformedGraph(
                "final offset does not match target count".into(),
            ));
        }
        if succ_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(CheckError::MalformedGraph("offsets decrease".into()));
        }
        let nodes = labels.len() as u32;
        if succ_targets.iter().any(|&t| t >= nodes) {
            return Err(CheckError::MalformedGraph("edge target out of range".into()));
        }
        Ok(GraphView { succ_offsets, succ_targets, labels })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn successors(&self, n: u32) -> &[u32] {
        let lo = self.succ_offsets[n as usize] as usize;
        let hi = self.succ_offsets[n as usize + 1] as usize;
        &self.succ_targets[lo..hi]
    }

    fn out_degree(&self, n: u32) -> u32 {
        self.succ_offsets[n as usize + 1] - self.succ_offsets[n as usize]
    }

    /// Predecessor CSR, built once per check.
    fn reverse(&self) -> (Vec<u32>, Vec<u32>) {
        let n = self.node_count();
        let mut offsets = vec![0u32; n + 1];
        for &t in self.succ_targets {
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

/// Arena node: operator with child arena ids, atoms carrying label ids.
#[derive(Clone, PartialEq, Eq, Hash)]
enum Node {
    Atom(u32),
    Not(u32),
    And(u32, u32),
    Or(u32, u32),
    Ex(u32),
    Ef(u32),
    Eg(u32),
    Eu(u32, u32),
}

impl Node {
    fn children(&self) -> impl Iterator<Item = u32> + '_ {
        let (a, b) = match *self {
            Node::Atom(_) => (None, None),
            Node::Not(x) | Node::Ex(x) | Node::Ef(x) | Node::Eg(x) => (Some(x), None),
            Node::And(x, y) | Node::Or(x, y) | Node::Eu(x, y) => (Some(x), Some(y)),
        };
        a.into_iter().chain(b)
    }
}

struct Arena {
    nodes: Vec<Node>,
    cons: FxHashMap<Node, u32>,
    by_ptr: FxHashMap<*const CtlFormula, u32>,
    atom_labels: FxHashMap<Arc<str>, u32>,
}

impl Arena {
    fn intern(&mut self, node: Node) -> u32 {
        if let Some(&id) = self.cons.get(&node) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(node.clone());
        self.cons.insert(node, id);
        id
    }

    /// Flattens the formula; children always precede parents.
    fn add<F>(&mut self, f: &Arc<CtlFormula>, resolve: &F) -> Result<u32, CheckError>
    where
        F: Fn(&str) -> Option<u32>,
    {
        if let Some(&id) = self.by_ptr.get(&Arc::as_ptr(f)) {
            return Ok(id);
        }
        let node = match &**f {
            CtlFormula::Atom(name) => {
                let label = match self.atom_labels.get(name) {
                    Some(&label) => label,
                    None => {
                        let label = resolve(name)
                            .ok_or_else(|| CheckError::UnknownProposition(name.to_string()))?;
                        self.atom_labels.insert(name.clone(), label);
                        label
                    }
                };
                Node::Atom(label)
            }
            CtlFormula::Not(a) => Node::Not(self.add(a, resolve)?),
            CtlFormula::And(a, b) => Node::And(self.add(a, resolve)?, self.add(b, resolve)?),
            CtlFormula::Or(a, b) => Node::Or(self.add(a, resolve)?, self.add(b, resolve)?),
            CtlFormula::Ex(a) => Node::Ex(self.add(a, resolve)?),
            CtlFormula::Ef(a) => Node::Ef(self.add(a, resolve)?),
            CtlFormula::Eg(a) => Node::Eg(self.add(a, resolve)?),
            CtlFormula::Eu(a, b) => Node::Eu(self.add(a, resolve)?, self.add(b, resolve)?),
        };
        let id = self.intern(node);
        self.by_ptr.insert(Arc::as_ptr(f), id);
        Ok(id)
    }
}

/// Computes the set of nodes satisfying `formula`.
///
/// `resolve` maps proposition names to label ids; a name it rejects is an
/// `UnknownProposition` error. The returned bitset is indexed by node id.
pub fn check<F>(
    view: &GraphView<'_>,
    resolve: F,
    formula: &Arc<CtlFormula>,
) -> Result<FixedBitSet, CheckError>
where
    F: Fn(&str) -> Option<u32>,
{
    let mut arena = Arena {
        nodes: Vec::new(),
        cons: FxHashMap::default(),
        by_ptr: FxHashMap::default(),
        atom_labels: FxHashMap::default(),
    };
    let root = arena.add(formula, &resolve)?;
    let n = view.node_count();

    // Pending-use counts let child sets be freed as evaluation proceeds;
    // reduction formulas share subterms heavily, so this caps live bitsets.
    let mut uses = vec![0u32; arena.nodes.len()];
    for node in &arena.nodes {
        for child in node.children() {
            uses[child as usize] += 1;
        }
    }
    uses[root as usize] += 1;

    let needs_preds = arena
        .nodes
        .iter()
        .any(|node| matches!(node, Node::Ef(_) | Node::Eg(_) | Node::Eu(..)));
    let reverse = if needs_preds { Some(view.reverse()) } else { None };
    let preds_of = |n: u32| -> &[u32] {
        let (offsets, preds) = reverse.as_ref().expect("reverse graph was built");
        &preds[offsets[n as usize] as usize..offsets[n as usize + 1] as usize]
    };

    let mut sets: Vec<Option<FixedBitSet>> = vec![None; arena.nodes.len()];
    for id in 0..arena.nodes.len() {
        let mut set = FixedBitSet::with_capacity(n);
        match arena.nodes[id] {
            Node::Atom(label) => {
                for (i, &l) in view.labels.iter().enumerate() {
                    if l == label {
                        set.insert(i);
                    }
                }
            }
            Node::Not(a) => {
                set.union_with(sets[a as usize].as_ref().unwrap());
                set.toggle_range(..);
            }
            Node::And(a, b) => {
                set.union_with(sets[a as usize].as_ref().unwrap());
                set.intersect_with(sets[b as usize].as_ref().unwrap());
            }
            Node::Or(a, b) => {
                set.union_with(sets[a as usize].as_ref().unwrap());
                set.union_with(sets[b as usize].as_ref().unwrap());
            }
            Node::Ex(a) => {
                let inner = sets[a as usize].as_ref().unwrap();
                for node in 0..n as u32 {
                    if view.successors(node).iter().any(|&s| inner.contains(s as usize)) {
                        set.insert(node as usize);
                    }
                }
            }
            Node::Ef(a) => {
                let inner = sets[a as usize].as_ref().unwrap();
                set.union_with(inner);
                let mut work: Vec<u32> = inner.ones().map(|i| i as u32).collect();
                while let Some(node) = work.pop() {
                    for &p in preds_of(node) {
                        if !set.contains(p as usize) {
                            set.insert(p as usize);
                            work.push(p);
                        }
                    }
                }
            }
            Node::Eu(a, b) => {
                let hold = sets[a as usize].as_ref().unwrap();
                let goal = sets[b as usize].as_ref().unwrap();
                set.union_with(goal);
                let mut work: Vec<u32> = goal.ones().map(|i| i as u32).collect();
                while let Some(node) = work.pop() {
                    for &p in preds_of(node) {
                        if hold.contains(p as usize) && !set.contains(p as usize) {
                            set.insert(p as usize);
                            work.push(p);
                        }
                    }
                }
            }
            Node::Eg(a) => {
                // Greatest fixpoint by elimination: start from the operand's
                // set and peel nodes whose successors all left, keeping
                // deadlocks (their maximal path ends inside the set).
                let inner = sets[a as usize].as_ref().unwrap();
                set.union_with(inner);
                let mut alive = vec![0u32; n];
                let mut work = Vec::new();
                for node in set.ones() {
                    let node = node as u32;
                    let count = view
                        .successors(node)
                        .iter()
                        .filter(|&&s| set.contains(s as usize))
                        .count() as u32;
                    alive[node as usize] = count;
                    if count == 0 && view.out_degree(node) > 0 {
                        work.push(node);
                    }
                }
                while let Some(node) = work.pop() {
                    if !set.contains(node as usize) {
                        continue;
                    }
                    set.remove(node as usize);
                    for &p in preds_of(node) {
                        if set.contains(p as usize) {
                            alive[p as usize] -= 1;
                            if alive[p as usize] == 0 && view.out_degree(p) > 0 {
                                work.push(p);
                            }
                        }
                    }
                }
            }
        }
        sets[id] = Some(set);
        for child in arena.nodes[id].children().collect::<Vec<_>>() {
            uses[child as usize] -= 1;
            if uses[child as usize] == 0 {
                sets[child as usize] = None;
            }
        }
    }

    Ok(sets[root as usize].take().expect("root set survives evaluation"))
}

/// Convenience wrapper: does the distinguished node satisfy the formula?
pub fn check_at<F>(
    view: &GraphView<'_>,
    resolve: F,
    formula: &Arc<CtlFormula>,
    node: u32,
) -> Result<bool, CheckError>
where
    F: Fn(&str) -> Option<u32>,
{
    Ok(check(view, resolve, formula)?.contains(node as usize))
}

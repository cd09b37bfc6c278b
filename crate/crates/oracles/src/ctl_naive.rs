//! Whole-vector fixpoint reference for the branching-time checker.
//!
//! Evaluates formulas by plain recursion over the syntax tree with one
//! `Vec<bool>` per subformula and full-graph rescans until stabilization.
//! No interning, no worklists, no predecessor arrays: everything the real
//! checker does incrementally is recomputed from scratch here.

use ctl::CtlFormula;

/// Satisfying vector of `formula` over the adjacency-list graph, or the
/// offending name if a proposition cannot be resolved.
pub fn ctl_naive<F>(
    adj: &[Vec<u32>],
    labels: &[u32],
    resolve: &F,
    formula: &CtlFormula,
) -> Result<Vec<bool>, String>
where
    F: Fn(&str) -> Option<u32>,
{
    let n = adj.len();
    Ok(match formula {
        CtlFormula::Atom(name) => {
            let label = resolve(name).ok_or_else(|| name.to_string())?;
            labels.iter().map(|&l| l == label).collect()
        }
        CtlFormula::Not(a) => {
            let inner = ctl_naive(adj, labels, resolve, a)?;
            inner.iter().map(|&b| !b).collect()
        }
        CtlFormula::And(a, b) => {
            let left = ctl_naive(adj, labels, resolve, a)?;
            let right = ctl_naive(adj, labels, resolve, b)?;
            left.iter().zip(&right).map(|(&x, &y)| x && y).collect()
        }
        CtlFormula::Or(a, b) => {
            let left = ctl_naive(adj, labels, resolve, a)?;
            let right = ctl_naive(adj, labels, resolve, b)?;
            left.iter().zip(&right).map(|(&x, &y)| x || y).collect()
        }
        CtlFormula::Ex(a) => {
            let inner = ctl_naive(adj, labels, resolve, a)?;
            (0..n).map(|i| adj[i].iter().any(|&s| inner[s as usize])).collect()
        }
        CtlFormula::Ef(a) => {
            let mut set = ctl_naive(adj, labels, resolve, a)?;
            loop {
                let mut changed = false;
                for i in 0..n {
                    if !set[i] && adj[i].iter().any(|&s| set[s as usize]) {
                        set[i] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break set;
                }
            }
        }
        CtlFormula::Eu(a, b) => {
            let hold = ctl_naive(adj, labels, resolve, a)?;
            let mut set = ctl_naive(adj, labels, resolve, b)?;
            loop {
                let mut changed = false;
                for i in 0..n {
                    if !set[i] && hold[i] && adj[i].iter().any(|&s| set[s as usize]) {
                        set[i] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break set;
                }
            }
        }
        CtlFormula::Eg(a) => {
            // Maximal-path semantics: a deadlocked node inside the set stays.
            let mut set = ctl_naive(adj, labels, resolve, a)?;
            loop {
                let mut changed = false;
                for i in 0..n {
                    if set[i] && !adj[i].is_empty() && !adj[i].iter().any(|&s| set[s as usize]) {
                        set[i] = false;
                        changed = true;
                    }
                }
                if !changed {
                    break set;
                }
            }
        }
    })
}

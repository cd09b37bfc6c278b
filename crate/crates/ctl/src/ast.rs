//! Formula syntax for the branching-time property language.
//!
//! Formulas are immutable trees behind `Arc`, so reduction compilers can
//! share large subformulas without copying; the checker exploits that
//! sharing by interning structurally equal subformulas once.

use std::fmt;
use std::sync::Arc;

/// A state formula. Atoms name control states of the system under check.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CtlFormula {
    Atom(Arc<str>),
    Not(Arc<CtlFormula>),
    And(Arc<CtlFormula>, Arc<CtlFormula>),
    Or(Arc<CtlFormula>, Arc<CtlFormula>),
    /// Some successor satisfies the operand.
    Ex(Arc<CtlFormula>),
    /// Some path eventually satisfies the operand.
    Ef(Arc<CtlFormula>),
    /// Some maximal path globally satisfies the operand.
    Eg(Arc<CtlFormula>),
    /// Some path satisfies the first operand until the second holds.
    Eu(Arc<CtlFormula>, Arc<CtlFormula>),
}

impl CtlFormula {
    pub fn atom(name: impl Into<Arc<str>>) -> Arc<Self> {
        Arc::new(CtlFormula::Atom(name.into()))
    }

    pub fn not(f: Arc<Self>) -> Arc<Self> {
        Arc::new(CtlFormula::Not(f))
    }

    pub fn and(a: Arc<Self>, b: Arc<Self>) -> Arc<Self> {
        Arc::new(CtlFormula::And(a, b))
    }

    pub fn or(a: Arc<Self>, b: Arc<Self>) -> Arc<Self> {
        Arc::new(CtlFormula::Or(a, b))
    }

    pub fn ex(f: Arc<Self>) -> Arc<Self> {
        Arc::new(CtlFormula::Ex(f))
    }

    pub fn ef(f: Arc<Self>) -> Arc<Self> {
        Arc::new(CtlFormula::Ef(f))
    }

    pub fn eg(f: Arc<Self>) -> Arc<Self> {
        Arc::new(CtlFormula::Eg(f))
    }

    pub fn eu(a: Arc<Self>, b: Arc<Self>) -> Arc<Self> {
        Arc::new(CtlFormula::Eu(a, b))
    }

    /// Conjunction of a non-empty list, left-associated.
    pub fn all(mut parts: Vec<Arc<Self>>) -> Arc<Self> {
        assert!(!parts.is_empty(), "empty conjunction");
        let mut acc = parts.remove(0);
        for p in parts {
            acc = Self::and(acc, p);
        }
        acc
    }

    /// Disjunction of a non-empty list, left-associated.
    pub fn any(mut parts: Vec<Arc<Self>>) -> Arc<Self> {
        assert!(!parts.is_empty(), "empty disjunction");
        let mut acc = parts.remove(0);
        for p in parts {
            acc = Self::or(acc, p);
        }
        acc
    }

    /// Number of distinct nodes in the formula DAG.
    pub fn dag_size(self: &Arc<Self>) -> usize {
        use std::collections::HashSet;
        fn walk(f: &Arc<CtlFormula>, seen: &mut HashSet<*const CtlFormula>) {
            if !seen.insert(Arc::as_ptr(f)) {
                return;
            }
            match &**f {
                CtlFormula::Atom(_) => {}
                CtlFormula::Not(a) | CtlFormula::Ex(a) | CtlFormula::Ef(a) | CtlFormula::Eg(a) => {
                    walk(a, seen)
                }
                CtlFormula::And(a, b) | CtlFormula::Or(a, b) | CtlFormula::Eu(a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
            }
        }
        let mut seen = HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }
}

/// Binding tightness used when printing: `|` loosest, then `&`, then the
/// unary prefixes; atoms and bracketed forms never need parentheses.
fn level(f: &CtlFormula) -> u8 {
    match f {
        CtlFormula::Or(..) => 0,
        CtlFormula::And(..) => 1,
        CtlFormula::Not(_) | CtlFormula::Ex(_) | CtlFormula::Ef(_) | CtlFormula::Eg(_) => 2,
        CtlFormula::Atom(_) | CtlFormula::Eu(..) => 3,
    }
}

fn write_at(f: &CtlFormula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = level(f);
    if own < min {
        out.write_str("(")?;
        write_at(f, 0, out)?;
        return out.write_str(")");
    }
    match f {
        CtlFormula::Atom(name) => out.write_str(name),
        CtlFormula::Not(a) => {
            out.write_str("!")?;
            write_at(a, 2, out)
        }
        CtlFormula::And(a, b) => {
            write_at(a, 1, out)?;
            out.write_str(" & ")?;
            write_at(b, 2, out)
        }
        CtlFormula::Or(a, b) => {
            write_at(a, 0, out)?;
            out.write_str(" | ")?;
            write_at(b, 1, out)
        }
        CtlFormula::Ex(a) => {
            out.write_str("EX ")?;
            write_at(a, 2, out)
        }
        CtlFormula::Ef(a) => {
            out.write_str("EF ")?;
            write_at(a, 2, out)
        }
        CtlFormula::Eg(a) => {
            out.write_str("EG ")?;
            write_at(a, 2, out)
        }
        CtlFormula::Eu(a, b) => {
            out.write_str("E[ ")?;
            write_at(a, 0, out)?;
            out.write_str(" U ")?;
            write_at(b, 0, out)?;
            out.write_str(" ]")
        }
    }
}

impl fmt::Display for CtlFormula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, out)
    }
}

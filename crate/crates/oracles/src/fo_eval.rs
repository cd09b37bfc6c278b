//! Brute-force first-order evaluation over finite initial segments.
//!
//! Two evaluators: [`fo_eval`] is the plain semantics over `{0, .., N}`,
//! and [`fo_eval_capped`] models the height-budget semantics a stack cap
//! imposes on the compiled valuation-word game, where committing the
//! letter for a quantifier at depth `d` requires `d + max(fillers, value)`
//! to fit under the cap and a quantifier with no fitting value is a loss
//! for its owner. The two agree whenever no quantifier path alternates
//! owners; on alternations the capped semantics lets the outer player
//! starve the inner gadget.

use fo_reduction::{FoFormula, NnfFormula};

fn lookup(env: &[(String, u64)], name: &str) -> Result<u64, String> {
    env.iter()
        .rev()
        .find(|(v, _)| v == name)
        .map(|&(_, n)| n)
        .ok_or_else(|| format!("free variable {name}"))
}

/// Evaluates a closed formula over the domain `{0, .., domain_bound}`.
pub fn fo_eval(f: &FoFormula, domain_bound: u64) -> Result<bool, String> {
    fn eval(
        f: &FoFormula,
        bound: u64,
        env: &mut Vec<(String, u64)>,
    ) -> Result<bool, String> {
        match f {
            FoFormula::Lt(x, y) => Ok(lookup(env, x)? < lookup(env, y)?),
            FoFormula::Eq(x, y) => Ok(lookup(env, x)? == lookup(env, y)?),
            FoFormula::Not(g) => Ok(!eval(g, bound, env)?),
            FoFormula::And(a, b) => Ok(eval(a, bound, env)? && eval(b, bound, env)?),
            FoFormula::Or(a, b) => Ok(eval(a, bound, env)? || eval(b, bound, env)?),
            FoFormula::Exists(x, body) => {
                for v in 0..=bound {
                    env.push((x.clone(), v));
                    let holds = eval(body, bound, env)?;
                    env.pop();
                    if holds {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            FoFormula::Forall(x, body) => {
                for v in 0..=bound {
                    env.push((x.clone(), v));
                    let holds = eval(body, bound, env)?;
                    env.pop();
                    if !holds {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
    eval(f, domain_bound, &mut Vec::new())
}

/// Evaluates a negation-free sentence under a stack cap's height budget.
///
/// `letters` counts committed quantifiers, `fillers` the running maximum
/// value; both start at zero for a sentence.
pub fn fo_eval_capped(f: &NnfFormula, cap: u64) -> Result<bool, String> {
    fn eval(
        f: &NnfFormula,
        cap: u64,
        letters: u64,
        fillers: u64,
        env: &mut Vec<(String, u64)>,
    ) -> Result<bool, String> {
        match f {
            NnfFormula::Lt(x, y) => Ok(lookup(env, x)? < lookup(env, y)?),
            NnfFormula::Eq(x, y) => Ok(lookup(env, x)? == lookup(env, y)?),
            NnfFormula::And(a, b) => Ok(eval(a, cap, letters, fillers, env)?
                && eval(b, cap, letters, fillers, env)?),
            NnfFormula::Or(a, b) => Ok(eval(a, cap, letters, fillers, env)?
                || eval(b, cap, letters, fillers, env)?),
            NnfFormula::Exists(x, body) | NnfFormula::Forall(x, body) => {
                let exists = matches!(f, NnfFormula::Exists(..));
                let depth = letters + 1;
                // No room for this letter: the gadget's owner is stuck.
                if depth > cap || fillers > cap - depth {
                    return Ok(!exists);
                }
                for v in 0..=(cap - depth) {
                    env.push((x.clone(), v));
                    let holds = eval(body, cap, depth, fillers.max(v), env)?;
                    env.pop();
                    if holds == exists {
                        return Ok(exists);
                    }
                }
                Ok(!exists)
            }
        }
    }
    eval(f, cap, 0, 0, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fo_reduction::{parse_fo, to_nnf};

    fn eval(text: &str, bound: u64) -> bool {
        fo_eval(&parse_fo(text).unwrap(), bound).unwrap()
    }

    fn eval_capped(text: &str, cap: u64) -> bool {
        fo_eval_capped(&to_nnf(&parse_fo(text).unwrap()), cap).unwrap()
    }

    #[test]
    fn plain_evaluation_matches_hand_truths() {
        assert!(eval("E x. (x = x)", 2));
        assert!(!eval("E x. (x < x)", 2));
        // No strict upper bound exists on a finite domain.
        assert!(!eval("A x. E y. (x < y)", 3));
        // Zero is a minimum.
        assert!(eval("E x. A y. (x < y | x = y)", 3));
        // Three distinct values need a domain of size three.
        let three = "E x. E y. E z. (x < y & y < z)";
        assert!(!eval(three, 1));
        assert!(eval(three, 2));
    }

    #[test]
    fn negation_is_evaluated_directly() {
        assert!(eval("!(E x. (x < x))", 2));
        assert!(!eval("! E x. (x = x)", 2));
    }

    #[test]
    fn free_variables_are_reported() {
        let err = fo_eval(&parse_fo("x < y").unwrap(), 2).unwrap_err();
        assert!(err.contains("free variable"));
    }

    #[test]
    fn capped_semantics_starves_the_inner_gadget() {
        // The universal player overfills the word, starving the inner
        // existential gadget.
        assert!(!eval_capped("A x. E y. (y = y)", 6));
        // Dual: the existential player starves the universal gadget.
        assert!(eval_capped("E x. A y. (y < x)", 6));
        // Without alternation the capped game agrees with the plain
        // semantics at the induced domain.
        assert_eq!(eval_capped("E x. E y. (x < y)", 6), eval("E x. E y. (x < y)", 4));
        assert_eq!(eval_capped("A x. A y. (x < y)", 6), eval("A x. A y. (x < y)", 4));
    }

    #[test]
    fn capped_semantics_respects_the_room_left_by_depth() {
        // Three ascending values fit under cap 6 (room for value 3 at
        // depth 3) but not under cap 4 (max value 1 at depth 3).
        let chain = "E x. E y. E z. (x < y & y < z)";
        assert!(eval_capped(chain, 6));
        assert!(!eval_capped(chain, 4));
    }
}

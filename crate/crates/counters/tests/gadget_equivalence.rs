//! Cross-checks the gadget fragments against independent word-level oracles.
//!
//! Every check explores one host graph per stack-content pair and evaluates
//! the companion formulas on it. The fragments follow the refutation
//! convention: a formula holds exactly when the named property fails, so the
//! assertions compare against the negated oracle.

use std::sync::Arc;

use counters::{
    build_counter_gadgets, encode_counter, is_valid_counter, max_value, CounterParams, Family,
    GadgetLibrary, Orientation,
};
use ctl::{check_at, CtlFormula, GraphView};
use explorer::{explore, ConfigGraph, ExplorationBounds};
use mpds_core::{Configuration, StackSymbol, StackWord};
use num_bigint::BigUint;

fn bounds(level: u8) -> ExplorationBounds {
    ExplorationBounds::new(2 * u32::from(level) + 2, 64).with_node_cap(500_000)
}

fn params(level: u8, base: u32) -> CounterParams {
    CounterParams::new(level, base).expect("desk-scale params")
}

fn enc(p: &CounterParams, v: u64) -> Vec<StackSymbol> {
    encode_counter(p, &BigUint::from(v)).expect("value within range")
}

fn spell(word: &[StackSymbol]) -> String {
    word.iter().map(|s| s.spelling()).collect::<Vec<_>>().join(" ")
}

/// The longest prefix made of counter bits; what the validity fragments
/// actually inspect before hitting a follower letter.
fn bit_prefix(p: &CounterParams, word: &[StackSymbol]) -> Vec<StackSymbol> {
    word.iter().take_while(|s| s.is_counter_bit_up_to(p.level())).cloned().collect()
}

/// Explores the full host graph for one pair of stack contents. All
/// fragments in both orientations hang off the host, so one graph answers
/// every formula for this pair.
fn explore_pair(lib: &GadgetLibrary, w1: &[StackSymbol], w2: &[StackSymbol]) -> ConfigGraph {
    let init = Configuration::at_state(
        lib.host,
        vec![
            StackWord::from_prefix(w1.iter().cloned()).expect("counter words never hold bottom"),
            StackWord::from_prefix(w2.iter().cloned()).expect("counter words never hold bottom"),
        ],
    );
    let g = explore(&lib.system, &init, bounds(lib.set.params.level()));
    assert!(
        !g.truncated(),
        "exploration must finish within the declared budgets (stacks {} | {})",
        spell(w1),
        spell(w2),
    );
    g
}

fn holds(lib: &GadgetLibrary, g: &ConfigGraph, labels: &[u32], formula: &Arc<CtlFormula>) -> bool {
    let view = GraphView::new(g.succ_offsets(), g.succ_targets(), labels).expect("graph view");
    let resolve = |name: &str| lib.system.state_id(name).map(|s| s.0);
    check_at(&view, resolve, formula, g.initial()).expect("all propositions are state names")
}

#[test]
fn fragments_agree_with_value_oracles_for_all_pairs() {
    for (k, n) in [(1u8, 1u32), (1, 2), (2, 1), (2, 2)] {
        let p = params(k, n);
        let lib = build_counter_gadgets(&p).expect("build library");
        let maxv: u64 = max_value(&p).try_into().expect("desk scale");
        for u in 0..=maxv {
            let wu = enc(&p, u);
            for v in 0..=maxv {
                let wv = enc(&p, v);
                let g = explore_pair(&lib, &wu, &wv);
                let labels = g.state_labels();
                for o in Orientation::BOTH {
                    let (pri, sec) = match o {
                        Orientation::First => (u, v),
                        Orientation::Second => (v, u),
                    };
                    let cases = [
                        (Family::Max, pri != maxv),
                        (Family::Min, pri != 0),
                        (Family::Equal, u != v),
                        (Family::Succ, pri == maxv || sec != pri + 1),
                        (Family::Valid, false),
                    ];
                    for (family, expected) in cases {
                        let got = holds(&lib, &g, &labels, lib.set.formula(family, k, o));
                        assert_eq!(
                            got, expected,
                            "{family:?} level {k} base {n} {o:?}: u={u} v={v}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn successor_checks_secondary_against_incremented_primary() {
    let p = params(2, 2);
    let lib = build_counter_gadgets(&p).expect("build library");
    let g = explore_pair(&lib, &enc(&p, 5), &enc(&p, 6));
    let labels = g.state_labels();
    // Stack 2 holds 6 = 5 + 1, so the first-orientation check succeeds
    // (formula false) while the flipped orientation is refuted.
    assert!(!holds(&lib, &g, &labels, lib.set.formula(Family::Succ, 2, Orientation::First)));
    assert!(holds(&lib, &g, &labels, lib.set.formula(Family::Succ, 2, Orientation::Second)));
    let g = explore_pair(&lib, &enc(&p, 6), &enc(&p, 5));
    let labels = g.state_labels();
    assert!(holds(&lib, &g, &labels, lib.set.formula(Family::Succ, 2, Orientation::First)));
    assert!(!holds(&lib, &g, &labels, lib.set.formula(Family::Succ, 2, Orientation::Second)));
}

#[test]
fn context_letters_after_the_word_do_not_disturb_the_checks() {
    let p = params(2, 2);
    let lib = build_counter_gadgets(&p).expect("build library");
    let maxv: u64 = max_value(&p).try_into().expect("desk scale");
    for (u, v) in [(0u64, 1u64), (5, 6), (6, 5), (15, 15), (15, 0)] {
        let mut wu = enc(&p, u);
        wu.push(StackSymbol::Zeta);
        wu.push(StackSymbol::Zeta);
        let mut wv = enc(&p, v);
        wv.push(StackSymbol::Zeta);
        let g = explore_pair(&lib, &wu, &wv);
        let labels = g.state_labels();
        for o in Orientation::BOTH {
            let (pri, sec) = match o {
                Orientation::First => (u, v),
                Orientation::Second => (v, u),
            };
            let cases = [
                (Family::Max, pri != maxv),
                (Family::Min, pri != 0),
                (Family::Equal, u != v),
                (Family::Succ, pri == maxv || sec != pri + 1),
                (Family::Valid, false),
            ];
            for (family, expected) in cases {
                let got = holds(&lib, &g, &labels, lib.set.formula(family, 2, o));
                assert_eq!(got, expected, "{family:?} {o:?}: u={u} v={v} with suffix");
            }
        }
    }
}

/// Mutates valid encodings by substitution, deletion, insertion, and
/// truncation, then compares the validity fragment against the word oracle on
/// the surviving bit prefix. Single value-bit substitutions often yield OTHER
/// valid counters, so the oracle comparison is essential; blanket asserting
/// "invalid" would be wrong.
#[test]
fn mutated_words_match_the_validity_oracle() {
    let p = params(2, 2);
    let lib = build_counter_gadgets(&p).expect("build library");
    let alphabet = [
        StackSymbol::bit_a(1),
        StackSymbol::bit_b(1),
        StackSymbol::bit_a(2),
        StackSymbol::bit_b(2),
        StackSymbol::Zeta,
    ];
    let mut words: Vec<Vec<StackSymbol>> = Vec::new();
    for v in [0u64, 5, 10, 15] {
        let base = enc(&p, v);
        words.push(base.clone());
        for i in 0..base.len() {
            let mut del = base.clone();
            del.remove(i);
            words.push(del);
            for sym in &alphabet {
                if *sym != base[i] {
                    let mut sub = base.clone();
                    sub[i] = sym.clone();
                    words.push(sub);
                }
            }
            words.push(base[..i].to_vec());
        }
        for i in 0..=base.len() {
            let mut ins = base.clone();
            ins.insert(i, StackSymbol::Zeta);
            words.push(ins);
        }
    }

    let mut invalid_seen = 0usize;
    let mut valid_seen = 0usize;
    for w in &words {
        let expected = !is_valid_counter(&p, &bit_prefix(&p, w));
        if expected {
            invalid_seen += 1;
        } else {
            valid_seen += 1;
        }
        // Both stacks hold the mutant, so one graph feeds both orientations.
        let g = explore_pair(&lib, w, w);
        let labels = g.state_labels();
        for o in Orientation::BOTH {
            let got = holds(&lib, &g, &labels, lib.set.formula(Family::Valid, 2, o));
            assert_eq!(got, expected, "validity of {:?} ({o:?})", spell(w));
        }
    }
    // The mutation set must exercise both verdicts to mean anything.
    assert!(invalid_seen >= 100, "only {invalid_seen} invalid mutants");
    assert!(valid_seen >= 10, "only {valid_seen} valid mutants");
}

/// Every word over the full letter alphabet up to the encoded length, checked
/// against the oracle. This sweeps all shape violations exhaustively at the
/// smallest two-level scale.
#[test]
fn validity_fragment_matches_oracle_on_all_short_words() {
    let p = params(2, 1);
    let lib = build_counter_gadgets(&p).expect("build library");
    let alphabet = [
        StackSymbol::bit_a(1),
        StackSymbol::bit_b(1),
        StackSymbol::bit_a(2),
        StackSymbol::bit_b(2),
        StackSymbol::Zeta,
    ];
    let mut words: Vec<Vec<StackSymbol>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<StackSymbol>> = vec![Vec::new()];
    for _ in 0..4 {
        let mut next = Vec::new();
        for w in &frontier {
            for sym in &alphabet {
                let mut ext = w.clone();
                ext.push(sym.clone());
                next.push(ext);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }

    let mut invalid_seen = 0usize;
    let mut valid_seen = 0usize;
    for w in &words {
        let expected = !is_valid_counter(&p, &bit_prefix(&p, w));
        if expected {
            invalid_seen += 1;
        } else {
            valid_seen += 1;
        }
        let g = explore_pair(&lib, w, w);
        let labels = g.state_labels();
        for o in Orientation::BOTH {
            let got = holds(&lib, &g, &labels, lib.set.formula(Family::Valid, 2, o));
            assert_eq!(got, expected, "validity of {:?} ({o:?})", spell(w));
        }
    }
    // 4 valid two-level words exist at this scale: one per counter value.
    assert_eq!(valid_seen, 4);
    assert!(invalid_seen > 700);
}

/// Measures context-block usage per fragment family by exploring from the
/// fragment entries directly. Extremal walks stay on one stack; the comparing
/// families stay within two blocks per recursion level.
#[test]
fn context_blocks_stay_within_declared_budgets() {
    for (k, n) in [(1u8, 2u32), (2, 1), (2, 2)] {
        let p = params(k, n);
        let lib = build_counter_gadgets(&p).expect("build library");
        let maxv: u64 = max_value(&p).try_into().expect("desk scale");
        let pairs = [(0, 0), (0, maxv), (maxv, 0), (1.min(maxv), maxv)];
        for j in 1..=k {
            for o in Orientation::BOTH {
                for family in [Family::Max, Family::Min, Family::Equal, Family::Succ, Family::Valid] {
                    let entry = lib.set.entry(family, j, o);
                    for &(u, v) in &pairs {
                        let init = Configuration::at_state(
                            entry,
                            vec![
                                StackWord::from_prefix(enc(&p, u)).expect("word"),
                                StackWord::from_prefix(enc(&p, v)).expect("word"),
                            ],
                        );
                        let g = explore(&lib.system, &init, bounds(k));
                        assert!(!g.truncated());
                        let blocks = g.max_contexts_seen();
                        let cap = match family {
                            Family::Max | Family::Min => 1,
                            _ => 2 * u32::from(j),
                        };
                        assert!(
                            blocks <= cap,
                            "{family:?} level {j} {o:?} at k={k} n={n}: {blocks} blocks > {cap}"
                        );
                        assert!(blocks <= lib.set.declared_switches(family, j) + 1);
                    }
                }
            }
        }
    }
}

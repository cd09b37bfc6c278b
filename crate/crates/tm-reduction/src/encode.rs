//! Addressed stack encodings of Turing machine configurations.
//!
//! A machine running at level `k` with base width `n` owns a tape of
//! exactly `Max(k, n)` cells, where `Max` is the largest value a level-`k`
//! counter can spell. A configuration is encoded as a single stack word of
//! `Max + 1` blocks, each block a full level-`k` counter word spelling the
//! block's address followed by one machine letter, with addresses
//! descending from `Max` at the top of the stack to `0` at the bottom,
//! terminated by one `zeta`. The head occupies its own addressed block:
//! with head cell `h`, the letter at string position `i` is `tape[i]` for
//! `i < h`, the control state for `i = h`, and `tape[i-1]` for `i > h`, so
//! the scanned cell sits directly above the state. Exactly one position
//! holds a control state and it is never the topmost one; under that rule
//! the encoding is a bijection between (tape, state, head) triples and
//! well-formed words.

use counters::{encode_counter, max_value, CounterParams};
use mpds_core::StackSymbol;
use num_bigint::BigUint;

use crate::machine::TmMachine;
use crate::TmError;

/// A machine configuration in plain form: control state, full tape
/// contents, and the head's cell index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TmConfig {
    pub state: String,
    pub tape: Vec<String>,
    pub head: usize,
}

/// Number of tape cells a level-`p.level()` machine owns: `Max(level, base)`.
///
/// Fails with `TapeTooLarge` when the tape cannot be materialized, which is
/// the point of running at a higher level in the first place; only scales
/// where the whole pipeline fits in memory are accepted here.
pub fn tape_cells(p: &CounterParams) -> Result<u64, TmError> {
    let max = max_value(p);
    u64::try_from(&max).map_err(|_| TmError::TapeTooLarge(max))
}

/// Symbols in one encoded configuration word:
/// `(Max + 1) * (counter_len + 1) + 1` counting the terminating `zeta`.
pub fn config_word_len(p: &CounterParams) -> Result<u64, TmError> {
    let cells = tape_cells(p)?;
    (cells + 1)
        .checked_mul(p.encoded_length() + 1)
        .and_then(|blocks| blocks.checked_add(1))
        .ok_or_else(|| TmError::TapeTooLarge(max_value(p)))
}

/// The machine letter at string position `i` when the head is at cell `h`.
fn letter_at(c: &TmConfig, i: usize) -> &str {
    if i < c.head {
        &c.tape[i]
    } else if i == c.head {
        &c.state
    } else {
        &c.tape[i - 1]
    }
}

fn check_config(m: &TmMachine, p: &CounterParams, c: &TmConfig) -> Result<u64, TmError> {
    let cells = tape_cells(p)?;
    if c.tape.len() as u64 != cells {
        return Err(TmError::BadConfig(format!(
            "tape has {} cells, level {} base {} needs exactly {}",
            c.tape.len(),
            p.level(),
            p.base(),
            cells
        )));
    }
    if !m.is_state(&c.state) {
        return Err(TmError::BadConfig(format!(
            "`{}` is not a control state",
            c.state
        )));
    }
    for letter in &c.tape {
        if !m.is_tape_letter(letter) {
            return Err(TmError::BadConfig(format!(
                "`{letter}` is not a tape letter"
            )));
        }
    }
    if c.head >= c.tape.len() {
        return Err(TmError::BadConfig(format!(
            "head at cell {} of a {}-cell tape",
            c.head,
            c.tape.len()
        )));
    }
    Ok(cells)
}

/// Encodes a configuration as one stack word, top-first.
pub fn encode_tm_config(
    m: &TmMachine,
    p: &CounterParams,
    c: &TmConfig,
) -> Result<Vec<StackSymbol>, TmError> {
    let cells = check_config(m, p, c)?;
    let mut out = Vec::with_capacity(config_word_len(p)? as usize);
    for addr in (0..=cells).rev() {
        out.extend(encode_counter(p, &BigUint::from(addr))?);
        out.push(StackSymbol::tm_letter(letter_at(c, addr as usize)));
    }
    out.push(StackSymbol::Zeta);
    Ok(out)
}

/// Decodes a full configuration word back to plain form.
///
/// The word must match the encoding exactly: every block's address spelled
/// correctly in descending order, every letter known to the machine,
/// exactly one control state not in the topmost block, and nothing after
/// the terminating `zeta`.
pub fn decode_tm_config(
    m: &TmMachine,
    p: &CounterParams,
    word: &[StackSymbol],
) -> Result<TmConfig, TmError> {
    let cells = tape_cells(p)?;
    let mut pos = 0;
    // letters[i] is the machine letter at string position i.
    let mut letters = vec![String::new(); cells as usize + 1];
    for addr in (0..=cells).rev() {
        let expected = encode_counter(p, &BigUint::from(addr))?;
        let end = pos + expected.len();
        if word.len() < end || word[pos..end] != expected[..] {
            return Err(TmError::BadConfig(format!(
                "block {addr} does not spell its own address"
            )));
        }
        pos = end;
        let Some(StackSymbol::Named(name)) = word.get(pos) else {
            return Err(TmError::BadConfig(format!(
                "block {addr} is missing its machine letter"
            )));
        };
        if !m.is_state(name) && !m.is_tape_letter(name) {
            return Err(TmError::BadConfig(format!(
                "`{name}` is not a letter of this machine"
            )));
        }
        letters[addr as usize] = name.to_string();
        pos += 1;
    }
    if word.get(pos) != Some(&StackSymbol::Zeta) {
        return Err(TmError::BadConfig("missing terminating zeta".into()));
    }
    if pos + 1 != word.len() {
        return Err(TmError::BadConfig("trailing symbols after zeta".into()));
    }
    let mut head = None;
    for (i, letter) in letters.iter().enumerate() {
        if m.is_state(letter) {
            if head.is_some() {
                return Err(TmError::BadConfig("two control states".into()));
            }
            head = Some(i);
        }
    }
    let Some(head) = head else {
        return Err(TmError::BadConfig("no control state".into()));
    };
    if head == cells as usize {
        return Err(TmError::BadConfig(
            "control state in the topmost block".into(),
        ));
    }
    let state = letters[head].clone();
    let mut tape = Vec::with_capacity(cells as usize);
    tape.extend(letters[..head].iter().cloned());
    tape.extend(letters[head + 1..].iter().cloned());
    Ok(TmConfig { state, tape, head })
}

/// Whether `word` is exactly one well-formed configuration encoding.
pub fn is_valid_config(m: &TmMachine, p: &CounterParams, word: &[StackSymbol]) -> bool {
    decode_tm_config(m, p, word).is_ok()
}

/// The starting configuration on `input`: the input letters at the left
/// end, blanks elsewhere, head on cell 0.
pub fn initial_config(
    m: &TmMachine,
    p: &CounterParams,
    input: &[String],
) -> Result<TmConfig, TmError> {
    let cells = tape_cells(p)?;
    if input.len() as u64 > cells {
        return Err(TmError::InputTooLong {
            needed: input.len(),
            cells,
            level: p.level(),
        });
    }
    for letter in input {
        if !m.is_tape_letter(letter) {
            return Err(TmError::BadInput(letter.clone()));
        }
    }
    let mut tape = input.to_vec();
    tape.resize(cells as usize, m.blank.clone());
    Ok(TmConfig { state: m.initial.clone(), tape, head: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::TmMachine;

    fn machine() -> TmMachine {
        TmMachine {
            states: vec!["s".into(), "t".into()],
            tape_alphabet: vec!["0".into(), "1".into()],
            blank: "0".into(),
            initial: "s".into(),
            finals: vec!["t".into()],
            transitions: vec![],
        }
    }

    fn params(level: u8, base: u32) -> CounterParams {
        CounterParams::new(level, base).unwrap()
    }

    #[test]
    fn word_lengths_match_the_arithmetic() {
        let p = params(1, 2);
        assert_eq!(tape_cells(&p).unwrap(), 3);
        assert_eq!(config_word_len(&p).unwrap(), 13);
        let p = params(2, 1);
        assert_eq!(tape_cells(&p).unwrap(), 3);
        assert_eq!(config_word_len(&p).unwrap(), 21);
    }

    #[test]
    fn oversized_tapes_are_refused() {
        let p = params(2, 16);
        assert!(matches!(tape_cells(&p), Err(TmError::TapeTooLarge(_))));
    }

    #[test]
    fn encodes_with_descending_addresses_and_the_head_below_the_scanned_cell() {
        let m = machine();
        let p = params(1, 2);
        let c = TmConfig {
            state: "s".into(),
            tape: vec!["1".into(), "0".into(), "1".into()],
            head: 1,
        };
        let word = encode_tm_config(&m, &p, &c).unwrap();
        assert_eq!(word.len(), 13);
        // Top block: address 3 = b1 b1, letter tape[2].
        assert_eq!(word[0], StackSymbol::bit_b(1));
        assert_eq!(word[1], StackSymbol::bit_b(1));
        assert_eq!(word[2], StackSymbol::tm_letter("1"));
        // Address 2 holds the scanned cell tape[1], address 1 the state.
        assert_eq!(word[5], StackSymbol::tm_letter("0"));
        assert_eq!(word[8], StackSymbol::tm_letter("s"));
        // Address 0 holds tape[0]; zeta closes the word.
        assert_eq!(word[11], StackSymbol::tm_letter("1"));
        assert_eq!(word[12], StackSymbol::Zeta);
    }

    #[test]
    fn round_trips_every_configuration_at_small_scales() {
        let m = machine();
        for p in [params(1, 1), params(1, 2), params(2, 1)] {
            let cells = tape_cells(&p).unwrap() as usize;
            for state in &m.states {
                for head in 0..cells {
                    for bits in 0u32..1 << cells {
                        let tape: Vec<String> = (0..cells)
                            .map(|i| if bits >> i & 1 == 1 { "1".into() } else { "0".into() })
                            .collect();
                        let c = TmConfig { state: state.clone(), tape, head };
                        let word = encode_tm_config(&m, &p, &c).unwrap();
                        assert_eq!(decode_tm_config(&m, &p, &word).unwrap(), c);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_malformed_words() {
        let m = machine();
        let p = params(1, 2);
        let c = TmConfig {
            state: "s".into(),
            tape: vec!["0".into(), "0".into(), "0".into()],
            head: 0,
        };
        let good = encode_tm_config(&m, &p, &c).unwrap();
        assert!(is_valid_config(&m, &p, &good));

        // Truncation, trailing junk, a second state, a state on top, and a
        // corrupted address bit must all be caught.
        assert!(!is_valid_config(&m, &p, &good[1..]));
        assert!(!is_valid_config(&m, &p, &good[..12]));
        let mut two_states = good.clone();
        two_states[5] = StackSymbol::tm_letter("t");
        assert!(!is_valid_config(&m, &p, &two_states));
        let mut top_state = good.clone();
        top_state[2] = StackSymbol::tm_letter("t");
        assert!(!is_valid_config(&m, &p, &top_state));
        let mut bad_addr = good.clone();
        bad_addr[0] = StackSymbol::bit_a(1);
        assert!(!is_valid_config(&m, &p, &bad_addr));
        let mut trailing = good.clone();
        trailing.push(StackSymbol::Zeta);
        assert!(!is_valid_config(&m, &p, &trailing));
    }

    #[test]
    fn head_moves_shift_which_block_holds_the_state() {
        let m = machine();
        let p = params(1, 2);
        for head in 0..3 {
            let c = TmConfig {
                state: "t".into(),
                tape: vec!["1".into(), "1".into(), "1".into()],
                head,
            };
            let word = encode_tm_config(&m, &p, &c).unwrap();
            let state_positions: Vec<usize> = word
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == StackSymbol::tm_letter("t"))
                .map(|(i, _)| i)
                .collect();
            // Blocks are 3 symbols wide; position h sits (3 - h) blocks down.
            assert_eq!(state_positions, vec![(3 - head) * 3 + 2]);
        }
    }

    #[test]
    fn initial_config_pads_with_blanks() {
        let m = machine();
        let p = params(1, 2);
        let c = initial_config(&m, &p, &["1".into()]).unwrap();
        assert_eq!(c.state, "s");
        assert_eq!(c.head, 0);
        assert_eq!(c.tape, vec!["1", "0", "0"]);
        assert!(matches!(
            initial_config(&m, &p, &["1".into(); 4]),
            Err(TmError::InputTooLong { .. })
        ));
        assert!(matches!(
            initial_config(&m, &p, &["x".into()]),
            Err(TmError::BadInput(_))
        ));
    }
}

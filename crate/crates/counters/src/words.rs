//! Arithmetic on nested counter words.
//!
//! A level-1 counter over base width `n` is a word of exactly `n` level-1
//! bits, most significant bit first. A level-k counter is the concatenation,
//! top-first, of one entry per address from `Max(k-1)` down to 0; each entry
//! is the level-(k-1) counter spelling its address followed by a single
//! level-k bit. The bit count at level k is therefore `Max(k-1) + 1` (one
//! bit per address), which gives the recurrence
//! `Max(k) = 2^(Max(k-1) + 1) - 1` with `Max(1) = 2^n - 1`.
//!
//! Values grow as a tower of exponents, so every operation is gated by a
//! scale guard that rejects parameters whose words could not be built in
//! memory, let alone checked by the gadget machinery.

use mpds_core::StackSymbol;
use num_bigint::BigUint;
use thiserror::Error;

use crate::CounterError;

/// Bit length ceiling enforced by the scale guard (16 Ki bits at the top
/// level, i.e. values below 2^65536).
pub const MAX_BIT_LENGTH: u64 = 1 << 16;

/// Level and base width of a counter family.
///
/// Construction enforces the scale guard: levels above 3 are rejected
/// outright, and within level 3 the base width must keep the top-level bit
/// count at or below [`MAX_BIT_LENGTH`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterParams {
    level: u8,
    base: u32,
}

impl CounterParams {
    pub fn new(level: u8, base: u32) -> Result<Self, CounterError> {
        if level < 1 {
            return Err(CounterError::BadParams("level must be at least 1".into()));
        }
        if base < 1 {
            return Err(CounterError::BadParams("base width must be at least 1".into()));
        }
        if level > 3 {
            return Err(CounterError::ScaleGuard { level, base });
        }
        // bit_length(1) = n, bit_length(j) = 2^bit_length(j-1); saturate so
        // the comparison below stays meaningful for absurd inputs.
        let mut bits = base as u64;
        for _ in 1..level {
            bits = if bits >= 63 { u64::MAX } else { 1u64 << bits };
        }
        if bits > MAX_BIT_LENGTH {
            return Err(CounterError::ScaleGuard { level, base });
        }
        Ok(CounterParams { level, base })
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Number of level-`level` bits in one counter word, i.e. `Max(level-1) + 1`.
    pub fn bit_length(&self) -> u64 {
        let mut bits = self.base as u64;
        for _ in 1..self.level {
            bits = 1u64 << bits;
        }
        bits
    }

    /// Parameters one level down, with the same base width.
    fn lower(&self) -> CounterParams {
        debug_assert!(self.level > 1);
        CounterParams { level: self.level - 1, base: self.base }
    }

    /// Total symbols in one counter word at these parameters.
    pub fn encoded_length(&self) -> u64 {
        let mut len = self.base as u64;
        let mut bits = self.base as u64;
        for _ in 1..self.level {
            bits = 1u64 << bits;
            len = bits * (len + 1);
        }
        len
    }
}

/// `Tow(1) = 1`, `Tow(j) = 2^Tow(j-1)`: the tower-of-exponents scale of the
/// construction. Guarded like counter values.
pub fn tow(k: u8) -> Result<BigUint, TowError> {
    if k < 1 {
        return Err(TowError::LevelZero);
    }
    let mut t = 1u64;
    for _ in 1..k {
        // The next value is 2^t; allow it only while it stays within the
        // scale guard.
        if t > u64::from(MAX_BIT_LENGTH.ilog2()) {
            return Err(TowError::ScaleGuard(k));
        }
        t = 1u64 << t;
    }
    Ok(BigUint::from(t))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TowError {
    #[error("tower levels start at 1")]
    LevelZero,
    #[error("Tow({0}) exceeds the scale guard")]
    ScaleGuard(u8),
}

/// Largest value a counter at `p` can spell: `2^bit_length - 1`.
pub fn max_value(p: &CounterParams) -> BigUint {
    (BigUint::from(1u8) << p.bit_length()) - 1u8
}

/// Encodes `value` as a counter word, top-first with the most significant
/// bit on top. Fails if `value` exceeds [`max_value`].
pub fn encode_counter(p: &CounterParams, value: &BigUint) -> Result<Vec<StackSymbol>, CounterError> {
    let max = max_value(p);
    if *value > max {
        return Err(CounterError::Overflow { value: value.to_string(), max: max.to_string() });
    }
    let mut out = Vec::with_capacity(p.encoded_length() as usize);
    write_counter(p, value, &mut out);
    Ok(out)
}

fn write_counter(p: &CounterParams, value: &BigUint, out: &mut Vec<StackSymbol>) {
    if p.level == 1 {
        for i in (0..self_bits(p)).rev() {
            out.push(bit_symbol(1, value.bit(i)));
        }
        return;
    }
    let lower = p.lower();
    for addr in (0..p.bit_length()).rev() {
        write_counter(&lower, &BigUint::from(addr), out);
        out.push(bit_symbol(p.level, value.bit(addr)));
    }
}

fn self_bits(p: &CounterParams) -> u64 {
    debug_assert_eq!(p.level, 1);
    p.base as u64
}

fn bit_symbol(level: u8, one: bool) -> StackSymbol {
    if one {
        StackSymbol::bit_b(level)
    } else {
        StackSymbol::bit_a(level)
    }
}

/// Reads the value of a full counter word. The word must be exactly one
/// valid counter; anything else is an `InvalidWord` error.
pub fn decode_counter(p: &CounterParams, word: &[StackSymbol]) -> Result<BigUint, CounterError> {
    let mut pos = 0;
    let value = parse_counter(p, word, &mut pos)?;
    if pos != word.len() {
        return Err(CounterError::InvalidWord(format!(
            "trailing symbols after the counter (consumed {pos} of {})",
            word.len()
        )));
    }
    Ok(value)
}

/// True when the word is exactly one valid counter at `p`.
pub fn is_valid_counter(p: &CounterParams, word: &[StackSymbol]) -> bool {
    decode_counter(p, word).is_ok()
}

/// Parses one counter starting at `*pos`, enforcing the definition directly:
/// at level 1 exactly `base` level-1 bits; above that, one entry per address
/// counting down from `Max(level-1)` to 0, each a valid lower counter
/// spelling its address followed by a level-`level` bit.
fn parse_counter(
    p: &CounterParams,
    word: &[StackSymbol],
    pos: &mut usize,
) -> Result<BigUint, CounterError> {
    if p.level == 1 {
        let mut value = BigUint::from(0u8);
        for i in (0..p.base as u64).rev() {
            match take_bit(word, pos, 1)? {
                true => value.set_bit(i, true),
                false => {}
            }
        }
        return Ok(value);
    }
    let lower = p.lower();
    let mut value = BigUint::from(0u8);
    for addr in (0..p.bit_length()).rev() {
        let at = *pos;
        let spelled = parse_counter(&lower, word, pos)?;
        if spelled != BigUint::from(addr) {
            return Err(CounterError::InvalidWord(format!(
                "entry at offset {at} spells address {spelled}, expected {addr}"
            )));
        }
        if take_bit(word, pos, p.level)? {
            value.set_bit(addr, true);
        }
    }
    Ok(value)
}

fn take_bit(word: &[StackSymbol], pos: &mut usize, level: u8) -> Result<bool, CounterError> {
    match word.get(*pos) {
        Some(StackSymbol::CounterBit { level: l, one }) if *l == level => {
            *pos += 1;
            Ok(*one)
        }
        Some(other) => Err(CounterError::InvalidWord(format!(
            "expected a level-{level} bit at offset {pos}, found `{other}`"
        ))),
        None => Err(CounterError::InvalidWord(format!(
            "word ends at offset {pos}, expected a level-{level} bit"
        ))),
    }
}

/// Adds one to a valid counter word in place of re-encoding: flips the run
/// of 1-bits at the least significant addresses and the first 0-bit above
/// them. Fails on invalid words and on the maximal value.
pub fn increment_counter(
    p: &CounterParams,
    word: &[StackSymbol],
) -> Result<Vec<StackSymbol>, CounterError> {
    let value = decode_counter(p, word)?;
    if value == max_value(p) {
        return Err(CounterError::IncrementOverflow);
    }
    let mut out = word.to_vec();
    // Top-first storage puts the least significant address last, so the
    // flip run is found walking backwards over this word's own bits.
    for sym in out.iter_mut().rev() {
        match sym {
            StackSymbol::CounterBit { level, one } if *level == p.level => {
                let was_one = *one;
                *one = !was_one;
                if !was_one {
                    break;
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

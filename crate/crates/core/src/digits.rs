//! Base-B digit strings, pattern occurrence counting, and the induced
//! sign sequence with its partial and block sums.
//!
//! Counting convention: occurrences of a pattern may overlap. For a
//! pattern containing a nonzero digit, the expansion of `n` is prefixed
//! with `len - 1` zeros before scanning, so patterns with leading zeros
//! (like `011`) are found at the front of the expansion; a longer zero
//! prefix can never add further matches because every match must overlap
//! the nonzero part. For an all-zero pattern the canonical expansion is
//! scanned as is (the expansion of 0 being empty), so `0…0` never matches
//! inside padding that exists only by convention.

use crate::error::{Error, Result};

/// Largest number of digits we ever need for a `u64` plus pattern padding.
const DIGIT_BUF: usize = 68;

/// A nonempty digit word over `{0, …, B-1}` together with its base,
/// most-significant digit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternWord {
    base: u32,
    digits: Vec<u32>,
}

impl PatternWord {
    pub fn new(base: u32, digits: Vec<u32>) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidBase { base });
        }
        if digits.is_empty() {
            return Err(Error::EmptyWord);
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::InvalidDigit { digit: d, base });
        }
        // All downstream arithmetic works in u64 with arguments up to
        // B^(k+1) * n; keep one spare power so strides never wrap.
        if (base as u64).checked_pow(digits.len() as u32 + 1).is_none() {
            return Err(Error::RangeOverflow {
                what: format!("block size for a {}-digit word in base {base}", digits.len()),
            });
        }
        Ok(Self { base, digits })
    }

    /// Parses `"21"` (single-character digits) or `"12,0,3"` (comma form,
    /// needed once digits exceed 9).
    pub fn parse(word: &str, base: u32) -> Result<Self> {
        Self::new(base, parse_digits(word, base)?)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True for the all-zero word `0…0`, which uses the canonical
    /// (unpadded) expansion when counting.
    pub fn is_zero_block(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    pub fn last_digit(&self) -> u32 {
        *self.digits.last().expect("word is nonempty")
    }

    /// The word read as an integer in its base.
    pub fn value(&self) -> u64 {
        self.digits
            .iter()
            .fold(0u64, |acc, &d| acc * self.base as u64 + d as u64)
    }

    /// `B^k` for word length `k`: the block size at which the sign
    /// sequence becomes self-similar.
    pub fn block_size(&self) -> u64 {
        (self.base as u64).pow(self.len() as u32)
    }

    /// Renders the word the way `parse` accepts it.
    pub fn render(&self) -> String {
        render_digits(&self.digits, self.base)
    }
}

impl std::fmt::Display for PatternWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

/// A possibly empty digit string, most-significant first. The canonical
/// expansion of 0 is the empty string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DigitString {
    base: u32,
    digits: Vec<u32>,
}

impl DigitString {
    pub fn new(base: u32, digits: Vec<u32>) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidBase { base });
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::InvalidDigit { digit: d, base });
        }
        Ok(Self { base, digits })
    }

    pub fn empty(base: u32) -> Self {
        Self {
            base,
            digits: Vec::new(),
        }
    }

    pub fn parse(s: &str, base: u32) -> Result<Self> {
        if s.is_empty() {
            return Ok(Self::empty(base));
        }
        Self::new(base, parse_digits(s, base)?)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn render(&self) -> String {
        render_digits(&self.digits, self.base)
    }
}

impl std::fmt::Display for DigitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

fn parse_digits(s: &str, base: u32) -> Result<Vec<u32>> {
    let digits: Vec<u32> = if s.contains(',') {
        s.split(',')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Malformed {
                        detail: format!("digit group {part:?} is not a number"),
                    })
            })
            .collect::<Result<_>>()?
    } else {
        s.chars()
            .map(|c| {
                c.to_digit(10).ok_or(Error::Malformed {
                    detail: format!("character {c:?} is not a digit"),
                })
            })
            .collect::<Result<_>>()?
    };
    if let Some(&d) = digits.iter().find(|&&d| d >= base) {
        return Err(Error::InvalidDigit { digit: d, base });
    }
    Ok(digits)
}

fn render_digits(digits: &[u32], base: u32) -> String {
    if base <= 10 {
        digits.iter().map(|d| char::from(b'0' + *d as u8)).collect()
    } else {
        digits
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Canonical base-B expansion, most-significant first; empty for 0.
pub fn to_digits(n: u64, base: u32) -> Result<DigitString> {
    if base < 2 {
        return Err(Error::InvalidBase { base });
    }
    let mut digits = Vec::new();
    let mut v = n;
    while v > 0 {
        digits.push((v % base as u64) as u32);
        v /= base as u64;
    }
    digits.reverse();
    Ok(DigitString { base, digits })
}

/// Value of a digit string read in its base.
pub fn value_in_base(s: &DigitString) -> u64 {
    s.digits
        .iter()
        .fold(0u64, |acc, &d| acc * s.base as u64 + d as u64)
}

/// `(x + 1) mod B`, the cyclic successor of a digit.
pub fn digit_increment(x: u32, base: u32) -> Result<u32> {
    if base < 2 {
        return Err(Error::InvalidBase { base });
    }
    if x >= base {
        return Err(Error::InvalidDigit { digit: x, base });
    }
    Ok((x + 1) % base)
}

/// Number of (possibly overlapping) occurrences of `w` in the expansion
/// of `n`, under the padding convention described in the module docs.
pub fn count_occurrences(w: &PatternWord, n: u64) -> u32 {
    let base = w.base as u64;
    // Least-significant-first expansion into a fixed buffer; no allocation
    // because this sits on the hot path of every series evaluation.
    let mut lsf = [0u32; DIGIT_BUF];
    let mut len = 0usize;
    let mut v = n;
    while v > 0 {
        lsf[len] = (v % base) as u32;
        v /= base;
        len += 1;
    }
    let k = w.digits.len();
    let pad = if w.is_zero_block() { 0 } else { k - 1 };
    let total = pad + len;
    if total < k {
        return 0;
    }
    // Position j in the padded most-significant-first string:
    // j < pad reads the implicit zero prefix, afterwards the expansion.
    let digit_at = |j: usize| -> u32 {
        if j < pad {
            0
        } else {
            lsf[len - 1 - (j - pad)]
        }
    };
    let mut count = 0u32;
    for start in 0..=(total - k) {
        if (0..k).all(|i| digit_at(start + i) == w.digits[i]) {
            count += 1;
        }
    }
    count
}

/// The sign `(-1)^(occurrence count)`, always `+1` or `-1`.
pub fn sign(w: &PatternWord, n: u64) -> i64 {
    if count_occurrences(w, n) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Streaming prefix sums `S(n) = sign(0) + … + sign(n-1)`, yielding
/// `S(0), S(1), …, S(n_max)` without materializing the whole sequence.
pub fn partial_sums(w: &PatternWord, n_max: u64) -> PartialSums<'_> {
    PartialSums {
        word: w,
        next_n: 0,
        upto: n_max,
        acc: 0,
        done: false,
    }
}

pub struct PartialSums<'a> {
    word: &'a PatternWord,
    next_n: u64,
    upto: u64,
    acc: i64,
    done: bool,
}

impl Iterator for PartialSums<'_> {
    type Item = i64;

    fn next(&mut self) -> Option<i64> {
        if self.done {
            return None;
        }
        let current = self.acc;
        if self.next_n == self.upto {
            self.done = true;
        } else {
            self.acc += sign(self.word, self.next_n);
            self.next_n += 1;
        }
        Some(current)
    }
}

/// Aggregated sign over the aligned block of `V^level` consecutive
/// arguments starting at `V^level * n`, where `V` is the word's block
/// size. Level 0 is the bare sign.
pub fn block_sum(w: &PatternWord, level: u32, n: u64) -> Result<i64> {
    let v = w.block_size();
    // The deepest argument touched is V^level * (n+1) - 1; refuse ranges
    // that leave u64 rather than silently wrapping.
    let span = (v as u128).checked_pow(level).ok_or_else(|| overflow(w, level, n))?;
    let top = span
        .checked_mul(n as u128 + 1)
        .ok_or_else(|| overflow(w, level, n))?;
    if top > u64::MAX as u128 {
        return Err(overflow(w, level, n));
    }
    Ok(block_sum_inner(w, level, n, v))
}

fn block_sum_inner(w: &PatternWord, level: u32, n: u64, v: u64) -> i64 {
    if level == 0 {
        return sign(w, n);
    }
    (0..v)
        .map(|j| block_sum_inner(w, level - 1, v * n + j, v))
        .sum()
}

fn overflow(w: &PatternWord, level: u32, n: u64) -> Error {
    Error::RangeOverflow {
        what: format!(
            "block sum level {level} at n = {n} with block size {}",
            w.block_size()
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(word: &str, base: u32) -> PatternWord {
        PatternWord::parse(word, base).unwrap()
    }

    #[test]
    fn digit_roundtrip() {
        let d = to_digits(6, 2).unwrap();
        assert_eq!(d.digits(), &[1, 1, 0]);
        assert_eq!(value_in_base(&d), 6);

        let zero = to_digits(0, 5).unwrap();
        assert!(zero.is_empty());
        assert_eq!(value_in_base(&zero), 0);

        let d = to_digits(26, 3).unwrap();
        assert_eq!(d.digits(), &[2, 2, 2]);
    }

    #[test]
    fn value_examples() {
        assert_eq!(value_in_base(&DigitString::parse("110", 2).unwrap()), 6);
        assert_eq!(value_in_base(&DigitString::empty(7)), 0);
        assert_eq!(value_in_base(&DigitString::parse("21", 3).unwrap()), 7);
    }

    #[test]
    fn digit_increment_wraps() {
        assert_eq!(digit_increment(1, 2).unwrap(), 0);
        assert_eq!(digit_increment(2, 3).unwrap(), 0);
        assert_eq!(digit_increment(0, 3).unwrap(), 1);
        assert!(digit_increment(3, 3).is_err());
    }

    #[test]
    fn invalid_inputs_are_reported() {
        assert_eq!(
            PatternWord::parse("9", 3).unwrap_err().to_string(),
            "digit 9 invalid for base 3"
        );
        assert!(matches!(
            PatternWord::new(1, vec![0]),
            Err(Error::InvalidBase { base: 1 })
        ));
        assert!(matches!(PatternWord::new(2, vec![]), Err(Error::EmptyWord)));
    }

    #[test]
    fn occurrence_counting_matches_worked_cases() {
        assert_eq!(count_occurrences(&w("22", 3), 26), 2);
        assert_eq!(count_occurrences(&w("011", 2), 6), 1);
        assert_eq!(count_occurrences(&w("0", 2), 0), 0);
        // 10 = 1010 in binary: one hit of the 4-digit pattern.
        assert_eq!(count_occurrences(&w("1010", 2), 10), 1);
        // 21 = 10101: the second window is 0101, still one hit.
        assert_eq!(count_occurrences(&w("1010", 2), 21), 1);
        // 42 = 101010: two overlapping hits.
        assert_eq!(count_occurrences(&w("1010", 2), 42), 2);
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign(&w("1", 3), 5), -1);
        assert_eq!(sign(&w("11", 2), 3), -1);
        assert_eq!(sign(&w("2", 3), 0), 1);
        // Zero count at n = 0 holds for the all-zero word too.
        assert_eq!(sign(&w("00", 2), 0), 1);
    }

    #[test]
    fn sign_matches_parity_for_single_one_base_three() {
        // Base-3 digit sum of n has the parity of n itself, so counting the
        // digit 1 gives the plain alternating sign. Checked directly.
        let word = w("1", 3);
        for n in 0..200u64 {
            let ones = to_digits(n, 3)
                .unwrap()
                .digits()
                .iter()
                .filter(|&&d| d == 1)
                .count() as u32;
            assert_eq!(sign(&word, n), if ones % 2 == 0 { 1 } else { -1 });
            // (digit sum) == n mod 2, and digits 0/2 are even.
            assert_eq!(ones % 2, (n % 2) as u32);
        }
    }

    #[test]
    fn partial_sums_stream() {
        let word = w("1", 2);
        let sums: Vec<i64> = partial_sums(&word, 12).collect();
        assert_eq!(sums.len(), 13);
        assert_eq!(sums[0], 0);
        for (n, pair) in sums.windows(2).enumerate() {
            assert_eq!(pair[1] - pair[0], sign(&word, n as u64));
        }
        assert!(sums.iter().all(|s| s.abs() <= 1));
    }

    #[test]
    fn partial_sums_value_frozen() {
        // Brute-force sum of signs for n < 16, pinned once by hand.
        let word = w("11", 2);
        let s16 = partial_sums(&word, 16).last().unwrap();
        assert_eq!(s16, 4);
    }

    #[test]
    fn block_sum_level_zero_is_sign() {
        for n in 0..50 {
            assert_eq!(block_sum(&w("21", 3), 0, n).unwrap(), sign(&w("21", 3), n));
        }
    }

    #[test]
    fn block_sum_direct_agreement() {
        for (word, base) in [("11", 2), ("21", 3), ("1", 3)] {
            let word = w(word, base);
            let v = word.block_size();
            for level in 1..=3u32 {
                let width = v.pow(level);
                for n in 0..20u64 {
                    let direct: i64 = (width * n..width * (n + 1))
                        .map(|m| sign(&word, m))
                        .sum();
                    assert_eq!(block_sum(&word, level, n).unwrap(), direct);
                }
            }
        }
    }

    #[test]
    fn block_sum_frozen_value() {
        // a(0)+a(1)+a(2)+a(3) for the pattern 11 in base 2: +1+1+1-1.
        assert_eq!(block_sum(&w("11", 2), 1, 0).unwrap(), 2);
    }

    #[test]
    fn block_sum_overflow_guard() {
        let word = w("11", 2);
        assert!(matches!(
            block_sum(&word, 40, u64::MAX / 2),
            Err(Error::RangeOverflow { .. })
        ));
    }

    #[test]
    fn render_parse_roundtrip() {
        let word = w("102", 3);
        assert_eq!(word.render(), "102");
        let wide = PatternWord::new(16, vec![12, 0, 3]).unwrap();
        assert_eq!(wide.render(), "12,0,3");
        assert_eq!(PatternWord::parse("12,0,3", 16).unwrap(), wide);
    }
}

//! Symbolic rewrite engine for sums of the shape
//! `c * Σ_n sign(B^s n + m) f(B^t n + x)`.
//!
//! Starting from a seed identity that relates the plain sign series to a
//! single deeper term, each rewrite round strips one digit from the sign
//! argument. Depending on whether the sign argument's digit block is a
//! suffix of the pattern word, the digit either peels off freely or the
//! term splits across the base. After `|w|` rounds every sign argument is
//! plain `n` and the surviving linear forms with their coefficients are
//! the finite identity set: `Σ_n sign(n) Σ_l c_l f(l(n)) = K f(0)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::digits::{sign, DigitString, PatternWord};
use crate::error::{Error, Result};

/// A degree-one integer form `l(n) = B^stride_exp * n + offset`.
///
/// `offset < B^stride_exp` except for the identity form `(0, 0)`, so the
/// forms with equal stride partition the integers by residue. Ordering is
/// by `(stride_exp, offset)`, which fixes serialization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearForm {
    pub stride_exp: u32,
    pub offset: u64,
}

impl LinearForm {
    pub fn new(stride_exp: u32, offset: u64, base: u32) -> Result<Self> {
        let stride = (base as u64)
            .checked_pow(stride_exp)
            .ok_or(Error::InvalidLinearForm {
                stride_exp,
                offset,
                base,
            })?;
        if offset >= stride {
            return Err(Error::InvalidLinearForm {
                stride_exp,
                offset,
                base,
            });
        }
        Ok(Self { stride_exp, offset })
    }

    pub const IDENTITY: LinearForm = LinearForm {
        stride_exp: 0,
        offset: 0,
    };

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn apply(&self, base: u32, n: u64) -> u64 {
        (base as u64).pow(self.stride_exp) * n + self.offset
    }

    /// Renders like `n`, `2n`, `4n+1` for the given base.
    pub fn render(&self, base: u32) -> String {
        let stride = (base as u64).pow(self.stride_exp);
        match (stride, self.offset) {
            (1, 0) => "n".to_string(),
            (s, 0) => format!("{s}n"),
            (1, x) => format!("n+{x}"),
            (s, x) => format!("{s}n+{x}"),
        }
    }
}

/// One working term of the rewrite: `coeff * Σ_n sign(B^sign_exp n +
/// sign_off) f(B^arg_exp n + arg_off)`.
///
/// Invariants, checked at construction: `sign_off < B^sign_exp`,
/// `sign_exp <= arg_exp`, and the digits of `arg_off` at positions
/// `arg_exp-1 … arg_exp-sign_exp` equal the (zero-padded) digits of
/// `sign_off`. The seed satisfies this and both rewrite cases preserve it;
/// it is what keeps every produced offset in range without carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SumTerm {
    pub coeff: i64,
    pub sign_exp: u32,
    pub sign_off: u64,
    pub arg_exp: u32,
    pub arg_off: u64,
}

impl SumTerm {
    pub fn new(base: u32, coeff: i64, sign_exp: u32, sign_off: u64, arg_exp: u32, arg_off: u64) -> Self {
        let b = base as u64;
        let pow = |e: u32| b.checked_pow(e).expect("stride fits in u64");
        assert!(sign_exp <= arg_exp, "sign depth {sign_exp} exceeds stride {arg_exp}");
        assert!(
            sign_off < pow(sign_exp),
            "sign offset {sign_off} out of range for depth {sign_exp}"
        );
        assert!(
            arg_off < pow(arg_exp),
            "offset {arg_off} out of range for stride exponent {arg_exp}"
        );
        for i in 0..sign_exp {
            let arg_digit = arg_off / pow(arg_exp - 1 - i) % b;
            let sign_digit = sign_off / pow(sign_exp - 1 - i) % b;
            assert_eq!(
                arg_digit, sign_digit,
                "offset digits misaligned with sign digits at position {i}"
            );
        }
        Self {
            coeff,
            sign_exp,
            sign_off,
            arg_exp,
            arg_off,
        }
    }

    /// The sign argument's digits `b_1 … b_s`, zero-padded to the depth.
    fn sign_digits(&self, base: u32) -> Vec<u32> {
        let mut out = vec![0u32; self.sign_exp as usize];
        let mut v = self.sign_off;
        for slot in out.iter_mut().rev() {
            *slot = (v % base as u64) as u32;
            v /= base as u64;
        }
        out
    }
}

/// True iff `u` equals the trailing digits of `w`; the empty string is a
/// suffix of everything, strings longer than `w` never are.
pub fn is_suffix(u: &DigitString, w: &PatternWord) -> bool {
    suffix_slices(u.digits(), w.digits())
}

fn suffix_slices(u: &[u32], w: &[u32]) -> bool {
    u.len() <= w.len() && u == &w[w.len() - u.len()..]
}

fn value_of(digits: &[u32], base: u32) -> u64 {
    digits
        .iter()
        .fold(0u64, |acc, &d| acc * base as u64 + d as u64)
}

/// The seed: `done` carries the identity form with +1 and each residue
/// form `Bn + j` with -1; `pending` carries the single depth-`|w|` term
/// with coefficient -2 anchored at the word's own value. For the all-zero
/// word the pending sum natively starts at index 1; rebasing it to 0 adds
/// the sign(0) f(0) = f(0) row, which lands in `constant_f0 = -2`.
pub fn initial_termset(w: &PatternWord) -> (Vec<SumTerm>, Vec<(LinearForm, i64)>, i64) {
    let base = w.base();
    let k = w.len() as u32;
    let v = w.value();
    let mut done = vec![(LinearForm::IDENTITY, 1i64)];
    for j in 0..base as u64 {
        done.push((LinearForm { stride_exp: 1, offset: j }, -1));
    }
    let pending = vec![SumTerm::new(base, -2, k, v, k, v)];
    let constant_f0 = if w.is_zero_block() { -2 } else { 0 };
    (pending, done, constant_f0)
}

/// One rewrite of a term with sign depth `s >= 1`.
///
/// If the sign digit block is not a suffix of `w`, the last sign digit
/// peels off: depth drops by one, the linear form is untouched.
///
/// If it is a suffix, the term splits: the lead digit `b_1` moves out of
/// the sign argument into the index (dividing the stride by B and
/// removing `b_1` from the offset), at the price of one corrective term
/// per digit `b != b_1` whose sign block (`b_1` replaced by `b`) is
/// already known not to be a suffix, so its own peel is folded in.
pub fn apply_step(term: &SumTerm, w: &PatternWord) -> Result<Vec<SumTerm>> {
    if term.sign_exp == 0 {
        return Err(Error::NothingToRewrite);
    }
    let base = w.base();
    let b = base as u64;
    let digits = term.sign_digits(base);
    let s = term.sign_exp;
    let t = term.arg_exp;
    let mut out = Vec::new();
    if !suffix_slices(&digits, w.digits()) {
        // Drop the least significant sign digit.
        out.push(SumTerm::new(
            base,
            term.coeff,
            s - 1,
            value_of(&digits[..digits.len() - 1], base),
            t,
            term.arg_off,
        ));
    } else {
        let b1 = digits[0] as u64;
        let step = b.pow(t - 1);
        out.push(SumTerm::new(
            base,
            term.coeff,
            s - 1,
            value_of(&digits[1..], base),
            t - 1,
            term.arg_off - step * b1,
        ));
        for other in 0..b {
            if other == b1 {
                continue;
            }
            // Replacement block with the peel already applied: digit
            // `other`, then b_2 … b_{s-1} (empty when s = 1).
            let replaced = if s >= 2 {
                let mut d = Vec::with_capacity(s as usize - 1);
                d.push(other as u32);
                d.extend_from_slice(&digits[1..digits.len() - 1]);
                d
            } else {
                Vec::new()
            };
            out.push(SumTerm::new(
                base,
                -term.coeff,
                s - 1,
                value_of(&replaced, base),
                t,
                term.arg_off + step * other - step * b1,
            ));
        }
    }
    Ok(out)
}

/// The finished identity set: `Σ_{n>=0} sign(n) Σ_l c_l f(l(n)) =
/// constant_f0 * f(0)` for every function f making both sides converge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentitySet {
    word: PatternWord,
    terms: BTreeMap<LinearForm, i64>,
    constant_f0: i64,
}

impl IdentitySet {
    pub fn word(&self) -> &PatternWord {
        &self.word
    }

    pub fn terms(&self) -> &BTreeMap<LinearForm, i64> {
        &self.terms
    }

    pub fn constant_f0(&self) -> i64 {
        self.constant_f0
    }

    /// Coefficient of the identity form `n`, 0 when absent.
    pub fn identity_coeff(&self) -> i64 {
        self.terms.get(&LinearForm::IDENTITY).copied().unwrap_or(0)
    }

    /// The same identity multiplied through by -1 when needed so the
    /// identity form `n` carries a positive coefficient; used wherever a
    /// fixed orientation matters (closed forms, reported partial sums).
    pub fn oriented_identity_positive(&self) -> IdentitySet {
        if self.identity_coeff() >= 0 {
            return self.clone();
        }
        IdentitySet {
            word: self.word.clone(),
            terms: self.terms.iter().map(|(l, c)| (*l, -c)).collect(),
            constant_f0: -self.constant_f0,
        }
    }
}

/// Runs the full rewrite for `w`. Exactly `|w|` rounds: every round
/// lowers each pending term's sign depth by one, merging equal keys and
/// dropping cancelled terms as it goes.
pub fn derive(w: &PatternWord) -> IdentitySet {
    let base = w.base();
    let (pending, done, constant_f0) = initial_termset(w);
    let mut terms: BTreeMap<LinearForm, i64> = BTreeMap::new();
    for (form, coeff) in done {
        *terms.entry(form).or_insert(0) += coeff;
    }
    // Keyed by (sign_off, arg_exp, arg_off); the depth is uniform per round.
    let mut layer: BTreeMap<(u64, u32, u64), i64> = pending
        .iter()
        .map(|t| ((t.sign_off, t.arg_exp, t.arg_off), t.coeff))
        .collect();
    let mut depth = w.len() as u32;
    let cap = w.block_size();
    let mut rounds = 0u32;
    while depth > 0 {
        let mut next: BTreeMap<(u64, u32, u64), i64> = BTreeMap::new();
        for (&(sign_off, arg_exp, arg_off), &coeff) in &layer {
            let term = SumTerm::new(base, coeff, depth, sign_off, arg_exp, arg_off);
            for produced in apply_step(&term, w).expect("depth > 0") {
                let key = (produced.sign_off, produced.arg_exp, produced.arg_off);
                let slot = next.entry(key).or_insert(0);
                *slot += produced.coeff;
                if *slot == 0 {
                    next.remove(&key);
                }
            }
        }
        layer = next;
        debug_assert!(layer.len() as u64 <= cap, "pending terms exceed block size");
        depth -= 1;
        rounds += 1;
    }
    debug_assert_eq!(rounds, w.len() as u32);
    for ((sign_off, arg_exp, arg_off), coeff) in layer {
        debug_assert_eq!(sign_off, 0);
        let form = LinearForm {
            stride_exp: arg_exp,
            offset: arg_off,
        };
        let slot = terms.entry(form).or_insert(0);
        *slot += coeff;
        if *slot == 0 {
            terms.remove(&form);
        }
    }
    let id = IdentitySet {
        word: w.clone(),
        terms,
        constant_f0,
    };
    debug_assert!(id.terms.len() as u64 <= w.base() as u64 + 1 + w.block_size());
    id
}

/// Exact residual of the identity against a finitely supported integer
/// table: `Σ_{n<=horizon} sign(n) Σ_l c_l table[l(n)] - constant_f0 *
/// table[0]`. Must be 0 for a correct identity set. Every linear form
/// grows at least as fast as `n`, so any horizon at or beyond the table's
/// last support point is enough; `None` picks exactly that.
pub fn exact_check(
    id: &IdentitySet,
    table: &BTreeMap<u64, i64>,
    horizon: Option<u64>,
) -> Result<i128> {
    let required = table.keys().next_back().copied().unwrap_or(0);
    let horizon = match horizon {
        None => required,
        Some(h) if h < required => {
            return Err(Error::HorizonTooSmall {
                given: h,
                required,
            })
        }
        Some(h) => h,
    };
    let base = id.word.base();
    let mut acc: i128 = 0;
    for n in 0..=horizon {
        let mut row: i128 = 0;
        for (form, &coeff) in &id.terms {
            if let Some(&value) = table.get(&form.apply(base, n)) {
                row += coeff as i128 * value as i128;
            }
        }
        if row != 0 {
            acc += sign(&id.word, n) as i128 * row;
        }
    }
    Ok(acc - id.constant_f0 as i128 * table.get(&0).copied().unwrap_or(0) as i128)
}

// --- serialization -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermWire {
    stride_exp: u32,
    offset: u64,
    coeff: i64,
}

#[derive(Serialize, Deserialize)]
struct IdentitySetWire {
    word: String,
    base: u32,
    terms: Vec<TermWire>,
    constant_f0: i64,
}

impl IdentitySet {
    pub fn to_json(&self) -> String {
        let wire = IdentitySetWire {
            word: self.word.render(),
            base: self.word.base(),
            terms: self
                .terms
                .iter()
                .map(|(l, &c)| TermWire {
                    stride_exp: l.stride_exp,
                    offset: l.offset,
                    coeff: c,
                })
                .collect(),
            constant_f0: self.constant_f0,
        };
        serde_json::to_string(&wire).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: IdentitySetWire = serde_json::from_str(text).map_err(|e| Error::Malformed {
            detail: e.to_string(),
        })?;
        let word = PatternWord::parse(&wire.word, wire.base)?;
        let mut terms = BTreeMap::new();
        for t in wire.terms {
            let form = LinearForm::new(t.stride_exp, t.offset, wire.base)?;
            if t.coeff == 0 {
                return Err(Error::Malformed {
                    detail: format!("zero coefficient on form {}", form.render(wire.base)),
                });
            }
            if terms.insert(form, t.coeff).is_some() {
                return Err(Error::Malformed {
                    detail: format!("duplicate form {}", form.render(wire.base)),
                });
            }
        }
        Ok(IdentitySet {
            word,
            terms,
            constant_f0: wire.constant_f0,
        })
    }
}

//! Empirical verification of the sign sequence's structure: the
//! digit-pairing witnesses behind the cancellation argument, the block-sum
//! bounds, and the three-case growth of the partial sums.
//!
//! The pairing construction is validated-then-trusted: the closed-form
//! recipe is tried first and checked exhaustively on an initial range; if
//! it ever failed, an explicit search over all digit-block pairs takes
//! over, and the report says so. Bound checks never assume; they sweep
//! and report violations.

use serde::Serialize;

use crate::digits::{
    block_sum, digit_increment, partial_sums, sign, to_digits, DigitString, PatternWord,
};
use crate::error::{Error, Result};
use crate::eval::{sign_sum_growth, Growth};
use crate::rewrite::LinearForm;

/// A pair of same-length digit blocks `v, v'` such that appending either
/// block plus a fixed tail `u` to any expansion produces opposite signs:
/// `sign(B^{k+l} n + B^l v + u) = -sign(B^{k+l} n + B^l v' + u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingWitness {
    u: DigitString,
    v: DigitString,
    v_prime: DigitString,
    d: usize,
    via_fallback: bool,
    checked_upto: u64,
}

impl PairingWitness {
    pub fn u(&self) -> &DigitString {
        &self.u
    }

    pub fn v(&self) -> &DigitString {
        &self.v
    }

    pub fn v_prime(&self) -> &DigitString {
        &self.v_prime
    }

    /// Length of the longest prefix of `u` that is a proper suffix of the
    /// pattern; 0 when the plain pattern itself was usable.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn via_fallback(&self) -> bool {
        self.via_fallback
    }

    pub fn checked_upto(&self) -> u64 {
        self.checked_upto
    }

    /// The two opposite-sign arguments as linear forms in `n`.
    pub fn forms(&self, w: &PatternWord) -> (LinearForm, LinearForm) {
        let base = w.base() as u64;
        let k = w.len() as u32;
        let l = self.u.len() as u32;
        let tail = crate::digits::value_in_base(&self.u);
        let stride_exp = k + l;
        let off = |v: &DigitString| base.pow(l) * crate::digits::value_in_base(v) + tail;
        (
            LinearForm {
                stride_exp,
                offset: off(&self.v),
            },
            LinearForm {
                stride_exp,
                offset: off(&self.v_prime),
            },
        )
    }

    pub fn describe(&self, w: &PatternWord) -> String {
        let (a, b) = self.forms(w);
        let base = w.base();
        format!(
            "u=\"{}\" v={} v'={} d={} {}: sign({}) = -sign({}) for n < {}",
            self.u.render(),
            self.v.render(),
            self.v_prime.render(),
            self.d,
            if self.via_fallback {
                "(fallback search)"
            } else {
                "(recipe)"
            },
            a.render(base),
            b.render(base),
            self.checked_upto
        )
    }
}

/// First `n < limit` where the flip fails, or `None` if it holds
/// throughout.
fn flip_counterexample(
    w: &PatternWord,
    u_val: u64,
    u_len: u32,
    v_val: u64,
    vp_val: u64,
    limit: u64,
) -> Option<u64> {
    let base = w.base() as u64;
    let k = w.len() as u32;
    let stride = base.pow(k + u_len);
    let tail = base.pow(u_len);
    let off_a = tail * v_val + u_val;
    let off_b = tail * vp_val + u_val;
    (0..limit).find(|&n| sign(w, stride * n + off_a) != -sign(w, stride * n + off_b))
}

fn pad_to(base: u32, value: u64, len: usize) -> DigitString {
    let raw = to_digits(value, base).expect("base validated");
    let mut digits = vec![0u32; len - raw.len()];
    digits.extend_from_slice(raw.digits());
    DigitString::new(base, digits).expect("digits below base")
}

/// Constructs and validates a sign-flip pair for pattern `w` and tail `u`.
///
/// Recipe: let `d` be the longest prefix of `u` that is a proper suffix of
/// `w`. With `d = 0` take `v = w`; otherwise prepend `d` copies of the
/// incremented first pattern digit to the first `k-d` pattern digits.
/// Either way `v'` is `v` with its last digit incremented mod B. The pair
/// is checked for all `n < max(10^4, B^(k+1))`; on failure an exhaustive
/// search over all ordered block pairs runs with the same validation.
pub fn pairing_witness(w: &PatternWord, u: &DigitString) -> Result<PairingWitness> {
    if u.base() != w.base() {
        return Err(Error::Malformed {
            detail: format!("tail is base {}, pattern is base {}", u.base(), w.base()),
        });
    }
    let base = w.base();
    let k = w.len();
    let limit = 10_000u64.max((base as u64).pow(k as u32 + 1));
    let u_val = crate::digits::value_in_base(u);
    let u_len = u.len() as u32;

    let mut d = 0usize;
    for cand in (1..=u.len().min(k - 1)).rev() {
        if u.digits()[..cand] == w.digits()[k - cand..] {
            d = cand;
            break;
        }
    }
    let v_digits: Vec<u32> = if d == 0 {
        w.digits().to_vec()
    } else {
        let lead = digit_increment(w.digits()[0], base)?;
        let mut out = vec![lead; d];
        out.extend_from_slice(&w.digits()[..k - d]);
        out
    };
    let mut vp_digits = v_digits.clone();
    let last = vp_digits.last_mut().expect("length k >= 1");
    *last = digit_increment(*last, base)?;

    let v = DigitString::new(base, v_digits)?;
    let v_prime = DigitString::new(base, vp_digits)?;
    let v_val = crate::digits::value_in_base(&v);
    let vp_val = crate::digits::value_in_base(&v_prime);
    let recipe_failure = flip_counterexample(w, u_val, u_len, v_val, vp_val, limit);
    if recipe_failure.is_none() {
        return Ok(PairingWitness {
            u: u.clone(),
            v,
            v_prime,
            d,
            via_fallback: false,
            checked_upto: limit,
        });
    }

    // Exhaustive fallback: every ordered pair of distinct length-k blocks,
    // with a cheap prefilter before the full range.
    let block_count = (base as u64).pow(k as u32);
    for a in 0..block_count {
        for b in 0..block_count {
            if a == b {
                continue;
            }
            if flip_counterexample(w, u_val, u_len, a, b, 64.min(limit)).is_some() {
                continue;
            }
            if flip_counterexample(w, u_val, u_len, a, b, limit).is_none() {
                return Ok(PairingWitness {
                    u: u.clone(),
                    v: pad_to(base, a, k),
                    v_prime: pad_to(base, b, k),
                    d,
                    via_fallback: true,
                    checked_upto: limit,
                });
            }
        }
    }
    Err(Error::WitnessExhausted {
        k,
        detail: format!(
            "pattern {} base {base}, tail \"{}\": recipe pair ({}, {}) fails at n = {}, and no block pair flips signs for all n < {limit}",
            w.render(),
            u.render(),
            v.render(),
            v_prime.render(),
            recipe_failure.unwrap_or(0),
        ),
    })
}

/// One bound violation: the observed magnitude exceeded the bound at `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub n: u64,
    pub observed: f64,
    pub bound: f64,
}

/// Outcome of a sweep check. At most 32 violations are stored; the count
/// is always complete, and `pass` means the count is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub checked: u64,
    pub violations: Vec<Violation>,
    pub total_violations: u64,
    pub pass: bool,
}

const MAX_STORED_VIOLATIONS: usize = 32;

impl BoundReport {
    fn from_violations(checked: u64, all: impl IntoIterator<Item = Violation>) -> Self {
        let mut stored = Vec::new();
        let mut total = 0u64;
        for violation in all {
            if stored.len() < MAX_STORED_VIOLATIONS {
                stored.push(violation);
            }
            total += 1;
        }
        BoundReport {
            checked,
            violations: stored,
            total_violations: total,
            pass: total == 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

/// Checks `|b_i(n)| <= (V-2)^i` for `1 <= i <= level_max` and
/// `0 <= n < n_limit`, where `b_i` aggregates `V^i` consecutive signs.
pub fn check_block_bounds(w: &PatternWord, level_max: u32, n_limit: u64) -> Result<BoundReport> {
    let v = w.block_size();
    let mut violations = Vec::new();
    for level in 1..=level_max {
        let bound = (v - 2).pow(level);
        for n in 0..n_limit {
            let observed = block_sum(w, level, n)?.unsigned_abs();
            if observed > bound {
                violations.push(Violation {
                    n,
                    observed: observed as f64,
                    bound: bound as f64,
                });
            }
        }
    }
    Ok(BoundReport::from_violations(
        n_limit * level_max as u64,
        violations,
    ))
}

/// Smallest `e` with `3^e >= n`.
fn ceil_log3(n: u64) -> u32 {
    let mut e = 0u32;
    let mut p = 1u64;
    while p < n {
        p *= 3;
        e += 1;
    }
    e
}

/// Sweeps `S(n)` for `n <= n_limit` against the growth bound of the
/// word's class: 1 in the bounded case, `2*ceil(log3 n)` for `n >= 2` in
/// the logarithmic case, `2(V-1) n^alpha` for `n >= 1` in the power case.
pub fn check_s_growth(w: &PatternWord, n_limit: u64) -> BoundReport {
    let growth = sign_sum_growth(w);
    let v = w.block_size();
    let mut violations = Vec::new();
    for (n, s) in partial_sums(w, n_limit).enumerate() {
        let n = n as u64;
        let observed = s.unsigned_abs() as f64;
        let bound = match growth {
            Growth::Bounded => 1.0,
            Growth::Logarithmic => {
                if n < 2 {
                    continue;
                }
                2.0 * ceil_log3(n) as f64
            }
            Growth::Power(alpha) => {
                if n < 1 {
                    continue;
                }
                2.0 * (v - 1) as f64 * (n as f64).powf(alpha)
            }
        };
        if observed > bound {
            violations.push(Violation { n, observed, bound });
        }
    }
    BoundReport::from_violations(n_limit + 1, violations)
}

/// Log-log fit of the running maximum of `|S(n)|` over a geometric grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaFit {
    pub fitted: f64,
    pub residual: f64,
    pub theoretical: f64,
    pub points: usize,
}

/// Least-squares slope of `log max_{m<=n} |S(m)|` against `log n` over a
/// geometric grid on `[100, n_limit]`. Only meaningful for power-class
/// words; the sub-power classes are rejected.
pub fn estimate_alpha(w: &PatternWord, n_limit: u64) -> Result<AlphaFit> {
    let growth = sign_sum_growth(w);
    let Growth::Power(theoretical) = growth else {
        return Err(Error::NotPowerCase {
            case: growth.describe(),
        });
    };
    if n_limit < 1000 {
        return Err(Error::Malformed {
            detail: format!("fit range {n_limit} too small; need at least 1000"),
        });
    }
    // Eight sample points per decade.
    let ratio = 10f64.powf(1.0 / 8.0);
    let mut next_target = 100f64;
    let mut max_abs = 0i64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (n, s) in partial_sums(w, n_limit).enumerate() {
        max_abs = max_abs.max(s.abs());
        if n as f64 >= next_target {
            if max_abs > 0 {
                xs.push((n as f64).ln());
                ys.push((max_abs as f64).ln());
            }
            while next_target <= n as f64 {
                next_target *= ratio;
            }
        }
    }
    if xs.len() < 2 {
        return Err(Error::Malformed {
            detail: "not enough nonzero samples for a fit".to_string(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = cov / var;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    Ok(AlphaFit {
        fitted: slope,
        residual: (rss / n).sqrt(),
        theoretical,
        points: xs.len(),
    })
}

/// Recomputes `S(n)` through the positional block decomposition: writing
/// `n` in base `V` as `Σ n_i V^i`, each position contributes the block
/// sums `b_i` of the `n_i` aligned blocks below the digit. Exactly equal
/// to the direct prefix sum; used as a structural cross-check.
pub fn partial_sum_by_blocks(w: &PatternWord, n: u64) -> Result<i64> {
    let v = w.block_size();
    let mut total = 0i64;
    let mut level = 0u32;
    let mut span = 1u64; // V^level, overflow-guarded by the loop bound
    while span <= n {
        let digit = n / span % v;
        let q = n / (span * v);
        for c in 0..digit {
            total += block_sum(w, level, q * v + c)?;
        }
        level += 1;
        match span.checked_mul(v) {
            Some(next) => span = next,
            None => break,
        }
    }
    Ok(total)
}

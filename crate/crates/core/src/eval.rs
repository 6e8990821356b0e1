//! Numerical evaluation of the sign-weighted series and products.
//!
//! All float accumulation uses compensated (Neumaier) summation over
//! fixed-size index chunks. Chunks are mapped in parallel but always
//! merged in index order, so results are bit-identical no matter how many
//! worker threads run. Partial values recorded at chunk boundaries in the
//! trailing decade feed a heuristic error estimate `C * N^(alpha+beta)`:
//! the growth exponent is known, the constant is fitted from the run
//! itself, and the estimate is exactly that: an estimate, not a bound.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::ProductIdentity;
use crate::digits::{sign, PatternWord};
use crate::error::{Error, Result};
use crate::rewrite::{IdentitySet, LinearForm};

/// Function catalog for the series. The catalog is closed so that the
/// convergence check stays decidable.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `L(n) = log2(n / (n+1))` for `n >= 1`, `L(0) = 0`. Exponentiating
    /// identities in `L` yields infinite products of rationals.
    L,
    /// `n^(-p)` for `n >= 1`, `0` at `n = 0`; `p` must be positive.
    Power(f64),
    /// Finitely supported integer table; sums against it are exact.
    Table(BTreeMap<u64, i64>),
}

impl FunctionSpec {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::InvalidPowerExponent { p });
        }
        Ok(FunctionSpec::Power(p))
    }

    /// Decay exponent `beta` with `f(n) = O(n^beta)`; `None` for tables,
    /// which vanish outright beyond their support.
    pub fn beta(&self) -> Option<f64> {
        match self {
            FunctionSpec::L => Some(-1.0),
            FunctionSpec::Power(p) => Some(-p),
            FunctionSpec::Table(_) => None,
        }
    }

    pub fn value(&self, arg: u64) -> f64 {
        match self {
            FunctionSpec::L => {
                if arg == 0 {
                    0.0
                } else {
                    // log2(arg / (arg+1)) without forming the near-1 ratio.
                    -(1.0 / arg as f64).ln_1p() / std::f64::consts::LN_2
                }
            }
            FunctionSpec::Power(p) => {
                if arg == 0 {
                    0.0
                } else {
                    (arg as f64).powf(-p)
                }
            }
            FunctionSpec::Table(t) => t.get(&arg).copied().unwrap_or(0) as f64,
        }
    }
}

/// Growth class of the sign partial sums `S(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth {
    /// `|S(n)| <= 1`: base 2, single-digit patterns.
    Bounded,
    /// `|S(n)| = O(log n)`: base 3, single-digit patterns.
    Logarithmic,
    /// `|S(n)| = O(n^alpha)` with `alpha = log_V(V-2) < 1`, `V = B^k`.
    Power(f64),
}

impl Growth {
    /// Exponent used by the error model; 0 for the sub-power classes.
    pub fn alpha(&self) -> f64 {
        match self {
            Growth::Power(a) => *a,
            _ => 0.0,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Growth::Bounded => "bounded".to_string(),
            Growth::Logarithmic => "logarithmic".to_string(),
            Growth::Power(a) => format!("power({a:.5})"),
        }
    }
}

/// Classifies the partial-sum growth of the sign sequence from the base
/// and pattern length alone.
pub fn sign_sum_growth(w: &PatternWord) -> Growth {
    let (b, k) = (w.base(), w.len() as u32);
    match (b, k) {
        (2, 1) => Growth::Bounded,
        (3, 1) => Growth::Logarithmic,
        _ => {
            let v = (b as f64).powi(k as i32);
            Growth::Power((v - 2.0).ln() / v.ln())
        }
    }
}

/// Whether the series against `f` is guaranteed to converge: tables
/// always; otherwise the decay must beat the partial-sum growth
/// (`beta < 0` in the sub-power classes, `beta < -alpha` in the power
/// class).
pub fn admissible(f: &FunctionSpec, w: &PatternWord) -> bool {
    let Some(beta) = f.beta() else { return true };
    match sign_sum_growth(w) {
        Growth::Bounded | Growth::Logarithmic => beta < 0.0,
        Growth::Power(alpha) => beta < -alpha,
    }
}

fn admissibility_error(f: &FunctionSpec, w: &PatternWord) -> Error {
    let required = match sign_sum_growth(w) {
        Growth::Bounded | Growth::Logarithmic => 0.0,
        Growth::Power(alpha) => -alpha,
    };
    Error::NotAdmissible {
        beta: f.beta().unwrap_or(f64::NEG_INFINITY),
        required,
    }
}

/// Result of one series evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub value: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub error_estimate: f64,
    pub admissible: bool,
}

// --- compensated summation ------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

// --- chunked deterministic evaluation --------------------------------------

const CHUNK: u64 = 1 << 16;

/// Evaluates `Σ_{n=0..=n_max} sign(w, sign_form(n)) * row(n)` with fixed
/// chunking and in-order merge; returns the value and the partial values
/// at chunk boundaries inside the trailing decade (for the error fit).
fn chunked_sum<R>(
    w: &PatternWord,
    sign_form: LinearForm,
    n_max: u64,
    row: R,
) -> (f64, Vec<(u64, f64)>)
where
    R: Fn(u64) -> f64 + Sync,
{
    let base = w.base();
    let total = n_max + 1;
    let cutoff = total / 10;
    let term = |n: u64| sign(w, sign_form.apply(base, n)) as f64 * row(n);

    if total <= 4 * CHUNK {
        // Serial path with synthetic checkpoints; small enough that the
        // parallel machinery would only add noise.
        let step = (total / 12).max(1);
        let mut acc = Neumaier::default();
        let mut checkpoints = Vec::new();
        for n in 0..total {
            acc.add(term(n));
            if n + 1 < total && (n + 1) % step == 0 && n >= cutoff {
                checkpoints.push((n, acc.value()));
            }
        }
        return (acc.value(), checkpoints);
    }

    let nchunks = total.div_ceil(CHUNK);
    let partials: Vec<Neumaier> = (0..nchunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let mut acc = Neumaier::default();
            for n in lo..hi {
                acc.add(term(n));
            }
            acc
        })
        .collect();
    let mut cum = Neumaier::default();
    let mut checkpoints = Vec::new();
    for (ci, partial) in partials.iter().enumerate() {
        cum.merge(partial);
        let end = ((ci as u64 + 1) * CHUNK).min(total) - 1;
        if end >= cutoff && end < n_max {
            checkpoints.push((end, cum.value()));
        }
    }
    (cum.value(), checkpoints)
}

/// Fits `|final - partial| ~ C * n^exponent` over the checkpoints, taking
/// the largest implied constant, and extrapolates at `n_max`.
fn fitted_error(value: f64, checkpoints: &[(u64, f64)], exponent: f64, n_max: u64) -> f64 {
    let mut c_hat = 0.0f64;
    for &(n, v) in checkpoints {
        if n == 0 {
            continue;
        }
        let scale = (n as f64).powf(exponent);
        if scale > 0.0 {
            c_hat = c_hat.max((value - v).abs() / scale);
        }
    }
    c_hat * (n_max as f64).powf(exponent)
}

fn check_argument_range(forms: &[LinearForm], base: u32, n_max: u64) -> Result<()> {
    for form in forms {
        let stride = (base as u64).checked_pow(form.stride_exp);
        let top = stride
            .and_then(|s| s.checked_mul(n_max))
            .and_then(|v| v.checked_add(form.offset));
        if top.is_none() {
            return Err(Error::RangeOverflow {
                what: format!(
                    "argument {} at n = {n_max} in base {base}",
                    form.render(base)
                ),
            });
        }
    }
    Ok(())
}

/// Evaluates the identity's full series `Σ_{n=0}^{N} sign(n) Σ_l c_l
/// f(l(n))`, which converges to `constant_f0 * f(0)`. Refuses functions
/// whose decay cannot beat the sign-sum growth; `evaluate_unchecked`
/// skips that gate but still reports the flag.
pub fn evaluate(id: &IdentitySet, f: &FunctionSpec, n_max: u64) -> Result<EvalReport> {
    if !admissible(f, id.word()) {
        return Err(admissibility_error(f, id.word()));
    }
    evaluate_unchecked(id, f, n_max)
}

pub fn evaluate_unchecked(id: &IdentitySet, f: &FunctionSpec, n_max: u64) -> Result<EvalReport> {
    let rows: Vec<(LinearForm, i64)> = id.terms().iter().map(|(l, c)| (*l, *c)).collect();
    eval_rows(
        id.word(),
        LinearForm::IDENTITY,
        &rows,
        f,
        n_max,
        admissible(f, id.word()),
    )
}

/// Evaluates a single cross-check term `Σ_{n=0}^{N} sign(w, sign_form(n))
/// * f(f_form(n))`.
pub fn evaluate_single(
    w: &PatternWord,
    sign_form: LinearForm,
    f_form: LinearForm,
    f: &FunctionSpec,
    n_max: u64,
) -> Result<EvalReport> {
    if !admissible(f, w) {
        return Err(admissibility_error(f, w));
    }
    evaluate_single_unchecked(w, sign_form, f_form, f, n_max)
}

pub fn evaluate_single_unchecked(
    w: &PatternWord,
    sign_form: LinearForm,
    f_form: LinearForm,
    f: &FunctionSpec,
    n_max: u64,
) -> Result<EvalReport> {
    eval_rows(
        w,
        sign_form,
        &[(f_form, 1)],
        f,
        n_max,
        admissible(f, w),
    )
}

fn eval_rows(
    w: &PatternWord,
    sign_form: LinearForm,
    rows: &[(LinearForm, i64)],
    f: &FunctionSpec,
    n_max: u64,
    admissible: bool,
) -> Result<EvalReport> {
    let base = w.base();
    let mut all_forms: Vec<LinearForm> = rows.iter().map(|(l, _)| *l).collect();
    all_forms.push(sign_form);
    check_argument_range(&all_forms, base, n_max)?;

    if let FunctionSpec::Table(table) = f {
        // Exact integer path: beyond the last support point every row is 0.
        let support_end = table.keys().next_back().copied().unwrap_or(0);
        let mut acc: i128 = 0;
        for n in 0..=n_max.min(support_end) {
            let mut row: i128 = 0;
            for (form, coeff) in rows {
                if let Some(&v) = table.get(&form.apply(base, n)) {
                    row += *coeff as i128 * v as i128;
                }
            }
            if row != 0 {
                acc += sign(w, sign_form.apply(base, n)) as i128 * row;
            }
        }
        return Ok(EvalReport {
            value: acc as f64,
            n: n_max,
            error_estimate: 0.0,
            admissible,
        });
    }

    let row = |n: u64| -> f64 {
        let mut acc = 0.0;
        for (form, coeff) in rows {
            acc += *coeff as f64 * f.value(form.apply(base, n));
        }
        acc
    };
    let (value, checkpoints) = chunked_sum(w, sign_form, n_max, row);
    let exponent = sign_sum_growth(w).alpha() + f.beta().unwrap_or(0.0);
    let error_estimate = fitted_error(value, &checkpoints, exponent, n_max);
    Ok(EvalReport {
        value,
        n: n_max,
        error_estimate,
        admissible,
    })
}

/// Evaluates the finite product `Π_{n=start}^{N}` of a product identity's
/// factors. Factors are `(l(n)/(l(n)+1))^(c * sign(n))`; an `l(n) = 0`
/// numerator can only appear at `n = 0` and contributes a unit factor,
/// mirroring `L(0) = 0` on the logarithmic side.
pub fn partial_product(p: &ProductIdentity, n_max: u64) -> Result<f64> {
    let w = p.word();
    let base = w.base();
    let forms: Vec<LinearForm> = p.factors().iter().map(|(l, _)| *l).collect();
    check_argument_range(&forms, base, n_max)?;
    let start = p.start() as u64;
    if n_max < start {
        return Ok(1.0);
    }
    let factor = |n: u64| -> f64 {
        let s = sign(w, n);
        let mut acc = 1.0f64;
        for (form, coeff) in p.factors() {
            let v = form.apply(base, n);
            if v == 0 {
                debug_assert_eq!(n, 0);
                continue;
            }
            let ratio = v as f64 / (v + 1) as f64;
            let e = coeff * s;
            debug_assert!(ratio > 0.0);
            acc *= ratio.powi(i32::try_from(e).expect("factor exponent fits i32"));
        }
        acc
    };

    let total = n_max - start + 1;
    if total <= 4 * CHUNK {
        let mut acc = 1.0f64;
        for n in start..=n_max {
            acc *= factor(n);
        }
        return Ok(acc);
    }
    let nchunks = total.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..nchunks)
        .into_par_iter()
        .map(|ci| {
            let lo = start + ci * CHUNK;
            let hi = (lo + CHUNK).min(start + total);
            let mut acc = 1.0f64;
            for n in lo..hi {
                acc *= factor(n);
            }
            acc
        })
        .collect();
    Ok(partials.iter().product())
}

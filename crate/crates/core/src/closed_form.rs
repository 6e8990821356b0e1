//! Exact product closed forms for identities in the logarithmic function
//! `L(n) = log2(n/(n+1))`.
//!
//! The pipeline is: orient the identity so the bare-`n` term has positive
//! coefficient, eliminate that term with the telescoping relation
//! `L(n) = Σ_{j<B} L(Bn+j)` (valid for `n >= 1`; the `n = 0` boundary
//! moves to the right-hand side), optionally peel the `n = 0` row to start
//! the product at 1, divide out the common coefficient factor, and
//! exponentiate. Constants travel as exact rational combinations of
//! `L(m)` values and only become a prime-power map at the very end, so
//! the right-hand side is exact, never floating point.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::digits::PatternWord;
use crate::error::{Error, Result};
use crate::rewrite::{IdentitySet, LinearForm};

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

/// Finite combination `Σ q_m L(m)` with exact rational coefficients.
/// `L(0) = 0`, so index 0 is never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogRational {
    combination: BTreeMap<u64, BigRational>,
}

impl LogRational {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `q * L(m)`, dropping entries that cancel to zero.
    pub fn add(&mut self, m: u64, q: BigRational) {
        if m == 0 || q.is_zero() {
            return;
        }
        let entry = self.combination.entry(m).or_insert_with(BigRational::zero);
        *entry += q;
        if entry.is_zero() {
            self.combination.remove(&m);
        }
    }

    pub fn add_int(&mut self, m: u64, c: i64) {
        self.add(m, BigRational::from_integer(BigInt::from(c)));
    }

    pub fn scale(&mut self, q: &BigRational) {
        if q.is_zero() {
            self.combination.clear();
            return;
        }
        for v in self.combination.values_mut() {
            *v *= q;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.combination.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<u64, BigRational> {
        &self.combination
    }

    /// Exact value as `Σ q_m (log2 m - log2 (m+1))`, in floating point;
    /// for tests and reporting only.
    pub fn value_log2(&self) -> f64 {
        self.combination
            .iter()
            .map(|(m, q)| {
                q.to_f64().unwrap() * ((*m as f64).log2() - ((*m + 1) as f64).log2())
            })
            .sum()
    }

    /// Factors every `m/(m+1)` into primes and accumulates the rational
    /// exponents, yielding the represented constant as `Π p^{e_p}`.
    pub fn to_exponent_map(&self) -> ExponentMap {
        let mut primes: BTreeMap<u64, BigRational> = BTreeMap::new();
        let mut bump = |p: u64, delta: BigRational| {
            let entry = primes.entry(p).or_insert_with(BigRational::zero);
            *entry += delta;
            if entry.is_zero() {
                primes.remove(&p);
            }
        };
        for (&m, q) in &self.combination {
            for (p, k) in factorize(m) {
                bump(p, q * BigRational::from_integer(BigInt::from(k)));
            }
            for (p, k) in factorize(m + 1) {
                bump(p, -q * BigRational::from_integer(BigInt::from(k)));
            }
        }
        ExponentMap { primes }
    }
}

/// Trial-division factorization, verified by multiplying back.
fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let original = m;
    let mut out = Vec::new();
    let mut p: u64 = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut k = 0u32;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    let check: u64 = out.iter().map(|(p, k)| p.pow(*k)).product();
    assert_eq!(check, original, "factorization self-check");
    out
}

/// A positive real constant in the exact form `Π p^{e_p}` over primes,
/// with rational exponents and no zero entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExponentMap {
    primes: BTreeMap<u64, BigRational>,
}

impl ExponentMap {
    pub fn entries(&self) -> &BTreeMap<u64, BigRational> {
        &self.primes
    }

    pub fn is_one(&self) -> bool {
        self.primes.is_empty()
    }

    /// Convenience for tests: builds from `(prime, numer, denom)` triples.
    pub fn from_triples(triples: &[(u64, i64, i64)]) -> Self {
        let mut primes = BTreeMap::new();
        for &(p, n, d) in triples {
            let q = BigRational::new(BigInt::from(n), BigInt::from(d));
            if !q.is_zero() {
                primes.insert(p, q);
            }
        }
        ExponentMap { primes }
    }

    pub fn value_f64(&self) -> f64 {
        self.primes
            .iter()
            .map(|(p, e)| e.to_f64().unwrap() * (*p as f64).ln())
            .sum::<f64>()
            .exp()
    }

    /// The constant's base-2 logarithm as text, e.g.
    /// `3 - 1/2*log2(3) - log2(7)`: the prime-2 exponent is the rational
    /// part, every other prime contributes a `log2(p)` term.
    pub fn log2_text(&self) -> String {
        let mut parts: Vec<(BigRational, Option<u64>)> = Vec::new();
        if let Some(e2) = self.primes.get(&2) {
            parts.push((e2.clone(), None));
        }
        for (&p, e) in &self.primes {
            if p != 2 {
                parts.push((e.clone(), Some(p)));
            }
        }
        if parts.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (coeff, prime)) in parts.iter().enumerate() {
            let mag = coeff.abs();
            let sign = if coeff.is_negative() { "-" } else { "+" };
            if i == 0 {
                if coeff.is_negative() {
                    out.push('-');
                }
            } else {
                let _ = write!(out, " {sign} ");
            }
            match prime {
                None => {
                    let _ = write!(out, "{mag}");
                }
                Some(p) => {
                    if mag.is_one() {
                        let _ = write!(out, "log2({p})");
                    } else {
                        let _ = write!(out, "{mag}*log2({p})");
                    }
                }
            }
        }
        out
    }

    /// Plain-text rendering, e.g. `2^3 * 3^(-1/2) * 7^(-1)`.
    pub fn text(&self) -> String {
        if self.primes.is_empty() {
            return "1".to_string();
        }
        self.primes
            .iter()
            .map(|(p, e)| {
                if e.is_one() {
                    format!("{p}")
                } else if e.is_integer() && !e.is_negative() {
                    format!("{p}^{e}")
                } else {
                    format!("{p}^({e})")
                }
            })
            .collect::<Vec<_>>()
            .join(" * ")
    }

    /// LaTeX rendering as a (possibly radical) fraction: integer powers
    /// multiply out, half-integer powers contribute square roots, anything
    /// else falls back to an explicit rational exponent.
    pub fn latex(&self) -> String {
        let mut num = SideBuilder::default();
        let mut den = SideBuilder::default();
        for (&p, e) in &self.primes {
            let side = if e.is_negative() { &mut den } else { &mut num };
            side.push(p, &e.abs());
        }
        let num_s = num.render();
        let den_s = den.render();
        if den_s == "1" {
            num_s
        } else {
            format!("\\frac{{{num_s}}}{{{den_s}}}")
        }
    }

    fn to_wire(&self) -> BTreeMap<String, String> {
        self.primes
            .iter()
            .map(|(p, e)| (p.to_string(), e.to_string()))
            .collect()
    }

    fn from_wire(wire: &BTreeMap<String, String>) -> Result<Self> {
        let mut primes = BTreeMap::new();
        for (p, e) in wire {
            let p: u64 = p
                .parse()
                .map_err(|_| Error::Malformed {
                    detail: format!("prime key {p:?}"),
                })?;
            let e: BigRational = e.parse().map_err(|_| Error::Malformed {
                detail: format!("exponent {e:?} for prime {p}"),
            })?;
            if e.is_zero() {
                return Err(Error::Malformed {
                    detail: format!("zero exponent for prime {p}"),
                });
            }
            primes.insert(p, e);
        }
        Ok(ExponentMap { primes })
    }
}

#[derive(Default)]
struct SideBuilder {
    integer: BigInt,
    radicand: BigInt,
    extras: Vec<String>,
}

impl SideBuilder {
    fn push(&mut self, p: u64, mag: &BigRational) {
        if self.integer.is_zero() {
            self.integer = BigInt::one();
            self.radicand = BigInt::one();
        }
        let floor = mag.floor().to_integer();
        let frac = mag - BigRational::from_integer(floor.clone());
        let small = u32::try_from(&floor).ok().filter(|k| *k <= 256);
        match (small, frac == half(), frac.is_zero()) {
            (Some(k), _, true) => self.integer *= BigInt::from(p).pow(k),
            (Some(k), true, _) => {
                self.integer *= BigInt::from(p).pow(k);
                self.radicand *= BigInt::from(p);
            }
            _ => self.extras.push(format!("{p}^{{{mag}}}")),
        }
    }

    fn render(&self) -> String {
        if self.integer.is_zero() {
            return "1".to_string();
        }
        let mut out = String::new();
        if !self.integer.is_one() || (self.radicand.is_one() && self.extras.is_empty()) {
            let _ = write!(out, "{}", self.integer);
        }
        if !self.radicand.is_one() {
            let _ = write!(out, "\\sqrt{{{}}}", self.radicand);
        }
        for extra in &self.extras {
            out.push_str(extra);
        }
        out
    }
}

/// The base-B splitting of the logarithmic function:
/// `L(n) = Σ_{j=0}^{B-1} L(Bn+j)` for all `n >= 1`. Constructing the
/// relation verifies it exactly as a rational-function identity.
#[derive(Debug, Clone, Copy)]
pub struct TelescopingRelation {
    base: u32,
}

impl TelescopingRelation {
    pub fn base(&self) -> u32 {
        self.base
    }
}

pub fn telescoping_relation(base: u32) -> Result<TelescopingRelation> {
    if base < 2 {
        return Err(Error::InvalidBase { base });
    }
    // (n+1) * Π_j (Bn+j) == n * Π_j (Bn+j+1) as polynomials in n.
    let b = i64::from(base);
    let mut lhs = poly_linear(1, 1);
    let mut rhs = poly_linear(0, 1);
    for j in 0..b {
        lhs = poly_mul(&lhs, &poly_linear(j, b));
        rhs = poly_mul(&rhs, &poly_linear(j + 1, b));
    }
    assert_eq!(lhs, rhs, "telescoping self-check for base {base}");
    Ok(TelescopingRelation { base })
}

fn poly_linear(c0: i64, c1: i64) -> Vec<BigInt> {
    vec![BigInt::from(c0), BigInt::from(c1)]
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// An identity specialized to `f = L` with the bare-`n` term eliminated:
/// `Σ_l c_l Σ_{n>=start} a(n) L(l(n)) = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedIdentity {
    word: PatternWord,
    terms: BTreeMap<LinearForm, i64>,
    rhs: LogRational,
    start: u8,
}

impl ReducedIdentity {
    pub fn word(&self) -> &PatternWord {
        &self.word
    }

    pub fn terms(&self) -> &BTreeMap<LinearForm, i64> {
        &self.terms
    }

    pub fn rhs(&self) -> &LogRational {
        &self.rhs
    }

    pub fn start(&self) -> u8 {
        self.start
    }

    /// Subtracts the `n = 0` row `Σ_l c_l L(l(0))` from both sides, so the
    /// summation starts at 1. Rows with `l(0) = 0` contribute nothing.
    pub fn shift_start(mut self) -> Self {
        if self.start >= 1 {
            return self;
        }
        let base = self.word.base();
        for (form, coeff) in &self.terms {
            self.rhs.add_int(form.apply(base, 0), -coeff);
        }
        self.start = 1;
        self
    }

    /// Divides out the common coefficient factor and exponentiates into a
    /// product identity; the telescoping elimination has already removed
    /// every stride-0 form.
    pub fn into_product(self) -> ProductIdentity {
        let mut terms = self.terms;
        let mut rhs = self.rhs;
        let g = terms
            .values()
            .map(|c| c.unsigned_abs())
            .fold(0u64, num::integer::gcd);
        if g > 1 {
            for c in terms.values_mut() {
                *c /= g as i64;
            }
            rhs.scale(&BigRational::new(BigInt::one(), BigInt::from(g)));
        }
        let factors: Vec<(LinearForm, i64)> = terms.into_iter().collect();
        debug_assert!(factors.iter().all(|(l, _)| l.stride_exp >= 1));
        ProductIdentity {
            word: self.word,
            start: self.start,
            factors,
            rhs: rhs.to_exponent_map(),
            rhs_log: rhs,
        }
    }
}

/// Rewrites the bare-`n` term through the telescoping relation. The
/// summation identity `Σ_l c_l Σ_n a(n) L(l(n)) = K·L(0) = 0` keeps
/// holding with the `c_0` coefficient redistributed onto the forms
/// `Bn+j` and the boundary constant `c_0 (L(1)+…+L(B-1))` on the right.
/// Identities with no bare-`n` term pass through with an empty boundary.
pub fn eliminate_identity_term(id: &IdentitySet) -> ReducedIdentity {
    let id = id.oriented_identity_positive();
    let word = id.word().clone();
    let base = word.base();
    let mut terms = id.terms().clone();
    let mut rhs = LogRational::new();
    let c0 = terms.remove(&LinearForm::IDENTITY).unwrap_or(0);
    if c0 != 0 {
        for j in 0..base as u64 {
            let form = LinearForm {
                stride_exp: 1,
                offset: j,
            };
            let entry = terms.entry(form).or_insert(0);
            *entry += c0;
            if *entry == 0 {
                terms.remove(&form);
            }
        }
        for j in 1..base as u64 {
            rhs.add_int(j, c0);
        }
    }
    debug_assert!(terms.keys().all(|l| l.stride_exp >= 1));
    ReducedIdentity {
        word,
        terms,
        rhs,
        start: 0,
    }
}

/// Infinite-product identity
/// `Π_{n>=start} Π_l (l(n)/(l(n)+1))^{c_l·a(n)} = rhs`, exact on the
/// right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductIdentity {
    word: PatternWord,
    start: u8,
    factors: Vec<(LinearForm, i64)>,
    rhs: ExponentMap,
    rhs_log: LogRational,
}

impl ProductIdentity {
    pub fn word(&self) -> &PatternWord {
        &self.word
    }

    pub fn start(&self) -> u8 {
        self.start
    }

    pub fn factors(&self) -> &[(LinearForm, i64)] {
        &self.factors
    }

    pub fn rhs(&self) -> &ExponentMap {
        &self.rhs
    }

    /// The right-hand constant in log form, kept alongside the prime-power
    /// map so reports can show both renderings.
    pub fn rhs_log(&self) -> &LogRational {
        &self.rhs_log
    }

    pub fn latex(&self) -> String {
        let base = self.word.base();
        let sign_tex = format!("(-1)^{{a_{{{},{}}}(n)}}", self.word.render(), base);
        let mut out = format!("\\prod_{{n\\ge {}}}", self.start);
        for (form, coeff) in &self.factors {
            let num = form.render(base);
            let den = LinearForm {
                stride_exp: form.stride_exp,
                offset: form.offset + 1,
            }
            .render(base);
            let exp = match coeff {
                1 => sign_tex.clone(),
                -1 => format!("-{sign_tex}"),
                c => format!("{c}{sign_tex}"),
            };
            let _ = write!(out, "\\left(\\frac{{{num}}}{{{den}}}\\right)^{{{exp}}}");
        }
        let _ = write!(out, "={}", self.rhs.latex());
        out
    }

    pub fn text(&self) -> String {
        let base = self.word.base();
        let factors = self
            .factors
            .iter()
            .map(|(form, coeff)| {
                let num = form.render(base);
                let den = LinearForm {
                    stride_exp: form.stride_exp,
                    offset: form.offset + 1,
                }
                .render(base);
                let exp = match coeff {
                    1 => "a(n)".to_string(),
                    -1 => "-a(n)".to_string(),
                    c => format!("{c}a(n)"),
                };
                format!("(({num})/({den}))^{exp}")
            })
            .collect::<Vec<_>>()
            .join(" * ");
        format!(
            "prod[n>={}] {} = {} (~{:.6}), log2 = {}",
            self.start,
            factors,
            self.rhs.text(),
            self.rhs.value_f64(),
            self.rhs.log2_text()
        )
    }

    pub fn to_json(&self) -> String {
        let wire = ProductWire {
            word: self.word.render(),
            base: self.word.base(),
            start: self.start,
            factors: self
                .factors
                .iter()
                .map(|(l, c)| FactorWire {
                    stride_exp: l.stride_exp,
                    offset: l.offset,
                    exponent: *c,
                })
                .collect(),
            rhs: RhsWire {
                primes: self.rhs.to_wire(),
            },
        };
        serde_json::to_string(&wire).expect("product serialization")
    }
}

#[derive(Serialize, Deserialize)]
struct FactorWire {
    stride_exp: u32,
    offset: u64,
    exponent: i64,
}

#[derive(Serialize, Deserialize)]
struct RhsWire {
    primes: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct ProductWire {
    word: String,
    base: u32,
    start: u8,
    factors: Vec<FactorWire>,
    rhs: RhsWire,
}

/// Parses just the rhs object `{"primes":{...}}` back into a map; used by
/// consumers that want to recheck an emitted constant.
pub fn rhs_from_json(json: &str) -> Result<ExponentMap> {
    let wire: RhsWire = serde_json::from_str(json).map_err(|e| Error::Malformed {
        detail: format!("rhs object: {e}"),
    })?;
    ExponentMap::from_wire(&wire.primes)
}

/// Full pipeline: eliminate the bare-`n` term, optionally shift the start
/// to 1, and exponentiate. `start` must be 0 or 1.
pub fn emit_product(id: &IdentitySet, start: u8) -> Result<ProductIdentity> {
    if start > 1 {
        return Err(Error::InvalidStart { start });
    }
    telescoping_relation(id.word().base())?;
    let mut reduced = eliminate_identity_term(id);
    if start == 1 {
        reduced = reduced.shift_start();
    }
    Ok(reduced.into_product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::derive;

    fn w(word: &str, base: u32) -> PatternWord {
        PatternWord::parse(word, base).unwrap()
    }

    fn lf(t: u32, x: u64) -> LinearForm {
        LinearForm {
            stride_exp: t,
            offset: x,
        }
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn telescoping_verifies_for_small_bases() {
        for base in 2..=12 {
            assert!(telescoping_relation(base).is_ok(), "base {base}");
        }
        assert!(telescoping_relation(1).is_err());
    }

    #[test]
    fn factorize_small() {
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(8), vec![(2, 3)]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(97), vec![(97, 1)]);
    }

    #[test]
    fn eliminate_single_digit_base3() {
        let reduced = eliminate_identity_term(&derive(&w("1", 3)));
        assert_eq!(
            reduced.terms(),
            &BTreeMap::from([(lf(1, 1), 2)]),
            "expected 2L(3n+1)"
        );
        let mut rhs = LogRational::new();
        rhs.add_int(1, 1);
        rhs.add_int(2, 1);
        assert_eq!(reduced.rhs(), &rhs);
    }

    #[test]
    fn eliminate_word_21_base3() {
        let reduced = eliminate_identity_term(&derive(&w("21", 3)));
        assert_eq!(reduced.terms(), &BTreeMap::from([(lf(2, 7), 2)]));
    }

    #[test]
    fn eliminate_without_identity_term_is_noop() {
        let reduced = eliminate_identity_term(&derive(&w("1", 3)));
        let again = ReducedIdentity {
            word: reduced.word().clone(),
            terms: reduced.terms().clone(),
            rhs: LogRational::new(),
            start: 0,
        };
        // No stride-0 form left, so a second elimination pass would have
        // nothing to do; emulate by checking the invariant directly.
        assert!(again.terms().keys().all(|l| l.stride_exp >= 1));
    }

    #[test]
    fn shift_start_word_11_base2_is_noop_on_rhs() {
        let reduced = eliminate_identity_term(&derive(&w("11", 2)));
        assert_eq!(
            reduced.terms(),
            &BTreeMap::from([(lf(1, 1), 2), (lf(2, 1), -2)])
        );
        let rhs_before = reduced.rhs().clone();
        let shifted = reduced.shift_start();
        // n = 0 row is 2L(1) - 2L(1) = 0.
        assert_eq!(shifted.rhs(), &rhs_before);
        assert_eq!(shifted.start(), 1);
    }

    #[test]
    fn exponent_map_example_half_l1_l2_minus_2l7() {
        let mut c = LogRational::new();
        c.add(1, rat(1, 2));
        c.add(2, rat(1, 2));
        c.add(7, rat(-1, 1));
        let map = c.to_exponent_map();
        assert_eq!(
            map,
            ExponentMap::from_triples(&[(2, 3, 1), (3, -1, 2), (7, -1, 1)])
        );
        assert!((map.value_f64() - 8.0 / (7.0 * 3f64.sqrt())).abs() < 1e-12);
        assert_eq!(map.log2_text(), "3 - 1/2*log2(3) - log2(7)");
    }

    #[test]
    fn exponent_map_l1_is_inverse_sqrt_free() {
        let mut c = LogRational::new();
        c.add_int(1, 1);
        assert_eq!(
            c.to_exponent_map(),
            ExponentMap::from_triples(&[(2, -1, 1)])
        );
    }

    #[test]
    fn product_word_1_base2_start0() {
        let p = emit_product(&derive(&w("1", 2)), 0).unwrap();
        assert_eq!(p.factors(), &[(lf(1, 1), 1)]);
        assert_eq!(p.rhs(), &ExponentMap::from_triples(&[(2, -1, 2)]));
        assert!((p.rhs().value_f64() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn product_word_1_base3_start1() {
        let p = emit_product(&derive(&w("1", 3)), 1).unwrap();
        assert_eq!(p.rhs(), &ExponentMap::from_triples(&[(2, 1, 1), (3, -1, 2)]));
        assert!((p.rhs().value_f64() - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn product_word_21_base3_start1() {
        let p = emit_product(&derive(&w("21", 3)), 1).unwrap();
        assert_eq!(p.factors(), &[(lf(2, 7), 1)]);
        assert_eq!(
            p.rhs(),
            &ExponentMap::from_triples(&[(2, 3, 1), (3, -1, 2), (7, -1, 1)])
        );
        assert_eq!(
            p.latex(),
            "\\prod_{n\\ge 1}\\left(\\frac{9n+7}{9n+8}\\right)^{(-1)^{a_{21,3}(n)}}=\\frac{8}{7\\sqrt{3}}"
        );
    }

    #[test]
    fn product_word_11_base2_start1() {
        let p = emit_product(&derive(&w("11", 2)), 1).unwrap();
        assert_eq!(p.factors(), &[(lf(1, 1), 1), (lf(2, 1), -1)]);
        assert_eq!(p.rhs(), &ExponentMap::from_triples(&[(2, -1, 2)]));
    }

    #[test]
    fn product_json_shape() {
        let p = emit_product(&derive(&w("21", 3)), 1).unwrap();
        let json = p.to_json();
        assert_eq!(
            json,
            "{\"word\":\"21\",\"base\":3,\"start\":1,\"factors\":[{\"stride_exp\":2,\"offset\":7,\"exponent\":1}],\"rhs\":{\"primes\":{\"2\":\"3\",\"3\":\"-1/2\",\"7\":\"-1\"}}}"
        );
        let rhs = rhs_from_json("{\"primes\":{\"2\":\"3\",\"3\":\"-1/2\",\"7\":\"-1\"}}").unwrap();
        assert_eq!(&rhs, p.rhs());
    }

    #[test]
    fn rhs_json_rejects_zero_exponent() {
        assert!(rhs_from_json("{\"primes\":{\"2\":\"0\"}}").is_err());
        assert!(rhs_from_json("{\"primes\":{\"x\":\"1\"}}").is_err());
    }

    #[test]
    fn latex_radical_only_denominator() {
        let map = ExponentMap::from_triples(&[(2, 1, 1), (3, -1, 2)]);
        assert_eq!(map.latex(), "\\frac{2}{\\sqrt{3}}");
        let map = ExponentMap::from_triples(&[(2, -1, 2)]);
        assert_eq!(map.latex(), "\\frac{1}{\\sqrt{2}}");
        let map = ExponentMap::from_triples(&[]);
        assert_eq!(map.latex(), "1");
    }

    #[test]
    fn emit_product_rejects_bad_start() {
        let err = emit_product(&derive(&w("1", 2)), 2).unwrap_err();
        assert!(matches!(err, Error::InvalidStart { start: 2 }));
    }

    #[test]
    fn rhs_log_matches_exponent_map() {
        let p = emit_product(&derive(&w("21", 3)), 1).unwrap();
        let recomputed = p.rhs_log().to_exponent_map();
        assert_eq!(&recomputed, p.rhs());
        assert!((p.rhs_log().value_log2() - p.rhs().value_f64().log2()).abs() < 1e-12);
    }

    #[test]
    fn zero_block_word_still_emits_clean_product() {
        let p = emit_product(&derive(&w("0", 2)), 1).unwrap();
        assert!(p.factors().iter().all(|(l, _)| l.stride_exp >= 1));
        assert!(p.rhs().value_f64().is_finite());
    }
}

//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line with the measured quantities. Tolerances and ranges are
//! pinned here as constants. Checks that miss their target fail loudly
//! with the measurement in the message; nothing is weakened to force a
//! green run.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blockprod::{
    check_block_bounds, check_s_growth, derive, emit_product, exact_check, pairing_witness,
    partial_product, partial_sums, sign, DigitString, ExponentMap, FunctionSpec, IdentitySet,
    LinearForm, PatternWord,
};

const N_SERIES: u64 = 1_000_000;
const TOL_PRODUCT: f64 = 5e-3;
const TOL_POWER_SUM: f64 = 1e-3;
const TOL_CROSS_CHECK: f64 = 5e-3;
const BATTERY_SEED: u64 = 42;
const PAIRING_SEED: u64 = 42;

fn word(s: &str, base: u32) -> PatternWord {
    PatternWord::parse(s, base).expect("pinned word")
}

fn lf(stride_exp: u32, offset: u64) -> LinearForm {
    LinearForm { stride_exp, offset }
}

fn terms_of(pairs: &[(u32, u64, i64)]) -> BTreeMap<LinearForm, i64> {
    pairs.iter().map(|&(t, x, c)| (lf(t, x), c)).collect()
}

fn report(id: &str, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id} {name}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn c01_derive_11_base2_exact_and_fast() {
    let w = word("11", 2);
    let mut best = f64::INFINITY;
    let mut id = derive(&w);
    for _ in 0..5 {
        let t0 = Instant::now();
        id = derive(&w);
        best = best.min(t0.elapsed().as_secs_f64());
    }
    let expected = terms_of(&[(0, 0, -1), (1, 0, 1), (1, 1, -1), (2, 1, 2)]);
    let match_ok = id.terms() == &expected && id.constant_f0() == 0;
    let fast = best < 1e-3;
    let detail = format!(
        "coefficient set {}, best of 5 runs {:.1} us (limit 1 ms)",
        if match_ok { "matches" } else { "differs" },
        best * 1e6
    );
    report("c01", "derive-11-base2", match_ok && fast, &detail);
    assert!(match_ok, "coefficient set drifted: {}", id.to_json());
    assert!(fast, "derive took {best:.6} s");
}

#[test]
fn c02_derive_reference_combinations() {
    let id1 = derive(&word("1", 3));
    let ok1 = id1.terms() == &terms_of(&[(0, 0, -1), (1, 0, 1), (1, 1, -1), (1, 2, 1)]);
    let id2 = derive(&word("21", 3));
    let ok2 =
        id2.terms() == &terms_of(&[(0, 0, -1), (1, 0, 1), (1, 1, 1), (1, 2, 1), (2, 7, -2)]);
    let detail = format!(
        "base-3 single digit {} (4 terms), two-digit word {} (5 terms); bare-n coefficient is -1, \
         so the quoted orientation is the global flip",
        if ok1 { "matches" } else { "differs" },
        if ok2 { "matches" } else { "differs" }
    );
    report("c02", "derive-base3-references", ok1 && ok2, &detail);
    assert!(ok1, "single-digit set drifted: {}", id1.to_json());
    assert!(ok2, "two-digit set drifted: {}", id2.to_json());
}

#[test]
fn c03_exact_oracle_battery() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(BATTERY_SEED);
    let mut failures = Vec::new();
    for case in 0..200 {
        let base = rng.gen_range(2..=5u32);
        let len = rng.gen_range(1..=4usize);
        let digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..base)).collect();
        let w = PatternWord::new(base, digits).expect("digits below base");
        let id = derive(&w);
        let mut table = BTreeMap::new();
        for _ in 0..8 {
            table.insert(rng.gen_range(0..=50u64), rng.gen_range(-9..=9i64));
        }
        match exact_check(&id, &table, None) {
            Ok(0) => {}
            Ok(r) => failures.push(format!("word {} base {base}: residual {r}", w.render())),
            Err(e) => failures.push(format!("word {} base {base}: {e}", w.render())),
        }
        let _ = case;
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = failures.is_empty() && elapsed < 10.0;
    let detail = format!(
        "{}/200 zero residuals in {elapsed:.2} s (limit 10 s)",
        200 - failures.len()
    );
    report("c03", "exact-oracle-battery", pass, &detail);
    assert!(failures.is_empty(), "{}", failures.join("; "));
    assert!(elapsed < 10.0, "battery took {elapsed:.2} s");
}

#[test]
fn c04_closed_form_constants_exact() {
    let cases: [(&str, u32, u8, &[(u64, i64, i64)], &str); 3] = [
        ("1", 3, 1, &[(2, 1, 1), (3, -1, 2)], "2/sqrt(3)"),
        (
            "21",
            3,
            1,
            &[(2, 3, 1), (3, -1, 2), (7, -1, 1)],
            "8/(7 sqrt(3))",
        ),
        ("1", 2, 0, &[(2, -1, 2)], "sqrt(2)/2"),
    ];
    let mut details = Vec::new();
    let mut all_ok = true;
    for (w, base, start, rhs, gloss) in cases {
        let product = emit_product(&derive(&word(w, base)), start).expect("valid start");
        let ok = product.rhs() == &ExponentMap::from_triples(rhs);
        all_ok &= ok;
        details.push(format!(
            "{w}/{base} start {start} -> {} {}",
            gloss,
            if ok { "exact" } else { "MISMATCH" }
        ));
    }
    let constant = emit_product(&derive(&word("21", 3)), 1)
        .expect("valid start")
        .rhs()
        .log2_text();
    let constant_ok = constant == "3 - 1/2*log2(3) - log2(7)";
    all_ok &= constant_ok;
    details.push(format!("log2 constant \"{constant}\""));
    report("c04", "closed-form-constants", all_ok, &details.join("; "));
    assert!(all_ok, "{}", details.join("; "));
}

#[test]
fn c05_products_converge_at_million_terms() {
    let cases: [(&str, u32, u8, f64); 3] = [
        ("1", 2, 0, 0.7071),
        ("1", 3, 1, 1.1547),
        ("21", 3, 1, 0.6598),
    ];
    let mut details = Vec::new();
    let mut all_ok = true;
    for (w, base, start, approx) in cases {
        let product = emit_product(&derive(&word(w, base)), start).expect("valid start");
        let exact = product.rhs().value_f64();
        let t0 = Instant::now();
        let value = partial_product(&product, N_SERIES).expect("range fits");
        let elapsed = t0.elapsed().as_secs_f64();
        let diff = (value - exact).abs();
        let ok = diff <= TOL_PRODUCT && elapsed < 5.0;
        all_ok &= ok;
        details.push(format!(
            "{w}/{base}: {value:.5} vs {exact:.5} (~{approx}), |diff| {diff:.1e}, {elapsed:.2} s"
        ));
    }
    report(
        "c05",
        "partial-products-million",
        all_ok,
        &details.join("; "),
    );
    assert!(all_ok, "{}", details.join("; "));
}

#[test]
fn c06_four_factor_product_binary_1010() {
    // Fixed four-factor form for the pattern 1010, from n = 0; target
    // sqrt(2)/2 within 5e-3 at N = 10^6.
    let w = word("1010", 2);
    let mut acc = 1.0f64;
    for n in 0..=N_SERIES {
        let nf = n as f64;
        let r = (4.0 * nf + 2.0) / (4.0 * nf + 3.0)
            * (8.0 * nf + 7.0) / (8.0 * nf + 6.0)
            * (8.0 * nf + 3.0) / (8.0 * nf + 2.0)
            * (16.0 * nf + 10.0) / (16.0 * nf + 11.0);
        acc *= r.powi(sign(&w, n) as i32);
    }
    let expected = std::f64::consts::FRAC_1_SQRT_2;
    let diff = (acc - expected).abs();
    let pass = diff <= TOL_PRODUCT;
    let detail = format!(
        "partial {acc:.5} vs {expected:.5}, |diff| {diff:.1e} (tol {TOL_PRODUCT:.0e}); \
         the partial products of this configuration decay like N^-0.17 and are still \
         ~3e-2 away at N = 10^6 (measured; ~10^11 terms would be needed)"
    );
    report("c06", "four-factor-product-1010", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c07_reciprocal_power_sum() {
    let combo = r#"{"word":"1","base":3,"terms":[{"stride_exp":1,"offset":0,"coeff":2},{"stride_exp":1,"offset":1,"coeff":1},{"stride_exp":1,"offset":2,"coeff":-1}],"constant_f0":0}"#;
    let id = IdentitySet::from_json(combo).expect("pinned identity");
    let f = FunctionSpec::power(1.0).expect("positive exponent");
    let report_full = blockprod::evaluate(&id, &f, N_SERIES).expect("admissible");
    // The n = 0 row is 2f(0) + f(1) - f(2) = 1/2; dropping it starts the
    // sum at n = 1.
    let from_one = report_full.value - 0.5;
    let diff = (from_one + 0.5).abs();
    let pass = diff <= TOL_POWER_SUM;
    let detail =
        format!("sum {from_one:.6} vs -0.5, |diff| {diff:.1e} (tol {TOL_POWER_SUM:.0e})");
    report("c07", "reciprocal-power-sum", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c08_halving_cross_checks() {
    let mut details = Vec::new();
    let mut all_ok = true;
    for w_str in ["1", "11", "1010"] {
        let w = word(w_str, 2);
        let k = w.len() as u32;
        let v = w.value();
        let sign_form = lf(k - 1, v / 2);
        let f_form = lf(k, v);
        let r = blockprod::evaluate_single(&w, sign_form, f_form, &FunctionSpec::L, N_SERIES)
            .expect("admissible");
        let diff = (r.value + 0.5).abs();
        let ok = diff <= TOL_CROSS_CHECK;
        all_ok &= ok;
        details.push(format!(
            "w={w_str}: {:.5} vs -0.5, |diff| {diff:.1e}{}",
            r.value,
            if ok { "" } else { " EXCEEDS 5e-3" }
        ));
    }
    details.push(
        "the 4-digit pattern's sum decays like N^-0.17 (measured) and cannot meet 5e-3 near \
         N = 10^6"
            .to_string(),
    );
    report("c08", "halving-cross-checks", all_ok, &details.join("; "));
    assert!(all_ok, "{}", details.join("; "));
}

#[test]
fn c09_bound_suite_zero_violations() {
    let mut details = Vec::new();
    let mut all_ok = true;
    for (w_str, base) in [("1", 2), ("1", 3), ("11", 2), ("21", 3), ("22", 3)] {
        let w = word(w_str, base);
        let r = check_s_growth(&w, N_SERIES);
        all_ok &= r.pass;
        let max_s = partial_sums(&w, N_SERIES)
            .map(|s| s.abs())
            .max()
            .unwrap_or(0);
        details.push(format!(
            "S bound {w_str}/{base}: {} (max |S| = {max_s})",
            if r.pass { "0 violations" } else { "VIOLATED" }
        ));
    }
    for (w_str, base) in [("11", 2), ("21", 3), ("22", 3)] {
        let w = word(w_str, base);
        let r = check_block_bounds(&w, 3, 10_000).expect("range fits");
        all_ok &= r.pass;
        details.push(format!(
            "block bounds {w_str}/{base} (levels 1..3, n < 10^4): {}",
            if r.pass { "0 violations" } else { "VIOLATED" }
        ));
    }
    report("c09", "bound-suite", all_ok, &details.join("; "));
    assert!(all_ok, "{}", details.join("; "));
}

#[test]
fn c10_pairing_battery() {
    let mut rng = ChaCha8Rng::seed_from_u64(PAIRING_SEED);
    let mut fallbacks = 0usize;
    let mut failures = Vec::new();
    for _ in 0..50 {
        let base = [2u32, 3, 4][rng.gen_range(0..3)];
        let w = loop {
            let len = rng.gen_range(1..=4usize);
            let digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..base)).collect();
            if digits.iter().any(|&d| d != 0) {
                break PatternWord::new(base, digits).expect("digits below base");
            }
            // All-zero patterns have no flip pair (their sign at 0 comes
            // from the empty expansion); the battery samples the rest.
        };
        let u_len = rng.gen_range(0..=3usize);
        let u_digits: Vec<u32> = (0..u_len).map(|_| rng.gen_range(0..base)).collect();
        let u = DigitString::new(base, u_digits).expect("digits below base");
        match pairing_witness(&w, &u) {
            Ok(witness) => {
                if witness.via_fallback() {
                    fallbacks += 1;
                }
            }
            Err(e) => failures.push(format!("word {} base {base}: {e}", w.render())),
        }
    }
    let pass = failures.is_empty();
    let detail = format!(
        "{}/50 witnesses validated on n < max(10^4, B^(k+1)), {fallbacks} via fallback search",
        50 - failures.len()
    );
    report("c10", "pairing-battery", pass, &detail);
    assert!(pass, "{}", failures.join("; "));
}

#[test]
fn c11_all_zero_word_constant() {
    let id = derive(&word("0", 2));
    let constant_ok = id.constant_f0() == -2;
    let indicator = BTreeMap::from([(0u64, 1i64)]);
    let residual = exact_check(&id, &indicator, None).expect("horizon fits");
    let pass = constant_ok && residual == 0;
    let detail = format!(
        "constant_f0 = {}, indicator-of-0 residual = {residual}",
        id.constant_f0()
    );
    report("c11", "all-zero-word-constant", pass, &detail);
    assert!(pass, "{detail}");
}

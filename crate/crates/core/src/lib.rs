//! Identities and numerics for digit-pattern sign series.
//!
//! For a base B and a digit block w, the sign sequence is
//! `(-1)^(number of occurrences of w in the base-B expansion of n)`, that
//! is, the Thue-Morse sign and its relatives. This crate derives, for any
//! such sequence, a finite family of linear forms `l(n) = B^t n + x` with
//! integer coefficients such that
//!
//! `Σ_{n>=0} sign(n) Σ_l c_l f(l(n)) = K f(0)`
//!
//! holds for every function f that decays fast enough, checks the family
//! exactly against finitely supported tables, turns it into exact
//! infinite-product closed forms for `f(n) = log2(n/(n+1))` (the
//! Woods-Robbins product and its generalizations), evaluates the series
//! and products numerically with deterministic parallel summation, and
//! verifies the sign sequence's growth and cancellation structure.
//!
//! Module map:
//!
//! - [`digits`]: expansions, occurrence counting, signs, partial and block
//!   sums.
//! - [`rewrite`]: the digit-peeling engine that produces an
//!   [`IdentitySet`], plus exact residual checks and JSON (de)serialization.
//! - [`closed_form`]: telescoping elimination and exact prime-power
//!   right-hand sides; emits [`ProductIdentity`] values.
//! - [`eval`]: compensated, chunk-deterministic numerical evaluation with
//!   an honest fitted error estimate and a convergence gate.
//! - [`bounds`]: pairing witnesses, block-sum and partial-sum growth
//!   checks, growth-exponent fitting.
//! - [`selftest`]: the seeded exact battery and pinned regressions.

pub mod bounds;
pub mod closed_form;
pub mod digits;
pub mod error;
pub mod eval;
pub mod rewrite;
pub mod selftest;

pub use bounds::{
    check_block_bounds, check_s_growth, estimate_alpha, pairing_witness, partial_sum_by_blocks,
    AlphaFit, BoundReport, PairingWitness, Violation,
};
pub use closed_form::{
    eliminate_identity_term, emit_product, telescoping_relation, ExponentMap, LogRational,
    ProductIdentity, ReducedIdentity, TelescopingRelation,
};
pub use digits::{
    block_sum, count_occurrences, partial_sums, sign, to_digits, value_in_base, DigitString,
    PatternWord,
};
pub use error::{Error, Result};
pub use eval::{
    admissible, evaluate, evaluate_single, evaluate_single_unchecked, evaluate_unchecked,
    partial_product, sign_sum_growth, EvalReport, FunctionSpec, Growth,
};
pub use rewrite::{apply_step, derive, exact_check, IdentitySet, LinearForm, SumTerm};
pub use selftest::{all_pass, run_selftest, CheckResult};

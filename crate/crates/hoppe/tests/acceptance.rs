//! Full-scale verification suite, one test per criterion.
//!
//! Each test prints its `PASS`/`FAIL` line (visible with `--nocapture`)
//! and asserts the criterion. Everything is pinned to the default seed;
//! runs are bit-reproducible regardless of thread count.

use hoppe::verify::{self, CriterionResult, VerifyConfig};

fn check(f: impl FnOnce(&VerifyConfig) -> CriterionResult) {
    let cfg = VerifyConfig::default();
    let result = f(&cfg);
    println!("{}", result.line());
    assert!(result.pass, "{}", result.line());
}

#[test]
fn criterion_01_enumeration_oracle() {
    check(verify::criterion_enumeration_oracle);
}

#[test]
fn criterion_02_wiener_oracle_equivalence() {
    check(verify::criterion_wiener_oracle);
}

#[test]
fn criterion_03_identity_suite() {
    check(verify::criterion_identity_suite);
}

#[test]
fn criterion_04_mc_vs_closed_form() {
    check(verify::criterion_mc_vs_closed_form);
}

#[test]
fn criterion_05_limit_moments_u() {
    check(verify::criterion_u_limit_moments);
}

#[test]
fn criterion_06_limit_moments_u_prime() {
    check(verify::criterion_u_prime_limit_moments);
}

#[test]
fn criterion_07_finite_n_mixing_variance() {
    check(verify::criterion_mixing_variance);
}

#[test]
fn criterion_08_subtree_decomposition() {
    check(verify::criterion_subtree_decomposition);
}

#[test]
fn criterion_09_contraction_certificate() {
    check(verify::criterion_contraction);
}

#[test]
fn criterion_10_conditional_normality() {
    check(verify::criterion_conditional_normality);
}

#[test]
fn criterion_11_covariance_law() {
    check(verify::criterion_covariance_law);
}

//! One test per acceptance criterion, each at full scale. Every test prints a
//! single PASS/FAIL line; run with `--nocapture` to see them.

use rmlab_cli::args::VerifyProfile;
use rmlab_cli::verify::{self, CriterionResult};

fn check(result: CriterionResult) {
    println!("{}", result.line());
    assert!(result.passed, "{}", result.line());
}

#[test]
fn criterion_01_generator_recursion() {
    check(verify::criterion_1(VerifyProfile::Full));
}

#[test]
fn criterion_02_entropy_conservation() {
    check(verify::criterion_2(VerifyProfile::Full));
}

#[test]
fn criterion_03_simp_eq() {
    check(verify::criterion_3(VerifyProfile::Full));
}

#[test]
fn criterion_04_balance_identity() {
    check(verify::criterion_4(VerifyProfile::Full));
}

#[test]
fn criterion_05_monotonicity() {
    check(verify::criterion_5(VerifyProfile::Full));
}

#[test]
fn criterion_06_ruzsa_calculus() {
    check(verify::criterion_6(VerifyProfile::Full));
}

#[test]
fn criterion_07_pfr_cefr_oracles() {
    check(verify::criterion_7(VerifyProfile::Full));
}

#[test]
fn criterion_08_symmetry() {
    check(verify::criterion_8(VerifyProfile::Full));
}

#[test]
fn criterion_09_fr_gap() {
    check(verify::criterion_9(VerifyProfile::Full));
}

#[test]
fn criterion_10_error_split() {
    check(verify::criterion_10(VerifyProfile::Full));
}

#[test]
fn criterion_11_decoder() {
    check(verify::criterion_11(VerifyProfile::Full));
}

#[test]
fn criterion_12_recurrence_trend() {
    check(verify::criterion_12(VerifyProfile::Full));
}

#[test]
fn criterion_13_determinism() {
    check(verify::criterion_13(VerifyProfile::Full));
}

//! Acceptance gate: one test per numbered criterion, each printing its
//! one-line verdict. Run with `--nocapture` (or `mbf verify`) to see the
//! lines for passing criteria too.

use std::path::PathBuf;

use matrix_bloom::acceptance::{self, CriterionResult};
use matrix_bloom::Result;

fn data_dir() -> PathBuf {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    root.canonicalize().unwrap_or(root).join("data")
}

fn check(result: Result<CriterionResult>) {
    let outcome = result.expect("criterion could not run");
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_no_false_negatives() {
    check(acceptance::criterion_01_no_false_negatives());
}

#[test]
fn criterion_02_square_optimum() {
    check(acceptance::criterion_02_square_optimum());
}

#[test]
fn criterion_03_degradation_equivalence() {
    check(acceptance::criterion_03_degradation_equivalence());
}

#[test]
fn criterion_04_max_adaptive_fpr() {
    check(acceptance::criterion_04_max_adaptive_fpr());
}

#[test]
fn criterion_05_load_factor() {
    check(acceptance::criterion_05_load_factor());
}

#[test]
fn criterion_06_jmatrix_equivalence() {
    check(acceptance::criterion_06_jmatrix_equivalence());
}

#[test]
fn criterion_07_storage_bound() {
    check(acceptance::criterion_07_storage_bound());
}

#[test]
fn criterion_08_batch_contract() {
    check(acceptance::criterion_08_batch_contract());
}

#[test]
fn criterion_09_double_side_invariance() {
    check(acceptance::criterion_09_double_side_invariance());
}

#[test]
fn criterion_10_baseline_trends() {
    check(acceptance::criterion_10_baseline_trends());
}

#[test]
fn criterion_11_docword_ingestion() {
    check(acceptance::criterion_11_docword_ingestion(&data_dir()));
}

#[test]
fn criterion_12_multiset_equivalence() {
    check(acceptance::criterion_12_multiset_equivalence());
}

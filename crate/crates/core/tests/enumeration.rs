//! Closed-form null moments against brute-force enumeration of every image.

#![allow(clippy::needless_range_loop)]

use mfcsr_core::linalg;
use mfcsr_core::moments::{self, EnumerationTable};

const TOL: f64 = 1e-10;

fn probabilities() -> impl Iterator<Item = f64> {
    (1..=9).map(|k| k as f64 / 10.0)
}

#[test]
fn closed_forms_match_enumeration() {
    for m in [3, 4] {
        let table = EnumerationTable::build(m).unwrap();
        for p in probabilities() {
            let oracle = table.moments(p);
            let (cov, det) = moments::covariance_matrix(p, m).unwrap();
            let mean = moments::means(p, m);
            for a in 0..3 {
                assert!((mean[a] - oracle.mean[a]).abs() < TOL, "m={m} p={p} mean[{a}]");
                for b in 0..3 {
                    assert!(
                        (cov[a][b] - oracle.cov[a][b]).abs() < TOL,
                        "m={m} p={p} cov[{a}][{b}]: {} vs {}",
                        cov[a][b],
                        oracle.cov[a][b]
                    );
                }
            }
            assert!((det - linalg::det(&oracle.cov)).abs() < TOL, "m={m} p={p} det");
        }
    }
}

#[test]
fn enumeration_covers_every_image() {
    let table = EnumerationTable::build(3).unwrap();
    // at p = 1/2 every image has weight 2^{-9}
    let half = table.moments(0.5);
    assert!((half.mean[0] - 1.5).abs() < 1e-14);
    assert!((half.cov[0][0] - 0.25).abs() < 1e-14);
}

#[test]
fn closed_form_determinant_matches_numeric_determinant() {
    for m in [3, 5, 10, 50, 400] {
        for p in probabilities() {
            let (cov, det) = moments::covariance_matrix(p, m).unwrap();
            let numeric = linalg::det(&cov);
            assert!((det - numeric).abs() <= 1e-9 * numeric.abs().max(1e-12), "m={m} p={p}: {det} vs {numeric}");
        }
    }
}

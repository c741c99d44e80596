//! End-to-end properties of the test statistics.

use mfcsr_core::grid::{self, IntensityMode, LambdaSource, Point, PointPattern};
use mfcsr_core::hypothesis::{self, CombinedMode, GridChoice, StatisticKind, TestConfig, TestSetup};
use mfcsr_core::minkowski;
use mfcsr_core::pointprocess::sample_hpp;
use mfcsr_core::StreamRng;

#[test]
fn finite_and_asymptotic_combined_agree_at_large_m() {
    let lambda = 1e6;
    let setup = TestSetup::from_grid_choice(lambda, LambdaSource::Known, GridChoice::Kappa(1.0), 1).unwrap();
    for s in 0..10 {
        let pattern = sample_hpp(lambda, &mut StreamRng::new(s, &[])).unwrap();
        let triple = minkowski::functionals(&grid::threshold(&grid::bin_points(&pattern, 1000).unwrap(), 1).unwrap());
        let finite = hypothesis::t_combined(&triple, &setup.moments, CombinedMode::FiniteM).unwrap();
        let asym = hypothesis::t_combined(&triple, &setup.moments, CombinedMode::Asymptotic).unwrap();
        assert!((finite - asym).abs() <= 0.05 * finite.max(asym).max(0.1), "seed {s}: {finite} vs {asym}");
    }
}

#[test]
fn statistics_ignore_point_order() {
    let pattern = sample_hpp(800.0, &mut StreamRng::new(3, &[])).unwrap();
    let mut reversed: Vec<Point> = pattern.points().to_vec();
    reversed.reverse();
    let config = TestConfig { intensity: IntensityMode::Known(800.0), ..TestConfig::default() };
    let a = hypothesis::run_csr_test(&pattern, &config).unwrap();
    let b = hypothesis::run_csr_test(&PointPattern::new(reversed).unwrap(), &config).unwrap();
    assert_eq!(a, b);
}

#[test]
fn monte_carlo_p_values_are_valid() {
    let lambda = 200.0;
    let reps = 199;
    let datasets = 400;
    let setup = TestSetup::from_grid_choice(lambda, LambdaSource::Known, GridChoice::Kappa(1.0), 1).unwrap();
    let kinds = [StatisticKind::TA, StatisticKind::Tc];
    let null = hypothesis::null_distribution(&setup, &kinds, reps, 5).unwrap();
    let mut below = [[0usize; 3]; 2];
    let alphas = [0.01, 0.05, 0.1];
    for s in 0..datasets {
        let pattern = sample_hpp(lambda, &mut StreamRng::new(1000 + s, &[])).unwrap();
        let obs = setup.statistics(&grid::bin_points(&pattern, setup.config.m).unwrap(), &kinds).unwrap();
        for k in 0..2 {
            let p = hypothesis::mc_p_value(obs[k], &null[k]);
            assert!(p > 0.0 && p <= 1.0);
            for (a, &alpha) in alphas.iter().enumerate() {
                below[k][a] += usize::from(p <= alpha);
            }
        }
    }
    for k in 0..2 {
        for (a, &alpha) in alphas.iter().enumerate() {
            let rate = below[k][a] as f64 / datasets as f64;
            assert!(rate <= alpha + 2.0 / (reps as f64).sqrt(), "{:?} alpha={alpha}: {rate}", kinds[k]);
        }
    }
}

#[test]
fn reports_echo_configuration() {
    let pattern = sample_hpp(500.0, &mut StreamRng::new(8, &[])).unwrap();
    let config =
        TestConfig { intensity: IntensityMode::Estimate, c: 2, mc_reps: Some(100), seed: 4, ..TestConfig::default() };
    let reports = hypothesis::run_csr_test(&pattern, &config).unwrap();
    assert_eq!(reports.len(), 5);
    let n = pattern.len() as f64;
    for r in &reports {
        assert_eq!(r.config.lambda, n);
        assert_eq!(r.config.lambda_source, LambdaSource::Estimated);
        assert_eq!(r.config.m, (n.sqrt()).floor() as usize);
        assert_eq!(r.config.c, 2);
        assert!((r.config.kappa - n / (r.config.m * r.config.m) as f64).abs() < 1e-12);
        assert!(r.caveat.is_some());
        assert_eq!(r.reps, Some(100));
        assert!(r.value >= 0.0);
        assert_eq!(r.df, if r.statistic_name.is_combined() { 3 } else { 1 });
        let p = r.p_montecarlo.unwrap();
        assert!((p * 101.0 - (p * 101.0).round()).abs() < 1e-9);
    }
}

#[test]
fn degenerate_threshold_is_refused() {
    // κ = 1 and c = 12 gives p_c ≈ 1e-9
    let pattern = sample_hpp(400.0, &mut StreamRng::new(2, &[])).unwrap();
    let config = TestConfig {
        intensity: IntensityMode::Known(400.0),
        c: 12,
        stats: vec![StatisticKind::Tc],
        ..TestConfig::default()
    };
    let err = hypothesis::run_csr_test(&pattern, &config).unwrap_err();
    assert!(matches!(err, mfcsr_core::Error::Degenerate { .. }), "{err}");
}

//! Null calibration and power of the baseline tests.

use mfcsr_core::competitors::{self, HopkinsVariant, Tail};
use mfcsr_core::pointprocess::{sample_hpp, sample_matern, MaternParams};
use mfcsr_core::StreamRng;

fn hopkins_size(variant: HopkinsVariant, reps: u64) -> f64 {
    let mut rejected = 0;
    for s in 0..reps {
        let pattern = sample_hpp(10_000.0, &mut StreamRng::new(s, &[1])).unwrap();
        let r = competitors::hopkins_skellam(&pattern, None, &mut StreamRng::new(s, &[2]), variant, Tail::TwoSided)
            .unwrap();
        rejected += usize::from(r.p_value < 0.05);
    }
    rejected as f64 / reps as f64
}

#[test]
fn quadrat_size_at_five_percent() {
    let reps = 10_000;
    let mut rejected = 0;
    for s in 0..reps {
        let pattern = sample_hpp(10_000.0, &mut StreamRng::new(s, &[3])).unwrap();
        let side = competitors::default_quadrat_side(10_000.0);
        let r = competitors::quadrat_test(&pattern, side, Tail::Upper).unwrap();
        assert_eq!(r.param, 100);
        assert!(!r.low_expected_count);
        rejected += usize::from(r.p_value < 0.05);
    }
    let size = rejected as f64 / reps as f64;
    assert!((0.04..=0.06).contains(&size), "size {size}");
}

#[test]
fn squared_hopkins_is_calibrated_and_beats_plain() {
    let squared = hopkins_size(HopkinsVariant::Squared, 10_000);
    let plain = hopkins_size(HopkinsVariant::Plain, 2_000);
    assert!((0.035..=0.065).contains(&squared), "squared size {squared}");
    assert!((squared - 0.05).abs() < (plain - 0.05).abs(), "squared {squared}, plain {plain}");
}

#[test]
fn hopkins_detects_tight_clusters() {
    let params = MaternParams::from_target_intensity(500.0, 1.0, 0.05).unwrap();
    let reps = 500;
    let mut rejected = 0;
    let mut below_one = 0;
    for s in 0..reps {
        let pattern = sample_matern(&params, &mut StreamRng::new(s, &[4])).unwrap();
        let r = competitors::hopkins_skellam(
            &pattern,
            None,
            &mut StreamRng::new(s, &[5]),
            HopkinsVariant::Squared,
            Tail::TwoSided,
        )
        .unwrap();
        rejected += usize::from(r.p_value < 0.05);
        below_one += usize::from(r.value < 1.0);
    }
    assert!(rejected as f64 / reps as f64 > 0.8, "power {}", rejected as f64 / reps as f64);
    assert!(below_one as f64 / reps as f64 > 0.9);
}

//! The look-up-table scan against the neighbour-count perimeter and the
//! polynomial Euler characteristic on random images.

use mfcsr_core::grid::BinaryImage;
use mfcsr_core::minkowski;
use mfcsr_core::StreamRng;
use proptest::prelude::*;

fn random_image(m: usize, p: f64, seed: u64) -> BinaryImage {
    let mut rng = StreamRng::new(seed, &[m as u64]);
    BinaryImage::from_fn(m, |_, _| rng.uniform() < p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1200))]

    #[test]
    fn alternative_forms_agree(m in 3usize..=64, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let image = random_image(m, p, seed);
        let counts = minkowski::scan(&image);
        prop_assert_eq!(counts.black_cells(), image.black_count() as u64);
        prop_assert_eq!(counts.perimeter_edges(), minkowski::perimeter_psi_edges(&image));
        prop_assert_eq!(counts.euler_quarters, minkowski::euler_poly_quarters(&image));
    }

    #[test]
    fn histogram_reproduces_scan(m in 3usize..=32, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let image = random_image(m, p, seed);
        let hist = minkowski::configuration_histogram(&image);
        prop_assert_eq!(hist.iter().sum::<u64>(), ((m + 1) * (m + 1)) as u64);
        let mut area = 0u64;
        for (idx, &n) in hist.iter().enumerate() {
            let w = minkowski::WindowConfig::from_index(idx as u8 + 1).unwrap();
            area += n * u64::from(w.units().area_quarters);
        }
        prop_assert_eq!(area, minkowski::scan(&image).area_quarters);
    }

    #[test]
    fn euler_is_invariant_under_transpose(m in 3usize..=24, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let image = random_image(m, p, seed);
        let transposed = BinaryImage::from_fn(m, |i, j| image.get(j, i)).unwrap();
        prop_assert_eq!(minkowski::scan(&image), minkowski::scan(&transposed));
    }
}

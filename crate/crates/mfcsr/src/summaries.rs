//! Reports for the `moments`, `limits` and `morphology` subcommands.

use mfcsr_core::grid::{self, BinaryImage, LambdaSource, PointPattern};
use mfcsr_core::hypothesis::{GridChoice, ResolvedConfig, TestSetup};
use mfcsr_core::limits::{self, AlternativeLimit};
use mfcsr_core::minkowski::{self, MinkowskiCounts, MinkowskiTriple};
use mfcsr_core::moments::NullMoments;
use mfcsr_core::pointprocess::DensityId;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::report::{fixed, num, Tabular};

const NAMES: [&str; 3] = ["A", "P", "chi"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsReport {
    pub lambda: Option<f64>,
    pub c: Option<u32>,
    pub moments: NullMoments,
}

impl MomentsReport {
    pub fn from_intensity(lambda: f64, grid: GridChoice, c: u32) -> Result<Self> {
        let setup = TestSetup::from_grid_choice(lambda, LambdaSource::Known, grid, c)?;
        Ok(MomentsReport { lambda: Some(lambda), c: Some(c), moments: setup.moments })
    }

    pub fn from_p(p: f64, m: usize) -> Result<Self> {
        Ok(MomentsReport { lambda: None, c: None, moments: NullMoments::from_p(p, m)? })
    }
}

impl Tabular for MomentsReport {
    fn title(&self) -> Option<String> {
        let nm = &self.moments;
        let mut t = format!("Null moments: p={:.8}, m={}", nm.p, nm.m);
        if let (Some(l), Some(c)) = (self.lambda, self.c) {
            t = format!("{t}, lambda={}, c={c}", num(l));
        }
        Some(t)
    }

    fn headers(&self) -> Vec<String> {
        ["functional", "mean", "cov_A", "cov_P", "cov_chi", "asym_A", "asym_P", "asym_chi"].map(String::from).to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let nm = &self.moments;
        (0..3)
            .map(|i| {
                let mut r = vec![NAMES[i].to_string(), format!("{:.8}", nm.mean[i])];
                r.extend(nm.cov[i].iter().map(|v| format!("{v:.8}")));
                r.extend(nm.asym_cov[i].iter().map(|v| format!("{v:.8}")));
                r
            })
            .collect()
    }

    fn notes(&self) -> Vec<String> {
        vec![format!("det = {:.6e}", self.moments.det)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LimitsReport(pub Vec<AlternativeLimit>);

impl LimitsReport {
    pub fn compute(densities: &[DensityId], thresholds: &[u32], kappa: f64) -> Result<Self> {
        let mut out = Vec::new();
        for &d in densities {
            for &c in thresholds {
                out.push(limits::alternative_limit(c, kappa, d)?);
            }
        }
        Ok(LimitsReport(out))
    }
}

impl Tabular for LimitsReport {
    fn title(&self) -> Option<String> {
        Some("Almost-sure limits of A/m, P/m, chi/m".into())
    }

    fn headers(&self) -> Vec<String> {
        ["density", "c", "kappa", "area", "perimeter", "euler"].map(String::from).to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.0
            .iter()
            .map(|l| {
                vec![
                    l.density.map_or_else(|| "custom".into(), |d| d.to_string()),
                    l.c.to_string(),
                    num(l.kappa),
                    format!("{:.8}", l.area_limit),
                    format!("{:.8}", l.perimeter_limit),
                    format!("{:.8}", l.euler_limit),
                ]
            })
            .collect()
    }
}

/// Scans a thresholded image in row bands on the current rayon pool; the
/// result equals [`minkowski::scan`].
pub fn scan_parallel(image: &BinaryImage) -> MinkowskiCounts {
    let windows = image.m() + 1;
    let band = 64;
    (0..windows.div_ceil(band))
        .into_par_iter()
        .map(|b| minkowski::scan_rows(image, b * band..((b + 1) * band).min(windows)))
        .reduce(MinkowskiCounts::default, |a, b| a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphologyReport {
    pub source: Option<String>,
    pub config: ResolvedConfig,
    pub black_cells: u64,
    pub boundary_edges: u64,
    /// Euler characteristic of the black set, in quarter units.
    pub euler_quarters: i64,
    pub functionals: MinkowskiTriple,
    pub null_mean: [f64; 3],
    /// `(x − μ)/σ` per functional; `None` where the variance vanishes.
    pub z_scores: [Option<f64>; 3],
}

pub fn morphology(
    pattern: &PointPattern,
    lambda: Option<f64>,
    grid_choice: GridChoice,
    c: u32,
) -> Result<MorphologyReport> {
    let (lambda, source) = match lambda {
        Some(l) => (l, LambdaSource::Known),
        None => grid::resolve_intensity(pattern, grid::IntensityMode::Hint)?,
    };
    let setup = TestSetup::from_grid_choice(lambda, source, grid_choice, c)?;
    let image = grid::threshold(&grid::bin_points(pattern, setup.config.m)?, c)?;
    let counts = scan_parallel(&image);
    let functionals = counts.scaled(setup.config.m);
    let nm = &setup.moments;
    let var = nm.variances();
    let x = functionals.to_array();
    let z_scores = [0, 1, 2].map(|i| (var[i] > 0.0).then(|| (x[i] - nm.mean[i]) / var[i].sqrt()));
    Ok(MorphologyReport {
        source: None,
        config: setup.config,
        black_cells: counts.black_cells(),
        boundary_edges: counts.perimeter_edges(),
        euler_quarters: counts.euler_quarters,
        functionals,
        null_mean: nm.mean,
        z_scores,
    })
}

impl Tabular for MorphologyReport {
    fn title(&self) -> Option<String> {
        let c = &self.config;
        let src = self.source.as_deref().map(|s| format!("{s}: ")).unwrap_or_default();
        Some(format!(
            "{src}m={}, c={}, lambda={}; {} black cells, {} boundary edges, Euler {}",
            c.m,
            c.c,
            num(c.lambda),
            self.black_cells,
            self.boundary_edges,
            num(self.euler_quarters as f64 / 4.0)
        ))
    }

    fn headers(&self) -> Vec<String> {
        ["functional", "value", "null_mean", "z"].map(String::from).to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let x = self.functionals.to_array();
        (0..3)
            .map(|i| {
                vec![
                    NAMES[i].to_string(),
                    format!("{:.6}", x[i]),
                    format!("{:.6}", self.null_mean[i]),
                    fixed(self.z_scores[i], 3),
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mfcsr_core::pointprocess::sample_hpp;
    use mfcsr_core::rng::StreamRng;

    #[test]
    fn banded_scan_matches_sequential() {
        for (m, seed) in [(3usize, 1u64), (63, 2), (64, 3), (200, 4)] {
            let mut rng = StreamRng::new(seed, &[]);
            let image = BinaryImage::from_fn(m, |_, _| rng.uniform() < 0.4).unwrap();
            assert_eq!(scan_parallel(&image), minkowski::scan(&image));
        }
    }

    #[test]
    fn morphology_of_null_pattern() {
        let pattern = sample_hpp(2500.0, &mut StreamRng::new(9, &[])).unwrap();
        let r = morphology(&pattern, Some(2500.0), GridChoice::Kappa(1.0), 1).unwrap();
        assert_eq!(r.config.m, 50);
        assert_eq!(r.config.lambda_source, LambdaSource::Known);
        assert!(r.z_scores.iter().all(|z| z.unwrap().abs() < 5.0));
        assert_eq!(r.black_cells as f64, r.functionals.area * 50.0);
    }

    #[test]
    fn uniform_limits_match_null_means() {
        let rep = LimitsReport::compute(&[DensityId::Uniform], &[1, 2], 1.0).unwrap();
        assert_eq!(rep.0.len(), 2);
        assert_eq!(rep.rows()[0][0], "uniform");
    }
}

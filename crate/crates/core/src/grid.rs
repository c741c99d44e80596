//! Binning of a point pattern into an `m × m` counts grid and thresholding
//! into a bordered binary image.
//!
//! Cell `(i, j)` (1-based) covers `[(i-1)/m, i/m) × [(j-1)/m, j/m)`, with the
//! last row and column closed on the right so the cells partition `[0,1]²`.
//! `i` indexes the x-coordinate and `j` the y-coordinate.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }
}

/// A finite point pattern in the closed unit square.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointPattern {
    points: Vec<Point>,
    intensity_hint: Option<f64>,
}

impl PointPattern {
    /// Fails with [`Error::InvalidInput`] if a coordinate is NaN or outside `[0,1]`.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if let Some((idx, p)) = points.iter().enumerate().find(|(_, p)| !p.in_unit_square()) {
            return Err(Error::InvalidInput(format!("point #{idx} ({}, {}) lies outside [0,1]^2", p.x, p.y)));
        }
        Ok(PointPattern { points, intensity_hint: None })
    }

    /// Samplers produce points that are in range by construction.
    pub(crate) fn from_trusted(points: Vec<Point>) -> Self {
        debug_assert!(points.iter().all(Point::in_unit_square));
        PointPattern { points, intensity_hint: None }
    }

    pub fn with_intensity_hint(mut self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::param("intensity_hint", format!("must be positive, got {lambda}")));
        }
        self.intensity_hint = Some(lambda);
        Ok(self)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn intensity_hint(&self) -> Option<f64> {
        self.intensity_hint
    }
}

/// Dense row-major `m × m` matrix of bin counts; entry `(i, j)` is `Y_{i,j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsGrid {
    m: usize,
    counts: Vec<u32>,
}

impl CountsGrid {
    /// Builds a grid from row-major counts (row `i`, column `j`, both 0-based here).
    pub fn from_counts(m: usize, counts: Vec<u32>) -> Result<Self> {
        check_m(m)?;
        if counts.len() != m * m {
            return Err(Error::InvalidInput(format!("expected {} counts for m={m}, got {}", m * m, counts.len())));
        }
        Ok(CountsGrid { m, counts })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Count of cell `(i, j)` with 1-based indices in `1..=m`.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        assert!((1..=self.m).contains(&i) && (1..=self.m).contains(&j));
        self.counts[(i - 1) * self.m + (j - 1)]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }
}

/// `(m+2) × (m+2)` binary image with an all-white border; `true` is black.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    m: usize,
    threshold: u32,
    cells: Vec<bool>,
}

impl BinaryImage {
    /// Builds an image from interior cells given by `black(i, j)` for 1-based `i, j`.
    ///
    /// The threshold is recorded as 1; use [`threshold`] to build from counts.
    pub fn from_fn(m: usize, mut black: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        check_m(m)?;
        let side = m + 2;
        let mut cells = vec![false; side * side];
        for i in 1..=m {
            for j in 1..=m {
                cells[i * side + j] = black(i, j);
            }
        }
        Ok(BinaryImage { m, threshold: 1, cells })
    }

    /// Builds an image from `m²` row-major interior cells.
    pub fn from_interior(m: usize, interior: &[bool]) -> Result<Self> {
        if interior.len() != m * m {
            return Err(Error::InvalidInput(format!(
                "expected {} interior cells for m={m}, got {}",
                m * m,
                interior.len()
            )));
        }
        Self::from_fn(m, |i, j| interior[(i - 1) * m + (j - 1)])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    /// `Z_{i,j}` for `i, j` in `0..=m+1`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * (self.m + 2) + j]
    }

    /// Row `i` of the bordered image, `m + 2` entries.
    #[inline]
    pub fn row(&self, i: usize) -> &[bool] {
        let side = self.m + 2;
        &self.cells[i * side..(i + 1) * side]
    }

    pub fn black_count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }
}

fn check_m(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::param("m", format!("grid size must be at least 3, got {m}")));
    }
    Ok(())
}

/// Index of the cell containing coordinate `v ∈ [0,1]`, 0-based.
#[inline]
fn cell_index(v: f64, m: usize) -> usize {
    // v·m can round up to m for v slightly below 1; the clamp closes the last cell.
    let k = libm::floor(v * m as f64) as usize;
    k.min(m - 1)
}

/// Counts points per cell.
pub fn bin_points(pattern: &PointPattern, m: usize) -> Result<CountsGrid> {
    check_m(m)?;
    let mut counts = vec![0u32; m * m];
    for p in pattern.points() {
        counts[cell_index(p.x, m) * m + cell_index(p.y, m)] += 1;
    }
    Ok(CountsGrid { m, counts })
}

/// Colors cell `(i, j)` black iff `Y_{i,j} ≥ c`, inside a white border.
pub fn threshold(grid: &CountsGrid, c: u32) -> Result<BinaryImage> {
    if c < 1 {
        return Err(Error::param("c", "threshold must be at least 1"));
    }
    let m = grid.m;
    let side = m + 2;
    let mut cells = vec![false; side * side];
    for (row, counts) in grid.counts.chunks_exact(m).enumerate() {
        let dst = &mut cells[(row + 1) * side + 1..(row + 1) * side + 1 + m];
        for (z, &y) in dst.iter_mut().zip(counts) {
            *z = y >= c;
        }
    }
    Ok(BinaryImage { m, threshold: c, cells })
}

/// `m = ⌊√(λ/κ)⌋`, refusing grids smaller than 3.
pub fn choose_m(lambda: f64, kappa: f64) -> Result<usize> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::param("kappa", format!("must be positive, got {kappa}")));
    }
    let m = libm::floor(libm::sqrt(lambda / kappa)) as usize;
    if m < 3 {
        return Err(Error::InsufficientIntensity { lambda, kappa, m });
    }
    Ok(m)
}

/// Where the intensity used by a test came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LambdaSource {
    Known,
    Estimated,
}

/// How to obtain `λ` for a pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntensityMode {
    /// Use this value.
    Known(f64),
    /// Use the pattern's intensity hint, falling back to the estimate.
    Hint,
    /// Use the point count (window area is 1).
    Estimate,
}

/// Point count divided by the window area, which is 1.
pub fn estimate_intensity(pattern: &PointPattern) -> Result<f64> {
    if pattern.is_empty() {
        return Err(Error::ZeroIntensity);
    }
    Ok(pattern.len() as f64)
}

pub fn resolve_intensity(pattern: &PointPattern, mode: IntensityMode) -> Result<(f64, LambdaSource)> {
    match mode {
        IntensityMode::Known(lambda) => {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
            }
            Ok((lambda, LambdaSource::Known))
        }
        IntensityMode::Hint => match pattern.intensity_hint() {
            Some(lambda) => Ok((lambda, LambdaSource::Known)),
            None => Ok((estimate_intensity(pattern)?, LambdaSource::Estimated)),
        },
        IntensityMode::Estimate => Ok((estimate_intensity(pattern)?, LambdaSource::Estimated)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(pts: &[(f64, f64)]) -> PointPattern {
        PointPattern::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn empty_pattern_bins_to_zero() {
        let g = bin_points(&PointPattern::default(), 3).unwrap();
        assert!(g.counts().iter().all(|&c| c == 0));
    }

    #[test]
    fn upper_corner_goes_to_last_cell() {
        let g = bin_points(&pattern(&[(1.0, 1.0)]), 3).unwrap();
        assert_eq!(g.get(3, 3), 1);
        assert_eq!(g.total(), 1);
    }

    #[test]
    fn interior_edges_go_to_higher_cell() {
        let g = bin_points(&pattern(&[(0.5, 0.25), (0.0, 0.0)]), 4).unwrap();
        assert_eq!(g.get(3, 2), 1);
        assert_eq!(g.get(1, 1), 1);
    }

    #[test]
    fn rejects_small_m_and_outside_points() {
        assert!(matches!(bin_points(&PointPattern::default(), 2), Err(Error::InvalidParameter { .. })));
        assert!(matches!(PointPattern::new(alloc::vec![Point::new(1.0001, 0.5)]), Err(Error::InvalidInput(_))));
        assert!(PointPattern::new(alloc::vec![Point::new(f64::NAN, 0.5)]).is_err());
    }

    #[test]
    fn threshold_cases() {
        let zero = CountsGrid::from_counts(3, alloc::vec![0; 9]).unwrap();
        assert_eq!(threshold(&zero, 1).unwrap().black_count(), 0);

        let fives = CountsGrid::from_counts(3, alloc::vec![5; 9]).unwrap();
        let img = threshold(&fives, 5).unwrap();
        assert_eq!(img.black_count(), 9);
        for k in 0..5 {
            assert!(!img.get(0, k) && !img.get(4, k) && !img.get(k, 0) && !img.get(k, 4));
        }

        let ramp = CountsGrid::from_counts(3, (0..9).collect()).unwrap();
        let img = threshold(&ramp, 4).unwrap();
        let black: Vec<(usize, usize)> =
            (1..=3).flat_map(|i| (1..=3).map(move |j| (i, j))).filter(|&(i, j)| img.get(i, j)).collect();
        // counts 4..=8 sit at (2,2), (2,3), (3,1), (3,2), (3,3)
        assert_eq!(black, alloc::vec![(2, 2), (2, 3), (3, 1), (3, 2), (3, 3)]);

        assert!(threshold(&zero, 0).is_err());
    }

    #[test]
    fn choose_m_cases() {
        assert_eq!(choose_m(100.0, 1.0).unwrap(), 10);
        assert_eq!(choose_m(1041.0, 1041.0 / 324.0).unwrap(), 18);
        // the dataset-1 configuration quoted as κ ≈ 3.213
        assert!((1041.0 / 324.0 - 3.213f64).abs() < 1e-3);
        assert!(matches!(choose_m(50.0, 9.0), Err(Error::InsufficientIntensity { m: 2, .. })));
        assert!(choose_m(-1.0, 1.0).is_err());
    }

    #[test]
    fn intensity_modes() {
        let pts: Vec<Point> = (0..250).map(|k| Point::new(k as f64 / 250.0, 0.5)).collect();
        let pat = PointPattern::new(pts).unwrap();
        assert_eq!(estimate_intensity(&pat).unwrap(), 250.0);
        assert_eq!(estimate_intensity(&PointPattern::default()), Err(Error::ZeroIntensity));

        let pts: Vec<Point> = (0..480).map(|k| Point::new(k as f64 / 480.0, 0.5)).collect();
        let hinted = PointPattern::new(pts).unwrap().with_intensity_hint(500.0).unwrap();
        assert_eq!(resolve_intensity(&hinted, IntensityMode::Hint).unwrap(), (500.0, LambdaSource::Known));
        assert_eq!(resolve_intensity(&hinted, IntensityMode::Estimate).unwrap(), (480.0, LambdaSource::Estimated));
    }
}

//! Baseline CSR tests: the quadrat-count χ² test and the Hopkins–Skellam
//! distance test.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use libm::{floor, pow, sqrt};

use crate::error::{Error, Result};
use crate::grid::{Point, PointPattern};
use crate::rng::StreamRng;
use crate::special::{chi2_cdf, chi2_sf, f_cdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CompetitorKind {
    /// Quadrat-count χ².
    Q,
    /// Hopkins–Skellam.
    H,
}

impl fmt::Display for CompetitorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompetitorKind::Q => "Q",
            CompetitorKind::H => "H",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Tail {
    Upper,
    TwoSided,
}

/// Distances entering the Hopkins–Skellam ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum HopkinsVariant {
    /// `ΣD / ΣE`.
    Plain,
    /// `ΣD² / ΣE²`, for which the `F(2n, 2n)` reference law is exact under CSR.
    Squared,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompetitorReport {
    pub name: CompetitorKind,
    pub value: f64,
    pub p_value: f64,
    /// Number of squares `k` for Q, sample size `n` for H.
    pub param: usize,
    pub tail: Tail,
    /// Q only: expected count per square is below 5.
    pub low_expected_count: bool,
}

/// Default squares per side, `⌊λ^{1/4}⌋` (at least 2).
pub fn default_quadrat_side(lambda: f64) -> usize {
    (floor(pow(lambda, 0.25)) as usize).max(2)
}

/// Quadrat-count test with `side × side` equal squares.
pub fn quadrat_test(pattern: &PointPattern, side: usize, tail: Tail) -> Result<CompetitorReport> {
    let k = side * side;
    if k < 2 {
        return Err(Error::param("k", format!("need at least 2 squares, got {k}")));
    }
    let n = pattern.len();
    if n == 0 {
        return Err(Error::ZeroIntensity);
    }
    let mut counts = vec![0u64; k];
    let s = side as f64;
    for p in pattern.points() {
        let i = (floor(p.x * s) as usize).min(side - 1);
        let j = (floor(p.y * s) as usize).min(side - 1);
        counts[i * side + j] += 1;
    }
    let expected = n as f64 / k as f64;
    let q: f64 = counts.iter().map(|&u| (u as f64 - expected) * (u as f64 - expected)).sum::<f64>() / expected;
    let df = (k - 1) as f64;
    let p_value = match tail {
        Tail::Upper => chi2_sf(q, df),
        Tail::TwoSided => (2.0 * chi2_sf(q, df).min(chi2_cdf(q, df))).min(1.0),
    };
    Ok(CompetitorReport {
        name: CompetitorKind::Q,
        value: q,
        p_value,
        param: k,
        tail,
        low_expected_count: expected < 5.0,
    })
}

/// Uniform-grid nearest-neighbour index over a point set in `[0,1]²`.
#[derive(Debug, Clone)]
pub struct NearestNeighbors<'a> {
    points: &'a [Point],
    g: usize,
    start: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> NearestNeighbors<'a> {
    pub fn new(points: &'a [Point]) -> Self {
        let g = (floor(sqrt(points.len() as f64)) as usize).max(1);
        let cell = |p: &Point| -> usize {
            let i = (floor(p.x * g as f64) as usize).min(g - 1);
            let j = (floor(p.y * g as f64) as usize).min(g - 1);
            i * g + j
        };
        let mut start = vec![0usize; g * g + 1];
        for p in points {
            start[cell(p) + 1] += 1;
        }
        for c in 0..g * g {
            start[c + 1] += start[c];
        }
        let mut fill = start.clone();
        let mut order = vec![0usize; points.len()];
        for (idx, p) in points.iter().enumerate() {
            let c = cell(p);
            order[fill[c]] = idx;
            fill[c] += 1;
        }
        NearestNeighbors { points, g, start, order }
    }

    /// Squared distance from `q` to the nearest indexed point other than `exclude`.
    pub fn nearest_sq(&self, q: Point, exclude: Option<usize>) -> Option<f64> {
        let g = self.g as isize;
        let w = 1.0 / self.g as f64;
        let ci = (floor(q.x * self.g as f64) as isize).clamp(0, g - 1);
        let cj = (floor(q.y * self.g as f64) as isize).clamp(0, g - 1);
        let mut best = f64::INFINITY;
        for r in 0..=g {
            for i in (ci - r).max(0)..=(ci + r).min(g - 1) {
                for j in (cj - r).max(0)..=(cj + r).min(g - 1) {
                    if (i - ci).abs().max((j - cj).abs()) != r {
                        continue;
                    }
                    let c = (i * g + j) as usize;
                    for &idx in &self.order[self.start[c]..self.start[c + 1]] {
                        if Some(idx) == exclude {
                            continue;
                        }
                        let p = self.points[idx];
                        let d = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
                        best = best.min(d);
                    }
                }
            }
            let reach = r as f64 * w;
            if best <= reach * reach {
                break;
            }
        }
        best.is_finite().then_some(best)
    }
}

/// Hopkins–Skellam test on a subsample of `n` points (default `⌊N/10⌋`).
pub fn hopkins_skellam(
    pattern: &PointPattern,
    n: Option<usize>,
    rng: &mut StreamRng,
    variant: HopkinsVariant,
    tail: Tail,
) -> Result<CompetitorReport> {
    let total = pattern.len();
    if total < 10 {
        return Err(Error::SampleTooSmall { n: total, required: 10 });
    }
    let max_n = total / 10;
    let n = n.unwrap_or(max_n);
    if n < 1 || n > max_n {
        return Err(Error::param("n", format!("subsample size must lie in 1..={max_n}, got {n}")));
    }
    let points = pattern.points();
    let index = NearestNeighbors::new(points);

    // partial Fisher–Yates for n distinct indices
    let mut idx: Vec<usize> = (0..total).collect();
    for i in 0..n {
        let j = i + rng.below((total - i) as u64) as usize;
        idx.swap(i, j);
    }
    let power = |d2: f64| match variant {
        HopkinsVariant::Plain => sqrt(d2),
        HopkinsVariant::Squared => d2,
    };
    let mut sum_d = 0.0;
    for &i in &idx[..n] {
        sum_d += power(index.nearest_sq(points[i], Some(i)).unwrap_or(0.0));
    }
    let mut sum_e = 0.0;
    for _ in 0..n {
        let x = rng.uniform();
        let q = Point::new(x, rng.uniform());
        sum_e += power(index.nearest_sq(q, None).unwrap_or(0.0));
    }
    if !(sum_e > 0.0) {
        return Err(Error::InvalidInput("all empty-space distances are zero".into()));
    }
    let h = sum_d / sum_e;
    let d = 2.0 * n as f64;
    let cdf = f_cdf(h, d, d);
    let p_value = match tail {
        Tail::Upper => 1.0 - cdf,
        Tail::TwoSided => (2.0 * cdf.min(1.0 - cdf)).min(1.0),
    };
    Ok(CompetitorReport { name: CompetitorKind::H, value: h, p_value, param: n, tail, low_expected_count: false })
}

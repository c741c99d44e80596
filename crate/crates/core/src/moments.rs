//! Exact null-hypothesis moments of the scaled Minkowski functionals.
//!
//! Under CSR the image cells are i.i.d. Bernoulli(`p_c`), so the means and
//! the 3×3 covariance matrix of `(A, P, χ)` are polynomials in `p_c` with
//! coefficients depending on `m`. Polynomials are evaluated in Horner form.
//! [`EnumerationTable`] recomputes the same moments by brute force over all
//! `2^{m²}` images for `m ∈ {3, 4}`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::BinaryImage;
use crate::linalg::{self, Matrix3, Vector3};
use crate::minkowski;
use crate::special::poisson_tails;

/// Below/above these exceedance probabilities the combined statistics refuse to run.
pub const P_GUARD: f64 = 1e-6;
/// Largest admissible spectral condition number of `Σ` for the combined statistics.
pub const CONDITION_GUARD: f64 = 1e12;

/// `Σ c_k x^k` with coefficients in ascending order.
#[inline]
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// `P(Poisson(κ) ≥ c)` with `κ = λ/m²`.
pub fn exceedance_prob(lambda: f64, m: usize, c: u32) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    if m < 3 {
        return Err(Error::param("m", format!("grid size must be at least 3, got {m}")));
    }
    exceedance_prob_kappa(lambda / (m * m) as f64, c)
}

/// `p_c(κ) = P(Poisson(κ) ≥ c)`.
pub fn exceedance_prob_kappa(kappa: f64, c: u32) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::param("kappa", format!("must be positive, got {kappa}")));
    }
    if c < 1 {
        return Err(Error::param("c", "threshold must be at least 1"));
    }
    Ok(poisson_tails(kappa, u64::from(c)).1)
}

/// `(μ_A, μ_P, μ_χ)`.
pub fn means(p: f64, m: usize) -> Vector3 {
    let mf = m as f64;
    let q = 1.0 - p;
    let k = mf - 1.0;
    [mf * p, 4.0 * p * (mf - k * p), (p + 2.0 * k * p * q + k * k * p * q * horner(&[1.0, -3.0, 1.0], p)) / mf]
}

/// `(σ²_A, σ²_P, σ²_χ)`.
pub fn variances(p: f64, m: usize) -> Vector3 {
    let m = m as f64;
    let m2 = m * m;
    let pq = p * (1.0 - p);
    let perimeter = horner(&[2.0 * m2, -7.0 * m * (m - 1.0), 7.0 * m2 - 13.0 * m + 4.0], p);
    let euler = horner(
        &[
            m2,
            -(12.0 * m2 - 18.0 * m + 6.0),
            64.0 * m2 - 158.0 * m + 94.0,
            -(139.0 * m2 - 406.0 * m + 291.0),
            137.0 * m2 - 434.0 * m + 341.0,
            -(59.0 * m2 - 194.0 * m + 159.0),
            9.0 * m2 - 30.0 * m + 25.0,
        ],
        p,
    );
    [pq, 8.0 * pq * perimeter / m2, pq * euler / m2]
}

/// `(σ_{A,P}, σ_{A,χ}, σ_{P,χ})`.
pub fn covariances(p: f64, m: usize) -> Vector3 {
    let m = m as f64;
    let m2 = m * m;
    let k = m - 1.0;
    let pq = p * (1.0 - p);
    let ap = horner(&[4.0 * m2, -8.0 * m2 + 8.0 * m], p);
    let ax = horner(&[m2, -4.0 * k * (2.0 * m - 1.0), 12.0 * k * k, -4.0 * k * k], p);
    let px = horner(
        &[
            m2,
            -(9.0 * m2 - 13.0 * m + 4.0),
            23.0 * m2 - 49.0 * m + 24.0,
            -(22.0 * m2 - 56.0 * m + 34.0),
            6.0 * m2 - 16.0 * m + 10.0,
        ],
        p,
    );
    [pq * ap / m2, pq * ax / m2, 4.0 * pq * px / m2]
}

/// Closed-form determinant of `Σ_{c,m,λ}`.
pub fn determinant(p: f64, m: usize) -> f64 {
    let m = m as f64;
    let pw = |e: i32| libm::pow(m, f64::from(e));
    let a = m * m - 3.0 * m + 4.0;
    let coeffs = [
        2.0 * pw(3) * libm::pow(m - 1.0, 3.0),
        -4.0 * m * (m - 1.0) * (2.0 * pw(4) - 9.0 * pw(3) + 20.0 * pw(2) - 18.0 * m + 4.0),
        11.0 * pw(6) - 77.0 * pw(5) + 229.0 * pw(4) - 275.0 * pw(3) + 56.0 * pw(2) + 112.0 * m - 64.0,
        -4.0 * pw(6) + 22.0 * pw(5) - 302.0 * pw(3) + 828.0 * pw(2) - 880.0 * m + 384.0,
        -4.0 * pw(6) + 50.0 * pw(5) - 280.0 * pw(4) + 878.0 * pw(3) - 1580.0 * pw(2) + 1552.0 * m - 704.0,
        2.0 * (2.0 * m * m - 5.0 * m + 6.0) * a * (m * m - 5.0 * m + 8.0),
        -(a * a * a),
    ];
    let q = 1.0 - p;
    8.0 / pw(6) * libm::pow(p, 5.0) * q * q * q * horner(&coeffs, p)
}

fn check_open_unit(p: f64, m: usize) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Degenerate {
            p,
            m,
            reason: "exceedance probability must lie strictly inside (0, 1)".into(),
        });
    }
    Ok(())
}

/// `Σ_{c,m,λ}` assembled from the variances and covariances, with its
/// closed-form determinant.
pub fn covariance_matrix(p: f64, m: usize) -> Result<(Matrix3, f64)> {
    check_open_unit(p, m)?;
    Ok((assemble(p, m), determinant(p, m)))
}

fn assemble(p: f64, m: usize) -> Matrix3 {
    let [va, vp, vx] = variances(p, m);
    let [ap, ax, px] = covariances(p, m);
    [[va, ap, ax], [ap, vp, px], [ax, px, vx]]
}

/// Coefficients (ascending in `p`) of the `m → ∞` covariance matrix divided by `p(1−p)`.
const ASYMPTOTIC_COV: [[&[f64]; 3]; 3] = [
    [&[1.0], &[4.0, -8.0], &[1.0, -8.0, 12.0, -4.0]],
    [&[4.0, -8.0], &[16.0, -56.0, 56.0], &[4.0, -36.0, 92.0, -88.0, 24.0]],
    [&[1.0, -8.0, 12.0, -4.0], &[4.0, -36.0, 92.0, -88.0, 24.0], &[1.0, -12.0, 64.0, -139.0, 137.0, -59.0, 9.0]],
];

/// Coefficients (ascending in `p`) of the closed-form inverse, to be divided
/// by `p²(1−p)⁴(p²−2)`.
const ASYMPTOTIC_INV: [[&[f64]; 3]; 3] = [
    [&[-5.0, 30.0, -76.0, 103.0, -87.0, 43.0, -9.0], &[1.5, -8.0, 17.5, -22.0, 13.5, -3.0], &[-1.0, 4.0, -8.0, 4.0]],
    [&[1.5, -8.0, 17.5, -22.0, 13.5, -3.0], &[-0.5, 2.5, -41.0 / 8.0, 3.75, -7.0 / 8.0], &[0.5, -2.0, 1.0]],
    [&[-1.0, 4.0, -8.0, 4.0], &[0.5, -2.0, 1.0], &[-1.0]],
];

/// Limit covariance matrix `Σ(p)` and its closed-form inverse `Σ⁻¹(p)`.
pub fn asymptotic_matrix(p: f64) -> Result<(Matrix3, Matrix3)> {
    check_open_unit(p, 0)?;
    let q = 1.0 - p;
    let pq = p * q;
    let denom = p * p * q * q * q * q * (p * p - 2.0);
    let mut cov = [[0.0; 3]; 3];
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = pq * horner(ASYMPTOTIC_COV[i][j], p);
            inv[i][j] = horner(ASYMPTOTIC_INV[i][j], p) / denom;
        }
    }
    Ok((cov, inv))
}

/// Null moments for one `(p_c, m)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NullMoments {
    pub p: f64,
    pub m: usize,
    /// `(μ_A, μ_P, μ_χ)`.
    pub mean: Vector3,
    /// `Σ_{c,m,λ}`.
    pub cov: Matrix3,
    /// Closed-form `det Σ_{c,m,λ}`.
    pub det: f64,
    /// `Σ`, the `m → ∞` limit of `cov`.
    pub asym_cov: Matrix3,
    /// Closed-form `Σ⁻¹`.
    pub asym_inv: Matrix3,
}

impl NullMoments {
    pub fn new(lambda: f64, m: usize, c: u32) -> Result<Self> {
        Self::from_p(exceedance_prob(lambda, m, c)?, m)
    }

    pub fn from_p(p: f64, m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::param("m", format!("grid size must be at least 3, got {m}")));
        }
        let (cov, det) = covariance_matrix(p, m)?;
        let (asym_cov, asym_inv) = asymptotic_matrix(p)?;
        Ok(NullMoments { p, m, mean: means(p, m), cov, det, asym_cov, asym_inv })
    }

    pub fn variances(&self) -> Vector3 {
        [self.cov[0][0], self.cov[1][1], self.cov[2][2]]
    }

    /// The matrix used by the combined statistic.
    pub fn matrix(&self, asymptotic: bool) -> &Matrix3 {
        if asymptotic {
            &self.asym_cov
        } else {
            &self.cov
        }
    }

    /// Refuses inversion near `p ∈ {0, 1}` or for ill-conditioned matrices.
    pub fn check_invertible(&self, asymptotic: bool) -> Result<()> {
        if self.p < P_GUARD || self.p > 1.0 - P_GUARD {
            return Err(Error::Degenerate {
                p: self.p,
                m: self.m,
                reason: format!("p_c outside [{P_GUARD:e}, 1 - {P_GUARD:e}]"),
            });
        }
        let cond = linalg::condition_number(self.matrix(asymptotic));
        if !(cond <= CONDITION_GUARD) {
            return Err(Error::Degenerate {
                p: self.p,
                m: self.m,
                reason: format!("covariance condition number {cond:e} exceeds {CONDITION_GUARD:e}"),
            });
        }
        Ok(())
    }
}

/// Exact mean vector and covariance matrix from the enumeration oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMoments {
    pub mean: Vector3,
    pub cov: Matrix3,
}

/// Per-black-count sums over all `2^{m²}` interior colorings, in integer
/// units: black cells, perimeter edges, Euler quarters.
#[derive(Debug, Clone)]
pub struct EnumerationTable {
    m: usize,
    /// `count[k]`: images with `k` black cells.
    count: Vec<u64>,
    /// `first[k][a]`: sum of feature `a`.
    first: Vec<[i64; 3]>,
    /// `second[k][a][b]`: sum of feature products.
    second: Vec<[[i64; 3]; 3]>,
}

impl EnumerationTable {
    pub fn build(m: usize) -> Result<Self> {
        if !(3..=4).contains(&m) {
            return Err(Error::EnumerationTooLarge { m });
        }
        let cells = m * m;
        let mut count = vec![0u64; cells + 1];
        let mut first = vec![[0i64; 3]; cells + 1];
        let mut second = vec![[[0i64; 3]; 3]; cells + 1];
        for bits in 0u32..(1u32 << cells) {
            let image = BinaryImage::from_fn(m, |i, j| bits >> ((i - 1) * m + (j - 1)) & 1 == 1)?;
            let s = minkowski::scan(&image);
            let x = [s.black_cells() as i64, s.perimeter_edges() as i64, s.euler_quarters];
            let k = bits.count_ones() as usize;
            count[k] += 1;
            for a in 0..3 {
                first[k][a] += x[a];
                for b in 0..3 {
                    second[k][a][b] += x[a] * x[b];
                }
            }
        }
        Ok(EnumerationTable { m, count, first, second })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Exact moments of the scaled triple with i.i.d. Bernoulli(`p`) cells.
    pub fn moments(&self, p: f64) -> OracleMoments {
        let cells = self.m * self.m;
        let mf = self.m as f64;
        let scale = [1.0 / mf, 1.0 / mf, 1.0 / (4.0 * mf)];
        let weight = |k: usize| libm::pow(p, k as f64) * libm::pow(1.0 - p, (cells - k) as f64);
        let mut raw_mean = [0.0; 3];
        for k in 0..=cells {
            let w = weight(k);
            for a in 0..3 {
                raw_mean[a] += w * self.first[k][a] as f64;
            }
        }
        // central second moments, accumulated per k to limit cancellation
        let mut cov = [[0.0; 3]; 3];
        for k in 0..=cells {
            let w = weight(k);
            let n = self.count[k] as f64;
            for a in 0..3 {
                for b in 0..3 {
                    let central = self.second[k][a][b] as f64
                        - raw_mean[a] * self.first[k][b] as f64
                        - raw_mean[b] * self.first[k][a] as f64
                        + n * raw_mean[a] * raw_mean[b];
                    cov[a][b] += w * central;
                }
            }
        }
        let mut mean = [0.0; 3];
        for a in 0..3 {
            mean[a] = raw_mean[a] * scale[a];
            for b in 0..3 {
                cov[a][b] *= scale[a] * scale[b];
            }
        }
        OracleMoments { mean, cov }
    }
}

/// Brute-force moments over all `2^{m²}` images; `m ∈ {3, 4}` only.
pub fn enumeration_oracle(m: usize, p: f64) -> Result<OracleMoments> {
    Ok(EnumerationTable::build(m)?.moments(p))
}

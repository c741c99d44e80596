//! Almost-sure limits of `A/m`, `P/m`, `χ/m` under an inhomogeneous Poisson
//! process with intensity `λ f`, as `λ, m → ∞` with `λ/m² → κ`.
//!
//! Everything is driven by `q(x) = P(Poisson(κ f(x)) < c)`, the limiting
//! probability that the bin around `x` stays white.

use crate::error::{Error, Result};
use crate::pointprocess::DensityId;
use crate::quadrature::QuadratureRule;
use crate::special::{gamma_p, poisson_tails};

/// `P(Poisson(κ · f_value) < c)`.
pub fn q_value(c: u32, kappa: f64, f_value: f64) -> f64 {
    poisson_tails((kappa * f_value).max(0.0), u64::from(c)).0
}

/// `L_c(u) = (1/(c−1)!) ∫₀ᵘ e^{−t} t^{c−1} dt = P(Poisson(u) ≥ c)`.
pub fn lower_gamma_l(c: u32, u: f64) -> f64 {
    assert!(c >= 1, "lower_gamma_l: c must be at least 1");
    if u <= 0.0 {
        return 0.0;
    }
    gamma_p(f64::from(c), u)
}

/// The three limits together with the integrals they are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlternativeLimit {
    pub c: u32,
    pub kappa: f64,
    pub density: Option<DensityId>,
    /// `1 − ∫q`.
    pub area_limit: f64,
    /// `4(∫q − ∫q²)`.
    pub perimeter_limit: f64,
    /// `−∫q + 2∫q² − ∫q⁴`.
    pub euler_limit: f64,
    pub int_q: f64,
    pub int_q2: f64,
    pub int_q4: f64,
}

impl AlternativeLimit {
    pub fn to_array(&self) -> [f64; 3] {
        [self.area_limit, self.perimeter_limit, self.euler_limit]
    }
}

fn check(c: u32, kappa: f64) -> Result<()> {
    if c < 1 {
        return Err(Error::param("c", "threshold must be at least 1"));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::param("kappa", "must be positive"));
    }
    Ok(())
}

/// Limits for an arbitrary density on `[0,1]²`.
pub fn limits_for(c: u32, kappa: f64, f: impl Fn(f64, f64) -> f64, rule: QuadratureRule) -> Result<AlternativeLimit> {
    check(c, kappa)?;
    let [int_q, int_q2, int_q4] = rule.integrate_many(|x, y| {
        let q = q_value(c, kappa, f(x, y));
        let q2 = q * q;
        [q, q2, q2 * q2]
    });
    Ok(AlternativeLimit {
        c,
        kappa,
        density: None,
        area_limit: 1.0 - int_q,
        perimeter_limit: 4.0 * (int_q - int_q2),
        euler_limit: -int_q + 2.0 * int_q2 - int_q4,
        int_q,
        int_q2,
        int_q4,
    })
}

/// Limits for one of the built-in densities with the default rule.
pub fn alternative_limit(c: u32, kappa: f64, density: DensityId) -> Result<AlternativeLimit> {
    let mut out = limits_for(c, kappa, |x, y| density.eval(x, y), QuadratureRule::default())?;
    out.density = Some(density);
    Ok(out)
}

pub fn area_limit(c: u32, kappa: f64, f: impl Fn(f64, f64) -> f64, rule: QuadratureRule) -> Result<f64> {
    Ok(limits_for(c, kappa, f, rule)?.area_limit)
}

pub fn perimeter_limit(c: u32, kappa: f64, f: impl Fn(f64, f64) -> f64, rule: QuadratureRule) -> Result<f64> {
    Ok(limits_for(c, kappa, f, rule)?.perimeter_limit)
}

pub fn euler_limit(c: u32, kappa: f64, f: impl Fn(f64, f64) -> f64, rule: QuadratureRule) -> Result<f64> {
    Ok(limits_for(c, kappa, f, rule)?.euler_limit)
}

/// `lim μ/m` of the null means for exceedance probability `p`.
pub fn null_mean_limits(p: f64) -> [f64; 3] {
    let q = 1.0 - p;
    [p, 4.0 * p * q, p * q * (p * p - 3.0 * p + 1.0)]
}

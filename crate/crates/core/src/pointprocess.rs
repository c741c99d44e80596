//! Seedable simulators for the homogeneous Poisson null and the alternatives:
//! inhomogeneous Poisson (thinning), the Baddeley–Silverman cell process and
//! the Matérn cluster process.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use libm::{cos, floor, round, sin, sqrt};

use crate::error::{Error, Result};
use crate::grid::{Point, PointPattern};
use crate::rng::StreamRng;

/// The test densities on `[0,1]²`, plus the uniform one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DensityId {
    Uniform,
    /// `(6/7)(x+y)²`
    F1,
    /// `sin(2x+y)`, normalized
    F2,
    /// `(x−½)² + (y−½)⁴`, normalized; a bowl
    F3,
    /// `1 − (x−½)² − (y−½)⁴`, normalized; a dome
    F4,
}

fn f2_norm() -> f64 {
    2.0 / (sin(2.0) + sin(1.0) - sin(3.0))
}

impl DensityId {
    pub const ALTERNATIVES: [DensityId; 4] = [DensityId::F1, DensityId::F2, DensityId::F3, DensityId::F4];

    /// `1..=4` → `f1..f4`.
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(DensityId::F1),
            2 => Ok(DensityId::F2),
            3 => Ok(DensityId::F3),
            4 => Ok(DensityId::F4),
            _ => Err(Error::param("density", format!("unknown density index {k} (expected 1..4)"))),
        }
    }

    #[inline]
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            DensityId::Uniform => 1.0,
            DensityId::F1 => 6.0 / 7.0 * (x + y) * (x + y),
            DensityId::F2 => f2_norm() * sin(2.0 * x + y),
            DensityId::F3 => {
                let (u, v) = (x - 0.5, (y - 0.5) * (y - 0.5));
                240.0 / 23.0 * (u * u + v * v)
            }
            DensityId::F4 => {
                let (u, v) = (x - 0.5, (y - 0.5) * (y - 0.5));
                240.0 / 217.0 * (1.0 - u * u - v * v)
            }
        }
    }

    /// `sup_{[0,1]²} f`.
    pub fn sup(self) -> f64 {
        match self {
            DensityId::Uniform => 1.0,
            DensityId::F1 => 24.0 / 7.0,
            // 2x + y reaches π/2 inside the square
            DensityId::F2 => f2_norm(),
            DensityId::F3 => 75.0 / 23.0,
            DensityId::F4 => 240.0 / 217.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DensityId::Uniform => "uniform",
            DensityId::F1 => "f1",
            DensityId::F2 => "f2",
            DensityId::F3 => "f3",
            DensityId::F4 => "f4",
        }
    }
}

impl fmt::Display for DensityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DensityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "f0" => Ok(DensityId::Uniform),
            "f1" => Ok(DensityId::F1),
            "f2" => Ok(DensityId::F2),
            "f3" => Ok(DensityId::F3),
            "f4" => Ok(DensityId::F4),
            other => Err(Error::param("density", format!("unknown density `{other}`"))),
        }
    }
}

/// `f_k(x, y)` for `k ∈ 1..=4`.
pub fn density_f(k: u8, x: f64, y: f64) -> Result<f64> {
    Ok(DensityId::from_index(k)?.eval(x, y))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    Ok(())
}

/// Homogeneous Poisson process of intensity `λ` on `[0,1]²`.
pub fn sample_hpp(lambda: f64, rng: &mut StreamRng) -> Result<PointPattern> {
    check_lambda(lambda)?;
    let n = rng.poisson(lambda) as usize;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.uniform();
        points.push(Point::new(x, rng.uniform()));
    }
    Ok(PointPattern::from_trusted(points))
}

/// Inhomogeneous Poisson process of intensity `λ f` by Lewis–Shedler thinning
/// of a homogeneous process of intensity `λ · sup_bound`.
pub fn sample_ipp(
    lambda: f64,
    density: impl Fn(f64, f64) -> f64,
    sup_bound: f64,
    rng: &mut StreamRng,
) -> Result<PointPattern> {
    check_lambda(lambda)?;
    if !(sup_bound.is_finite() && sup_bound > 0.0) {
        return Err(Error::param("sup_bound", format!("must be positive, got {sup_bound}")));
    }
    let n = rng.poisson(lambda * sup_bound) as usize;
    let mut points = Vec::with_capacity((n as f64 / sup_bound) as usize + 1);
    for _ in 0..n {
        let x = rng.uniform();
        let y = rng.uniform();
        let value = density(x, y);
        if !(value >= 0.0) {
            return Err(Error::InvalidInput(format!("density is {value} at ({x}, {y}); must be >= 0")));
        }
        if value > sup_bound {
            return Err(Error::InvalidBound { value, bound: sup_bound, x, y });
        }
        if rng.uniform() * sup_bound < value {
            points.push(Point::new(x, y));
        }
    }
    Ok(PointPattern::from_trusted(points))
}

/// Quadrats per side of the cell process: `round(√λ)`.
pub fn bsp_quadrats(lambda: f64) -> Result<usize> {
    check_lambda(lambda)?;
    let k = round(sqrt(lambda)) as usize;
    if k < 2 {
        return Err(Error::param("lambda", format!("cell process needs round(sqrt(lambda)) >= 2, got {k}")));
    }
    Ok(k)
}

/// Points placed in one quadrat of the cell process: 0, 1 or 10 with
/// probabilities 1/10, 8/9, 1/90.
pub fn bsp_quadrat_count(rng: &mut StreamRng) -> usize {
    let u = rng.uniform();
    if u < 1.0 / 10.0 {
        0
    } else if u < 1.0 / 10.0 + 8.0 / 9.0 {
        1
    } else {
        10
    }
}

/// Baddeley–Silverman cell process on a `k × k` quadrat grid, `k = round(√λ)`.
pub fn sample_bsp(lambda: f64, rng: &mut StreamRng) -> Result<PointPattern> {
    let k = bsp_quadrats(lambda)?;
    let side = 1.0 / k as f64;
    let mut points = Vec::with_capacity(k * k + 16);
    for a in 0..k {
        for b in 0..k {
            for _ in 0..bsp_quadrat_count(rng) {
                let x = ((a as f64 + rng.uniform()) * side).min(1.0);
                let y = ((b as f64 + rng.uniform()) * side).min(1.0);
                points.push(Point::new(x, y));
            }
        }
    }
    Ok(PointPattern::from_trusted(points))
}

/// Matérn cluster process parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaternParams {
    /// Parent intensity per unit area.
    pub parent_intensity: f64,
    /// Disc radius, in `(0, 1)`.
    pub radius: f64,
    /// Mean number of offspring per parent.
    pub mean_offspring: f64,
}

impl MaternParams {
    /// Offspring mean `⌊√(λ/κ)⌋` and parent intensity `λ` over that, so the
    /// expected total is `λ`.
    pub fn from_target_intensity(lambda: f64, kappa: f64, radius: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::param("kappa", format!("must be positive, got {kappa}")));
        }
        let mean_offspring = floor(sqrt(lambda / kappa));
        if mean_offspring < 1.0 {
            return Err(Error::param("lambda", "floor(sqrt(lambda/kappa)) must be at least 1"));
        }
        let params = MaternParams { parent_intensity: lambda / mean_offspring, radius, mean_offspring };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(Error::param("r", format!("radius must lie in (0, 1), got {}", self.radius)));
        }
        if !(self.parent_intensity.is_finite() && self.parent_intensity > 0.0) {
            return Err(Error::param("parent_intensity", "must be positive"));
        }
        if !(self.mean_offspring.is_finite() && self.mean_offspring >= 0.0) {
            return Err(Error::param("mean_offspring", "must be non-negative"));
        }
        Ok(())
    }

    /// Expected number of retained points, `parent_intensity · mean_offspring`.
    pub fn intensity(&self) -> f64 {
        self.parent_intensity * self.mean_offspring
    }
}

/// Matérn cluster process. Parents are simulated on `[−r, 1+r]²` so that
/// clusters centred just outside the window still contribute offspring.
pub fn sample_matern(params: &MaternParams, rng: &mut StreamRng) -> Result<PointPattern> {
    params.validate()?;
    let r = params.radius;
    let width = 1.0 + 2.0 * r;
    let parents = rng.poisson(params.parent_intensity * width * width);
    let mut points = Vec::with_capacity(params.intensity() as usize + 16);
    for _ in 0..parents {
        let px = rng.uniform_in(-r, 1.0 + r);
        let py = rng.uniform_in(-r, 1.0 + r);
        for _ in 0..rng.poisson(params.mean_offspring) {
            let rho = r * sqrt(rng.uniform());
            let theta = 2.0 * PI * rng.uniform();
            let x = px + rho * cos(theta);
            let y = py + rho * sin(theta);
            if (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y) {
                points.push(Point::new(x, y));
            }
        }
    }
    Ok(PointPattern::from_trusted(points))
}

/// Which process to simulate; the intensity lives in [`ProcessSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum ProcessKind {
    Hpp,
    Ipp {
        density: DensityId,
    },
    Bsp,
    /// Offspring mean `⌊√(λ/κ)⌋`, parent intensity `λ` over that.
    Matern {
        radius: f64,
        kappa: f64,
    },
}

impl ProcessKind {
    /// Short label used in tables: `HPP`, `IPP(f1)`, `BSP`, `MCP`.
    pub fn label(&self) -> String {
        match self {
            ProcessKind::Hpp => "HPP".into(),
            ProcessKind::Ipp { density } => format!("IPP({density})"),
            ProcessKind::Bsp => "BSP".into(),
            ProcessKind::Matern { .. } => "MCP".into(),
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, ProcessKind::Hpp | ProcessKind::Ipp { density: DensityId::Uniform })
    }
}

impl FromStr for ProcessKind {
    type Err = Error;

    /// `hpp`, `ipp:f1`..`ipp:f4`, `bsp`, `matern` (r = 0.2, κ = 1), or
    /// `matern:<r>:<kappa>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let mut parts = lower.split(':');
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let bad = || Error::param("model", format!("unrecognized model `{s}`"));
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        match (head, rest.as_slice()) {
            ("hpp", []) => Ok(ProcessKind::Hpp),
            ("ipp", [d]) => Ok(ProcessKind::Ipp { density: d.parse()? }),
            ("bsp", []) => Ok(ProcessKind::Bsp),
            ("matern" | "mcp", []) => Ok(ProcessKind::Matern { radius: 0.2, kappa: 1.0 }),
            ("matern" | "mcp", [r]) => Ok(ProcessKind::Matern { radius: num(r)?, kappa: 1.0 }),
            ("matern" | "mcp", [r, k]) => Ok(ProcessKind::Matern { radius: num(r)?, kappa: num(k)? }),
            _ => Err(bad()),
        }
    }
}

/// A process together with its target intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub lambda: f64,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let spec = ProcessSpec { kind, lambda };
        if let ProcessKind::Matern { .. } = kind {
            spec.matern_params()?;
        }
        Ok(spec)
    }

    pub fn matern_params(&self) -> Result<MaternParams> {
        match self.kind {
            ProcessKind::Matern { radius, kappa } => MaternParams::from_target_intensity(self.lambda, kappa, radius),
            _ => Err(Error::param("kind", "not a Matérn process")),
        }
    }

    pub fn sample(&self, rng: &mut StreamRng) -> Result<PointPattern> {
        let pattern = match self.kind {
            ProcessKind::Hpp => sample_hpp(self.lambda, rng)?,
            ProcessKind::Ipp { density } => sample_ipp(self.lambda, |x, y| density.eval(x, y), density.sup(), rng)?,
            ProcessKind::Bsp => sample_bsp(self.lambda, rng)?,
            ProcessKind::Matern { .. } => sample_matern(&self.matern_params()?, rng)?,
        };
        Ok(pattern)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use libm::fabs;

    #[test]
    fn densities_integrate_to_one() {
        let g = GaussLegendre::new(64);
        for d in DensityId::ALTERNATIVES {
            let total = g.integrate_unit_square(|x, y| d.eval(x, y));
            assert!(fabs(total - 1.0) < 1e-10, "{d}: {total}");
        }
    }

    #[test]
    fn density_reference_values() {
        assert!(fabs(density_f(1, 1.0, 1.0).unwrap() - 24.0 / 7.0) < 1e-15);
        assert!(density_f(0, 0.5, 0.5).is_err());
        assert!(density_f(5, 0.5, 0.5).is_err());
    }

    #[test]
    fn sup_bounds_hold_on_a_grid() {
        for d in DensityId::ALTERNATIVES {
            let mut max = f64::MIN;
            for i in 0..=200 {
                for j in 0..=200 {
                    let v = d.eval(i as f64 / 200.0, j as f64 / 200.0);
                    assert!(v >= 0.0, "{d} negative at ({i},{j})");
                    max = max.max(v);
                }
            }
            assert!(max <= d.sup() * (1.0 + 1e-14), "{d}: {max} > {}", d.sup());
            assert!(max >= d.sup() * (1.0 - 1e-3), "{d}: sup {} not approached", d.sup());
        }
    }

    #[test]
    fn thinning_rejects_wrong_bound() {
        let mut rng = StreamRng::new(1, &[]);
        let err = sample_ipp(500.0, |x, y| DensityId::F1.eval(x, y), 1.0, &mut rng).unwrap_err();
        assert!(matches!(err, Error::InvalidBound { .. }));
    }

    #[test]
    fn bsp_expected_per_quadrat_is_one() {
        let mean: f64 = 0.0 * (1.0 / 10.0) + 1.0 * (8.0 / 9.0) + 10.0 * (1.0 / 90.0);
        assert!(fabs(mean - 1.0) < 1e-15);
        assert!(bsp_quadrats(2.0).is_err());
        assert_eq!(bsp_quadrats(100.0).unwrap(), 10);
    }

    #[test]
    fn matern_parameterization() {
        let p = MaternParams::from_target_intensity(100.0, 1.0, 0.2).unwrap();
        assert_eq!(p.mean_offspring, 10.0);
        assert_eq!(p.parent_intensity, 10.0);
        assert!(MaternParams::from_target_intensity(100.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn samplers_are_deterministic() {
        for kind in ["hpp", "ipp:f3", "bsp", "matern"] {
            let spec = ProcessSpec::new(kind.parse().unwrap(), 300.0).unwrap();
            let a = spec.sample(&mut StreamRng::new(5, &[9])).unwrap();
            let b = spec.sample(&mut StreamRng::new(5, &[9])).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn parse_models() {
        assert_eq!("ipp:f2".parse::<ProcessKind>().unwrap(), ProcessKind::Ipp { density: DensityId::F2 });
        assert_eq!("matern:0.1:3".parse::<ProcessKind>().unwrap(), ProcessKind::Matern { radius: 0.1, kappa: 3.0 });
        assert!("ipp".parse::<ProcessKind>().is_err());
        assert!("strauss".parse::<ProcessKind>().is_err());
    }
}

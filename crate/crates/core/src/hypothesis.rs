//! Test statistics, p-values and Monte Carlo calibration.
//!
//! Single-functional statistics standardize one functional by its exact null
//! mean and variance; the combined ones are quadratic forms in the full
//! triple. Monte Carlo replicates are keyed by `(seed, cell, replication)`
//! so a parallel driver reproduces the sequential results exactly.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{self, CountsGrid, IntensityMode, LambdaSource, PointPattern};
use crate::linalg;
use crate::minkowski::{self, MinkowskiTriple};
use crate::moments::NullMoments;
use crate::pointprocess::sample_hpp;
use crate::rng::{domain, stream_id, StreamRng};
use crate::special::chi2_sf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Functional {
    Area,
    Perimeter,
    Euler,
}

impl Functional {
    fn index(self) -> usize {
        match self {
            Functional::Area => 0,
            Functional::Perimeter => 1,
            Functional::Euler => 2,
        }
    }
}

/// Which covariance matrix the combined statistic uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CombinedMode {
    /// Exact `Σ_{c,m,λ}`.
    FiniteM,
    /// The `m → ∞` limit `Σ`.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StatisticKind {
    #[cfg_attr(feature = "serde", serde(rename = "T_A"))]
    TA,
    #[cfg_attr(feature = "serde", serde(rename = "T_P"))]
    TP,
    #[cfg_attr(feature = "serde", serde(rename = "T_chi"))]
    TChi,
    #[cfg_attr(feature = "serde", serde(rename = "T_c"))]
    Tc,
    #[cfg_attr(feature = "serde", serde(rename = "T_c_tilde"))]
    TcTilde,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 5] =
        [StatisticKind::TA, StatisticKind::TP, StatisticKind::TChi, StatisticKind::Tc, StatisticKind::TcTilde];

    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::TA => "T_A",
            StatisticKind::TP => "T_P",
            StatisticKind::TChi => "T_chi",
            StatisticKind::Tc => "T_c",
            StatisticKind::TcTilde => "T_c_tilde",
        }
    }

    /// Degrees of freedom of the limiting chi-square law.
    pub fn df(self) -> u32 {
        if self.is_combined() {
            3
        } else {
            1
        }
    }

    pub fn is_combined(self) -> bool {
        matches!(self, StatisticKind::Tc | StatisticKind::TcTilde)
    }

    pub fn evaluate(self, triple: &MinkowskiTriple, moments: &NullMoments) -> Result<f64> {
        match self {
            StatisticKind::TA => t_single(triple, moments, Functional::Area),
            StatisticKind::TP => t_single(triple, moments, Functional::Perimeter),
            StatisticKind::TChi => t_single(triple, moments, Functional::Euler),
            StatisticKind::Tc => t_combined(triple, moments, CombinedMode::FiniteM),
            StatisticKind::TcTilde => t_combined(triple, moments, CombinedMode::Asymptotic),
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.trim().chars().filter(|c| *c != '_').collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "ta" | "a" | "area" => Ok(StatisticKind::TA),
            "tp" | "p" | "perimeter" => Ok(StatisticKind::TP),
            "tchi" | "chi" | "euler" | "tx" => Ok(StatisticKind::TChi),
            "tc" | "c" | "combined" => Ok(StatisticKind::Tc),
            "tctilde" | "ctilde" | "tt" | "asymptotic" => Ok(StatisticKind::TcTilde),
            _ => Err(Error::param("stats", format!("unknown statistic `{s}`"))),
        }
    }
}

/// `(x − μ)² / σ²` for one functional.
pub fn t_single(triple: &MinkowskiTriple, moments: &NullMoments, which: Functional) -> Result<f64> {
    let k = which.index();
    let var = moments.cov[k][k];
    if !(var > 0.0) {
        return Err(Error::Degenerate {
            p: moments.p,
            m: moments.m,
            reason: format!("zero null variance for {which:?}"),
        });
    }
    let d = triple.to_array()[k] - moments.mean[k];
    Ok(d * d / var)
}

/// `(v − μ)ᵀ Σ⁻¹ (v − μ)` by a linear solve.
pub fn t_combined(triple: &MinkowskiTriple, moments: &NullMoments, mode: CombinedMode) -> Result<f64> {
    let asymptotic = mode == CombinedMode::Asymptotic;
    moments.check_invertible(asymptotic)?;
    let v = triple.to_array();
    let d = [v[0] - moments.mean[0], v[1] - moments.mean[1], v[2] - moments.mean[2]];
    let q = linalg::quadratic_form_inv(moments.matrix(asymptotic), &d).ok_or_else(|| Error::Degenerate {
        p: moments.p,
        m: moments.m,
        reason: "singular covariance matrix".into(),
    })?;
    // roundoff can push a true zero slightly negative
    Ok(q.max(0.0))
}

/// Upper chi-square tail with `df` degrees of freedom.
pub fn p_value_asymptotic(stat: f64, df: u32) -> f64 {
    chi2_sf(stat, f64::from(df)).clamp(0.0, 1.0)
}

/// `(1 + #{replicate ≥ observed}) / (reps + 1)`; ties count as exceedances.
pub fn mc_p_value(observed: f64, replicates: &[f64]) -> f64 {
    let exceed = replicates.iter().filter(|&&r| r >= observed).count();
    (1 + exceed) as f64 / (replicates.len() + 1) as f64
}

/// Type-1 empirical quantile: the `⌈n·level⌉`-th order statistic.
pub fn empirical_quantile(values: &mut [f64], level: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::param("values", "empty sample"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", format!("must lie in (0, 1), got {level}")));
    }
    values.sort_unstable_by(f64::total_cmp);
    let idx = libm::ceil(values.len() as f64 * level) as usize;
    Ok(values[idx.clamp(1, values.len()) - 1])
}

/// Rejection rule for a calibrated critical value.
#[inline]
pub fn rejects(stat: f64, critical: f64) -> bool {
    stat > critical
}

/// How the grid size is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum GridChoice {
    /// `m = ⌊√(λ/κ)⌋`.
    Kappa(f64),
    /// Explicit `m`.
    M(usize),
}

/// Fully resolved parameters of one test, echoed in every report.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResolvedConfig {
    pub lambda: f64,
    pub lambda_source: LambdaSource,
    pub m: usize,
    pub c: u32,
    /// `λ/m²`.
    pub kappa: f64,
    pub p_c: f64,
}

/// Everything needed to evaluate statistics for one `(λ, m, c)`.
#[derive(Debug, Clone)]
pub struct TestSetup {
    pub config: ResolvedConfig,
    pub moments: NullMoments,
}

impl TestSetup {
    pub fn new(lambda: f64, lambda_source: LambdaSource, m: usize, c: u32) -> Result<Self> {
        let moments = NullMoments::new(lambda, m, c)?;
        let config = ResolvedConfig { lambda, lambda_source, m, c, kappa: lambda / (m * m) as f64, p_c: moments.p };
        Ok(TestSetup { config, moments })
    }

    pub fn from_grid_choice(lambda: f64, lambda_source: LambdaSource, grid: GridChoice, c: u32) -> Result<Self> {
        let m = match grid {
            GridChoice::Kappa(kappa) => grid::choose_m(lambda, kappa)?,
            GridChoice::M(m) => m,
        };
        Self::new(lambda, lambda_source, m, c)
    }

    /// Fails early if any requested statistic would hit the singularity guard.
    pub fn check(&self, kinds: &[StatisticKind]) -> Result<()> {
        for &kind in kinds {
            if kind.is_combined() {
                self.moments.check_invertible(kind == StatisticKind::TcTilde)?;
            }
        }
        Ok(())
    }

    pub fn triple(&self, counts: &CountsGrid) -> Result<MinkowskiTriple> {
        Ok(minkowski::functionals(&grid::threshold(counts, self.config.c)?))
    }

    pub fn statistics(&self, counts: &CountsGrid, kinds: &[StatisticKind]) -> Result<Vec<f64>> {
        let triple = self.triple(counts)?;
        kinds.iter().map(|k| k.evaluate(&triple, &self.moments)).collect()
    }
}

/// Cell key shared by all null replicates of one `(λ, m)`; different `c`
/// and statistics reuse the same simulated patterns.
pub fn null_cell_key(lambda: f64, m: usize) -> u64 {
    stream_id(&[lambda.to_bits(), m as u64])
}

/// Counts grid of null replicate `rep`: a homogeneous Poisson pattern of
/// intensity `λ`, binned at `m`.
pub fn null_replicate_counts(lambda: f64, m: usize, seed: u64, rep: u64) -> Result<CountsGrid> {
    let mut rng = StreamRng::new(seed, &[domain::NULL_REPLICATE, null_cell_key(lambda, m), rep]);
    grid::bin_points(&sample_hpp(lambda, &mut rng)?, m)
}

/// Statistics of null replicate `rep` under `setup`.
pub fn replicate_statistics(setup: &TestSetup, kinds: &[StatisticKind], seed: u64, rep: u64) -> Result<Vec<f64>> {
    let counts = null_replicate_counts(setup.config.lambda, setup.config.m, seed, rep)?;
    setup.statistics(&counts, kinds)
}

/// Null replicates `0..reps`, one column per statistic.
pub fn null_distribution(setup: &TestSetup, kinds: &[StatisticKind], reps: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    setup.check(kinds)?;
    let mut columns: Vec<Vec<f64>> = kinds.iter().map(|_| Vec::with_capacity(reps)).collect();
    for rep in 0..reps as u64 {
        for (col, v) in columns.iter_mut().zip(replicate_statistics(setup, kinds, seed, rep)?) {
            col.push(v);
        }
    }
    Ok(columns)
}

pub const MIN_CALIBRATION_REPS: usize = 1000;

/// Empirical `level`-quantile of `kind` under the null, from `reps`
/// simulated patterns at `m = ⌊√(λ/κ)⌋`.
pub fn mc_critical_value(
    lambda: f64,
    kappa: f64,
    c: u32,
    kind: StatisticKind,
    reps: usize,
    level: f64,
    seed: u64,
) -> Result<f64> {
    if reps < MIN_CALIBRATION_REPS {
        return Err(Error::param("reps", format!("need at least {MIN_CALIBRATION_REPS} replications, got {reps}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", format!("must lie in (0, 1), got {level}")));
    }
    let setup = TestSetup::from_grid_choice(lambda, LambdaSource::Known, GridChoice::Kappa(kappa), c)?;
    let mut column = null_distribution(&setup, &[kind], reps, seed)?.pop().unwrap_or_default();
    empirical_quantile(&mut column, level)
}

/// Parameters of an end-to-end test run.
#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub intensity: IntensityMode,
    pub grid: GridChoice,
    pub c: u32,
    pub stats: Vec<StatisticKind>,
    /// Monte Carlo replications for `p_montecarlo`; none if `None`.
    pub mc_reps: Option<usize>,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            intensity: IntensityMode::Hint,
            grid: GridChoice::Kappa(1.0),
            c: 1,
            stats: StatisticKind::ALL.to_vec(),
            mc_reps: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestReport {
    pub statistic_name: StatisticKind,
    pub value: f64,
    pub df: u32,
    pub p_asymptotic: f64,
    pub p_montecarlo: Option<f64>,
    pub config: ResolvedConfig,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    /// Set when the intensity was estimated from the data.
    pub caveat: Option<String>,
}

pub const ESTIMATED_LAMBDA_CAVEAT: &str = "lambda estimated from the point count; null laws assume a known intensity";

/// Bin, threshold, measure, standardize, and attach p-values.
pub fn run_csr_test(pattern: &PointPattern, config: &TestConfig) -> Result<Vec<TestReport>> {
    if pattern.is_empty() {
        return Err(Error::ZeroIntensity);
    }
    if config.stats.is_empty() {
        return Err(Error::param("stats", "no statistic selected"));
    }
    let (lambda, source) = grid::resolve_intensity(pattern, config.intensity)?;
    let setup = TestSetup::from_grid_choice(lambda, source, config.grid, config.c)?;
    setup.check(&config.stats)?;
    let observed = setup.statistics(&grid::bin_points(pattern, setup.config.m)?, &config.stats)?;
    let null = match config.mc_reps {
        Some(reps) if reps > 0 => Some(null_distribution(&setup, &config.stats, reps, config.seed)?),
        Some(_) => return Err(Error::param("mc_reps", "must be positive")),
        None => None,
    };
    Ok(assemble_reports(&setup, &config.stats, &observed, null.as_deref(), config.seed))
}

/// Builds reports from observed values and optional null columns.
pub fn assemble_reports(
    setup: &TestSetup,
    kinds: &[StatisticKind],
    observed: &[f64],
    null: Option<&[Vec<f64>]>,
    seed: u64,
) -> Vec<TestReport> {
    let caveat = (setup.config.lambda_source == LambdaSource::Estimated).then(|| String::from(ESTIMATED_LAMBDA_CAVEAT));
    kinds
        .iter()
        .zip(observed)
        .enumerate()
        .map(|(k, (&kind, &value))| TestReport {
            statistic_name: kind,
            value,
            df: kind.df(),
            p_asymptotic: p_value_asymptotic(value, kind.df()),
            p_montecarlo: null.map(|cols| mc_p_value(value, &cols[k])),
            config: setup.config,
            reps: null.map(|cols| cols[k].len()),
            seed: null.map(|_| seed),
            caveat: caveat.clone(),
        })
        .collect()
}

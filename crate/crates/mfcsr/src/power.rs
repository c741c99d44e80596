//! Power studies: rejection rates of each test under simulated alternatives.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use mfcsr_core::competitors::{self, HopkinsVariant, Tail};
use mfcsr_core::grid::{self, LambdaSource, PointPattern};
use mfcsr_core::hypothesis::{self, GridChoice, StatisticKind, TestSetup};
use mfcsr_core::pointprocess::{ProcessKind, ProcessSpec};
use mfcsr_core::rng::{domain, label_key, StreamRng};
use mfcsr_core::special::chi2_quantile;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate;
use crate::error::{AppError, Result};
use crate::report::{fixed, num, Tabular};

pub const DEFAULT_REPS: usize = 2000;
pub const FULL_REPS: usize = 10_000;
pub const DEFAULT_CALIBRATION_REPS: usize = 10_000;
pub const MIN_REPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StudyStatistic {
    Minkowski(StatisticKind),
    /// Quadrat-count χ² at its asymptotic law, upper tail.
    Quadrat,
    /// Squared-distance Hopkins–Skellam at its `F` law, two-sided.
    Hopkins,
}

impl StudyStatistic {
    fn threshold_dependent(self) -> bool {
        matches!(self, StudyStatistic::Minkowski(_))
    }
}

impl fmt::Display for StudyStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StudyStatistic::Minkowski(k) => write!(f, "{k}"),
            StudyStatistic::Quadrat => f.write_str("Q"),
            StudyStatistic::Hopkins => f.write_str("H"),
        }
    }
}

impl FromStr for StudyStatistic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "Q" | "q" => Ok(StudyStatistic::Quadrat),
            "H" | "h" => Ok(StudyStatistic::Hopkins),
            other => other.parse::<StatisticKind>().map(StudyStatistic::Minkowski).map_err(|e| e.to_string()),
        }
    }
}

/// Where the Minkowski critical values come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum CriticalValueSource {
    /// `χ²_df` quantile.
    Asymptotic,
    /// Empirical quantile of `reps` null replicates drawn with `seed`.
    MonteCarlo { reps: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerStudySpec {
    pub alternatives: Vec<ProcessKind>,
    pub lambdas: Vec<f64>,
    pub kappa: f64,
    pub thresholds: Vec<u32>,
    pub statistics: Vec<StudyStatistic>,
    pub reps: usize,
    pub level: f64,
    pub critical_values: CriticalValueSource,
    pub seed: u64,
}

impl PowerStudySpec {
    pub fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(AppError::Usage(format!("reps must be at least {MIN_REPS}, got {}", self.reps)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(AppError::Usage(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if self.lambdas.is_empty() || self.statistics.is_empty() {
            return Err(AppError::Usage("need at least one lambda and one statistic".into()));
        }
        if self.statistics.iter().any(|s| s.threshold_dependent()) && self.thresholds.is_empty() {
            return Err(AppError::Usage("need at least one threshold c".into()));
        }
        if let CriticalValueSource::MonteCarlo { reps, .. } = self.critical_values {
            if reps < hypothesis::MIN_CALIBRATION_REPS {
                return Err(AppError::Usage(format!(
                    "calibration needs at least {} replications, got {reps}",
                    hypothesis::MIN_CALIBRATION_REPS
                )));
            }
        }
        Ok(())
    }

    /// Alternatives with the homogeneous null prepended when missing.
    pub fn alternatives_with_null(&self) -> Vec<ProcessKind> {
        let mut out = self.alternatives.clone();
        if !out.contains(&ProcessKind::Hpp) {
            out.insert(0, ProcessKind::Hpp);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub alternative: String,
    pub lambda: f64,
    pub statistic: StudyStatistic,
    pub c: Option<u32>,
    pub rate: Option<f64>,
    pub se: Option<f64>,
    pub critical_value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub spec: PowerStudySpec,
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    pub fn find(&self, alternative: &str, lambda: f64, statistic: StudyStatistic, c: Option<u32>) -> Option<&PowerRow> {
        self.rows
            .iter()
            .find(|r| r.alternative == alternative && r.lambda == lambda && r.statistic == statistic && r.c == c)
    }
}

impl Tabular for PowerTable {
    fn title(&self) -> Option<String> {
        let cv = match self.spec.critical_values {
            CriticalValueSource::Asymptotic => "asymptotic".to_string(),
            CriticalValueSource::MonteCarlo { reps, seed } => format!("Monte Carlo ({reps} reps, seed {seed})"),
        };
        Some(format!(
            "Rejection rates at level {} ({} reps, kappa={}, seed={}, critical values: {cv})",
            num(self.spec.level),
            self.spec.reps,
            num(self.spec.kappa),
            self.spec.seed
        ))
    }

    fn headers(&self) -> Vec<String> {
        ["alternative", "lambda", "statistic", "c", "rate", "se"].map(String::from).to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.alternative.clone(),
                    num(r.lambda),
                    r.statistic.to_string(),
                    r.c.map_or_else(|| "NA".into(), |c| c.to_string()),
                    fixed(r.rate, 4),
                    fixed(r.se, 4),
                ]
            })
            .collect()
    }

    fn notes(&self) -> Vec<String> {
        let mut notes: Vec<String> = self
            .rows
            .iter()
            .filter_map(|r| {
                let c = r.c.map(|c| format!(" c={c}")).unwrap_or_default();
                r.error.as_ref().map(|e| format!("{} lambda={} {}{c}: {e}", r.alternative, num(r.lambda), r.statistic))
            })
            .collect();
        if self.spec.statistics.iter().any(|s| !s.threshold_dependent()) {
            notes.push("Q and H use their asymptotic reference laws; H uses squared distances, two-sided".into());
        }
        notes
    }
}

/// One tabulated column: a statistic at a threshold, with its rejection rule.
#[derive(Debug)]
struct Column {
    statistic: StudyStatistic,
    c: Option<u32>,
    critical_value: Option<f64>,
    setup: Option<usize>,
    error: Option<String>,
}

/// Critical values per `(λ bits, c)`, aligned with the statistics they cover.
type CriticalCache = HashMap<(u64, u32), (Vec<StatisticKind>, Vec<f64>)>;

/// Stream path of replicate `rep` of one alternative at one intensity.
fn replicate_path(stream: u64, kind: &ProcessKind, lambda: f64, rep: u64) -> [u64; 4] {
    [stream, label_key(&format!("{kind:?}")), lambda.to_bits(), rep]
}

/// Columns for one `λ`, with their critical values resolved.
fn columns_for(
    spec: &PowerStudySpec,
    lambda: f64,
    setups: &mut Vec<TestSetup>,
    cache: &mut CriticalCache,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Column>> {
    let kinds: Vec<StatisticKind> = spec
        .statistics
        .iter()
        .filter_map(|s| match s {
            StudyStatistic::Minkowski(k) => Some(*k),
            _ => None,
        })
        .collect();
    let mut columns = Vec::new();
    setups.clear();
    for &c in &spec.thresholds {
        if kinds.is_empty() {
            break;
        }
        let setup = match TestSetup::from_grid_choice(lambda, LambdaSource::Known, GridChoice::Kappa(spec.kappa), c) {
            Ok(s) => s,
            Err(e) => {
                for &k in &kinds {
                    columns.push(Column {
                        statistic: StudyStatistic::Minkowski(k),
                        c: Some(c),
                        critical_value: None,
                        setup: None,
                        error: Some(e.to_string()),
                    });
                }
                continue;
            }
        };
        let usable: Vec<StatisticKind> = kinds.iter().copied().filter(|k| setup.check(&[*k]).is_ok()).collect();
        let critical: HashMap<StatisticKind, f64> = match spec.critical_values {
            CriticalValueSource::Asymptotic => {
                usable.iter().map(|&k| (k, chi2_quantile(1.0 - spec.level, f64::from(k.df())))).collect()
            }
            CriticalValueSource::MonteCarlo { reps, seed } => {
                let key = (lambda.to_bits(), c);
                if !cache.contains_key(&key) && !usable.is_empty() {
                    log::info!("calibrating lambda={lambda} c={c} ({reps} reps)");
                    let cols = calibrate::null_distribution(&setup, &usable, reps, seed, pool)?;
                    let mut q = Vec::with_capacity(usable.len());
                    for mut col in cols {
                        q.push(hypothesis::empirical_quantile(&mut col, 1.0 - spec.level)?);
                    }
                    cache.insert(key, (usable.clone(), q));
                }
                cache.get(&key).map(|(ks, qs)| ks.iter().copied().zip(qs.iter().copied()).collect()).unwrap_or_default()
            }
        };
        setups.push(setup);
        let idx = setups.len() - 1;
        for &k in &kinds {
            let error = setups[idx].check(&[k]).err().map(|e| e.to_string());
            columns.push(Column {
                statistic: StudyStatistic::Minkowski(k),
                c: Some(c),
                critical_value: critical.get(&k).copied(),
                setup: error.is_none().then_some(idx),
                error,
            });
        }
    }
    for &s in &spec.statistics {
        if !s.threshold_dependent() {
            columns.push(Column { statistic: s, c: None, critical_value: None, setup: None, error: None });
        }
    }
    Ok(columns)
}

/// Rejection decisions of every column for one simulated pattern.
fn decide(
    pattern: &PointPattern,
    columns: &[Column],
    setups: &[TestSetup],
    level: f64,
    hopkins_rng: &mut StreamRng,
) -> Vec<std::result::Result<bool, String>> {
    let mut counts = None;
    let mut cached: HashMap<usize, Vec<f64>> = HashMap::new();
    columns
        .iter()
        .map(|col| {
            if let Some(e) = &col.error {
                return Err(e.clone());
            }
            match col.statistic {
                StudyStatistic::Minkowski(kind) => {
                    let idx = col.setup.ok_or("no setup")?;
                    let setup = &setups[idx];
                    if counts.is_none() {
                        counts = Some(grid::bin_points(pattern, setup.config.m).map_err(|e| e.to_string())?);
                    }
                    if let std::collections::hash_map::Entry::Vacant(slot) = cached.entry(idx) {
                        let all = StatisticKind::ALL;
                        let usable: Vec<StatisticKind> =
                            all.iter().copied().filter(|k| setup.check(&[*k]).is_ok()).collect();
                        let values = setup.statistics(counts.as_ref().unwrap(), &usable).map_err(|e| e.to_string())?;
                        let mut full = vec![f64::NAN; all.len()];
                        for (k, v) in usable.iter().zip(values) {
                            full[all.iter().position(|a| a == k).unwrap()] = v;
                        }
                        slot.insert(full);
                    }
                    let pos = StatisticKind::ALL.iter().position(|a| *a == kind).unwrap();
                    let value = cached[&idx][pos];
                    let crit = col.critical_value.ok_or("no critical value")?;
                    Ok(hypothesis::rejects(value, crit))
                }
                StudyStatistic::Quadrat => {
                    let side = competitors::default_quadrat_side(pattern.len().max(1) as f64);
                    competitors::quadrat_test(pattern, side, Tail::Upper)
                        .map(|r| r.p_value < level)
                        .map_err(|e| e.to_string())
                }
                StudyStatistic::Hopkins => {
                    competitors::hopkins_skellam(pattern, None, hopkins_rng, HopkinsVariant::Squared, Tail::TwoSided)
                        .map(|r| r.p_value < level)
                        .map_err(|e| e.to_string())
                }
            }
        })
        .collect()
}

/// Runs the study. Each cell is a pure function of the spec, its
/// `(alternative, λ)` key and the seed, so reruns and worker counts give
/// identical tables.
pub fn power_study(spec: &PowerStudySpec, pool: &rayon::ThreadPool) -> Result<PowerTable> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut cache = HashMap::new();
    let mut setups = Vec::new();
    for kind in spec.alternatives_with_null() {
        for &lambda in &spec.lambdas {
            let label = kind.label();
            let columns = columns_for(spec, lambda, &mut setups, &mut cache, pool)?;
            let process = ProcessSpec::new(kind, lambda);
            log::info!("simulating {label} lambda={lambda} ({} reps)", spec.reps);
            let outcomes: Vec<Vec<std::result::Result<bool, String>>> = match &process {
                Ok(process) => pool.install(|| {
                    (0..spec.reps as u64)
                        .into_par_iter()
                        .map(|rep| {
                            let mut rng =
                                StreamRng::new(spec.seed, &replicate_path(domain::ALTERNATIVE, &kind, lambda, rep));
                            let mut hopkins =
                                StreamRng::new(spec.seed, &replicate_path(domain::HOPKINS, &kind, lambda, rep));
                            match process.sample(&mut rng) {
                                Ok(p) => decide(&p, &columns, &setups, spec.level, &mut hopkins),
                                Err(e) => vec![Err(e.to_string()); columns.len()],
                            }
                        })
                        .collect()
                }),
                Err(e) => vec![vec![Err(e.to_string()); columns.len()]],
            };
            for (k, col) in columns.iter().enumerate() {
                let mut hits = 0usize;
                let mut error = None;
                for o in &outcomes {
                    match &o[k] {
                        Ok(true) => hits += 1,
                        Ok(false) => {}
                        Err(e) => {
                            error.get_or_insert_with(|| e.clone());
                        }
                    }
                }
                let (rate, se) = if error.is_none() {
                    let rate = hits as f64 / spec.reps as f64;
                    (Some(rate), Some((rate * (1.0 - rate) / spec.reps as f64).sqrt()))
                } else {
                    (None, None)
                };
                rows.push(PowerRow {
                    alternative: label.clone(),
                    lambda,
                    statistic: col.statistic,
                    c: col.c,
                    rate,
                    se,
                    critical_value: col.critical_value,
                    error,
                });
            }
        }
    }
    Ok(PowerTable { spec: spec.clone(), rows })
}

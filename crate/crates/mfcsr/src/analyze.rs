//! End-to-end CSR analysis of one point pattern: Minkowski statistics plus
//! the optional quadrat and Hopkins–Skellam baselines.

use std::path::Path;

use mfcsr_core::competitors::{self, CompetitorReport, HopkinsVariant, Tail};
use mfcsr_core::grid::{self, IntensityMode, PointPattern};
use mfcsr_core::hypothesis::{self, GridChoice, ResolvedConfig, StatisticKind, TestReport, TestSetup};
use mfcsr_core::rng::{domain, StreamRng};
use serde::{Deserialize, Serialize};

use crate::calibrate;
use crate::error::{AppError, Result};
use crate::io;
use crate::power::StudyStatistic;
use crate::report::{fixed, num, pval, Tabular};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub intensity: IntensityMode,
    pub grid: GridChoice,
    pub c: u32,
    pub statistics: Vec<StudyStatistic>,
    pub mc_reps: Option<usize>,
    pub seed: u64,
}

impl AnalysisConfig {
    /// Settings for a single observed dataset: intensity from the point
    /// count, `κ = 3`, `c = 2`.
    pub fn dataset() -> Self {
        AnalysisConfig {
            intensity: IntensityMode::Estimate,
            grid: GridChoice::Kappa(3.0),
            c: 2,
            statistics: [StatisticKind::TA, StatisticKind::TP, StatisticKind::TChi, StatisticKind::Tc]
                .map(StudyStatistic::Minkowski)
                .to_vec(),
            mc_reps: None,
            seed: 0,
        }
    }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            intensity: IntensityMode::Hint,
            grid: GridChoice::Kappa(1.0),
            c: 1,
            statistics: StatisticKind::ALL.map(StudyStatistic::Minkowski).to_vec(),
            mc_reps: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrReport {
    pub source: Option<String>,
    pub points: usize,
    pub config: ResolvedConfig,
    pub tests: Vec<TestReport>,
    pub competitors: Vec<CompetitorReport>,
}

pub fn analyze_pattern(pattern: &PointPattern, cfg: &AnalysisConfig, pool: &rayon::ThreadPool) -> Result<CsrReport> {
    if pattern.is_empty() {
        return Err(mfcsr_core::Error::ZeroIntensity.into());
    }
    if cfg.statistics.is_empty() {
        return Err(AppError::Usage("no statistic selected".into()));
    }
    let kinds: Vec<StatisticKind> = cfg
        .statistics
        .iter()
        .filter_map(|s| match s {
            StudyStatistic::Minkowski(k) => Some(*k),
            _ => None,
        })
        .collect();
    let (lambda, source) = grid::resolve_intensity(pattern, cfg.intensity)?;
    let setup = TestSetup::from_grid_choice(lambda, source, cfg.grid, cfg.c)?;
    setup.check(&kinds)?;
    let observed = setup.statistics(&grid::bin_points(pattern, setup.config.m)?, &kinds)?;
    let null = match cfg.mc_reps {
        Some(0) => return Err(AppError::Usage("mc-reps must be positive".into())),
        Some(reps) if !kinds.is_empty() => Some(calibrate::null_distribution(&setup, &kinds, reps, cfg.seed, pool)?),
        _ => None,
    };
    let tests = hypothesis::assemble_reports(&setup, &kinds, &observed, null.as_deref(), cfg.seed);

    let mut competitors = Vec::new();
    for s in &cfg.statistics {
        match s {
            StudyStatistic::Quadrat => {
                let side = competitors::default_quadrat_side(lambda);
                competitors.push(competitors::quadrat_test(pattern, side, Tail::Upper)?);
            }
            StudyStatistic::Hopkins => {
                let mut rng = StreamRng::new(cfg.seed, &[domain::HOPKINS]);
                competitors.push(competitors::hopkins_skellam(
                    pattern,
                    None,
                    &mut rng,
                    HopkinsVariant::Squared,
                    Tail::TwoSided,
                )?);
            }
            StudyStatistic::Minkowski(_) => {}
        }
    }
    Ok(CsrReport { source: None, points: pattern.len(), config: setup.config, tests, competitors })
}

/// Reads a CSV of points and analyzes it.
pub fn analyze_dataset(path: impl AsRef<Path>, cfg: &AnalysisConfig, pool: &rayon::ThreadPool) -> Result<CsrReport> {
    let path = path.as_ref();
    let pattern = io::read_points_csv(path)?;
    if pattern.is_empty() {
        return Err(AppError::Parse { path: path.into(), line: 0, message: "no points".into() });
    }
    let mut report = analyze_pattern(&pattern, cfg, pool)?;
    report.source = Some(path.display().to_string());
    Ok(report)
}

impl Tabular for CsrReport {
    fn title(&self) -> Option<String> {
        let c = &self.config;
        let src = self.source.as_deref().map(|s| format!("{s}: ")).unwrap_or_default();
        Some(
            format!(
                "{src}{} points, lambda={} ({:?}), m={}, c={}, kappa={:.4}, p_c={:.6}",
                self.points,
                num(c.lambda),
                c.lambda_source,
                c.m,
                c.c,
                c.kappa,
                c.p_c
            )
            .replace("(Known)", "(known)")
            .replace("(Estimated)", "(estimated)"),
        )
    }

    fn headers(&self) -> Vec<String> {
        ["statistic", "value", "df", "p_asymptotic", "p_montecarlo"].map(String::from).to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = self
            .tests
            .iter()
            .map(|t| {
                vec![
                    t.statistic_name.to_string(),
                    fixed(Some(t.value), 4),
                    t.df.to_string(),
                    pval(Some(t.p_asymptotic)),
                    pval(t.p_montecarlo),
                ]
            })
            .collect();
        for r in &self.competitors {
            let df = match r.name {
                competitors::CompetitorKind::Q => (r.param - 1).to_string(),
                competitors::CompetitorKind::H => format!("{0},{0}", 2 * r.param),
            };
            rows.push(vec![r.name.to_string(), fixed(Some(r.value), 4), df, pval(Some(r.p_value)), "NA".into()]);
        }
        rows
    }

    fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if let Some(t) = self.tests.iter().find(|t| t.reps.is_some()) {
            notes.push(format!("Monte Carlo: {} replications, seed {}", t.reps.unwrap_or(0), t.seed.unwrap_or(0)));
        }
        if let Some(caveat) = self.tests.first().and_then(|t| t.caveat.clone()) {
            notes.push(caveat);
        }
        if self.competitors.iter().any(|r| r.low_expected_count) {
            notes.push("Q: expected count per square below 5".into());
        }
        notes
    }
}

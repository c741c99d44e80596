//! Parallel Monte Carlo calibration.
//!
//! Replicate `r` always draws from the stream keyed by `(seed, cell, r)` and
//! results are collected in replicate order, so every function here returns
//! exactly what the sequential core routines return, for any worker count.

use mfcsr_core::grid::LambdaSource;
use mfcsr_core::hypothesis::{self, GridChoice, StatisticKind, TestSetup};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AppError, Result};
use crate::report::{fixed, num, Tabular};

/// A pool with `threads` workers, or rayon's default when `None`.
pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| AppError::Internal(format!("thread pool: {e}")))
}

/// Null replicates `0..reps`, one column per statistic.
pub fn null_distribution(
    setup: &TestSetup,
    kinds: &[StatisticKind],
    reps: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Vec<f64>>> {
    setup.check(kinds)?;
    let rows: Vec<Vec<f64>> = pool.install(|| {
        (0..reps as u64)
            .into_par_iter()
            .map(|rep| hypothesis::replicate_statistics(setup, kinds, seed, rep))
            .collect::<mfcsr_core::Result<_>>()
    })?;
    let mut columns: Vec<Vec<f64>> = kinds.iter().map(|_| Vec::with_capacity(reps)).collect();
    for row in rows {
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    Ok(columns)
}

/// Empirical `level`-quantile of one statistic; same value as the sequential
/// core routine.
#[allow(clippy::too_many_arguments)]
pub fn mc_critical_value(
    lambda: f64,
    kappa: f64,
    c: u32,
    kind: StatisticKind,
    reps: usize,
    level: f64,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> Result<f64> {
    if reps < hypothesis::MIN_CALIBRATION_REPS {
        return Err(AppError::Usage(format!(
            "need at least {} replications, got {reps}",
            hypothesis::MIN_CALIBRATION_REPS
        )));
    }
    let setup = TestSetup::from_grid_choice(lambda, LambdaSource::Known, GridChoice::Kappa(kappa), c)?;
    let mut column = null_distribution(&setup, &[kind], reps, seed, pool)?.remove(0);
    Ok(hypothesis::empirical_quantile(&mut column, level)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileSpec {
    pub statistics: Vec<StatisticKind>,
    pub lambdas: Vec<f64>,
    pub thresholds: Vec<u32>,
    pub kappa: f64,
    pub reps: usize,
    pub level: f64,
    pub seed: u64,
}

/// Empirical quantiles of one statistic over a `λ × c` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileTable {
    pub statistic: StatisticKind,
    pub level: f64,
    pub kappa: f64,
    pub reps: usize,
    pub seed: u64,
    pub lambdas: Vec<f64>,
    pub thresholds: Vec<u32>,
    /// `values[i][j]` for `lambdas[i]`, `thresholds[j]`; `None` where the
    /// cell failed (see `errors`).
    pub values: Vec<Vec<Option<f64>>>,
    pub errors: Vec<String>,
}

/// One table per statistic. All statistics and thresholds of a given `λ`
/// are computed from the same simulated patterns.
pub fn quantile_tables(spec: &QuantileSpec, pool: &rayon::ThreadPool) -> Result<Vec<QuantileTable>> {
    if !(spec.level > 0.0 && spec.level < 1.0) {
        return Err(AppError::Usage(format!("level must lie in (0, 1), got {}", spec.level)));
    }
    if spec.reps < hypothesis::MIN_CALIBRATION_REPS {
        return Err(AppError::Usage(format!(
            "need at least {} replications, got {}",
            hypothesis::MIN_CALIBRATION_REPS,
            spec.reps
        )));
    }
    let mut tables: Vec<QuantileTable> = spec
        .statistics
        .iter()
        .map(|&statistic| QuantileTable {
            statistic,
            level: spec.level,
            kappa: spec.kappa,
            reps: spec.reps,
            seed: spec.seed,
            lambdas: spec.lambdas.clone(),
            thresholds: spec.thresholds.clone(),
            values: vec![vec![None; spec.thresholds.len()]; spec.lambdas.len()],
            errors: Vec::new(),
        })
        .collect();
    for (i, &lambda) in spec.lambdas.iter().enumerate() {
        for (j, &c) in spec.thresholds.iter().enumerate() {
            log::info!("calibrating lambda={lambda} c={c} ({} reps)", spec.reps);
            let setup = match TestSetup::from_grid_choice(lambda, LambdaSource::Known, GridChoice::Kappa(spec.kappa), c)
            {
                Ok(s) => s,
                Err(e) => {
                    for t in &mut tables {
                        t.errors.push(format!("lambda={lambda} c={c}: {e}"));
                    }
                    continue;
                }
            };
            // statistics that pass the guard share one simulation
            let (ok, failed): (Vec<usize>, Vec<usize>) =
                (0..tables.len()).partition(|&k| setup.check(&[tables[k].statistic]).is_ok());
            for k in failed {
                let e = setup.check(&[tables[k].statistic]).unwrap_err();
                tables[k].errors.push(format!("lambda={lambda} c={c}: {e}"));
            }
            if ok.is_empty() {
                continue;
            }
            let kinds: Vec<StatisticKind> = ok.iter().map(|&k| tables[k].statistic).collect();
            let columns = null_distribution(&setup, &kinds, spec.reps, spec.seed, pool)?;
            for (&k, mut col) in ok.iter().zip(columns) {
                tables[k].values[i][j] = Some(hypothesis::empirical_quantile(&mut col, spec.level)?);
            }
        }
    }
    Ok(tables)
}

impl Tabular for QuantileTable {
    fn title(&self) -> Option<String> {
        Some(format!(
            "{}: empirical {}% quantiles (kappa={}, reps={}, seed={})",
            self.statistic,
            num(self.level * 100.0),
            num(self.kappa),
            self.reps,
            self.seed
        ))
    }

    fn headers(&self) -> Vec<String> {
        let mut h = vec!["lambda\\c".to_string()];
        h.extend(self.thresholds.iter().map(|c| c.to_string()));
        h
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.lambdas
            .iter()
            .zip(&self.values)
            .map(|(lambda, row)| {
                let mut r = vec![num(*lambda)];
                r.extend(row.iter().map(|v| fixed(*v, 2)));
                r
            })
            .collect()
    }

    fn notes(&self) -> Vec<String> {
        self.errors.clone()
    }
}

/// Several quantile tables rendered one after another.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct QuantileTables(pub Vec<QuantileTable>);

impl Tabular for QuantileTables {
    fn headers(&self) -> Vec<String> {
        let mut h = vec!["statistic".to_string(), "lambda".to_string()];
        if let Some(t) = self.0.first() {
            h.extend(t.thresholds.iter().map(|c| format!("c{c}")));
        }
        h
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.0
            .iter()
            .flat_map(|t| {
                t.rows().into_iter().map(move |mut r| {
                    r.insert(0, t.statistic.to_string());
                    r
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::to_text;

    #[test]
    fn parallel_matches_sequential() {
        let setup = TestSetup::from_grid_choice(300.0, LambdaSource::Known, GridChoice::Kappa(1.0), 1).unwrap();
        let kinds = StatisticKind::ALL;
        let want = hypothesis::null_distribution(&setup, &kinds, 150, 11).unwrap();
        for threads in [1, 2, 4] {
            let got = null_distribution(&setup, &kinds, 150, 11, &pool(Some(threads)).unwrap()).unwrap();
            assert_eq!(got, want, "threads={threads}");
        }
        let seq = hypothesis::mc_critical_value(300.0, 1.0, 2, StatisticKind::TP, 1000, 0.95, 3).unwrap();
        let par = mc_critical_value(300.0, 1.0, 2, StatisticKind::TP, 1000, 0.95, 3, &pool(Some(3)).unwrap()).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn quantile_grid_renders_lambda_rows() {
        let table = QuantileTable {
            statistic: StatisticKind::TA,
            level: 0.95,
            kappa: 1.0,
            reps: 1000,
            seed: 7,
            lambdas: vec![100.0, 1000.0],
            thresholds: vec![1, 2, 5],
            values: vec![vec![Some(3.8012), Some(3.7), None], vec![Some(3.75), Some(3.869), Some(4.0)]],
            errors: vec!["lambda=100 c=5: degenerate".into()],
        };
        let want = "\
T_A: empirical 95% quantiles (kappa=1, reps=1000, seed=7)
lambda\\c     1     2     5
--------------------------
100       3.80  3.70    NA
1000      3.75  3.87  4.00

lambda=100 c=5: degenerate
";
        assert_eq!(to_text(&table), want);
    }

    #[test]
    fn failed_cells_do_not_abort() {
        let spec = QuantileSpec {
            statistics: vec![StatisticKind::TA, StatisticKind::Tc],
            lambdas: vec![150.0],
            thresholds: vec![1, 14],
            kappa: 1.0,
            reps: 1000,
            level: 0.95,
            seed: 1,
        };
        let tables = quantile_tables(&spec, &pool(Some(2)).unwrap()).unwrap();
        assert!(tables[0].values[0][0].is_some());
        assert!(tables[1].values[0][0].is_some());
        assert!(tables[1].values[0][1].is_none());
        assert!(!tables[1].errors.is_empty());
    }
}

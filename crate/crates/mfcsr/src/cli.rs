//! The `mfcsr` command line.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use mfcsr_core::grid::IntensityMode;
use mfcsr_core::hypothesis::{GridChoice, StatisticKind};
use mfcsr_core::pointprocess::{DensityId, ProcessKind, ProcessSpec};
use mfcsr_core::rng::{domain, StreamRng};

use crate::analyze::{self, AnalysisConfig};
use crate::calibrate::{self, QuantileSpec, QuantileTables};
use crate::config::Config;
use crate::error::{exit, AppError, Result};
use crate::io;
use crate::power::{self, CriticalValueSource, PowerStudySpec, StudyStatistic};
use crate::report::{emit, Format};
use crate::summaries::{self, LimitsReport, MomentsReport};

#[derive(Debug, Parser)]
#[command(name = "mfcsr", version, about = "Tests of complete spatial randomness via Minkowski functionals")]
pub struct Cli {
    /// Configuration file with `[section]` groups named after subcommands.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for simulations (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a point pattern for complete spatial randomness.
    Test(TestArgs),
    /// Simulate a point process and write the points as CSV.
    Simulate(SimulateArgs),
    /// Empirical null quantiles of the test statistics.
    Calibrate(CalibrateArgs),
    /// Rejection rates under simulated alternatives.
    Power(PowerArgs),
    /// Exact null means and covariances of the functionals.
    Moments(MomentsArgs),
    /// Limits of the scaled functionals under inhomogeneous alternatives.
    Limits(LimitsArgs),
    /// Minkowski functionals of a thresholded point pattern.
    Morphology(MorphologyArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format: text, json or csv.
    #[arg(long)]
    pub format: Option<Format>,
    /// Shorthand for `--format json`.
    #[arg(long, conflicts_with_all = ["format", "csv"])]
    pub json: bool,
    /// Shorthand for `--format csv`.
    #[arg(long, conflicts_with = "format")]
    pub csv: bool,
}

impl OutputArgs {
    fn resolve(&self, cfg: &Config, section: &str, default: Format) -> Result<Format> {
        let cli = if self.json {
            Some(Format::Json)
        } else if self.csv {
            Some(Format::Csv)
        } else {
            self.format
        };
        cfg.pick(cli, section, "format", default)
    }
}

/// `auto` (estimate from the point count) or a known value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaArg {
    Auto,
    Value(f64),
}

impl FromStr for LambdaArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(LambdaArg::Auto);
        }
        match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(LambdaArg::Value(v)),
            _ => Err(format!("expected `auto` or a positive number, got `{s}`")),
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// CSV file of points in the unit square.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Intensity: a known value, or `auto` for the point count.
    #[arg(long)]
    pub lambda: Option<LambdaArg>,
    /// Target points per cell; the grid is m = floor(sqrt(lambda/kappa)).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Grid size, overriding `--kappa`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Threshold: a cell is black when it holds at least c points.
    #[arg(long)]
    pub c: Option<u32>,
    /// Comma-separated statistics: T_A, T_P, T_chi, T_c, T_c_tilde, Q, H.
    #[arg(long, value_delimiter = ',')]
    pub stats: Option<Vec<StudyStatistic>>,
    /// Null replications for Monte Carlo p-values.
    #[arg(long)]
    pub mc_reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Observed-dataset defaults: lambda from the count, kappa 3, c 2,
    /// T_A, T_P, T_chi and T_c.
    #[arg(long)]
    pub dataset: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// hpp, ipp:f1..ipp:f4, bsp, or matern[:r[:kappa]].
    #[arg(long)]
    pub model: Option<ProcessKind>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Matérn cluster radius.
    #[arg(long)]
    pub r: Option<f64>,
    /// Matérn offspring mean is floor(sqrt(lambda/kappa)).
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub stats: Option<Vec<StatisticKind>>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Quantile level.
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Comma-separated models (see `simulate --model`); HPP is always added.
    #[arg(long, value_delimiter = ',')]
    pub alternatives: Option<Vec<ProcessKind>>,
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<u32>>,
    /// Comma-separated statistics, including Q and H.
    #[arg(long, value_delimiter = ',')]
    pub stats: Option<Vec<StudyStatistic>>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Use 10000 replications per cell.
    #[arg(long, conflicts_with = "reps")]
    pub full: bool,
    /// Significance level.
    #[arg(long)]
    pub level: Option<f64>,
    /// `mc` (empirical null quantiles) or `asymptotic` (chi-square).
    #[arg(long)]
    pub critical: Option<CriticalArg>,
    #[arg(long)]
    pub calibration_reps: Option<usize>,
    #[arg(long)]
    pub calibration_seed: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalArg {
    MonteCarlo,
    Asymptotic,
}

impl FromStr for CriticalArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mc" | "montecarlo" | "monte-carlo" | "empirical" => Ok(CriticalArg::MonteCarlo),
            "asymptotic" | "chi2" => Ok(CriticalArg::Asymptotic),
            other => Err(format!("unknown critical value source `{other}` (mc, asymptotic)")),
        }
    }
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub c: Option<u32>,
    /// Exceedance probability directly, instead of lambda and c (needs --m).
    #[arg(long, conflicts_with_all = ["lambda", "c", "kappa"])]
    pub p: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    /// Comma-separated densities: uniform, f1..f4.
    #[arg(long, value_delimiter = ',')]
    pub density: Option<Vec<DensityId>>,
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<u32>>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MorphologyArgs {
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub c: Option<u32>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Grid choice: an explicit `m` wins over `kappa`, and CLI wins over config.
fn grid_choice(
    cfg: &Config,
    section: &str,
    m: Option<usize>,
    kappa: Option<f64>,
    default_kappa: f64,
) -> Result<GridChoice> {
    if let Some(m) = m {
        return Ok(GridChoice::M(m));
    }
    if let Some(k) = kappa {
        return Ok(GridChoice::Kappa(k));
    }
    if let Some(m) = cfg.get::<usize>(section, "m")? {
        return Ok(GridChoice::M(m));
    }
    Ok(GridChoice::Kappa(cfg.pick(None, section, "kappa", default_kappa)?))
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| AppError::Usage(format!("--{flag} is required (on the command line or in the config file)")))
}

fn print(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| AppError::io("<stdout>", e))
}

fn run_test(args: &TestArgs, cfg: &Config, pool: &rayon::ThreadPool) -> Result<String> {
    const S: &str = "test";
    let dataset = args.dataset || cfg.pick(None, S, "dataset", false)?;
    let base = if dataset { AnalysisConfig::dataset() } else { AnalysisConfig::default() };
    let input: PathBuf = required(cfg.pick_opt(args.input.clone(), S, "input")?, "input")?;
    let intensity = match cfg.pick(args.lambda, S, "lambda", LambdaArg::Auto)? {
        LambdaArg::Auto => IntensityMode::Estimate,
        LambdaArg::Value(v) => IntensityMode::Known(v),
    };
    let default_kappa = match base.grid {
        GridChoice::Kappa(k) => k,
        GridChoice::M(_) => 1.0,
    };
    let analysis = AnalysisConfig {
        intensity,
        grid: grid_choice(cfg, S, args.m, args.kappa, default_kappa)?,
        c: cfg.pick(args.c, S, "c", base.c)?,
        statistics: cfg.pick_list(args.stats.clone(), S, "stats", base.statistics)?,
        mc_reps: cfg.pick_opt(args.mc_reps, S, "mc-reps")?,
        seed: cfg.pick(args.seed, S, "seed", 0)?,
    };
    let format = args.output.resolve(cfg, S, Format::Text)?;
    let report = analyze::analyze_dataset(&input, &analysis, pool)?;
    emit(&report, format)
}

fn run_simulate(args: &SimulateArgs, cfg: &Config) -> Result<()> {
    const S: &str = "simulate";
    let mut kind = cfg.pick(args.model, S, "model", ProcessKind::Hpp)?;
    let lambda: f64 = required(cfg.pick_opt(args.lambda, S, "lambda")?, "lambda")?;
    if let ProcessKind::Matern { radius, kappa } = &mut kind {
        *radius = cfg.pick(args.r, S, "r", *radius)?;
        *kappa = cfg.pick(args.kappa, S, "kappa", *kappa)?;
    } else if args.r.is_some() {
        return Err(AppError::Usage("--r only applies to the matern model".into()));
    }
    let seed = cfg.pick(args.seed, S, "seed", 0)?;
    let spec = ProcessSpec::new(kind, lambda)?;
    let pattern = spec.sample(&mut StreamRng::new(seed, &[domain::SIMULATE]))?;
    log::info!("simulated {} points from {} (lambda={lambda}, seed={seed})", pattern.len(), kind.label());
    match cfg.pick_opt(args.out.clone(), S, "out")? {
        Some(path) => io::write_points_csv(path, &pattern),
        None => {
            let mut buf = Vec::new();
            io::write_points(&mut buf, &pattern)?;
            print(&String::from_utf8_lossy(&buf))
        }
    }
}

fn run_calibrate(args: &CalibrateArgs, cfg: &Config, pool: &rayon::ThreadPool) -> Result<String> {
    const S: &str = "calibrate";
    let spec = QuantileSpec {
        statistics: cfg.pick_list(args.stats.clone(), S, "stats", StatisticKind::ALL.to_vec())?,
        lambdas: cfg.pick_list(args.lambda.clone(), S, "lambda", vec![1000.0])?,
        thresholds: cfg.pick_list(args.c.clone(), S, "c", vec![1, 2])?,
        kappa: cfg.pick(args.kappa, S, "kappa", 1.0)?,
        reps: cfg.pick(args.reps, S, "reps", 10_000)?,
        level: cfg.pick(args.level, S, "level", 0.95)?,
        seed: cfg.pick(args.seed, S, "seed", 0)?,
    };
    let format = args.output.resolve(cfg, S, Format::Text)?;
    let tables = calibrate::quantile_tables(&spec, pool)?;
    if format == Format::Text {
        let texts: Vec<String> = tables.iter().map(crate::report::to_text).collect();
        return Ok(texts.join("\n"));
    }
    emit(&QuantileTables(tables), format)
}

fn run_power(args: &PowerArgs, cfg: &Config, pool: &rayon::ThreadPool) -> Result<String> {
    const S: &str = "power";
    let seed = cfg.pick(args.seed, S, "seed", 0)?;
    let full = args.full || cfg.pick(None, S, "full", false)?;
    let reps = if full { power::FULL_REPS } else { cfg.pick(args.reps, S, "reps", power::DEFAULT_REPS)? };
    let critical_values = match cfg.pick(args.critical, S, "critical", CriticalArg::MonteCarlo)? {
        CriticalArg::Asymptotic => CriticalValueSource::Asymptotic,
        CriticalArg::MonteCarlo => CriticalValueSource::MonteCarlo {
            reps: cfg.pick(args.calibration_reps, S, "calibration-reps", power::DEFAULT_CALIBRATION_REPS)?,
            seed: cfg.pick(args.calibration_seed, S, "calibration-seed", seed)?,
        },
    };
    let default_alternatives = vec![
        ProcessKind::Ipp { density: DensityId::F1 },
        ProcessKind::Ipp { density: DensityId::F2 },
        ProcessKind::Ipp { density: DensityId::F3 },
        ProcessKind::Ipp { density: DensityId::F4 },
        ProcessKind::Bsp,
        ProcessKind::Matern { radius: 0.2, kappa: 1.0 },
    ];
    let default_stats = [StatisticKind::TA, StatisticKind::TP, StatisticKind::TChi, StatisticKind::Tc]
        .map(StudyStatistic::Minkowski)
        .to_vec();
    let spec = PowerStudySpec {
        alternatives: cfg.pick_list(args.alternatives.clone(), S, "alternatives", default_alternatives)?,
        lambdas: cfg.pick_list(args.lambda.clone(), S, "lambda", vec![100.0, 200.0])?,
        kappa: cfg.pick(args.kappa, S, "kappa", 1.0)?,
        thresholds: cfg.pick_list(args.c.clone(), S, "c", vec![1, 2])?,
        statistics: cfg.pick_list(args.stats.clone(), S, "stats", default_stats)?,
        reps,
        level: cfg.pick(args.level, S, "level", 0.05)?,
        critical_values,
        seed,
    };
    let format = args.output.resolve(cfg, S, Format::Text)?;
    emit(&power::power_study(&spec, pool)?, format)
}

fn run_moments(args: &MomentsArgs, cfg: &Config) -> Result<String> {
    const S: &str = "moments";
    let format = args.output.resolve(cfg, S, Format::Text)?;
    let report = match cfg.pick_opt(args.p, S, "p")? {
        Some(p) => MomentsReport::from_p(p, required(cfg.pick_opt(args.m, S, "m")?, "m")?)?,
        None => {
            let lambda = required(cfg.pick_opt(args.lambda, S, "lambda")?, "lambda")?;
            let grid = grid_choice(cfg, S, args.m, args.kappa, 1.0)?;
            MomentsReport::from_intensity(lambda, grid, cfg.pick(args.c, S, "c", 1)?)?
        }
    };
    emit(&report, format)
}

fn run_limits(args: &LimitsArgs, cfg: &Config) -> Result<String> {
    const S: &str = "limits";
    let densities = cfg.pick_list(args.density.clone(), S, "density", DensityId::ALTERNATIVES.to_vec())?;
    let thresholds = cfg.pick_list(args.c.clone(), S, "c", vec![1, 2])?;
    let kappa = cfg.pick(args.kappa, S, "kappa", 1.0)?;
    let format = args.output.resolve(cfg, S, Format::Json)?;
    emit(&LimitsReport::compute(&densities, &thresholds, kappa)?, format)
}

fn run_morphology(args: &MorphologyArgs, cfg: &Config) -> Result<String> {
    const S: &str = "morphology";
    let input: PathBuf = required(cfg.pick_opt(args.input.clone(), S, "input")?, "input")?;
    let pattern = io::read_points_csv(&input)?;
    let lambda = cfg.pick_opt(args.lambda, S, "lambda")?;
    let grid = grid_choice(cfg, S, args.m, args.kappa, 1.0)?;
    let c = cfg.pick(args.c, S, "c", 1)?;
    let format = args.output.resolve(cfg, S, Format::Text)?;
    let mut report = summaries::morphology(&pattern, lambda, grid, c)?;
    report.source = Some(input.display().to_string());
    emit(&report, format)
}

/// Runs a parsed command line and returns what should go to stdout.
pub fn run(cli: &Cli) -> Result<Option<String>> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::empty(),
    };
    let threads = cfg.pick_opt(cli.threads, "general", "threads")?;
    let pool = calibrate::pool(threads)?;
    // the band scan in `morphology` runs on the global pool
    let out = pool.install(|| -> Result<Option<String>> {
        Ok(match &cli.command {
            Command::Test(a) => Some(run_test(a, &cfg, &pool)?),
            Command::Simulate(a) => {
                run_simulate(a, &cfg)?;
                None
            }
            Command::Calibrate(a) => Some(run_calibrate(a, &cfg, &pool)?),
            Command::Power(a) => Some(run_power(a, &cfg, &pool)?),
            Command::Moments(a) => Some(run_moments(a, &cfg)?),
            Command::Limits(a) => Some(run_limits(a, &cfg)?),
            Command::Morphology(a) => Some(run_morphology(a, &cfg)?),
        })
    })?;
    Ok(out)
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .target(env_logger::Target::Stderr)
        .try_init();
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT } else { exit::OK });
        }
    };
    init_logging(cli.verbose);
    match run(&cli).and_then(|out| out.map_or(Ok(()), |text| print(&text))) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

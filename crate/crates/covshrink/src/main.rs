//! Thin command-line front end over the covshrink library.
//!
//! Negated comparisons in the flag validation are deliberate NaN guards.
//!
//! Exit codes: 0 success, 2 usage/input problems, 3 numeric or estimator
//! failure, 4 degenerate data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use covshrink::anomaly::{detrend, roc, score, training_indices, TimeSeriesSet, TrainingSelection};
use covshrink::error::Error;
use covshrink::estimators::{
    clairvoyant_ledoit_wolf, clairvoyant_shrinkage, ledoit_wolf, normalized_sample_covariance,
    oracle_rho, plugin_rho, regularized_tyler, sample_covariance, tyler_ml, CovarianceEstimate,
    FixedPointConfig, PilotEstimator, ShrinkageCoefficient,
};
use covshrink::io::{
    read_labels_csv, read_samples_csv, write_grid_csv, write_matrix_csv, write_mse_csv,
    write_roc_csv,
};
use covshrink::sampling::{
    ar1_covariance, draw_samples, inject_anomalies, EllipticalKind, EllipticalSpec, RngSeed,
};
use covshrink::simulation::{run_mse_experiment, run_oracle_grid, EstimatorId, ExperimentPlan};

#[derive(Parser)]
#[command(
    name = "covshrink",
    version,
    about = "Robust shrinkage covariance estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a covariance matrix from a CSV of samples (rows = observations).
    Estimate(EstimateArgs),
    /// Monte-Carlo MSE benchmark over a sweep of sample sizes.
    Simulate(SimulateArgs),
    /// Empirical MSE of the clairvoyant estimator over a shrinkage grid.
    OracleGrid(OracleGridArgs),
    /// Covariance-based anomaly detection with ROC output.
    Detect(DetectArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Input CSV, n rows x p columns.
    #[arg(long)]
    input: PathBuf,
    /// Output CSV for the p x p estimate.
    #[arg(long)]
    output: PathBuf,
    /// sample | normalized | tyler | proposed | lw
    #[arg(long, default_value = "proposed")]
    estimator: String,
    /// Fixed shrinkage coefficient (proposed only; overrides the plug-in).
    #[arg(long)]
    rho: Option<f64>,
    /// Pilot for the plug-in coefficient: normalized | lw
    #[arg(long, default_value = "lw")]
    pilot: String,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    /// Skip a header row in the input.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 20)]
    p: usize,
    #[arg(long, default_value_t = 10)]
    n_start: usize,
    #[arg(long, default_value_t = 100)]
    n_stop: usize,
    #[arg(long, default_value_t = 10)]
    n_step: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// gaussian | student-t:<dof>
    #[arg(long, default_value = "student-t:3")]
    dist: String,
    /// AR(1) coefficient of the true covariance.
    #[arg(long, default_value_t = 0.7)]
    r: f64,
    /// Comma-separated estimator ids.
    #[arg(long, default_value = "proposed,lw,oracle")]
    estimators: String,
    #[arg(long, default_value = "lw")]
    pilot: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct OracleGridArgs {
    #[arg(long, default_value_t = 20)]
    p: usize,
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value = "student-t:3")]
    dist: String,
    #[arg(long, default_value_t = 0.7)]
    r: f64,
    #[arg(long, default_value_t = 0.0)]
    rho_min: f64,
    #[arg(long, default_value_t = 1.0)]
    rho_max: f64,
    #[arg(long, default_value_t = 0.05)]
    rho_step: f64,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    /// Input CSV, T rows x p channels (alternative to --synthetic).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Ground-truth labels (one 0/1 per row), required with --input.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Generate a synthetic contaminated series instead of reading files.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, default_value_t = 20)]
    p: usize,
    /// Series length for synthetic mode.
    #[arg(long, default_value_t = 2000)]
    t_len: usize,
    /// Anomaly rate for synthetic mode.
    #[arg(long, default_value_t = 0.1)]
    rate: f64,
    /// Burst magnitude (times the median row norm) for synthetic mode.
    #[arg(long, default_value_t = 2.0)]
    magnitude: f64,
    #[arg(long, default_value = "student-t:3")]
    dist: String,
    #[arg(long, default_value_t = 0.7)]
    r: f64,
    /// Training slices subsampled from the series (unsupervised mode).
    #[arg(long, default_value_t = 200)]
    train_size: usize,
    /// Inclusive index range `a:b` of training slices (supervised mode).
    #[arg(long)]
    train_range: Option<String>,
    /// Detrending window half-width; 0 disables detrending.
    #[arg(long, default_value_t = 50)]
    window: usize,
    /// sample | normalized | tyler | proposed | lw (synthetic mode also
    /// accepts oracle and lw-clairvoyant).
    #[arg(long, default_value = "proposed")]
    estimator: String,
    #[arg(long, default_value = "lw")]
    pilot: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV for the ROC curve.
    #[arg(long)]
    output: PathBuf,
}

/// A failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn from_error(e: Error) -> Self {
        let code = match e {
            Error::DegenerateLabels | Error::DegenerateData(_) => 4,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from_error(e)
    }
}

impl From<covshrink::io::CsvError> for Failure {
    fn from(e: covshrink::io::CsvError) -> Self {
        Failure::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::OracleGrid(args) => cmd_oracle_grid(args),
        Command::Detect(args) => cmd_detect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn parse_dist(s: &str) -> Result<EllipticalKind, Failure> {
    if s == "gaussian" {
        return Ok(EllipticalKind::Gaussian);
    }
    if let Some(dof_str) = s.strip_prefix("student-t:") {
        let dof: f64 = dof_str
            .parse()
            .map_err(|_| Failure::usage(format!("bad degrees of freedom `{dof_str}`")))?;
        if !(dof > 0.0) || !dof.is_finite() {
            return Err(Failure::usage(format!(
                "student-t degrees of freedom must be positive, got {dof}"
            )));
        }
        return Ok(EllipticalKind::StudentT { dof });
    }
    Err(Failure::usage(format!(
        "unknown distribution `{s}` (expected gaussian or student-t:<dof>)"
    )))
}

fn parse_pilot(s: &str) -> Result<PilotEstimator, Failure> {
    match s {
        "normalized" => Ok(PilotEstimator::NormalizedSampleCov),
        "lw" => Ok(PilotEstimator::LedoitWolf),
        other => Err(Failure::usage(format!(
            "unknown pilot `{other}` (expected normalized or lw)"
        ))),
    }
}

fn parse_estimator(s: &str) -> Result<EstimatorId, Failure> {
    s.parse::<EstimatorId>()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let estimator = parse_estimator(&args.estimator)?;
    if estimator.needs_truth() || estimator.needs_textures() {
        return Err(Failure::usage(format!(
            "estimator `{estimator}` needs the true covariance or textures; it is only \
             available in simulate or synthetic detect modes"
        )));
    }
    if args.rho.is_some() && estimator != EstimatorId::Proposed {
        return Err(Failure::usage("--rho only applies to --estimator proposed"));
    }
    let pilot = parse_pilot(&args.pilot)?;
    let samples = read_samples_csv(&args.input, args.header)?;
    let config = FixedPointConfig {
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        initial: None,
    };

    let mut rho_used: Option<f64> = None;
    let estimate: CovarianceEstimate = match estimator {
        EstimatorId::Sample => sample_covariance(&samples),
        EstimatorId::Normalized => normalized_sample_covariance(&samples)?,
        EstimatorId::Tyler => tyler_ml(&samples, &config)?,
        EstimatorId::Proposed => {
            let rho = match args.rho {
                Some(v) => ShrinkageCoefficient::fixed(v)?,
                None => plugin_rho(&samples, pilot)?,
            };
            rho_used = Some(rho.value());
            regularized_tyler(&samples, &rho, &config)?
        }
        EstimatorId::LedoitWolf => ledoit_wolf(&samples)?,
        _ => unreachable!("rejected above"),
    };

    write_matrix_csv(&args.output, &estimate.matrix)?;
    if let Some(rho) = rho_used {
        println!("rho={rho}");
    }
    println!("iterations={}", estimate.iterations_used);
    println!("residual={}", estimate.final_residual);
    println!("converged={}", estimate.converged);
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    if args.n_step == 0 {
        return Err(Failure::usage("--n-step must be >= 1"));
    }
    if args.n_start == 0 || args.n_stop < args.n_start {
        return Err(Failure::usage("need 1 <= n-start <= n-stop"));
    }
    let kind = parse_dist(&args.dist)?;
    let pilot = parse_pilot(&args.pilot)?;
    let estimators = args
        .estimators
        .split(',')
        .map(|s| parse_estimator(s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let n_values: Vec<usize> = (args.n_start..=args.n_stop).step_by(args.n_step).collect();
    let plan = ExperimentPlan {
        p: args.p,
        n_values,
        trials: args.trials,
        kind,
        r: args.r,
        estimators,
        master_seed: args.seed,
        pilot,
        config: FixedPointConfig::default(),
    };
    let records = run_mse_experiment(&plan).map_err(map_plan_error)?;
    write_mse_csv(&args.output, &records)?;
    Ok(())
}

fn cmd_oracle_grid(args: OracleGridArgs) -> Result<(), Failure> {
    let kind = parse_dist(&args.dist)?;
    if !(args.rho_step > 0.0) {
        return Err(Failure::usage("--rho-step must be positive"));
    }
    if !(0.0..=1.0).contains(&args.rho_min)
        || !(0.0..=1.0).contains(&args.rho_max)
        || args.rho_min > args.rho_max
    {
        return Err(Failure::usage("need 0 <= rho-min <= rho-max <= 1"));
    }
    let mut grid = Vec::new();
    let mut k = 0usize;
    loop {
        let rho = args.rho_min + k as f64 * args.rho_step;
        if rho > args.rho_max + 1e-12 {
            break;
        }
        grid.push(rho.min(1.0));
        k += 1;
    }
    let result = run_oracle_grid(args.p, args.n, kind, args.r, &grid, args.trials, args.seed)
        .map_err(map_plan_error)?;
    write_grid_csv(&args.output, &result)?;
    Ok(())
}

/// Plan/parameter validation failures are usage errors (exit 2), not
/// numeric failures.
fn map_plan_error(e: Error) -> Failure {
    match e {
        Error::InvalidParameter { .. } | Error::NotTraceNormalized { .. } => {
            Failure::usage(e.to_string())
        }
        other => Failure::from_error(other),
    }
}

fn cmd_detect(args: DetectArgs) -> Result<(), Failure> {
    let estimator = parse_estimator(&args.estimator)?;
    let pilot = parse_pilot(&args.pilot)?;

    if args.synthetic == args.input.is_some() {
        return Err(Failure::usage(
            "exactly one of --input or --synthetic is required",
        ));
    }

    // assemble the labeled series, plus truth/textures when synthetic
    let (series, truth): (
        TimeSeriesSet,
        Option<(covshrink::numerics::SymMatrix, Vec<f64>)>,
    ) = if args.synthetic {
        if args.labels.is_some() {
            return Err(Failure::usage("--labels does not apply to --synthetic"));
        }
        let kind = parse_dist(&args.dist)?;
        let sigma = ar1_covariance(args.p, args.r).map_err(map_plan_error)?;
        let spec = EllipticalSpec::new(kind, sigma.clone()).map_err(map_plan_error)?;
        let (clean, textures) =
            draw_samples(&spec, args.t_len, RngSeed::new(args.seed, 0)).map_err(map_plan_error)?;
        let (contaminated, labels) = inject_anomalies(
            &clean,
            args.rate,
            args.magnitude,
            RngSeed::new(args.seed, 1),
        )
        .map_err(map_plan_error)?;
        (
            TimeSeriesSet::from_samples(&contaminated, Some(labels))?,
            Some((sigma, textures)),
        )
    } else {
        if estimator.needs_truth() || estimator.needs_textures() {
            return Err(Failure::usage(format!(
                "estimator `{estimator}` is only available with --synthetic"
            )));
        }
        let labels_path = args
            .labels
            .as_ref()
            .ok_or_else(|| Failure::usage("--labels is required with --input"))?;
        let samples = read_samples_csv(args.input.as_ref().unwrap(), false)?;
        let labels = read_labels_csv(labels_path)?;
        if labels.len() != samples.len() {
            return Err(Failure::usage(format!(
                "labels length {} does not match data length {}",
                labels.len(),
                samples.len()
            )));
        }
        (TimeSeriesSet::from_samples(&samples, Some(labels))?, None)
    };

    let detrended = if args.window > 0 {
        detrend(&series, args.window)?
    } else {
        series
    };

    // constant input detrends to zero everywhere: nothing to score
    let all_zero = (0..detrended.t_len())
        .all(|k| detrended.row(k).iter().map(|v| v * v).sum::<f64>() < 1e-300);
    if all_zero {
        return Err(Failure::from_error(Error::DegenerateData(
            "series is constant after detrending; all scores would be zero".into(),
        )));
    }

    let selection = match &args.train_range {
        Some(range) => {
            let (a, b) = range
                .split_once(':')
                .ok_or_else(|| Failure::usage("--train-range must look like a:b"))?;
            let start: usize = a
                .parse()
                .map_err(|_| Failure::usage(format!("bad range start `{a}`")))?;
            let end: usize = b
                .parse()
                .map_err(|_| Failure::usage(format!("bad range end `{b}`")))?;
            TrainingSelection::Range { start, end }
        }
        None => TrainingSelection::Subsample {
            count: args.train_size,
            seed: RngSeed::new(args.seed, 2),
        },
    };
    let indices = training_indices(detrended.t_len(), selection).map_err(map_plan_error)?;
    let training = detrended.select(&indices)?;

    let config = FixedPointConfig::default();
    let cov: CovarianceEstimate = match estimator {
        EstimatorId::Sample => sample_covariance(&training),
        EstimatorId::Normalized => normalized_sample_covariance(&training)?,
        EstimatorId::Tyler => tyler_ml(&training, &config)?,
        EstimatorId::Proposed => {
            let rho = plugin_rho(&training, pilot)?;
            regularized_tyler(&training, &rho, &config)?
        }
        EstimatorId::LedoitWolf => ledoit_wolf(&training)?,
        EstimatorId::LedoitWolfClairvoyant => {
            let (_, textures) = truth.as_ref().expect("synthetic mode");
            let selected: Vec<f64> = indices.iter().map(|&i| textures[i]).collect();
            clairvoyant_ledoit_wolf(&training, &selected)?
        }
        EstimatorId::Oracle => {
            let (sigma, _) = truth.as_ref().expect("synthetic mode");
            let rho = oracle_rho(sigma, training.len())?;
            clairvoyant_shrinkage(&training, sigma, rho.value())?
        }
        EstimatorId::TrueCovariance => {
            let (sigma, _) = truth.as_ref().expect("synthetic mode");
            CovarianceEstimate {
                matrix: sigma.clone(),
                trace_normalized: true,
                iterations_used: 0,
                final_residual: 0.0,
                converged: true,
            }
        }
    };

    let scores = score(&detrended, &cov)?;
    let labels = detrended.labels().expect("labels attached above");
    let curve = roc(&scores, labels)?;
    write_roc_csv(&args.output, &curve)?;
    println!("auc={}", curve.auc);
    Ok(())
}

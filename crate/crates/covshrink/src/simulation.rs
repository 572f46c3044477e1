//! Seeded Monte-Carlo harness for the MSE benchmarks and the oracle-grid
//! validation. Trial `t` always consumes RNG stream `t`, so records do not
//! depend on execution order.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::{
    clairvoyant_ledoit_wolf, clairvoyant_shrinkage, ledoit_wolf, normalized_sample_covariance,
    oracle_rho, plugin_rho, regularized_tyler, sample_covariance, tyler_ml, FixedPointConfig,
    PilotEstimator,
};
use crate::numerics::{frobenius_dist_sq, SymMatrix};
use crate::sampling::{
    ar1_covariance, draw_samples, EllipticalKind, EllipticalSpec, RngSeed, SampleSet,
};

/// The estimators the harness and the CLI know by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorId {
    Sample,
    Normalized,
    Tyler,
    Proposed,
    LedoitWolf,
    LedoitWolfClairvoyant,
    Oracle,
    /// Test hook: returns the true covariance itself.
    TrueCovariance,
}

impl EstimatorId {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorId::Sample => "sample",
            EstimatorId::Normalized => "normalized",
            EstimatorId::Tyler => "tyler",
            EstimatorId::Proposed => "proposed",
            EstimatorId::LedoitWolf => "lw",
            EstimatorId::LedoitWolfClairvoyant => "lw-clairvoyant",
            EstimatorId::Oracle => "oracle",
            EstimatorId::TrueCovariance => "true",
        }
    }

    /// Needs the true covariance (only available in simulation/synthetic
    /// modes).
    pub fn needs_truth(&self) -> bool {
        matches!(self, EstimatorId::Oracle | EstimatorId::TrueCovariance)
    }

    /// Needs the texture realizations (only available where data is drawn).
    pub fn needs_textures(&self) -> bool {
        matches!(self, EstimatorId::LedoitWolfClairvoyant)
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" => Ok(EstimatorId::Sample),
            "normalized" => Ok(EstimatorId::Normalized),
            "tyler" => Ok(EstimatorId::Tyler),
            "proposed" => Ok(EstimatorId::Proposed),
            "lw" => Ok(EstimatorId::LedoitWolf),
            "lw-clairvoyant" => Ok(EstimatorId::LedoitWolfClairvoyant),
            "oracle" => Ok(EstimatorId::Oracle),
            "true" => Ok(EstimatorId::TrueCovariance),
            other => Err(Error::invalid(
                "estimator",
                format!("unknown estimator id `{other}`"),
            )),
        }
    }
}

/// Full description of an MSE sweep.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub p: usize,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub kind: EllipticalKind,
    pub r: f64,
    pub estimators: Vec<EstimatorId>,
    pub master_seed: u64,
    /// Pilot feeding the plug-in coefficient of the proposed estimator.
    pub pilot: PilotEstimator,
    pub config: FixedPointConfig,
}

impl ExperimentPlan {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("estimators", "need at least one"));
        }
        if self.n_values.is_empty() {
            return Err(Error::invalid("n_values", "need at least one"));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("n_values", "must be strictly increasing"));
        }
        if self.n_values[0] == 0 {
            return Err(Error::invalid("n_values", "sample sizes must be >= 1"));
        }
        Ok(())
    }
}

/// One row of a benchmark result: squared-Frobenius-error statistics for an
/// estimator at one sample size. `failures` counts trials dropped because
/// the estimator errored.
#[derive(Debug, Clone)]
pub struct MseRecord {
    pub estimator: EstimatorId,
    pub n: usize,
    pub trials: usize,
    pub failures: usize,
    pub mse_mean: f64,
    pub mse_std: f64,
}

/// Runs the sweep: for every `(estimator, n)` the mean and standard
/// deviation over trials of `||estimate - sigma||_F^2`, both sides
/// trace-normalized. Estimators requiring `n >= p` are skipped (no record)
/// for smaller `n`. Trial `t` uses RNG stream `t`.
pub fn run_mse_experiment(plan: &ExperimentPlan) -> Result<Vec<MseRecord>> {
    plan.validate()?;
    let sigma = ar1_covariance(plan.p, plan.r)?;
    let spec = EllipticalSpec::new(plan.kind, sigma.clone())?;
    let mut records = Vec::new();

    for &n in &plan.n_values {
        let mut errors: Vec<Vec<f64>> = vec![Vec::new(); plan.estimators.len()];
        let mut failures = vec![0usize; plan.estimators.len()];
        for t in 0..plan.trials {
            let seed = RngSeed::new(plan.master_seed, t as u64);
            let (x, textures) = draw_samples(&spec, n, seed)?;
            for (slot, &est) in plan.estimators.iter().enumerate() {
                if est == EstimatorId::Tyler && n < plan.p {
                    continue; // marked absent below
                }
                match estimate_trace_normalized(est, &x, &textures, &sigma, plan) {
                    Ok(m) => errors[slot].push(frobenius_dist_sq(&m, &sigma)?),
                    Err(_) => failures[slot] += 1,
                }
            }
        }
        for (slot, &est) in plan.estimators.iter().enumerate() {
            if est == EstimatorId::Tyler && n < plan.p {
                continue; // absent: n < p
            }
            let vals = &errors[slot];
            let k = vals.len();
            let mean = if k > 0 {
                vals.iter().sum::<f64>() / k as f64
            } else {
                f64::NAN
            };
            let std = if k > 1 {
                (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64).sqrt()
            } else {
                0.0
            };
            records.push(MseRecord {
                estimator: est,
                n,
                trials: plan.trials,
                failures: failures[slot],
                mse_mean: mean,
                mse_std: std,
            });
        }
    }
    Ok(records)
}

/// Computes one estimator on one draw, trace-normalized for comparison.
fn estimate_trace_normalized(
    est: EstimatorId,
    x: &SampleSet,
    textures: &[f64],
    sigma: &SymMatrix,
    plan: &ExperimentPlan,
) -> Result<SymMatrix> {
    let n = x.len();
    let m = match est {
        EstimatorId::Sample => sample_covariance(x).into_trace_normalized()?.matrix,
        EstimatorId::Normalized => normalized_sample_covariance(x)?.matrix.trace_normalized()?,
        EstimatorId::Tyler => tyler_ml(x, &plan.config)?.matrix,
        EstimatorId::Proposed => {
            let rho = plugin_rho(x, plan.pilot)?;
            regularized_tyler(x, &rho, &plan.config)?.matrix
        }
        EstimatorId::LedoitWolf => ledoit_wolf(x)?.matrix,
        EstimatorId::LedoitWolfClairvoyant => clairvoyant_ledoit_wolf(x, textures)?.matrix,
        EstimatorId::Oracle => {
            let rho = oracle_rho(sigma, n)?;
            clairvoyant_shrinkage(x, sigma, rho.value())?
                .into_trace_normalized()?
                .matrix
        }
        EstimatorId::TrueCovariance => sigma.clone(),
    };
    Ok(m)
}

/// Empirical MSE of the (raw, un-normalized) clairvoyant shrinkage estimator
/// at every grid point, sharing the weighted scatter across the grid within
/// each trial. Deterministic given the seed.
pub fn run_oracle_grid(
    p: usize,
    n: usize,
    kind: EllipticalKind,
    r: f64,
    rho_grid: &[f64],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if rho_grid.is_empty() {
        return Err(Error::invalid("rho_grid", "must be nonempty"));
    }
    if let Some(bad) = rho_grid.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::invalid(
            "rho_grid",
            format!("grid values must lie in [0, 1], got {bad}"),
        ));
    }
    if trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let sigma = ar1_covariance(p, r)?;
    let spec = EllipticalSpec::new(kind, sigma.clone())?;
    let mut acc = vec![0.0; rho_grid.len()];
    for t in 0..trials {
        let (x, _) = draw_samples(&spec, n, RngSeed::new(master_seed, t as u64))?;
        // rho = 0 yields exactly the weighted scatter C
        let scatter = clairvoyant_shrinkage(&x, &sigma, 0.0)?.matrix;
        for (gi, &rho) in rho_grid.iter().enumerate() {
            let shrunk = SymMatrix::from_fn(p, |i, j| {
                (1.0 - rho) * scatter.get(i, j) + if i == j { rho } else { 0.0 }
            });
            acc[gi] += frobenius_dist_sq(&shrunk, &sigma)?;
        }
    }
    Ok(rho_grid
        .iter()
        .zip(acc)
        .map(|(&rho, sum)| (rho, sum / trials as f64))
        .collect())
}

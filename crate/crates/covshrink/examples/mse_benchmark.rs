//! Desk-scale Monte-Carlo benchmark on heavy-tailed multivariate Student-T
//! samples: the proposed plug-in estimator against the Ledoit-Wolf baseline,
//! its clairvoyant variant and the oracle, over a sweep of sample sizes.
//!
//! Run with `cargo run --release --example mse_benchmark [output.csv]`.

use std::path::PathBuf;

use covshrink::estimators::{FixedPointConfig, PilotEstimator};
use covshrink::io::write_mse_csv;
use covshrink::sampling::EllipticalKind;
use covshrink::simulation::{run_mse_experiment, EstimatorId, ExperimentPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = ExperimentPlan {
        p: 20,
        n_values: (10..=100).step_by(10).collect(),
        trials: 100,
        kind: EllipticalKind::StudentT { dof: 3.0 },
        r: 0.7,
        estimators: vec![
            EstimatorId::Proposed,
            EstimatorId::LedoitWolf,
            EstimatorId::LedoitWolfClairvoyant,
            EstimatorId::Oracle,
            EstimatorId::Tyler,
        ],
        master_seed: 2024,
        pilot: PilotEstimator::LedoitWolf,
        config: FixedPointConfig::default(),
    };
    let records = run_mse_experiment(&plan)?;

    println!(
        "{:>4}  {:>10} {:>10} {:>14} {:>10} {:>10}",
        "n", "proposed", "lw", "lw-clairvoyant", "oracle", "tyler"
    );
    for &n in &plan.n_values {
        let cell = |id: EstimatorId| {
            records
                .iter()
                .find(|r| r.estimator == id && r.n == n)
                .map(|r| format!("{:10.3}", r.mse_mean))
                .unwrap_or_else(|| format!("{:>10}", "-")) // absent (n < p)
        };
        println!(
            "{n:>4}  {} {} {:>14} {} {}",
            cell(EstimatorId::Proposed),
            cell(EstimatorId::LedoitWolf),
            cell(EstimatorId::LedoitWolfClairvoyant).trim(),
            cell(EstimatorId::Oracle),
            cell(EstimatorId::Tyler),
        );
    }

    if let Some(path) = std::env::args().nth(1) {
        let path = PathBuf::from(path);
        write_mse_csv(&path, &records)?;
        println!("\nwrote {}", path.display());
    }
    Ok(())
}

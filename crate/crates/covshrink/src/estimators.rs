//! Covariance estimators and shrinkage coefficients: sample covariance, the
//! normalized sample covariance, Tyler's ML fixed point, the regularized
//! (shrinkage) fixed point, the Ledoit-Wolf baseline and its clairvoyant
//! variant, the closed-form oracle coefficient and its plug-in estimate.

use crate::error::{Error, Result};
use crate::numerics::{frobenius_dist_sq, spd_factorize, SymMatrix};
use crate::sampling::{normalize_rows, SampleSet};

/// Output of a covariance estimator. Non-iterative estimators report zero
/// iterations and residual. Iterative estimators that hit the iteration cap
/// return the last iterate with `converged == false`.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub matrix: SymMatrix,
    pub trace_normalized: bool,
    pub iterations_used: usize,
    pub final_residual: f64,
    pub converged: bool,
}

impl CovarianceEstimate {
    fn direct(matrix: SymMatrix, trace_normalized: bool) -> Self {
        CovarianceEstimate {
            matrix,
            trace_normalized,
            iterations_used: 0,
            final_residual: 0.0,
            converged: true,
        }
    }

    /// Rescales the matrix so its trace equals the dimension.
    pub fn into_trace_normalized(self) -> Result<Self> {
        let matrix = self.matrix.trace_normalized()?;
        Ok(CovarianceEstimate {
            matrix,
            trace_normalized: true,
            ..self
        })
    }
}

/// Where a shrinkage coefficient came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShrinkageProvenance {
    Oracle,
    PlugIn,
    Fixed,
}

/// A shrinkage coefficient in (0, 1].
#[derive(Debug, Clone, Copy)]
pub struct ShrinkageCoefficient {
    value: f64,
    provenance: ShrinkageProvenance,
}

impl ShrinkageCoefficient {
    /// Validates the open-closed interval. A value beyond 1 by more than one
    /// part in 1e9 indicates a pilot bug and is rejected rather than clamped;
    /// round-off-level excess is snapped to 1.
    pub fn new(value: f64, provenance: ShrinkageProvenance) -> Result<Self> {
        if !(value > 0.0) || !(value <= 1.0 + 1e-9) {
            return Err(Error::invalid(
                "rho",
                format!("shrinkage coefficient must be in (0, 1], got {value}"),
            ));
        }
        Ok(ShrinkageCoefficient {
            value: value.min(1.0),
            provenance,
        })
    }

    pub fn fixed(value: f64) -> Result<Self> {
        ShrinkageCoefficient::new(value, ShrinkageProvenance::Fixed)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn provenance(&self) -> ShrinkageProvenance {
        self.provenance
    }
}

/// Pilot estimator feeding `Tr(M^2)` into the plug-in coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotEstimator {
    /// The trace-normalized `R = (p/n) sum s_i s_i^T`.
    NormalizedSampleCov,
    /// The trace-normalized Ledoit-Wolf estimate.
    LedoitWolf,
}

/// Stopping rule for the fixed-point iterations.
#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    /// Relative Frobenius change between successive iterates.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Starting matrix; identity when absent. Must be positive definite.
    pub initial: Option<SymMatrix>,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            tolerance: 1e-8,
            max_iterations: 200,
            initial: None,
        }
    }
}

impl FixedPointConfig {
    fn initial_matrix(&self, p: usize) -> Result<SymMatrix> {
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "must be >= 1"));
        }
        match &self.initial {
            None => Ok(SymMatrix::identity(p)),
            Some(m) => {
                if m.dim() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        got: m.dim(),
                    });
                }
                spd_factorize(m)?; // surfaces non-PD initials up front
                m.trace_normalized()
            }
        }
    }
}

/// Sample covariance `(1/n) sum x_i x_i^T` (no trace normalization).
pub fn sample_covariance(samples: &SampleSet) -> CovarianceEstimate {
    let p = samples.dim();
    let inv_n = 1.0 / samples.len() as f64;
    let mut acc = vec![0.0; p * p];
    for row in samples.rows() {
        accumulate_outer(&mut acc, row, inv_n);
    }
    CovarianceEstimate::direct(lower_to_sym(p, &acc), false)
}

/// Normalized sample covariance `R = (p/n) sum s_i s_i^T`; unit-norm rows
/// force `Tr(R) = p` up to round-off.
pub fn normalized_sample_covariance(samples: &SampleSet) -> Result<CovarianceEstimate> {
    let s = normalize_rows(samples)?;
    let p = s.dim();
    let w = p as f64 / s.len() as f64;
    let mut acc = vec![0.0; p * p];
    for row in s.rows() {
        accumulate_outer(&mut acc, row, w);
    }
    Ok(CovarianceEstimate::direct(lower_to_sym(p, &acc), true))
}

/// The closed-form MSE-optimal coefficient for the clairvoyant shrinkage
/// estimator, requiring `Tr(sigma) = p`:
///
/// `rho = [p^2 + (1-2/p) T] / [(p^2 - np - 2n) + (n + 1 + 2(n-1)/p) T]`,
/// with `T = Tr(sigma^2)`.
///
/// Evaluated as `N / (N + n (p+2) (T - p) / p)`, which is algebraically
/// identical (the denominator minus the numerator is `n (p+2) (T-p)/p`) and
/// keeps the value in (0, 1] in floating point, with exactly 1 iff
/// `sigma = I`.
pub fn oracle_rho(sigma: &SymMatrix, n: usize) -> Result<ShrinkageCoefficient> {
    check_rho_inputs(sigma.dim(), n)?;
    let trace = sigma.trace();
    let p = sigma.dim();
    if (trace - p as f64).abs() > 1e-9 {
        return Err(Error::NotTraceNormalized { trace, dim: p });
    }
    let t = sigma.trace_of_square();
    ShrinkageCoefficient::new(rho_from_trace_sq(t, n, p), ShrinkageProvenance::Oracle)
}

/// The moments entering the oracle coefficient, for the weighted scatter
/// built from `n` normalized samples: `m11 = E Tr(C) = Tr(sigma)`,
/// `m12 = E Tr(C sigma) = Tr(sigma^2)` and the closed form
/// `m2 = E Tr(C^2) = (1 - 1/n + 2/(n(1+2/p))) Tr(sigma^2) + Tr^2(sigma)/(n(1+2/p))`.
#[derive(Debug, Clone, Copy)]
pub struct ScatterMoments {
    pub m2: f64,
    pub m11: f64,
    pub m12: f64,
}

pub fn weighted_scatter_moments(sigma: &SymMatrix, n: usize) -> Result<ScatterMoments> {
    check_rho_inputs(sigma.dim(), n)?;
    let p = sigma.dim() as f64;
    let nf = n as f64;
    let tr = sigma.trace();
    let t = sigma.trace_of_square();
    let c = nf * (1.0 + 2.0 / p);
    Ok(ScatterMoments {
        m2: (1.0 - 1.0 / nf + 2.0 / c) * t + tr * tr / c,
        m11: tr,
        m12: t,
    })
}

/// The oracle coefficient computed through the explicit moments,
/// `rho = (m2 - m11 - m12 + Tr(sigma)) / (m2 - 2 m11 + p)`; an independent
/// algebraic route that must agree with [`oracle_rho`].
pub fn oracle_rho_via_moments(sigma: &SymMatrix, n: usize) -> Result<ShrinkageCoefficient> {
    let p = sigma.dim();
    let trace = sigma.trace();
    if (trace - p as f64).abs() > 1e-9 {
        return Err(Error::NotTraceNormalized { trace, dim: p });
    }
    let m = weighted_scatter_moments(sigma, n)?;
    let rho = (m.m2 - m.m11 - m.m12 + trace) / (m.m2 - 2.0 * m.m11 + p as f64);
    ShrinkageCoefficient::new(rho, ShrinkageProvenance::Oracle)
}

/// Plug-in coefficient: the oracle formula with `Tr(sigma^2)` replaced by
/// `Tr(M^2)` for a trace-normalized pilot `M`. The pilot only needs to
/// approximate `Tr(sigma^2)`; for trace-normalized pilots the result is
/// guaranteed to lie in (0, 1].
pub fn plugin_rho(samples: &SampleSet, pilot: PilotEstimator) -> Result<ShrinkageCoefficient> {
    check_rho_inputs(samples.dim(), samples.len())?;
    let pilot_matrix = match pilot {
        PilotEstimator::NormalizedSampleCov => normalized_sample_covariance(samples)?
            .matrix
            .trace_normalized()?,
        PilotEstimator::LedoitWolf => ledoit_wolf(samples)?.matrix,
    };
    let t = pilot_matrix.trace_of_square();
    ShrinkageCoefficient::new(
        rho_from_trace_sq(t, samples.len(), samples.dim()),
        ShrinkageProvenance::PlugIn,
    )
}

fn check_rho_inputs(p: usize, n: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::invalid("p", "shrinkage coefficient needs p >= 2"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "need at least one sample"));
    }
    Ok(())
}

fn rho_from_trace_sq(t: f64, n: usize, p: usize) -> f64 {
    let pf = p as f64;
    let nf = n as f64;
    let num = pf * pf + (1.0 - 2.0 / pf) * t;
    // Tr(M^2) >= Tr(M)^2 / p = p for trace-normalized M (Cauchy-Schwarz);
    // the floor only absorbs round-off below that bound.
    let excess = (t - pf).max(0.0);
    num / (num + nf * (pf + 2.0) * excess / pf)
}

/// The regularized Tyler fixed point: iterate
/// `M_{j+1} = (1-rho) (p/n) sum_i s_i s_i^T / (s_i^T S_j^{-1} s_i) + rho I`
/// followed by `S_{j+1} = M_{j+1} / (Tr(M_{j+1})/p)`, until the relative
/// Frobenius change drops below the tolerance. Works for any `n`, `p`.
pub fn regularized_tyler(
    samples: &SampleSet,
    rho: &ShrinkageCoefficient,
    config: &FixedPointConfig,
) -> Result<CovarianceEstimate> {
    regularized_tyler_observed(samples, rho, config, |_| {})
}

/// [`regularized_tyler`] with a per-iterate callback, so tests can watch the
/// trace-normalization contract on every iterate.
pub fn regularized_tyler_observed(
    samples: &SampleSet,
    rho: &ShrinkageCoefficient,
    config: &FixedPointConfig,
    mut on_iterate: impl FnMut(&SymMatrix),
) -> Result<CovarianceEstimate> {
    let s = normalize_rows(samples)?;
    let p = s.dim();
    let n = s.len();
    let rho = rho.value();
    let scale = (1.0 - rho) * p as f64 / n as f64;
    let mut sigma = config.initial_matrix(p)?;
    let mut resid = f64::INFINITY;
    for iter in 1..=config.max_iterations {
        let next = if rho == 1.0 {
            SymMatrix::identity(p)
        } else {
            let mut m = weighted_scatter(&s, &sigma, scale)?;
            for i in 0..p {
                m.set(i, i, m.get(i, i) + rho);
            }
            m.trace_normalized()?
        };
        resid = frobenius_dist_sq(&next, &sigma)?.sqrt() / sigma.frobenius_norm();
        sigma = next;
        on_iterate(&sigma);
        if resid < config.tolerance {
            return Ok(CovarianceEstimate {
                matrix: sigma,
                trace_normalized: true,
                iterations_used: iter,
                final_residual: resid,
                converged: true,
            });
        }
    }
    Ok(CovarianceEstimate {
        matrix: sigma,
        trace_normalized: true,
        iterations_used: config.max_iterations,
        final_residual: resid,
        converged: false,
    })
}

/// Tyler's ML estimator (the non-regularized fixed point), requiring
/// `n >= p`. The reported residual is the fixed-point equation residual of
/// the trace-normalized iterate.
pub fn tyler_ml(samples: &SampleSet, config: &FixedPointConfig) -> Result<CovarianceEstimate> {
    let p = samples.dim();
    let n = samples.len();
    if n < p {
        return Err(Error::NotEnoughSamples { needed: p, got: n });
    }
    let s = normalize_rows(samples)?;
    let scale = p as f64 / n as f64;
    let mut sigma = config.initial_matrix(p)?;
    let mut resid = f64::INFINITY;
    for iter in 1..=config.max_iterations {
        let mapped = weighted_scatter(&s, &sigma, scale)?;
        resid = frobenius_dist_sq(&mapped, &sigma)?.sqrt() / sigma.frobenius_norm();
        if resid < config.tolerance {
            return Ok(CovarianceEstimate {
                matrix: sigma,
                trace_normalized: true,
                iterations_used: iter,
                final_residual: resid,
                converged: true,
            });
        }
        sigma = mapped.trace_normalized()?;
    }
    Ok(CovarianceEstimate {
        matrix: sigma,
        trace_normalized: true,
        iterations_used: config.max_iterations,
        final_residual: resid,
        converged: false,
    })
}

/// The one-shot clairvoyant estimator
/// `(1-rho) (p/n) sum_i s_i s_i^T / (s_i^T sigma^{-1} s_i) + rho I`
/// using the true covariance in the weights. Not trace-normalized.
pub fn clairvoyant_shrinkage(
    samples: &SampleSet,
    sigma: &SymMatrix,
    rho: f64,
) -> Result<CovarianceEstimate> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(
            "rho",
            format!("must be in [0, 1], got {rho}"),
        ));
    }
    let s = normalize_rows(samples)?;
    let p = s.dim();
    if sigma.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: sigma.dim(),
        });
    }
    spd_factorize(sigma)?;
    let scale = (1.0 - rho) * p as f64 / s.len() as f64;
    let mut m = if rho == 1.0 {
        SymMatrix::zeros(p)
    } else {
        weighted_scatter(&s, sigma, scale)?
    };
    for i in 0..p {
        m.set(i, i, m.get(i, i) + rho);
    }
    Ok(CovarianceEstimate::direct(m, false))
}

/// The spherical-target Ledoit-Wolf baseline, trace-normalized. Shrinks the
/// sample covariance `S` toward `mu I` (`mu = Tr(S)/p`) with intensity
/// `beta^2 / delta^2`, where `delta^2 = ||S - mu I||_F^2` and
/// `beta^2 = min(delta^2, (1/n^2) sum_i ||x_i x_i^T - S||_F^2)`.
pub fn ledoit_wolf(samples: &SampleSet) -> Result<CovarianceEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::NotEnoughSamples { needed: 2, got: n });
    }
    let p = samples.dim();
    let s = sample_covariance(samples).matrix;
    let mu = s.trace() / p as f64;
    let mut delta_sq = 0.0;
    for i in 0..p {
        for j in 0..p {
            let d = s.get(i, j) - if i == j { mu } else { 0.0 };
            delta_sq += d * d;
        }
    }
    if delta_sq < 1e-300 {
        // S is already spherical; mu I trace-normalizes to the identity.
        return Ok(CovarianceEstimate::direct(SymMatrix::identity(p), true));
    }
    // (1/n^2) sum_i ||x_i x_i^T - S||^2 collapses to
    // sum_i ||x_i||^4 / n^2 - Tr(S^2) / n.
    let sum4: f64 = samples
        .rows()
        .map(|r| {
            let q: f64 = r.iter().map(|v| v * v).sum();
            q * q
        })
        .sum();
    let nf = n as f64;
    let beta_bar_sq = (sum4 / (nf * nf) - s.trace_of_square() / nf).max(0.0);
    let beta_sq = beta_bar_sq.min(delta_sq);
    let shrink = beta_sq / delta_sq;
    let mut out = s.scaled(1.0 - shrink);
    for i in 0..p {
        out.set(i, i, out.get(i, i) + shrink * mu);
    }
    Ok(CovarianceEstimate::direct(out.trace_normalized()?, true))
}

/// Ledoit-Wolf on samples rescaled by their known texture realizations
/// `x_i / nu_i` (which are truly Gaussian), trace-normalized.
pub fn clairvoyant_ledoit_wolf(
    samples: &SampleSet,
    textures: &[f64],
) -> Result<CovarianceEstimate> {
    let n = samples.len();
    if textures.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: textures.len(),
        });
    }
    if let Some(bad) = textures.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid(
            "textures",
            format!("must be strictly positive and finite, got {bad}"),
        ));
    }
    let p = samples.dim();
    let mut data = Vec::with_capacity(n * p);
    for (row, nu) in samples.rows().zip(textures) {
        data.extend(row.iter().map(|v| v / nu));
    }
    ledoit_wolf(&SampleSet::from_raw(n, p, data)?)
}

/// `scale * sum_i s_i s_i^T / (s_i^T weights_from^{-1} s_i)` with one
/// factorization shared across the sample loop.
fn weighted_scatter(s: &SampleSet, weights_from: &SymMatrix, scale: f64) -> Result<SymMatrix> {
    let p = s.dim();
    let f = spd_factorize(weights_from)?;
    let mut acc = vec![0.0; p * p];
    for row in s.rows() {
        let q = f.quad_form(row)?;
        accumulate_outer(&mut acc, row, scale / q);
    }
    Ok(lower_to_sym(p, &acc))
}

#[inline]
fn accumulate_outer(acc: &mut [f64], row: &[f64], w: f64) {
    let p = row.len();
    for i in 0..p {
        let wi = w * row[i];
        for j in 0..=i {
            acc[i * p + j] += wi * row[j];
        }
    }
}

fn lower_to_sym(p: usize, acc: &[f64]) -> SymMatrix {
    SymMatrix::from_fn(p, |i, j| acc[j * p + i]) // j <= i in from_fn's sweep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigen_sym;
    use crate::sampling::{ar1_covariance, draw_samples, EllipticalKind, EllipticalSpec, RngSeed};

    fn set(rows: &[&[f64]]) -> SampleSet {
        SampleSet::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn assert_matrix_close(a: &SymMatrix, b: &SymMatrix, tol: f64) {
        let d = frobenius_dist_sq(a, b).unwrap().sqrt();
        assert!(d <= tol, "matrices differ by {d} (tol {tol})");
    }

    fn student_t_fixture(p: usize, r: f64, n: usize, seed: RngSeed) -> (SampleSet, Vec<f64>) {
        let spec = EllipticalSpec::new(
            EllipticalKind::StudentT { dof: 3.0 },
            ar1_covariance(p, r).unwrap(),
        )
        .unwrap();
        draw_samples(&spec, n, seed).unwrap()
    }

    #[test]
    fn sample_covariance_examples() {
        let c = sample_covariance(&set(&[&[1.0, 0.0]]));
        assert_eq!(c.matrix.get(0, 0), 1.0);
        assert_eq!(c.matrix.get(0, 1), 0.0);
        assert_eq!(c.matrix.get(1, 1), 0.0);
        assert!(!c.trace_normalized);

        let c = sample_covariance(&set(&[&[1.0, 0.0], &[-1.0, 0.0]]));
        assert_eq!(c.matrix.get(0, 0), 1.0);
        assert_eq!(c.matrix.get(1, 1), 0.0);
    }

    #[test]
    fn sample_covariance_consistency() {
        let sigma = ar1_covariance(3, 0.7).unwrap();
        let spec = EllipticalSpec::new(EllipticalKind::Gaussian, sigma.clone()).unwrap();
        let (x, _) = draw_samples(&spec, 100_000, RngSeed::new(41, 0)).unwrap();
        let c = sample_covariance(&x);
        assert_matrix_close(&c.matrix, &sigma, 0.05);
    }

    #[test]
    fn normalized_sample_covariance_examples() {
        let c = normalized_sample_covariance(&set(&[&[1.0, 0.0]])).unwrap();
        assert_eq!(c.matrix.get(0, 0), 2.0);
        assert_eq!(c.matrix.get(1, 1), 0.0);

        let c = normalized_sample_covariance(&set(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_matrix_close(&c.matrix, &SymMatrix::identity(2), 1e-15);

        let (x, _) = student_t_fixture(4, 0.6, 37, RngSeed::new(43, 0));
        let c = normalized_sample_covariance(&x).unwrap();
        assert!((c.matrix.trace() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_rho_identity_is_one() {
        for p in [2usize, 3, 10, 50] {
            for n in [1usize, 7, 100] {
                let rho = oracle_rho(&SymMatrix::identity(p), n).unwrap();
                assert_eq!(rho.value(), 1.0, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn oracle_rho_ar1_hand_value() {
        // Straight-line evaluation of the closed-form quotient with
        // T = 3 + 4*0.49 + 2*0.2401 = 5.4402.
        let t = 5.4402_f64;
        let expected = (9.0 + (1.0 - 2.0 / 3.0) * t)
            / ((9.0 - 30.0 - 20.0) + (10.0 + 1.0 + 2.0 * 9.0 / 3.0) * t);
        let sigma = ar1_covariance(3, 0.7).unwrap();
        let rho = oracle_rho(&sigma, 10).unwrap();
        assert!(
            (rho.value() - expected).abs() < 1e-12,
            "{} vs {expected}",
            rho.value()
        );
        assert!((expected - 0.21004).abs() < 5e-6);
    }

    #[test]
    fn oracle_rho_decreases_in_n() {
        let sigma = ar1_covariance(3, 0.7).unwrap();
        let r5 = oracle_rho(&sigma, 5).unwrap().value();
        let r50 = oracle_rho(&sigma, 50).unwrap().value();
        let r500 = oracle_rho(&sigma, 500).unwrap().value();
        assert!(r5 > r50 && r50 > r500, "{r5} {r50} {r500}");
    }

    #[test]
    fn oracle_rho_below_one_unless_identity() {
        use rand::Rng;
        let mut rng = RngSeed::new(101, 0).rng();
        for _ in 0..20 {
            let p = rng.random_range(2..=20usize);
            let a: Vec<f64> = (0..p * p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let m = SymMatrix::from_fn(p, |i, j| {
                (0..p).map(|k| a[i * p + k] * a[j * p + k]).sum::<f64>()
                    + if i == j { 0.1 } else { 0.0 }
            })
            .trace_normalized()
            .unwrap();
            let rho = oracle_rho(&m, rng.random_range(1..=50usize))
                .unwrap()
                .value();
            assert!(
                rho > 0.0 && rho < 1.0,
                "rho = {rho} for a non-identity matrix"
            );
        }
    }

    #[test]
    fn shrinkage_coefficient_bounds() {
        assert!(ShrinkageCoefficient::fixed(0.0).is_err());
        assert!(ShrinkageCoefficient::fixed(-0.2).is_err());
        assert!(ShrinkageCoefficient::fixed(1.5).is_err());
        assert!(ShrinkageCoefficient::fixed(f64::NAN).is_err());
        // round-off past 1 snaps back to exactly 1
        let r = ShrinkageCoefficient::fixed(1.0 + 1e-12).unwrap();
        assert_eq!(r.value(), 1.0);
    }

    #[test]
    fn oracle_rho_rejects_unnormalized() {
        let sigma = ar1_covariance(3, 0.7).unwrap().scaled(2.0);
        assert!(matches!(
            oracle_rho(&sigma, 10),
            Err(Error::NotTraceNormalized { .. })
        ));
    }

    #[test]
    fn moments_route_matches_oracle() {
        let sigma = ar1_covariance(3, 0.7).unwrap();
        let a = oracle_rho(&sigma, 10).unwrap().value();
        let b = oracle_rho_via_moments(&sigma, 10).unwrap().value();
        assert!((a - b).abs() < 1e-10);
        assert_eq!(
            oracle_rho_via_moments(&SymMatrix::identity(5), 20)
                .unwrap()
                .value(),
            1.0
        );
    }

    #[test]
    fn m2_closed_form_value() {
        // sigma = I, p = 10, n = 20:
        // (1 - 1/20 + 2/24) * 10 + 100/24 = 14.5
        let m = weighted_scatter_moments(&SymMatrix::identity(10), 20).unwrap();
        assert!((m.m2 - 14.5).abs() < 1e-12, "m2 = {}", m.m2);
        assert_eq!(m.m11, 10.0);
        assert_eq!(m.m12, 10.0);
    }

    #[test]
    fn plugin_rho_identity_pilot_is_one() {
        let x = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let rho = plugin_rho(&x, PilotEstimator::NormalizedSampleCov).unwrap();
        assert_eq!(rho.value(), 1.0);
        assert_eq!(rho.provenance(), ShrinkageProvenance::PlugIn);
    }

    #[test]
    #[allow(clippy::excessive_precision)] // golden literal kept verbatim
    fn plugin_rho_fixture_matches_moment_formula() {
        // Fixture: p=3 AR(1) r=0.7, Student-T d=3, n=50, seed 42. The golden
        // value is the closed-form quotient evaluated on Tr(R^2) of the
        // computed pilot, written out independently of the implementation.
        let (x, _) = student_t_fixture(3, 0.7, 50, RngSeed::new(42, 0));
        let pilot = normalized_sample_covariance(&x)
            .unwrap()
            .matrix
            .trace_normalized()
            .unwrap();
        let t: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| pilot.get(i, j) * pilot.get(i, j))
            .sum();
        let (p, n) = (3.0_f64, 50.0_f64);
        let expected = (p * p + (1.0 - 2.0 / p) * t)
            / ((p * p - n * p - 2.0 * n) + (n + 1.0 + 2.0 * (n - 1.0) / p) * t);
        let rho = plugin_rho(&x, PilotEstimator::NormalizedSampleCov).unwrap();
        assert!((rho.value() - expected).abs() < 1e-12);
        // golden literal, frozen from the evaluation above
        assert!(
            (rho.value() - 0.15164851749997349).abs() < 1e-12,
            "plugin rho drifted: {}",
            rho.value()
        );
    }

    #[test]
    fn regularized_tyler_rho_one_is_identity() {
        let (x, _) = student_t_fixture(4, 0.7, 9, RngSeed::new(47, 0));
        let est = regularized_tyler(
            &x,
            &ShrinkageCoefficient::fixed(1.0).unwrap(),
            &FixedPointConfig::default(),
        )
        .unwrap();
        assert_matrix_close(&est.matrix, &SymMatrix::identity(4), 0.0);
        assert!(est.converged);
        assert_eq!(est.iterations_used, 1);
    }

    #[test]
    fn regularized_tyler_p1_is_one() {
        let x = set(&[&[3.0], &[-0.5], &[11.0]]);
        let est = regularized_tyler(
            &x,
            &ShrinkageCoefficient::fixed(0.4).unwrap(),
            &FixedPointConfig::default(),
        )
        .unwrap();
        assert_eq!(est.matrix.get(0, 0), 1.0);
    }

    #[test]
    fn regularized_tyler_symmetric_fixed_point() {
        let x = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let est = regularized_tyler(
            &x,
            &ShrinkageCoefficient::fixed(0.5).unwrap(),
            &FixedPointConfig::default(),
        )
        .unwrap();
        assert_matrix_close(&est.matrix, &SymMatrix::identity(2), 1e-15);
        assert_eq!(est.iterations_used, 1);
    }

    #[test]
    fn regularized_tyler_iterates_keep_trace() {
        let (x, _) = student_t_fixture(6, 0.7, 4, RngSeed::new(53, 0));
        let mut max_dev: f64 = 0.0;
        let est = regularized_tyler_observed(
            &x,
            &ShrinkageCoefficient::fixed(0.3).unwrap(),
            &FixedPointConfig::default(),
            |m| max_dev = max_dev.max((m.trace() - 6.0).abs()),
        )
        .unwrap();
        assert!(est.converged);
        assert!(max_dev < 1e-10, "trace deviation {max_dev}");
    }

    #[test]
    fn regularized_tyler_flags_iteration_cap() {
        let (x, _) = student_t_fixture(8, 0.7, 4, RngSeed::new(59, 0));
        let est = regularized_tyler(
            &x,
            &ShrinkageCoefficient::fixed(0.2).unwrap(),
            &FixedPointConfig {
                tolerance: 1e-8,
                max_iterations: 2,
                initial: None,
            },
        )
        .unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations_used, 2);
        assert!(est.final_residual >= 1e-8);
    }

    #[test]
    fn one_more_step_stays_within_tolerance() {
        let (x, _) = student_t_fixture(5, 0.7, 20, RngSeed::new(61, 0));
        let cfg = FixedPointConfig::default();
        let rho = ShrinkageCoefficient::fixed(0.4).unwrap();
        let est = regularized_tyler(&x, &rho, &cfg).unwrap();
        assert!(est.converged);
        let again = regularized_tyler(
            &x,
            &rho,
            &FixedPointConfig {
                tolerance: f64::MIN_POSITIVE,
                max_iterations: 1,
                initial: Some(est.matrix.clone()),
            },
        )
        .unwrap();
        let change = frobenius_dist_sq(&est.matrix, &again.matrix)
            .unwrap()
            .sqrt()
            / est.matrix.frobenius_norm();
        assert!(change < cfg.tolerance, "one more step moved {change}");
    }

    #[test]
    fn tyler_ml_examples() {
        let est = tyler_ml(
            &set(&[&[1.0, 0.0], &[0.0, 1.0]]),
            &FixedPointConfig::default(),
        )
        .unwrap();
        assert_matrix_close(&est.matrix, &SymMatrix::identity(2), 1e-15);

        let est = tyler_ml(&set(&[&[2.0], &[5.0]]), &FixedPointConfig::default()).unwrap();
        assert_eq!(est.matrix.get(0, 0), 1.0);

        assert!(matches!(
            tyler_ml(&set(&[&[1.0, 2.0, 3.0]]), &FixedPointConfig::default()),
            Err(Error::NotEnoughSamples { needed: 3, got: 1 })
        ));
    }

    #[test]
    fn tyler_ml_consistency_smoke() {
        let sigma = ar1_covariance(5, 0.7).unwrap();
        let cfg = FixedPointConfig {
            tolerance: 1e-10,
            ..FixedPointConfig::default()
        };
        for t in 0..3 {
            let (x, _) = student_t_fixture(5, 0.7, 500, RngSeed::new(67, t));
            let est = tyler_ml(&x, &cfg).unwrap();
            assert!(est.converged);
            assert!(est.final_residual < 1e-8);
            let d = frobenius_dist_sq(&est.matrix, &sigma).unwrap().sqrt();
            assert!(d < 0.5, "trial {t}: distance {d}");
        }
    }

    #[test]
    fn texture_invariance_of_tyler_estimators() {
        let (x, _) = student_t_fixture(4, 0.7, 30, RngSeed::new(71, 0));
        let mut rng_scale = RngSeed::new(71, 1).rng();
        use rand::Rng;
        let scaled_rows: Vec<Vec<f64>> = x
            .rows()
            .map(|r| {
                let c: f64 = rng_scale.random_range(0.01..100.0);
                r.iter().map(|v| v * c).collect()
            })
            .collect();
        let xs = SampleSet::from_rows(&scaled_rows).unwrap();

        let rho = ShrinkageCoefficient::fixed(0.4).unwrap();
        let cfg = FixedPointConfig::default();
        let a = regularized_tyler(&x, &rho, &cfg).unwrap();
        let b = regularized_tyler(&xs, &rho, &cfg).unwrap();
        assert_matrix_close(&a.matrix, &b.matrix, 1e-12);

        let a = tyler_ml(&x, &cfg).unwrap();
        let b = tyler_ml(&xs, &cfg).unwrap();
        assert_matrix_close(&a.matrix, &b.matrix, 1e-12);
    }

    #[test]
    fn rotation_equivariance() {
        // orthogonal Q from the eigenvectors of an SPD matrix
        let base = ar1_covariance(5, 0.45).unwrap();
        let q = eigen_sym(&base).unwrap();
        let (x, _) = student_t_fixture(5, 0.7, 40, RngSeed::new(73, 0));
        let rotated_rows: Vec<Vec<f64>> = x
            .rows()
            .map(|r| {
                (0..5)
                    .map(|i| (0..5).map(|j| q.vector_entry(i, j) * r[j]).sum())
                    .collect()
            })
            .collect();
        let xr = SampleSet::from_rows(&rotated_rows).unwrap();

        let rho = ShrinkageCoefficient::fixed(0.5).unwrap();
        let cfg = FixedPointConfig {
            tolerance: 1e-12,
            max_iterations: 400,
            initial: None,
        };
        for (est_plain, est_rot) in [
            (
                regularized_tyler(&x, &rho, &cfg).unwrap(),
                regularized_tyler(&xr, &rho, &cfg).unwrap(),
            ),
            (sample_covariance(&x), sample_covariance(&xr)),
        ] {
            // Q * est(x) * Q^T
            let m = est_plain.matrix;
            let conj = SymMatrix::from_fn(5, |a, b| {
                (0..5)
                    .map(|i| {
                        (0..5)
                            .map(|j| q.vector_entry(a, i) * m.get(i, j) * q.vector_entry(b, j))
                            .sum::<f64>()
                    })
                    .sum()
            });
            assert_matrix_close(&est_rot.matrix, &conj, 1e-8);
        }
    }

    #[test]
    fn clairvoyant_examples() {
        let sigma = ar1_covariance(2, 0.5).unwrap();
        let x = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let est = clairvoyant_shrinkage(&x, &sigma, 1.0).unwrap();
        assert_matrix_close(&est.matrix, &SymMatrix::identity(2), 0.0);
        assert!(!est.trace_normalized);

        let est = clairvoyant_shrinkage(&x, &SymMatrix::identity(2), 0.0).unwrap();
        assert_matrix_close(&est.matrix, &SymMatrix::identity(2), 1e-15);
    }

    #[test]
    fn clairvoyant_expectation() {
        // E{(1-rho) C + rho I} = (1-rho) sigma + rho I, since E{C} = sigma.
        let sigma = ar1_covariance(5, 0.7).unwrap();
        let spec =
            EllipticalSpec::new(EllipticalKind::StudentT { dof: 3.0 }, sigma.clone()).unwrap();
        let rho = 0.3;
        let mut mean = SymMatrix::zeros(5);
        let trials = 10_000;
        for t in 0..trials {
            let (x, _) = draw_samples(&spec, 10, RngSeed::new(79, t)).unwrap();
            let est = clairvoyant_shrinkage(&x, &sigma, rho).unwrap();
            for i in 0..5 {
                for j in i..5 {
                    mean.set(i, j, mean.get(i, j) + est.matrix.get(i, j) / trials as f64);
                }
            }
        }
        let want = SymMatrix::from_fn(5, |i, j| {
            (1.0 - rho) * sigma.get(i, j) + if i == j { rho } else { 0.0 }
        });
        assert_matrix_close(&mean, &want, 0.05);
    }

    #[test]
    fn ledoit_wolf_identical_samples() {
        let x = set(&[&[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0]]);
        let est = ledoit_wolf(&x).unwrap();
        assert_eq!(est.matrix.get(0, 0), 2.0);
        assert_eq!(est.matrix.get(1, 1), 0.0);
        assert_eq!(est.matrix.get(0, 1), 0.0);
    }

    #[test]
    fn ledoit_wolf_spherical_degenerate() {
        let x = set(&[&[1.0, 1.0], &[1.0, -1.0], &[-1.0, 1.0], &[-1.0, -1.0]]);
        let est = ledoit_wolf(&x).unwrap();
        assert_matrix_close(&est.matrix, &SymMatrix::identity(2), 0.0);
    }

    #[test]
    fn ledoit_wolf_fixture_matches_straight_line_oracle() {
        let (x, _) = student_t_fixture(3, 0.7, 50, RngSeed::new(42, 0));
        // independent straight-line re-implementation of the two formulas
        let p = 3usize;
        let n = 50usize;
        let mut s = vec![vec![0.0_f64; p]; p];
        for row in x.rows() {
            for i in 0..p {
                for j in 0..p {
                    s[i][j] += row[i] * row[j] / n as f64;
                }
            }
        }
        let mu = (0..p).map(|i| s[i][i]).sum::<f64>() / p as f64;
        let mut delta_sq = 0.0;
        for i in 0..p {
            for j in 0..p {
                let d = s[i][j] - if i == j { mu } else { 0.0 };
                delta_sq += d * d;
            }
        }
        let mut dev_sum = 0.0;
        for row in x.rows() {
            for i in 0..p {
                for j in 0..p {
                    let d = row[i] * row[j] - s[i][j];
                    dev_sum += d * d;
                }
            }
        }
        let beta_sq = (dev_sum / (n as f64 * n as f64)).min(delta_sq);
        let shrink = beta_sq / delta_sq;
        let mut expect = vec![vec![0.0_f64; p]; p];
        for i in 0..p {
            for j in 0..p {
                expect[i][j] = (1.0 - shrink) * s[i][j] + if i == j { shrink * mu } else { 0.0 };
            }
        }
        let tr: f64 = (0..p).map(|i| expect[i][i]).sum();
        for row in expect.iter_mut() {
            for v in row.iter_mut() {
                *v *= p as f64 / tr;
            }
        }

        let est = ledoit_wolf(&x).unwrap();
        for i in 0..p {
            for j in 0..p {
                assert!(
                    (est.matrix.get(i, j) - expect[i][j]).abs() < 1e-12,
                    "entry ({i},{j})"
                );
            }
        }
        // golden literal for the top-left entry, frozen from the oracle
        assert!((est.matrix.get(0, 0) - 1.0357236077991385).abs() < 1e-12);
    }

    #[test]
    fn clairvoyant_lw_gaussian_equals_plain() {
        let spec =
            EllipticalSpec::new(EllipticalKind::Gaussian, ar1_covariance(4, 0.6).unwrap()).unwrap();
        let (x, nu) = draw_samples(&spec, 25, RngSeed::new(83, 0)).unwrap();
        let a = ledoit_wolf(&x).unwrap();
        let b = clairvoyant_ledoit_wolf(&x, &nu).unwrap();
        assert_matrix_close(&a.matrix, &b.matrix, 0.0);
    }

    #[test]
    fn clairvoyant_lw_rejects_bad_textures() {
        let x = set(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(matches!(
            clairvoyant_ledoit_wolf(&x, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            clairvoyant_ledoit_wolf(&x, &[1.0, 0.0]),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn clairvoyant_lw_beats_plain_lw_on_heavy_tails() {
        let sigma = ar1_covariance(20, 0.7).unwrap();
        let spec =
            EllipticalSpec::new(EllipticalKind::StudentT { dof: 3.0 }, sigma.clone()).unwrap();
        let trials = 100;
        let (mut mse_lw, mut mse_lwc) = (0.0, 0.0);
        for t in 0..trials {
            let (x, nu) = draw_samples(&spec, 40, RngSeed::new(42, t)).unwrap();
            let lw = ledoit_wolf(&x).unwrap();
            let lwc = clairvoyant_ledoit_wolf(&x, &nu).unwrap();
            mse_lw += frobenius_dist_sq(&lw.matrix, &sigma).unwrap();
            mse_lwc += frobenius_dist_sq(&lwc.matrix, &sigma).unwrap();
        }
        assert!(
            mse_lwc < mse_lw,
            "clairvoyant {mse_lwc} should beat plain {mse_lw}"
        );
    }

    #[test]
    fn shrinkage_output_is_strictly_pd() {
        // rho > 0 forces min eigenvalue > 0 even with n << p
        let (x, _) = student_t_fixture(12, 0.7, 3, RngSeed::new(97, 0));
        let rho = plugin_rho(&x, PilotEstimator::NormalizedSampleCov).unwrap();
        let est = regularized_tyler(&x, &rho, &FixedPointConfig::default()).unwrap();
        let eig = eigen_sym(&est.matrix).unwrap();
        assert!(*eig.values.last().unwrap() > 0.0);
    }

    #[test]
    fn uniqueness_across_initials() {
        use rand::Rng;
        let (x, _) = student_t_fixture(10, 0.7, 5, RngSeed::new(89, 0));
        let cfg_base = FixedPointConfig {
            tolerance: 1e-12,
            max_iterations: 500,
            initial: None,
        };
        let rho = ShrinkageCoefficient::fixed(0.35).unwrap();
        let reference = regularized_tyler(&x, &rho, &cfg_base).unwrap();
        assert!(reference.converged);
        let mut rng = RngSeed::new(89, 1).rng();
        for _ in 0..5 {
            let a: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
            let init = SymMatrix::from_fn(10, |i, j| {
                (0..10).map(|k| a[i * 10 + k] * a[j * 10 + k]).sum::<f64>()
                    + if i == j { 0.5 } else { 0.0 }
            });
            let est = regularized_tyler(
                &x,
                &rho,
                &FixedPointConfig {
                    initial: Some(init),
                    ..cfg_base.clone()
                },
            )
            .unwrap();
            assert!(est.converged);
            assert_matrix_close(&reference.matrix, &est.matrix, 1e-8);
        }
    }
}

//! Elliptical sample generation (`x = nu * u`), structured covariances,
//! unit-sphere normalization and synthetic anomaly injection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{spd_factorize, SymMatrix};

/// Rows with Euclidean norm below this cannot be projected onto the sphere.
const ZERO_ROW_TOL: f64 = 1e-300;

/// Chi-square draws use the sum of `d` squared standard normals for integer
/// `d` up to this bound, and gamma sampling beyond it.
const CHI_SQUARE_SUM_LIMIT: f64 = 256.0;

/// Seed for a reproducible generator: `(master, stream)` fully determines
/// the sequence. Streams are cheap; per-trial streams are derived as
/// `stream = trial index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed {
    pub master: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(master: u64, stream: u64) -> Self {
        RngSeed { master, stream }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        RngSeed {
            master: self.master,
            stream,
        }
    }

    /// Instantiates the pinned generator (ChaCha12, rand_chacha 0.9).
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// The elliptical families exercised by the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllipticalKind {
    Gaussian,
    StudentT { dof: f64 },
}

/// A zero-mean elliptical law `x = nu * u` with `u ~ N(0, sigma)`,
/// `Tr(sigma) = p`. The Gaussian kind fixes `nu = 1`; Student-T draws
/// `nu = sqrt(dof / chi2_dof)`.
#[derive(Debug, Clone)]
pub struct EllipticalSpec {
    kind: EllipticalKind,
    sigma: SymMatrix,
}

impl EllipticalSpec {
    pub fn new(kind: EllipticalKind, sigma: SymMatrix) -> Result<Self> {
        if let EllipticalKind::StudentT { dof } = kind {
            if !(dof > 0.0) || !dof.is_finite() {
                return Err(Error::invalid(
                    "dof",
                    format!("must be positive, got {dof}"),
                ));
            }
        }
        let p = sigma.dim();
        let trace = sigma.trace();
        if (trace - p as f64).abs() > 1e-9 {
            return Err(Error::NotTraceNormalized { trace, dim: p });
        }
        Ok(EllipticalSpec { kind, sigma })
    }

    pub fn kind(&self) -> EllipticalKind {
        self.kind
    }

    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }
}

/// An `n x p` set of observation rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    p: usize,
    data: Vec<f64>, // row-major
}

impl SampleSet {
    pub fn from_raw(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::invalid("shape", "n and p must be >= 1"));
        }
        if data.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: data.len(),
            });
        }
        Ok(SampleSet { n, p, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("rows", "need at least one row"));
        }
        let p = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * p);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::invalid(
                    "rows",
                    format!("row {i} has length {}, expected {p}", r.len()),
                ));
            }
            data.extend_from_slice(r);
        }
        SampleSet::from_raw(rows.len(), p, data)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Keeps the rows at `indices`, in order.
    pub fn select(&self, indices: &[usize]) -> Result<SampleSet> {
        let mut data = Vec::with_capacity(indices.len() * self.p);
        for &i in indices {
            if i >= self.n {
                return Err(Error::invalid("indices", format!("row {i} out of range")));
            }
            data.extend_from_slice(self.row(i));
        }
        SampleSet::from_raw(indices.len(), self.p, data)
    }
}

/// AR(1) covariance: `entry(i, j) = r^|i-j|`. Trace is exactly `p`.
pub fn ar1_covariance(p: usize, r: f64) -> Result<SymMatrix> {
    if p == 0 {
        return Err(Error::invalid("p", "dimension must be >= 1"));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::invalid("r", format!("must be in [0, 1), got {r}")));
    }
    Ok(SymMatrix::from_fn(p, |i, j| r.powi((j - i) as i32)))
}

enum TextureSampler {
    Unit,
    /// `nu = sqrt(dof / chi2)` with the chi-square drawn as a sum of `dof`
    /// squared standard normals (small integer dof).
    SumOfSquares {
        dof: usize,
    },
    /// Same law, gamma-based chi-square draw (large or fractional dof).
    ChiSq {
        dof: f64,
        dist: ChiSquared<f64>,
    },
}

impl TextureSampler {
    fn new(kind: EllipticalKind) -> Self {
        match kind {
            EllipticalKind::Gaussian => TextureSampler::Unit,
            EllipticalKind::StudentT { dof } => {
                if dof.fract() == 0.0 && dof <= CHI_SQUARE_SUM_LIMIT {
                    TextureSampler::SumOfSquares { dof: dof as usize }
                } else {
                    TextureSampler::ChiSq {
                        dof,
                        dist: ChiSquared::new(dof).expect("dof validated"),
                    }
                }
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> f64 {
        match self {
            TextureSampler::Unit => 1.0,
            TextureSampler::SumOfSquares { dof } => {
                let chi2: f64 = (0..*dof)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        z * z
                    })
                    .sum();
                (*dof as f64 / chi2).sqrt()
            }
            TextureSampler::ChiSq { dof, dist } => (dof / dist.sample(rng)).sqrt(),
        }
    }
}

/// Draws `n` i.i.d. rows `x_i = nu_i * u_i` and returns the samples together
/// with the texture realizations (the clairvoyant Ledoit-Wolf baseline needs
/// them). Deterministic given the seed.
pub fn draw_samples(
    spec: &EllipticalSpec,
    n: usize,
    seed: RngSeed,
) -> Result<(SampleSet, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one sample"));
    }
    let p = spec.dim();
    let chol = spd_factorize(spec.sigma())?;
    let sampler = TextureSampler::new(spec.kind());
    let mut rng = seed.rng();

    let mut data = Vec::with_capacity(n * p);
    let mut textures = Vec::with_capacity(n);
    let mut g = vec![0.0; p];
    for _ in 0..n {
        for gi in g.iter_mut() {
            *gi = rng.sample(StandardNormal);
        }
        let u = chol.mul_lower(&g);
        let nu = sampler.draw(&mut rng);
        textures.push(nu);
        data.extend(u.iter().map(|ui| nu * ui));
    }
    Ok((SampleSet { n, p, data }, textures))
}

/// Projects every row onto the unit sphere: `s_i = x_i / ||x_i||`, which
/// removes the texture term.
pub fn normalize_rows(samples: &SampleSet) -> Result<SampleSet> {
    let mut data = Vec::with_capacity(samples.data.len());
    for (i, row) in samples.rows().enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < ZERO_ROW_TOL {
            return Err(Error::ZeroSample { row: i });
        }
        data.extend(row.iter().map(|v| v / norm));
    }
    Ok(SampleSet {
        n: samples.n,
        p: samples.p,
        data,
    })
}

/// Adds an additive burst (uniform random direction, Euclidean norm
/// `magnitude * median row norm`) to a Bernoulli(`rate`) subset of rows.
/// Returns the modified set and 0/1 labels marking the touched rows.
pub fn inject_anomalies(
    samples: &SampleSet,
    rate: f64,
    magnitude: f64,
    seed: RngSeed,
) -> Result<(SampleSet, Vec<u8>)> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::invalid(
            "rate",
            format!("must be in (0, 1), got {rate}"),
        ));
    }
    if !(magnitude >= 0.0) {
        return Err(Error::invalid(
            "magnitude",
            format!("must be nonnegative, got {magnitude}"),
        ));
    }
    let mut norms: Vec<f64> = samples
        .rows()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    norms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if norms.len() % 2 == 1 {
        norms[norms.len() / 2]
    } else {
        0.5 * (norms[norms.len() / 2 - 1] + norms[norms.len() / 2])
    };
    let burst_norm = magnitude * median;

    let mut rng = seed.rng();
    // draw all labels first so the label pattern depends only on (seed, n)
    let labels: Vec<u8> = (0..samples.n)
        .map(|_| u8::from(rng.random::<f64>() < rate))
        .collect();

    let mut data = samples.data.clone();
    let p = samples.p;
    for (i, &lab) in labels.iter().enumerate() {
        if lab == 0 {
            continue;
        }
        let dir = random_unit_vector(p, &mut rng);
        for (d, x) in dir.iter().zip(&mut data[i * p..(i + 1) * p]) {
            *x += burst_norm * d;
        }
    }
    Ok((
        SampleSet {
            n: samples.n,
            p,
            data,
        },
        labels,
    ))
}

fn random_unit_vector(p: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..p)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

//! Covariance-based anomaly detection: local-mean detrending, the
//! Mahalanobis test statistic `t_k = y_k^T Sigma^{-1} y_k`, and ROC/AUC
//! evaluation.

use crate::error::{Error, Result};
use crate::estimators::CovarianceEstimate;
use crate::numerics::spd_factorize;
use crate::sampling::{RngSeed, SampleSet};

/// A `T x p` multichannel series, row `k` the measurement vector at time
/// `k`, with optional 0/1 ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSet {
    t_len: usize,
    p: usize,
    data: Vec<f64>, // row-major
    labels: Option<Vec<u8>>,
}

impl TimeSeriesSet {
    pub fn new(t_len: usize, p: usize, data: Vec<f64>, labels: Option<Vec<u8>>) -> Result<Self> {
        if t_len == 0 || p == 0 {
            return Err(Error::invalid("shape", "T and p must be >= 1"));
        }
        if data.len() != t_len * p {
            return Err(Error::DimensionMismatch {
                expected: t_len * p,
                got: data.len(),
            });
        }
        if let Some(l) = &labels {
            if l.len() != t_len {
                return Err(Error::DimensionMismatch {
                    expected: t_len,
                    got: l.len(),
                });
            }
        }
        Ok(TimeSeriesSet {
            t_len,
            p,
            data,
            labels,
        })
    }

    pub fn from_samples(samples: &SampleSet, labels: Option<Vec<u8>>) -> Result<Self> {
        TimeSeriesSet::new(
            samples.len(),
            samples.dim(),
            samples.as_slice().to_vec(),
            labels,
        )
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.p..(k + 1) * self.p]
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// All rows as a sample set (e.g. to feed an estimator).
    pub fn to_samples(&self) -> Result<SampleSet> {
        SampleSet::from_raw(self.t_len, self.p, self.data.clone())
    }

    /// The rows at `indices` as a sample set.
    pub fn select(&self, indices: &[usize]) -> Result<SampleSet> {
        self.to_samples()?.select(indices)
    }
}

/// Subtracts the local mean over the window `[k-m, k+m]`, truncated to valid
/// indices at the boundaries, from every time slice. Labels pass through.
pub fn detrend(series: &TimeSeriesSet, m: usize) -> Result<TimeSeriesSet> {
    if m == 0 {
        return Err(Error::invalid("m", "window half-width must be >= 1"));
    }
    let t = series.t_len;
    let p = series.p;
    // per-channel prefix sums: pre[k+1][c] = sum of rows 0..=k
    let mut pre = vec![0.0; (t + 1) * p];
    for k in 0..t {
        let row = series.row(k);
        for c in 0..p {
            pre[(k + 1) * p + c] = pre[k * p + c] + row[c];
        }
    }
    let mut data = Vec::with_capacity(t * p);
    for k in 0..t {
        let lo = k.saturating_sub(m);
        let hi = (k + m).min(t - 1);
        let count = (hi - lo + 1) as f64;
        let row = series.row(k);
        for c in 0..p {
            let window_sum = pre[(hi + 1) * p + c] - pre[lo * p + c];
            data.push(row[c] - window_sum / count);
        }
    }
    TimeSeriesSet::new(t, p, data, series.labels.clone())
}

/// The test statistic `t_k = y_k^T Sigma^{-1} y_k` for every time slice,
/// with one factorization shared across the series.
pub fn score(series: &TimeSeriesSet, cov: &CovarianceEstimate) -> Result<Vec<f64>> {
    if cov.matrix.dim() != series.p {
        return Err(Error::DimensionMismatch {
            expected: series.p,
            got: cov.matrix.dim(),
        });
    }
    let f = spd_factorize(&cov.matrix)?;
    (0..series.t_len)
        .map(|k| f.quad_form(series.row(k)))
        .collect()
}

/// One operating point of a ROC curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// A ROC curve swept over all distinct score values (ties grouped), with
/// +/- infinity sentinels, and its trapezoidal AUC.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Builds the ROC curve for `scores` against 0/1 `labels`. A slice is
/// declared anomalous when its score strictly exceeds the threshold.
pub fn roc(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("scores", "NaN score"));
    }
    let pos = labels.iter().filter(|&&l| l != 0).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        // the point at this threshold counts only scores strictly above it
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
        // absorb the whole tie group
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] != 0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
    }
    points.push(RocPoint {
        threshold: f64::NEG_INFINITY,
        fpr: 1.0,
        tpr: 1.0,
    });

    let mut auc = 0.0;
    for w in points.windows(2) {
        auc += (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0;
    }
    Ok(RocCurve { points, auc })
}

/// How the training slices for covariance estimation are chosen.
#[derive(Debug, Clone, Copy)]
pub enum TrainingSelection {
    /// Uniform subsample without replacement (unsupervised mode).
    Subsample { count: usize, seed: RngSeed },
    /// A user-supplied inclusive index range (supervised mode).
    Range { start: usize, end: usize },
}

/// Resolves a training selection to sorted row indices.
pub fn training_indices(t_len: usize, selection: TrainingSelection) -> Result<Vec<usize>> {
    match selection {
        TrainingSelection::Subsample { count, seed } => {
            if count == 0 || count > t_len {
                return Err(Error::invalid(
                    "train_size",
                    format!("must be in 1..={t_len}, got {count}"),
                ));
            }
            use rand::Rng;
            let mut rng = seed.rng();
            // partial Fisher-Yates
            let mut pool: Vec<usize> = (0..t_len).collect();
            for i in 0..count {
                let j = rng.random_range(i..t_len);
                pool.swap(i, j);
            }
            let mut chosen = pool[..count].to_vec();
            chosen.sort_unstable();
            Ok(chosen)
        }
        TrainingSelection::Range { start, end } => {
            if start > end || end >= t_len {
                return Err(Error::invalid(
                    "train_range",
                    format!("need start <= end < {t_len}, got {start}:{end}"),
                ));
            }
            Ok((start..=end).collect())
        }
    }
}

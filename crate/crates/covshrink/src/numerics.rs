//! Dense symmetric linear algebra: storage-enforced symmetric matrices,
//! Cholesky factorization, quadratic forms and a Jacobi eigensolver.
//!
//! Everything here is sized for the estimators in this crate (p up to a few
//! hundred); no attempt is made at general-purpose or sparse linear algebra.

use crate::error::{Error, Result};

/// Cholesky pivots at or below `PD_PIVOT_REL_TOL * max_diagonal` are treated
/// as a loss of positive definiteness rather than round-off luck.
const PD_PIVOT_REL_TOL: f64 = 1e-14;

/// Sweep cap for the cyclic Jacobi eigensolver.
const JACOBI_MAX_SWEEPS: usize = 48;

/// A symmetric `p x p` matrix. Symmetry is enforced by the storage API:
/// every mutation writes both `(i, j)` and `(j, i)`, so
/// `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>, // row-major dim*dim
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymMatrix dimension must be >= 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from `f`, evaluated once per unordered index pair
    /// `i <= j` and mirrored, so the result is symmetric no matter what `f`
    /// does.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Writes both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Trace of the matrix square, `Tr(M^2) = sum_ij M_ij^2` for symmetric M.
    pub fn trace_of_square(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// Rescales so that the trace equals the dimension.
    pub fn trace_normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t.abs() < 1e-300 {
            return Err(Error::DegenerateData(
                "cannot trace-normalize a matrix with zero trace".into(),
            ));
        }
        Ok(self.scaled(self.dim as f64 / t))
    }

    /// y = M v.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }
}

/// Squared Frobenius distance `sum_ij (A_ij - B_ij)^2`.
pub fn frobenius_dist_sq(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum())
}

/// Lower-triangular Cholesky factor of a positive definite matrix:
/// `source = factor * factor^T`.
#[derive(Debug, Clone)]
pub struct SpdFactorization {
    dim: usize,
    lower: Vec<f64>, // row-major dim*dim, strict upper triangle zero
}

/// Factorizes a symmetric positive definite matrix.
///
/// Fails with [`Error::NotPositiveDefinite`] when a pivot falls at or below
/// `1e-14 * max_diagonal`, which signals a degenerate covariance.
pub fn spd_factorize(m: &SymMatrix) -> Result<SpdFactorization> {
    let p = m.dim;
    let max_diag = (0..p)
        .map(|i| m.get(i, i))
        .fold(f64::NEG_INFINITY, f64::max);
    let pivot_floor = PD_PIVOT_REL_TOL * max_diag.max(0.0);
    let mut lower = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= lower[i * p + k] * lower[j * p + k];
            }
            if i == j {
                if s <= pivot_floor {
                    return Err(Error::NotPositiveDefinite { index: i, pivot: s });
                }
                lower[i * p + i] = s.sqrt();
            } else {
                lower[i * p + j] = s / lower[j * p + j];
            }
        }
    }
    Ok(SpdFactorization { dim: p, lower })
}

impl SpdFactorization {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    /// Quadratic form `v^T source^{-1} v`, evaluated as `||L^{-1} v||^2`
    /// with one forward triangular solve. O(p^2), no explicit inverse.
    pub fn quad_form(&self, v: &[f64]) -> Result<f64> {
        let p = self.dim;
        if v.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: v.len(),
            });
        }
        let mut y = vec![0.0; p];
        let mut acc = 0.0;
        for i in 0..p {
            let mut s = v[i];
            for k in 0..i {
                s -= self.lower[i * p + k] * y[k];
            }
            let yi = s / self.lower[i * p + i];
            y[i] = yi;
            acc += yi * yi;
        }
        Ok(acc)
    }

    /// Solves `source x = v` (forward then backward triangular solve).
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        let p = self.dim;
        if v.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: v.len(),
            });
        }
        let mut y = vec![0.0; p];
        for i in 0..p {
            let mut s = v[i];
            for k in 0..i {
                s -= self.lower[i * p + k] * y[k];
            }
            y[i] = s / self.lower[i * p + i];
        }
        let mut x = vec![0.0; p];
        for i in (0..p).rev() {
            let mut s = y[i];
            for k in i + 1..p {
                s -= self.lower[k * p + i] * x[k];
            }
            x[i] = s / self.lower[i * p + i];
        }
        Ok(x)
    }

    /// `L L^T`, for factorization round-trip checks.
    pub fn reconstruct(&self) -> SymMatrix {
        let p = self.dim;
        SymMatrix::from_fn(p, |i, j| {
            (0..=i.min(j))
                .map(|k| self.lower[i * p + k] * self.lower[j * p + k])
                .sum()
        })
    }

    /// y = L v (used to color standard normal draws).
    pub fn mul_lower(&self, v: &[f64]) -> Vec<f64> {
        let p = self.dim;
        (0..p)
            .map(|i| (0..=i).map(|k| self.lower[i * p + k] * v[k]).sum())
            .collect()
    }
}

/// Eigen-decomposition of a symmetric matrix: `values` descending,
/// `vectors` orthonormal with column `k` the eigenvector of `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenSym {
    dim: usize,
    pub values: Vec<f64>,
    vectors: Vec<f64>, // row-major dim*dim
}

impl EigenSym {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn vector_entry(&self, i: usize, k: usize) -> f64 {
        self.vectors[i * self.dim + k]
    }

    /// y = U^T v, the coordinates of `v` in the eigenbasis.
    pub fn to_eigenbasis(&self, v: &[f64]) -> Vec<f64> {
        let p = self.dim;
        (0..p)
            .map(|k| (0..p).map(|i| self.vectors[i * p + k] * v[i]).sum())
            .collect()
    }

    /// `U diag(values) U^T`, for reconstruction checks.
    pub fn reconstruct(&self) -> SymMatrix {
        let p = self.dim;
        SymMatrix::from_fn(p, |i, j| {
            (0..p)
                .map(|k| self.vectors[i * p + k] * self.values[k] * self.vectors[j * p + k])
                .sum()
        })
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Errors with [`Error::ConvergenceFailure`] if the off-diagonal mass has not
/// vanished after the internal sweep cap; in practice a handful of sweeps
/// suffice for the dimensions used here.
pub fn eigen_sym(m: &SymMatrix) -> Result<EigenSym> {
    let p = m.dim;
    let mut a = m.data.clone();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }
    let frob = m.frobenius_norm();
    let off_tol = 1e-15 * frob.max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..p {
                for j in i + 1..p {
                    s += a[i * p + j] * a[i * p + j];
                }
            }
            (2.0 * s).sqrt()
        };
        if off <= off_tol {
            converged = true;
            break;
        }
        for q in 1..p {
            for r in 0..q {
                let apq = a[r * p + q];
                if apq.abs() <= off_tol / (p as f64) {
                    continue;
                }
                let theta = (a[q * p + q] - a[r * p + r]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rotate rows/columns r and q of a
                for k in 0..p {
                    let akr = a[k * p + r];
                    let akq = a[k * p + q];
                    a[k * p + r] = c * akr - s * akq;
                    a[k * p + q] = s * akr + c * akq;
                }
                for k in 0..p {
                    let ark = a[r * p + k];
                    let aqk = a[q * p + k];
                    a[r * p + k] = c * ark - s * aqk;
                    a[q * p + k] = s * ark + c * aqk;
                }
                for k in 0..p {
                    let vkr = v[k * p + r];
                    let vkq = v[k * p + q];
                    v[k * p + r] = c * vkr - s * vkq;
                    v[k * p + q] = s * vkr + c * vkq;
                }
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let mut s = 0.0;
        for i in 0..p {
            for j in i + 1..p {
                s += a[i * p + j] * a[i * p + j];
            }
        }
        if (2.0 * s).sqrt() > off_tol {
            return Err(Error::ConvergenceFailure {
                max_sweeps: JACOBI_MAX_SWEEPS,
            });
        }
    }

    // sort eigenpairs descending
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| a[j * p + j].partial_cmp(&a[i * p + i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| a[k * p + k]).collect();
    let mut vectors = vec![0.0; p * p];
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..p {
            vectors[i * p + new_k] = v[i * p + old_k];
        }
    }
    Ok(EigenSym {
        dim: p,
        values,
        vectors,
    })
}

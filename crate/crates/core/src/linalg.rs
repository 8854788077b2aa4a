//! Small dense least-squares solves via accumulated normal equations.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Accumulates `Σ w·xxᵀ` and `Σ w·x·y` for a fixed number of regressors.
pub(crate) struct NormalEquations {
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    yy: f64,
}

pub(crate) struct LeastSquares {
    pub coefficients: Vec<f64>,
    /// Inverse of the (weighted) Gram matrix.
    pub inverse_gram: DMatrix<f64>,
    /// Weighted residual sum of squares.
    pub rss: f64,
}

impl NormalEquations {
    pub fn new(p: usize) -> Self {
        Self {
            gram: DMatrix::zeros(p, p),
            rhs: DVector::zeros(p),
            yy: 0.0,
        }
    }

    pub fn add(&mut self, x: &[f64], y: f64, w: f64) {
        let p = self.rhs.len();
        debug_assert_eq!(x.len(), p);
        for i in 0..p {
            let wxi = w * x[i];
            self.rhs[i] += wxi * y;
            for (j, xj) in x.iter().enumerate().skip(i) {
                self.gram[(i, j)] += wxi * xj;
            }
        }
        self.yy += w * y * y;
    }

    /// Solves the system; fails when the design is numerically rank deficient.
    pub fn solve(mut self, max_condition: f64) -> Result<LeastSquares> {
        let p = self.rhs.len();
        for i in 0..p {
            for j in 0..i {
                self.gram[(i, j)] = self.gram[(j, i)];
            }
        }
        // Jacobi-scale before judging conditioning so column units don't matter.
        let scale: Vec<f64> = (0..p)
            .map(|i| {
                let d = self.gram[(i, i)];
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        if scale.contains(&0.0) {
            return Err(Error::DegenerateFit("a regressor is identically zero".into()));
        }
        let scaled = DMatrix::from_fn(p, p, |i, j| self.gram[(i, j)] * scale[i] * scale[j]);
        let eig = scaled.clone().symmetric_eigen();
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if !(min > 0.0) || max / min > max_condition {
            return Err(Error::DegenerateFit(format!(
                "design matrix condition number {:.3e} exceeds {:.1e}",
                max / min.max(f64::MIN_POSITIVE),
                max_condition
            )));
        }
        let chol = scaled
            .cholesky()
            .ok_or_else(|| Error::DegenerateFit("Gram matrix not positive definite".into()))?;
        let scaled_rhs = DVector::from_fn(p, |i, _| self.rhs[i] * scale[i]);
        let z = chol.solve(&scaled_rhs);
        let beta = DVector::from_fn(p, |i, _| z[i] * scale[i]);
        let inv_scaled = chol.inverse();
        let inverse_gram = DMatrix::from_fn(p, p, |i, j| inv_scaled[(i, j)] * scale[i] * scale[j]);
        let rss = (self.yy - beta.dot(&self.rhs)).max(0.0);
        Ok(LeastSquares {
            coefficients: beta.iter().copied().collect(),
            inverse_gram,
            rss,
        })
    }
}

//! Spectral Dirichlet kind: s-th power of the cell-centered second-difference
//! Dirichlet Laplacian through its closed-form sine eigenbasis.
//!
//! With the ghost convention u_{-1} = -u_0 (zero at the cell face on the
//! boundary), the eigenpairs of tridiag(-1, 2, -1)/h^2 with 3/h^2 corners are
//!   v_p(i) = sin(pi p (i + 1/2) / M),   lambda_p = (4/h^2) sin^2(pi p / 2M),
//! p = 1..M.

use super::OperatorSpec;
use nalgebra::DMatrix;
use std::f64::consts::PI;

pub(crate) struct EigenTable {
    /// orthonormal eigenvector matrix, column p-1 holds v_p
    q: DMatrix<f64>,
    /// lambda_p^s
    lambda_pow: Vec<f64>,
}

impl EigenTable {
    pub(super) fn build(spec: &OperatorSpec) -> Self {
        let grid = spec.grid();
        let m = grid.points_per_axis();
        let h = grid.spacing();
        let s = spec.s();
        let mut q = DMatrix::zeros(m, m);
        let mut lambda_pow = Vec::with_capacity(m);
        for p in 1..=m {
            let norm = if p < m {
                (2.0 / m as f64).sqrt()
            } else {
                (1.0 / m as f64).sqrt()
            };
            for i in 0..m {
                q[(i, p - 1)] = norm * (PI * p as f64 * (i as f64 + 0.5) / m as f64).sin();
            }
            let lam = (4.0 / (h * h)) * (PI * p as f64 / (2.0 * m as f64)).sin().powi(2);
            lambda_pow.push(lam.powf(s));
        }
        Self { q, lambda_pow }
    }

    pub fn lambda_pow(&self) -> &[f64] {
        &self.lambda_pow
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.lambda_pow.len();
        let xv = nalgebra::DVector::from_column_slice(x);
        let mut coeffs = self.q.transpose() * xv;
        for p in 0..m {
            coeffs[p] *= self.lambda_pow[p];
        }
        let out = &self.q * coeffs;
        y.copy_from_slice(out.as_slice());
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let m = self.lambda_pow.len();
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|p| self.q[(i, p)] * self.q[(i, p)] * self.lambda_pow[p])
                    .sum()
            })
            .collect()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let m = self.lambda_pow.len();
        let mut lam = DMatrix::zeros(m, m);
        for p in 0..m {
            lam[(p, p)] = self.lambda_pow[p];
        }
        &self.q * lam * self.q.transpose()
    }
}

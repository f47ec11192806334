//! Discrete realizations of the fractional Laplacian.
//!
//! Four kinds are built behind one type:
//!
//! * `PeriodicSpectral` — Fourier multiplier |pi k / L|^{2s} on the torus;
//! * `TruncatedQuadrature` — singular-kernel quadrature on the box with the
//!   analytic exterior tail against zero exterior values;
//! * `DirichletRestricted` — the same kernel construction read as the
//!   restricted Dirichlet operator on the box;
//! * `DirichletSpectral` — s-th power of the cell-centered Dirichlet
//!   second-difference eigen-decomposition.
//!
//! Kernel weights use exact cell-averaged integrals of |z|^{-N-2s} so the
//! quadrature stays second order through the singularity; kernel sums go
//! through a fixed FFT embedding (1D) or fixed-order loops (2D), so results
//! are bit-reproducible across thread counts.

mod eigen;
mod kernel;
mod spectral;

use crate::error::{Error, Result};
use crate::grid::{Field, Topology, UniformGrid};
use crate::linalg::pairwise_sum;
use crate::special::{check_order, fraclap_constant};
use nalgebra::DMatrix;
use std::sync::OnceLock;

pub use kernel::{Kernel1d, Kernel2d};

/// Which realization of (-Delta)^s to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    PeriodicSpectral,
    TruncatedQuadrature,
    DirichletRestricted,
    DirichletSpectral,
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::PeriodicSpectral => "periodic-spectral",
            OperatorKind::TruncatedQuadrature => "truncated-quadrature",
            OperatorKind::DirichletRestricted => "dirichlet-restricted",
            OperatorKind::DirichletSpectral => "dirichlet-spectral",
        }
    }
}

/// Fractional order, kind, and grid of one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    s: f64,
    kind: OperatorKind,
    grid: UniformGrid,
}

impl OperatorSpec {
    pub fn new(s: f64, kind: OperatorKind, grid: UniformGrid) -> Result<Self> {
        check_order(s)?;
        let topology_ok = match kind {
            OperatorKind::PeriodicSpectral => grid.topology() == Topology::Periodic,
            _ => grid.topology() == Topology::Truncated,
        };
        if !topology_ok {
            return Err(Error::InvalidSpec(format!(
                "{} is incompatible with {:?} topology",
                kind.name(),
                grid.topology()
            )));
        }
        match kind {
            OperatorKind::DirichletSpectral => {
                if grid.dimension() != 1 {
                    return Err(Error::UnsupportedDimension(
                        "dirichlet-spectral is implemented for 1D grids".into(),
                    ));
                }
            }
            _ => {
                if grid.dimension() > 2 {
                    return Err(Error::UnsupportedDimension(
                        "operators are capped at N <= 2".into(),
                    ));
                }
            }
        }
        Ok(Self { s, kind, grid })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }
}

pub(crate) enum Repr {
    Multiplier(spectral::SpectralTable),
    Kernel1d(Kernel1d),
    Kernel2d(Kernel2d),
    Eigen(eigen::EigenTable),
}

/// One built realization of (-Delta)^s on a grid.
pub struct DiscreteOperator {
    spec: OperatorSpec,
    normalization: f64,
    repr: Repr,
    dense: OnceLock<DMatrix<f64>>,
}

/// Build the discrete operator described by `spec`.
pub fn build_operator(spec: OperatorSpec) -> Result<DiscreteOperator> {
    DiscreteOperator::build(spec)
}

impl DiscreteOperator {
    pub fn build(spec: OperatorSpec) -> Result<Self> {
        let normalization = fraclap_constant(spec.grid().dimension(), spec.s())?;
        let repr = match (spec.kind(), spec.grid().dimension()) {
            (OperatorKind::PeriodicSpectral, _) => {
                Repr::Multiplier(spectral::SpectralTable::build(&spec)?)
            }
            (OperatorKind::TruncatedQuadrature | OperatorKind::DirichletRestricted, 1) => {
                Repr::Kernel1d(Kernel1d::build(&spec, normalization))
            }
            (OperatorKind::TruncatedQuadrature | OperatorKind::DirichletRestricted, 2) => {
                Repr::Kernel2d(Kernel2d::build(&spec, normalization))
            }
            (OperatorKind::DirichletSpectral, _) => Repr::Eigen(eigen::EigenTable::build(&spec)),
            _ => unreachable!("spec validation caps the dimension"),
        };
        Ok(Self {
            spec,
            normalization,
            repr,
            dense: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    /// The kernel scaling constant c(N,s).
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.spec.grid
    }

    /// Apply the operator to a field.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        if f.grid() != self.grid() {
            return Err(Error::InvalidInput(
                "field grid does not match operator grid".into(),
            ));
        }
        let mut out = vec![0.0; f.values().len()];
        self.apply_values(f.values(), &mut out);
        Ok(f.with_values(out))
    }

    /// Check-free apply on raw values; used inside Newton/CG loops.
    pub(crate) fn apply_values(&self, x: &[f64], y: &mut [f64]) {
        match &self.repr {
            Repr::Multiplier(t) => t.apply(x, y),
            Repr::Kernel1d(t) => t.apply(x, y),
            Repr::Kernel2d(t) => t.apply(x, y),
            Repr::Eigen(t) => t.apply(x, y),
        }
    }

    /// Value of the applied operator at a single node.
    ///
    /// Kernel kinds evaluate the quadrature with pairwise-tree summation in
    /// O(M^N); spectral kinds fall back to a full apply.
    pub fn apply_at(&self, f: &Field, node: usize) -> Result<f64> {
        if f.grid() != self.grid() {
            return Err(Error::InvalidInput(
                "field grid does not match operator grid".into(),
            ));
        }
        match &self.repr {
            Repr::Kernel1d(t) => Ok(t.apply_at(f.values(), node)),
            Repr::Kernel2d(t) => Ok(t.apply_at(f.values(), node)),
            _ => {
                let out = self.apply(f)?;
                Ok(out.values()[node])
            }
        }
    }

    /// Diagonal of the operator matrix (used for Jacobi preconditioning).
    pub fn diagonal(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Multiplier(t) => {
                let d = pairwise_sum(t.multiplier()) / t.multiplier().len() as f64;
                vec![d; t.multiplier().len()]
            }
            Repr::Kernel1d(t) => t.diag().to_vec(),
            Repr::Kernel2d(t) => t.diag().to_vec(),
            Repr::Eigen(t) => t.diagonal(),
        }
    }

    /// Multiplier table for the spectral kind, mode-indexed.
    pub fn multiplier_table(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Multiplier(t) => Some(t.multiplier()),
            _ => None,
        }
    }

    /// Offset-indexed kernel weights (1D kernel kinds).
    pub fn kernel_weights(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Kernel1d(t) => Some(t.weights()),
            _ => None,
        }
    }

    /// Per-node exterior tail coefficients (kernel kinds).
    pub fn tail_coefficients(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Kernel1d(t) => Some(t.tail()),
            Repr::Kernel2d(t) => Some(t.tail()),
            _ => None,
        }
    }

    /// Eigenvalue powers lambda_p^s of the Dirichlet spectral kind.
    pub fn eigenvalue_powers(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Eigen(t) => Some(t.lambda_pow()),
            _ => None,
        }
    }

    /// Dense matrix of the operator, built once on demand.
    pub fn dense(&self) -> &DMatrix<f64> {
        self.dense.get_or_init(|| self.assemble_dense())
    }

    fn assemble_dense(&self) -> DMatrix<f64> {
        let n = self.grid().node_count();
        match &self.repr {
            Repr::Kernel1d(t) => t.dense(n),
            Repr::Kernel2d(t) => t.dense(self.grid().points_per_axis()),
            Repr::Eigen(t) => t.dense(),
            Repr::Multiplier(_) => {
                let mut a = DMatrix::zeros(n, n);
                let mut e = vec![0.0; n];
                let mut col = vec![0.0; n];
                for j in 0..n {
                    e[j] = 1.0;
                    self.apply_values(&e, &mut col);
                    e[j] = 0.0;
                    for i in 0..n {
                        a[(i, j)] = col[i];
                    }
                }
                // symmetrize away FFT roundoff
                for i in 0..n {
                    for j in 0..i {
                        let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                        a[(i, j)] = v;
                        a[(j, i)] = v;
                    }
                }
                a
            }
        }
    }
}

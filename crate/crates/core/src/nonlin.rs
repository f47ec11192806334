//! The singular nonlinearity family, its eps-regularization, and the
//! inverse beta used by the elliptic formulation.
//!
//! Power kind: phi(u) = -u^{-n} with n > 0. Logarithmic kind: phi(u) = log u.
//! Both are strictly increasing on (0, inf) with phi(0+) = -infinity, which is
//! exactly why solvers only ever evaluate the shifted phi_eps.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A strictly increasing nonlinearity on (0, inf).
#[derive(Clone)]
pub enum Nonlinearity {
    /// phi(u) = -u^{-n}, n > 0.
    Power { n: f64 },
    /// phi(u) = log u.
    Logarithmic,
    /// User-supplied phi with its derivative; no automatic differentiation.
    Custom { phi: ScalarFn, phi_prime: ScalarFn },
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Power { n } => write!(f, "Power(n={n})"),
            Nonlinearity::Logarithmic => write!(f, "Logarithmic"),
            Nonlinearity::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl Nonlinearity {
    pub fn power(n: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power exponent must be positive, got {n}"
            )));
        }
        Ok(Nonlinearity::Power { n })
    }

    pub fn custom(
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phi_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Nonlinearity::Custom {
            phi: Arc::new(phi),
            phi_prime: Arc::new(phi_prime),
        }
    }

    /// Nonlinearity exponent n used by the time-monotonicity diagnostics;
    /// n = 0 for the logarithmic kind, None for custom kinds.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Nonlinearity::Power { n } => Some(*n),
            Nonlinearity::Logarithmic => Some(0.0),
            Nonlinearity::Custom { .. } => None,
        }
    }

    /// phi(u) for u > 0. Evaluation at u <= 0 is a bug in the caller
    /// (the eps-shift exists to prevent it), so it fails loudly.
    pub fn phi(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::DomainError(format!(
                "phi evaluated at the singular level, u = {u}"
            )));
        }
        Ok(match self {
            Nonlinearity::Power { n } => -u.powf(-n),
            Nonlinearity::Logarithmic => u.ln(),
            Nonlinearity::Custom { phi, .. } => phi(u),
        })
    }

    /// phi'(u) for u > 0.
    pub fn phi_prime(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::DomainError(format!(
                "phi' evaluated at the singular level, u = {u}"
            )));
        }
        Ok(match self {
            Nonlinearity::Power { n } => n * u.powf(-n - 1.0),
            Nonlinearity::Logarithmic => 1.0 / u,
            Nonlinearity::Custom { phi_prime, .. } => phi_prime(u),
        })
    }

    /// beta(w) = phi^{-1}(w). Power: (-w)^{-1/n} for w < 0; Logarithmic: exp(w).
    pub fn beta(&self, w: f64) -> Result<f64> {
        match self {
            Nonlinearity::Power { n } => {
                if w >= 0.0 {
                    return Err(Error::DomainError(format!(
                        "beta of a Power nonlinearity requires w < 0, got {w}"
                    )));
                }
                Ok((-w).powf(-1.0 / n))
            }
            Nonlinearity::Logarithmic => Ok(w.exp()),
            Nonlinearity::Custom { .. } => Err(Error::DomainError(
                "beta is not available for custom nonlinearities".into(),
            )),
        }
    }
}

/// Geometric sample of (lo, hi], `count` points, used by the slowness and
/// singular-bound probes.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|k| lo * (ratio * k as f64).exp()).collect()
}

/// Outcome of the slowness comparison Phi' <= phi'.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slowness {
    Slower,
    NotSlower,
}

/// Tests "Phi is slower than phi", i.e. Phi'(r) <= phi'(r) on a geometric
/// sample of (0, u_max]; equality is allowed up to 1e-12 relative.
pub fn is_slower(
    big_phi: &Nonlinearity,
    phi: &Nonlinearity,
    u_max: f64,
    samples: usize,
) -> Result<Slowness> {
    let grid = geometric_grid(u_max * 1e-8, u_max, samples.max(2));
    for u in grid {
        let a = big_phi.phi_prime(u)?;
        let b = phi.phi_prime(u)?;
        if a > b * (1.0 + 1e-12) + 1e-300 {
            return Ok(Slowness::NotSlower);
        }
    }
    Ok(Slowness::Slower)
}

/// Infimum over a geometric sample of (0, M] of phi'(u) u^{n+1}.
///
/// A strictly positive return certifies numerically the lower bound
/// phi'(u) >= C(M) u^{-(n+1)} that extends the non-existence results to
/// general nonlinearities.
pub fn singular_bound_constant(
    nl: &Nonlinearity,
    n: f64,
    m: f64,
    samples: usize,
) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::InvalidParameter("M must be positive".into()));
    }
    let grid = geometric_grid(m * 1e-8, m, samples.max(2));
    let mut inf = f64::INFINITY;
    for u in grid {
        let v = nl.phi_prime(u)? * u.powf(n + 1.0);
        inf = inf.min(v);
    }
    Ok(inf.max(0.0))
}

/// The eps-shifted nonlinearity phi_eps(v) = phi(v + eps) - phi(eps),
/// smooth and strictly increasing on [0, inf) with phi_eps(0) = 0.
#[derive(Debug, Clone)]
pub struct RegularizedNonlinearity {
    base: Nonlinearity,
    eps: f64,
}

impl RegularizedNonlinearity {
    pub fn new(base: Nonlinearity, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive and finite, got {eps}"
            )));
        }
        Ok(Self { base, eps })
    }

    pub fn base(&self) -> &Nonlinearity {
        &self.base
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// phi_eps(v) = phi(v + eps) - phi(eps) for v >= 0.
    pub fn phi_eps(&self, v: f64) -> Result<f64> {
        if v < 0.0 {
            return Err(Error::DomainError(format!(
                "phi_eps requires v >= 0, got {v}"
            )));
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        Ok(self.base.phi(v + self.eps)? - self.base.phi(self.eps)?)
    }

    /// phi_eps'(v) = phi'(v + eps) for v >= 0.
    pub fn phi_eps_prime(&self, v: f64) -> Result<f64> {
        if v < 0.0 {
            return Err(Error::DomainError(format!(
                "phi_eps' requires v >= 0, got {v}"
            )));
        }
        self.base.phi_prime(v + self.eps)
    }
}

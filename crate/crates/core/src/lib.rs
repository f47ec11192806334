//! Numerical laboratory for singular nonlocal diffusion.
//!
//! Implements the eps-regularized parabolic equation
//! d/dt u + (-Delta)^s phi(u) = 0 and its elliptic companion
//! u + (-Delta)^s phi(u) = f for ultra-fast nonlinearities
//! phi(u) = -u^{-n} (n > 0) and phi(u) = log u, together with the
//! instrumentation needed to observe conservation laws, comparison
//! principles, Green-function identities, explicit solutions, and the
//! extinction/persistence phase diagram at desk scale.

pub mod csv;
pub mod elliptic;
pub mod error;
pub mod grid;
pub mod lab;
pub mod linalg;
pub mod nonlin;
pub mod op;
pub mod parabolic;
pub mod profiles;
pub mod rearrange;
pub mod riesz;
pub mod special;

pub use error::{Error, Result};
pub use grid::{ball_mass, lp_norm, total_mass, BallSpec, Exterior, Field, Topology, UniformGrid};
pub use nonlin::{Nonlinearity, RegularizedNonlinearity};
pub use op::{build_operator, DiscreteOperator, OperatorKind, OperatorSpec};

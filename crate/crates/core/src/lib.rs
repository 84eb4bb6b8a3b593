//! Multilevel control functional (MLCF) estimation of intractable integrals
//! `E_pi[f] = \int f(x) pi(x) dx`.
//!
//! The crate combines Stein-kernel control functionals with multilevel Monte
//! Carlo over a hierarchy of integrand fidelities:
//!
//! - [`kernels`]: squared-exponential base kernels with analytic derivatives,
//!   score-based target densities, and the Langevin Stein kernel with its
//!   gram / cross-gram assembly.
//! - [`estimators`]: plain Monte Carlo, standard and simplified control
//!   functionals, multilevel Monte Carlo, and the standard and simplified
//!   multilevel control functional estimators, plus the regularized solves
//!   and diagnostics they need.
//! - [`sampling`]: seeded i.i.d. Gaussian, Sobol, and Latin hypercube point
//!   generators (pushed through the inverse normal CDF) and a MALA chain for
//!   unnormalized posteriors.
//! - [`models`]: the boundary-value ODE and Lotka-Volterra benchmark
//!   problems, their integrand hierarchies, and truth oracles.

pub mod error;
pub mod estimators;
pub mod kernels;
pub mod models;
pub mod sampling;

pub use error::{Error, Result};
pub use kernels::{Point, SqExpKernel, SteinKernel, TargetDensity};

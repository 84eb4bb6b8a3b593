//! Benchmark problems and their truth oracles: the boundary-value ODE, the
//! Lotka-Volterra posterior, and a synthetic two-level Gaussian problem used
//! for estimator validation.

pub mod bvp;
pub mod lv;
pub mod quadrature;

pub use bvp::{bvp_integrand, bvp_solve, bvp_spec, bvp_truth, make_bvp_hierarchy, NoiseScale};
pub use lv::{
    lv_average_prey, lv_integrand, lv_log_posterior, lv_map_estimate, lv_score, lv_solve,
    lv_target, lv_truth, make_lv_hierarchy, LvDataset, LvParameters,
};

use crate::estimators::{Level, LevelHierarchy};
use crate::kernels::{Point, TargetDensity};
use crate::sampling::GaussianSpec;

/// A reference value with its computation method and error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthOracle {
    pub method: String,
    pub value: f64,
    pub error_estimate: f64,
}

/// Synthetic two-level problem: `pi = N(0, I_2)`, `f_1(x) = ||x||^2`,
/// `f_0 = ratio * f_1`. The truth is the Gaussian second moment, 2.
pub fn synthetic_hierarchy(ratio: f64) -> LevelHierarchy {
    LevelHierarchy::new(vec![
        Level::new(1e-6, move |p: &Point| Ok(ratio * (p[0] * p[0] + p[1] * p[1]))),
        Level::new(2e-6, |p: &Point| Ok(p[0] * p[0] + p[1] * p[1])),
    ])
    .expect("valid synthetic hierarchy")
}

pub fn synthetic_spec() -> GaussianSpec {
    GaussianSpec::standard(2)
}

pub fn synthetic_target() -> TargetDensity {
    TargetDensity::gaussian(&synthetic_spec())
}

pub fn synthetic_truth() -> TruthOracle {
    TruthOracle { method: "analytic".into(), value: 2.0, error_estimate: 0.0 }
}

//! Budget allocation: published preset tables and the variance-optimal MLMC
//! rule.

use anyhow::{bail, Result};
use serde::Serialize;

use crate::config::ProblemId;

/// Per-level and single-level sample sizes for one budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub levels: Vec<usize>,
    /// Sample size for the single-level control functional at the same
    /// budget.
    pub single_cf: usize,
    /// Sample size for the plain MCMC estimator, where the preset defines
    /// one.
    pub single_mcmc: Option<usize>,
}

/// Boundary-value ODE presets: `(T seconds, per-level n, CF column)`.
pub const BVP_TABLE: [(f64, [usize; 3], usize); 3] = [
    (0.30, [70, 10, 2], 15),
    (0.91, [209, 31, 5], 45),
    (1.52, [349, 52, 6], 75),
];

/// Lotka-Volterra presets: `(T seconds, per-level n, CF column, MCMC column)`.
pub const LV_TABLE: [(f64, [usize; 3], usize, usize); 3] = [
    (0.26, [207, 23, 2], 20, 20),
    (0.51, [413, 47, 4], 40, 40),
    (0.77, [620, 70, 6], 60, 60),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationPolicy {
    PaperPreset,
    MlmcOptimal,
}

/// Allocate per-level sample sizes for budget `t`.
///
/// `paper-preset` reproduces the published table row for `(problem, t)`.
/// `mlmc-optimal` sets `n_l` proportional to `sqrt(V_l / C_l)` scaled to the
/// budget (floored at 2 per level), using the supplied pilot variance
/// estimates.
pub fn allocate_budget(
    problem: ProblemId,
    costs: &[f64],
    t: f64,
    policy: AllocationPolicy,
    pilot_variances: Option<&[f64]>,
) -> Result<Allocation> {
    if costs.is_empty() {
        bail!("no level costs supplied");
    }
    let top_cost = *costs.last().unwrap();
    if t < top_cost {
        bail!(
            "budget {t} s is smaller than one evaluation at the top level ({top_cost} s)"
        );
    }
    match policy {
        AllocationPolicy::PaperPreset => preset_allocation(problem, t, costs.len()),
        AllocationPolicy::MlmcOptimal => {
            let variances = match pilot_variances {
                Some(v) if v.len() == costs.len() => v,
                Some(v) => bail!("{} pilot variances for {} levels", v.len(), costs.len()),
                None => bail!("mlmc-optimal allocation needs pilot variance estimates"),
            };
            let weights: Vec<f64> =
                variances.iter().zip(costs).map(|(&v, &c)| (v / c).sqrt()).collect();
            let norm: f64 =
                variances.iter().zip(costs).map(|(&v, &c)| (v * c).sqrt()).sum();
            let levels = weights
                .iter()
                .map(|&w| (((t * w) / norm).floor() as usize).max(2))
                .collect();
            let single_cf = ((t / top_cost).floor() as usize).max(2);
            Ok(Allocation { levels, single_cf, single_mcmc: Some(single_cf) })
        }
    }
}

fn preset_allocation(problem: ProblemId, t: f64, num_levels: usize) -> Result<Allocation> {
    const TOL: f64 = 5e-3;
    if num_levels != 3 {
        bail!("presets are defined for the three-level hierarchies, got {num_levels} levels");
    }
    match problem {
        ProblemId::Bvp => {
            for &(tt, levels, cf) in &BVP_TABLE {
                if (t - tt).abs() < TOL {
                    return Ok(Allocation {
                        levels: levels.to_vec(),
                        single_cf: cf,
                        single_mcmc: None,
                    });
                }
            }
            bail!("no bvp preset for budget {t}; presets: 0.30, 0.91, 1.52")
        }
        ProblemId::LotkaVolterra => {
            for &(tt, levels, cf, mcmc) in &LV_TABLE {
                if (t - tt).abs() < TOL {
                    return Ok(Allocation {
                        levels: levels.to_vec(),
                        single_cf: cf,
                        single_mcmc: Some(mcmc),
                    });
                }
            }
            bail!("no lotka-volterra preset for budget {t}; presets: 0.26, 0.51, 0.77")
        }
        ProblemId::Synthetic => bail!("the synthetic problem has no published presets"),
    }
}

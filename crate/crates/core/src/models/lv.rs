//! Lotka-Volterra benchmark: Bayesian inference for the predator-prey system
//!
//! ```text
//! du1/dt = x1 u1 - x2 u1 u2        (prey)
//! du2/dt = x3 u1 u2 - x4 u2        (predator)
//! ```
//!
//! with initial populations `u1(0) = x5`, `u2(0) = x6` and log-normal
//! observation noise with standard deviations `x7` (prey) and `x8`
//! (predator). Parameters are reparameterized as `x = exp(x_tilde)` with
//! `x_tilde` in `R^8`; the posterior over `x_tilde` combines a Gaussian
//! prior with the log-normal likelihood of the hare-lynx observations.
//!
//! The quantity of interest is the posterior expectation of the average prey
//! population, `f(x_tilde) = s^-1 h sum_i u1(t_i)`, with the trajectory from
//! classical fixed-step fourth-order integration. Scores come from forward
//! sensitivity equations integrated alongside the states with the same step.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{Level, LevelHierarchy};
use crate::kernels::{DensityEval, Point, TargetDensity};
use crate::models::bvp::{measure_cost, validate_steps};
use crate::models::TruthOracle;
use crate::sampling::{mcmc_chain, GaussianSpec, SeededStream};

/// Paper-reported per-sample costs (seconds) for the three-level preset.
pub const LV_PAPER_COSTS: [f64; 3] = [6.88e-4, 34.41e-4, 165.18e-4];

/// Default integrator steps for the three levels; cost ratios 1:5:25 mirror
/// the reported cost vector.
pub const LV_DEFAULT_STEPS: [f64; 3] = [0.5, 0.1, 0.02];

/// Natural-scale model parameters
/// `(x1..x4 rates, x5, x6 initial populations, x7, x8 noise sds)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LvParameters {
    x: [f64; 8],
}

impl LvParameters {
    /// From the reparameterized vector: `x = exp(x_tilde)` componentwise.
    pub fn from_tilde(tilde: &[f64]) -> Result<Self> {
        if tilde.len() != 8 {
            return Err(Error::DimensionMismatch { expected: 8, got: tilde.len() });
        }
        let mut x = [0.0; 8];
        for (xi, &ti) in x.iter_mut().zip(tilde) {
            if !ti.is_finite() {
                return Err(Error::NonFinite { context: "lv parameters", point: tilde.to_vec() });
            }
            *xi = ti.exp();
        }
        Ok(LvParameters { x })
    }

    /// Natural-scale constructor (rates may be zero, e.g. for decoupled
    /// test systems; populations and noise sds must be positive).
    pub fn from_natural(x: [f64; 8]) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!("parameters must be >= 0, got {x:?}")));
        }
        if x[4] <= 0.0 || x[5] <= 0.0 || x[6] <= 0.0 || x[7] <= 0.0 {
            return Err(Error::InvalidParameter(
                "initial populations and noise sds must be positive".into(),
            ));
        }
        Ok(LvParameters { x })
    }

    pub fn natural(&self) -> &[f64; 8] {
        &self.x
    }
}

/// Prey/predator grid trajectories; entry `i` is time `i * h`.
#[derive(Debug, Clone)]
pub struct LvTrajectory {
    pub step: f64,
    pub prey: Vec<f64>,
    pub predator: Vec<f64>,
}

fn grid_steps(h: f64, s: f64) -> Result<usize> {
    if !(h > 0.0) || !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("need h > 0 and s > 0, got h={h}, s={s}")));
    }
    let n = (s / h).round();
    if (s / h - n).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!("s/h must be an integer, got {}", s / h)));
    }
    Ok(n as usize)
}

const STATE_CAP: f64 = 1e12;

fn check_state(u1: f64, u2: f64, t: f64) -> Result<()> {
    if !u1.is_finite() || !u2.is_finite() || u1.abs() > STATE_CAP || u2.abs() > STATE_CAP {
        return Err(Error::Trajectory { t, reason: "state blow-up" });
    }
    if u1 <= 0.0 || u2 <= 0.0 {
        return Err(Error::Trajectory { t, reason: "non-positive population" });
    }
    Ok(())
}

#[inline]
fn lv_rhs(r: &[f64; 4], u: [f64; 2]) -> [f64; 2] {
    [r[0] * u[0] - r[1] * u[0] * u[1], r[2] * u[0] * u[1] - r[3] * u[1]]
}

#[inline]
fn rk4_step_2(r: &[f64; 4], u: [f64; 2], h: f64) -> [f64; 2] {
    let k1 = lv_rhs(r, u);
    let k2 = lv_rhs(r, [u[0] + 0.5 * h * k1[0], u[1] + 0.5 * h * k1[1]]);
    let k3 = lv_rhs(r, [u[0] + 0.5 * h * k2[0], u[1] + 0.5 * h * k2[1]]);
    let k4 = lv_rhs(r, [u[0] + h * k3[0], u[1] + h * k3[1]]);
    [
        u[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        u[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrate the system over `[0, s]` with fixed step `h`.
pub fn lv_solve(params: &LvParameters, h: f64, s: f64) -> Result<LvTrajectory> {
    let nt = grid_steps(h, s)?;
    let x = &params.x;
    let rates = [x[0], x[1], x[2], x[3]];
    let mut u = [x[4], x[5]];
    let mut prey = Vec::with_capacity(nt + 1);
    let mut predator = Vec::with_capacity(nt + 1);
    prey.push(u[0]);
    predator.push(u[1]);
    for i in 0..nt {
        u = rk4_step_2(&rates, u, h);
        check_state(u[0], u[1], (i + 1) as f64 * h)?;
        prey.push(u[0]);
        predator.push(u[1]);
    }
    Ok(LvTrajectory { step: h, prey, predator })
}

/// Average prey population over `[0, s]`: `s^-1 h sum_{i=1}^{s/h} u1(t_i)`.
pub fn lv_average_prey(params: &LvParameters, h: f64, s: f64) -> Result<f64> {
    let traj = lv_solve(params, h, s)?;
    Ok(traj.prey[1..].iter().sum::<f64>() * h / s)
}

/// The integrand on the reparameterized space.
pub fn lv_integrand(x_tilde: &Point, h: f64, s: f64) -> Result<f64> {
    let params = LvParameters::from_tilde(x_tilde.coords())?;
    lv_average_prey(&params, h, s)
}

/// Hare-lynx observation record; populations in thousands, times as offsets
/// from the first observation year.
#[derive(Debug, Clone, PartialEq)]
pub struct LvDataset {
    times: Vec<f64>,
    hare: Vec<f64>,
    lynx: Vec<f64>,
}

impl LvDataset {
    pub fn new(times: Vec<f64>, hare: Vec<f64>, lynx: Vec<f64>) -> Result<Self> {
        if times.len() != hare.len() || times.len() != lynx.len() {
            return Err(Error::InvalidParameter(format!(
                "dataset columns disagree: {} times, {} hare, {} lynx",
                times.len(),
                hare.len(),
                lynx.len()
            )));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParameter(format!(
                    "observation times must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if hare.iter().chain(lynx.iter()).any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidParameter("populations must be positive".into()));
        }
        Ok(LvDataset { times, hare, lynx })
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn hare(&self) -> &[f64] {
        &self.hare
    }

    pub fn lynx(&self) -> &[f64] {
        &self.lynx
    }

    /// Last observation time (0 for an empty dataset).
    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    fn grid_indices(&self, h: f64) -> Result<Vec<usize>> {
        self.times
            .iter()
            .map(|&t| {
                let idx = (t / h).round();
                if (t / h - idx).abs() > 1e-6 {
                    return Err(Error::InvalidParameter(format!(
                        "observation time {t} does not lie on the step-{h} grid"
                    )));
                }
                Ok(idx as usize)
            })
            .collect()
    }
}

/// Default weakly-informative Gaussian prior on `x_tilde`.
pub fn lv_default_prior() -> GaussianSpec {
    let log30 = 30.0f64.ln();
    GaussianSpec::new(
        vec![-1.2, -4.6, -4.6, -1.2, log30, log30, -1.0, -1.0],
        vec![1.0; 8],
    )
    .expect("valid prior")
}

// ---------------------------------------------------------------------------
// Forward sensitivities
//
// Augmented state: [u1, u2, S_0 .. S_5] where S_k = (d u1 / d x~_k,
// d u2 / d x~_k) for the six parameters that influence the trajectory
// (rates and initial populations). Derivatives are with respect to the
// reparameterized coordinates, so each natural-parameter partial picks up a
// factor x_k = exp(x~_k).
// ---------------------------------------------------------------------------

const AUG: usize = 14;

#[inline]
fn aug_rhs(r: &[f64; 4], y: &[f64; AUG]) -> [f64; AUG] {
    let (u1, u2) = (y[0], y[1]);
    let mut out = [0.0; AUG];
    out[0] = r[0] * u1 - r[1] * u1 * u2;
    out[1] = r[2] * u1 * u2 - r[3] * u2;
    // Jacobian of the vector field with respect to the state.
    let j11 = r[0] - r[1] * u2;
    let j12 = -r[1] * u1;
    let j21 = r[2] * u2;
    let j22 = r[2] * u1 - r[3];
    // Parameter partials in reparameterized coordinates.
    let fp = [
        [r[0] * u1, 0.0],
        [-r[1] * u1 * u2, 0.0],
        [0.0, r[2] * u1 * u2],
        [0.0, -r[3] * u2],
        [0.0, 0.0],
        [0.0, 0.0],
    ];
    for k in 0..6 {
        let s1 = y[2 + 2 * k];
        let s2 = y[3 + 2 * k];
        out[2 + 2 * k] = j11 * s1 + j12 * s2 + fp[k][0];
        out[3 + 2 * k] = j21 * s1 + j22 * s2 + fp[k][1];
    }
    out
}

#[inline]
fn rk4_step_aug(r: &[f64; 4], y: &[f64; AUG], h: f64) -> [f64; AUG] {
    let k1 = aug_rhs(r, y);
    let mut tmp = [0.0; AUG];
    for i in 0..AUG {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = aug_rhs(r, &tmp);
    for i in 0..AUG {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = aug_rhs(r, &tmp);
    for i in 0..AUG {
        tmp[i] = y[i] + h * k3[i];
    }
    let k4 = aug_rhs(r, &tmp);
    let mut out = [0.0; AUG];
    for i in 0..AUG {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// One posterior evaluation: unnormalized log-density and its gradient in
/// the reparameterized coordinates, plus the average prey integrand over the
/// observation window (a free by-product of the same trajectory pass).
#[derive(Debug, Clone)]
pub struct PosteriorEval {
    pub log_posterior: f64,
    pub score: Vec<f64>,
    pub average_prey: f64,
}

/// Evaluate the posterior at `x_tilde` with integrator step `h`. Runs one
/// augmented (state + sensitivity) pass over `[0, horizon]`.
pub fn lv_posterior_eval(
    x_tilde: &Point,
    data: &LvDataset,
    prior: &GaussianSpec,
    h: f64,
) -> Result<PosteriorEval> {
    if x_tilde.dim() != 8 {
        return Err(Error::DimensionMismatch { expected: 8, got: x_tilde.dim() });
    }
    if prior.dim() != 8 {
        return Err(Error::DimensionMismatch { expected: 8, got: prior.dim() });
    }
    let tilde = x_tilde.coords();
    let params = LvParameters::from_tilde(tilde)?;
    let x = params.natural();

    // Gaussian prior (unnormalized) and its score.
    let mut log_post = 0.0;
    let mut score = vec![0.0; 8];
    for j in 0..8 {
        let z = tilde[j] - prior.mean()[j];
        let v = prior.sd()[j] * prior.sd()[j];
        log_post -= z * z / (2.0 * v);
        score[j] = -z / v;
    }

    if data.is_empty() {
        return Ok(PosteriorEval { log_posterior: log_post, score, average_prey: 0.0 });
    }

    let s_obs = data.horizon();
    let nt = grid_steps(h, s_obs)?;
    let obs_idx = data.grid_indices(h)?;
    let rates = [x[0], x[1], x[2], x[3]];

    let mut y = [0.0; AUG];
    y[0] = x[4];
    y[1] = x[5];
    y[2 + 2 * 4] = x[4]; // d u1(0) / d x~_5 = x5
    y[3 + 2 * 5] = x[5]; // d u2(0) / d x~_6 = x6

    let (x7, x8) = (x[6], x[7]);
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    let mut obs_pos = 0usize;
    let mut prey_sum = 0.0;

    let handle_obs = |y: &[f64; AUG],
                          obs: usize,
                          log_post: &mut f64,
                          score: &mut [f64]| {
        let (u1, u2) = (y[0], y[1]);
        let r_h = data.hare[obs].ln() - u1.ln();
        let r_l = data.lynx[obs].ln() - u2.ln();
        *log_post += -x7.ln() - 0.5 * ln_2pi - r_h * r_h / (2.0 * x7 * x7);
        *log_post += -x8.ln() - 0.5 * ln_2pi - r_l * r_l / (2.0 * x8 * x8);
        for k in 0..6 {
            let s1 = y[2 + 2 * k];
            let s2 = y[3 + 2 * k];
            score[k] += r_h / (x7 * x7) * s1 / u1 + r_l / (x8 * x8) * s2 / u2;
        }
        score[6] += r_h * r_h / (x7 * x7) - 1.0;
        score[7] += r_l * r_l / (x8 * x8) - 1.0;
    };

    if obs_idx.first() == Some(&0) {
        handle_obs(&y, 0, &mut log_post, &mut score);
        obs_pos = 1;
    }
    for i in 0..nt {
        y = rk4_step_aug(&rates, &y, h);
        let t = (i + 1) as f64 * h;
        check_state(y[0], y[1], t)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Trajectory { t, reason: "sensitivity blow-up" });
        }
        prey_sum += y[0];
        while obs_pos < obs_idx.len() && obs_idx[obs_pos] == i + 1 {
            handle_obs(&y, obs_pos, &mut log_post, &mut score);
            obs_pos += 1;
        }
    }

    Ok(PosteriorEval { log_posterior: log_post, score, average_prey: prey_sum * h / s_obs })
}

/// Unnormalized log-posterior; trajectory failures map to `-inf` so samplers
/// can reject such proposals.
pub fn lv_log_posterior(
    x_tilde: &Point,
    data: &LvDataset,
    prior: &GaussianSpec,
    h: f64,
) -> Result<f64> {
    match lv_posterior_eval(x_tilde, data, prior, h) {
        Ok(eval) => Ok(eval.log_posterior),
        Err(Error::Trajectory { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// Posterior score via forward sensitivities.
pub fn lv_score(
    x_tilde: &Point,
    data: &LvDataset,
    prior: &GaussianSpec,
    h: f64,
) -> Result<Vec<f64>> {
    Ok(lv_posterior_eval(x_tilde, data, prior, h)?.score)
}

/// Posterior as a [`TargetDensity`] for the samplers and Stein kernels.
/// Trajectory failures surface as `log_density = -inf` (rejectable) rather
/// than errors.
pub fn lv_target(data: LvDataset, prior: GaussianSpec, h: f64) -> TargetDensity {
    TargetDensity::new(8, move |p| match lv_posterior_eval(p, &data, &prior, h) {
        Ok(eval) => Ok(DensityEval {
            score: eval.score,
            log_density: Some(eval.log_posterior),
        }),
        Err(Error::Trajectory { .. }) => Ok(DensityEval {
            score: vec![0.0; 8],
            log_density: Some(f64::NEG_INFINITY),
        }),
        Err(e) => Err(e),
    })
}

/// Build the Lotka-Volterra integrand hierarchy over strictly decreasing
/// steps with horizon `s`.
pub fn make_lv_hierarchy(steps: &[f64], s: f64, costs: Option<&[f64]>) -> Result<LevelHierarchy> {
    validate_steps(steps)?;
    let costs = match costs {
        Some(c) => {
            if c.len() != steps.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} costs for {} levels",
                    c.len(),
                    steps.len()
                )));
            }
            c.to_vec()
        }
        None => {
            let probe = Point::new(lv_default_prior().mean().to_vec());
            steps
                .iter()
                .map(|&h| measure_cost(|| lv_integrand(&probe, h, s).map(|_| ())))
                .collect::<Result<_>>()?
        }
    };
    let levels = steps
        .iter()
        .zip(&costs)
        .map(|(&h, &cost)| Level::new(cost, move |x: &Point| lv_integrand(x, h, s)))
        .collect();
    LevelHierarchy::new(levels)
}

/// Posterior mode by multi-start gradient ascent: the prior mean plus
/// `starts - 1` prior draws, climbed with normalized-gradient steps and a
/// backtracking step size; the deepest endpoint wins. The Lotka-Volterra
/// posterior has well-separated local modes of wildly different heights, so
/// samplers are started here rather than at the prior mean.
pub fn lv_map_estimate(
    data: &LvDataset,
    prior: &GaussianSpec,
    h: f64,
    starts: usize,
    iters: usize,
    seed: u64,
) -> Result<Point> {
    let mut inits = vec![prior.mean().to_vec()];
    let draws = crate::sampling::sample_iid(
        prior,
        starts.saturating_sub(1),
        &SeededStream::new(seed, 0),
    );
    inits.extend(draws.into_iter().map(|p| p.coords().to_vec()));

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in inits {
        let mut x = start;
        let mut lp = match lv_posterior_eval(&Point::new(x.clone()), data, prior, h) {
            Ok(e) => e.log_posterior,
            Err(Error::Trajectory { .. }) => continue,
            Err(e) => return Err(e),
        };
        let mut step = 0.05;
        for _ in 0..iters {
            let eval = match lv_posterior_eval(&Point::new(x.clone()), data, prior, h) {
                Ok(e) => e,
                Err(Error::Trajectory { .. }) => break,
                Err(e) => return Err(e),
            };
            let norm: f64 = eval.score.iter().map(|s| s * s).sum::<f64>().sqrt();
            let trial: Vec<f64> = x
                .iter()
                .zip(&eval.score)
                .map(|(xi, si)| xi + step * si / norm.max(1.0))
                .collect();
            match lv_posterior_eval(&Point::new(trial.clone()), data, prior, h) {
                Ok(e2) if e2.log_posterior > lp => {
                    x = trial;
                    lp = e2.log_posterior;
                    step = (step * 1.2).min(0.2);
                }
                Ok(_) | Err(Error::Trajectory { .. }) => {
                    step *= 0.5;
                    if step < 1e-10 {
                        break;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        if best.as_ref().map_or(true, |(b, _)| lp > *b) {
            best = Some((lp, x));
        }
    }
    let (_, x) = best.ok_or_else(|| {
        Error::InvalidParameter("no mode-search start produced a solvable trajectory".into())
    })?;
    Ok(Point::new(x))
}

/// Long-chain reference value of the posterior average prey population:
/// `chains` independent MALA chains from `init` at integrator step `h`
/// totalling `total_states` post-burn-in states. The reported error is the
/// between-chain Monte Carlo standard error.
#[allow(clippy::too_many_arguments)]
pub fn lv_truth(
    data: &LvDataset,
    prior: &GaussianSpec,
    init: &Point,
    h: f64,
    total_states: usize,
    chains: usize,
    burn_in: usize,
    step_scale: f64,
    seed: u64,
) -> Result<TruthOracle> {
    if chains == 0 || total_states < chains {
        return Err(Error::InvalidParameter(format!(
            "need chains >= 1 and total_states >= chains, got {chains}, {total_states}"
        )));
    }
    let per_chain = total_states / chains;
    let target = lv_target(data.clone(), prior.clone(), h);
    let s = data.horizon();
    let init = init.clone();

    let chain_means: Vec<f64> = (0..chains)
        .into_par_iter()
        .map(|c| -> Result<f64> {
            let res = mcmc_chain(
                &target,
                &init,
                per_chain,
                burn_in,
                step_scale,
                &SeededStream::new(seed, c as u64),
            )?;
            // Consecutive repeated states (rejections) reuse the last value.
            let mut sum = 0.0;
            let mut last: Option<(&Point, f64)> = None;
            for p in &res.states {
                let v = match last {
                    Some((q, v)) if q == p => v,
                    _ => lv_integrand(p, h, s)?,
                };
                sum += v;
                last = Some((p, v));
            }
            Ok(sum / res.states.len() as f64)
        })
        .collect::<Result<_>>()?;

    let value = chain_means.iter().sum::<f64>() / chains as f64;
    let var = if chains > 1 {
        chain_means.iter().map(|m| (m - value).powi(2)).sum::<f64>() / (chains - 1) as f64
    } else {
        f64::NAN
    };
    let error_estimate = (var / chains as f64).sqrt();
    Ok(TruthOracle {
        method: format!("mala-reference(states={total_states}, chains={chains}, h={h})"),
        value,
        error_estimate,
    })
}

//! The six estimators: plain Monte Carlo, standard and simplified control
//! functionals, multilevel Monte Carlo, and the standard and simplified
//! multilevel control functional estimators, plus the regularized linear
//! solves and diagnostics they share.
//!
//! Conventions throughout: a hierarchy holds integrands `f_0 .. f_L` with
//! `f_{-1} := 0`; level `l` works on the increment `f_l - f_{l-1}`. The
//! standard estimators split each level's points into a fitting set `X0`
//! (size `m`) and an evaluation set `X1` (size `n - m`), and are unbiased
//! when `X1` is i.i.d. from the target -- a requirement that is documented,
//! not enforced, since it cannot be checked from the samples alone. The
//! simplified estimators use all points through the weighted gram formula
//! and accept any sampling design.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{median_heuristic, Point, SqExpKernel, SteinKernel, TargetDensity};

/// Per-level fitting/evaluation split for the standard estimators.
#[derive(Debug, Clone)]
pub struct SampleSplit {
    x0: Vec<Point>,
    x1: Vec<Point>,
}

impl SampleSplit {
    /// `x0` must be nonempty with finite coordinates; `x1` may be empty here
    /// but the standard estimators require at least one evaluation point.
    pub fn new(x0: Vec<Point>, x1: Vec<Point>) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::EmptyInput("fitting set X0"));
        }
        for p in x0.iter().chain(x1.iter()) {
            if !p.is_finite() {
                return Err(Error::NonFinite {
                    context: "sample split",
                    point: p.coords().to_vec(),
                });
            }
        }
        Ok(SampleSplit { x0, x1 })
    }

    /// Split `points` at `m = ceil(ratio * n)`.
    pub fn by_ratio(points: Vec<Point>, ratio: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(Error::InvalidParameter(format!("split ratio {ratio} outside [0,1]")));
        }
        let n = points.len();
        let m = ((ratio * n as f64).ceil() as usize).clamp(1, n);
        let mut points = points;
        let x1 = points.split_off(m);
        Self::new(points, x1)
    }

    pub fn x0(&self) -> &[Point] {
        &self.x0
    }

    pub fn x1(&self) -> &[Point] {
        &self.x1
    }

    pub fn total(&self) -> usize {
        self.x0.len() + self.x1.len()
    }
}

/// One integrand fidelity: an evaluable function plus its per-evaluation
/// cost in seconds.
#[derive(Clone)]
pub struct Level {
    f: Arc<dyn Fn(&Point) -> Result<f64> + Send + Sync>,
    cost: f64,
}

impl Level {
    pub fn new(cost: f64, f: impl Fn(&Point) -> Result<f64> + Send + Sync + 'static) -> Self {
        Level { f: Arc::new(f), cost }
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }
}

impl std::fmt::Debug for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Level").field("cost", &self.cost).finish()
    }
}

/// Ordered integrand hierarchy `f_0 .. f_L` with strictly positive,
/// nondecreasing per-evaluation costs; `f_L` is the target fidelity.
#[derive(Debug, Clone)]
pub struct LevelHierarchy {
    levels: Vec<Level>,
}

impl LevelHierarchy {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::EmptyInput("level hierarchy"));
        }
        for w in levels.windows(2) {
            if w[1].cost < w[0].cost {
                return Err(Error::InvalidParameter(format!(
                    "level costs must be nondecreasing, got {} then {}",
                    w[0].cost, w[1].cost
                )));
            }
        }
        if levels.iter().any(|l| !(l.cost > 0.0)) {
            return Err(Error::InvalidParameter("level costs must be positive".into()));
        }
        Ok(LevelHierarchy { levels })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn cost(&self, level: usize) -> f64 {
        self.levels[level].cost
    }

    pub fn costs(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.cost).collect()
    }

    /// `f_level(x)`.
    pub fn eval(&self, level: usize, x: &Point) -> Result<f64> {
        (self.levels[level].f)(x)
    }

    /// Increment `f_level(x) - f_{level-1}(x)` with `f_{-1} := 0`.
    pub fn eval_increment(&self, level: usize, x: &Point) -> Result<f64> {
        let fine = self.eval(level, x)?;
        if level == 0 {
            Ok(fine)
        } else {
            Ok(fine - self.eval(level - 1, x)?)
        }
    }
}

/// Diagnostics for one regularized solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveInfo {
    /// Jitter actually applied to the diagonal.
    pub jitter: f64,
    /// Condition estimate from the Cholesky factor diagonal.
    pub cond_estimate: f64,
}

/// Solve `(G + lambda I) z = rhs` with `lambda = jitter_scale * mean(diag G)`
/// by Cholesky factorization, escalating `lambda` tenfold up to four times if
/// factorization fails. The final jitter is reported in [`SolveInfo`].
pub fn solve_regularized(
    gram: &DMatrix<f64>,
    rhs: &DMatrix<f64>,
    jitter_scale: f64,
) -> Result<(DMatrix<f64>, SolveInfo)> {
    let n = gram.nrows();
    if n != gram.ncols() {
        return Err(Error::InvalidParameter(format!(
            "gram matrix must be square, got {n}x{}",
            gram.ncols()
        )));
    }
    if rhs.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.nrows() });
    }
    let mean_diag = gram.trace() / n as f64;
    let mut jitter = jitter_scale * mean_diag;
    for attempt in 0..=4 {
        let mut m = gram.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(chol) = m.cholesky() {
            let l = chol.l_dirty();
            let mut dmin = f64::INFINITY;
            let mut dmax = 0.0f64;
            for i in 0..n {
                let d = l[(i, i)];
                dmin = dmin.min(d);
                dmax = dmax.max(d);
            }
            let cond_estimate = (dmax / dmin).powi(2);
            return Ok((chol.solve(rhs), SolveInfo { jitter, cond_estimate }));
        }
        if attempt < 4 {
            // Escalate; seed the ladder when the requested jitter was zero.
            jitter = if jitter > 0.0 { jitter * 10.0 } else { 1e-14 * mean_diag.abs().max(1e-300) };
        }
    }
    Err(Error::SingularGram { jitter })
}

/// Arithmetic mean of the values.
pub fn mc_estimate(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("monte carlo values"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Diagnostics for one control-functional fit.
#[derive(Debug, Clone, Copy)]
pub struct CfDiagnostics {
    /// Weighted-mean coefficient `a = 1' G^-1 f / 1' G^-1 1`.
    pub a: f64,
    pub gram_cond: f64,
    pub jitter: f64,
}

fn cf_weights(
    gram: &DMatrix<f64>,
    values: &[f64],
    jitter_scale: f64,
) -> Result<(DMatrix<f64>, f64, SolveInfo)> {
    let m = gram.nrows();
    let mut rhs = DMatrix::zeros(m, 2);
    for i in 0..m {
        rhs[(i, 0)] = values[i];
        rhs[(i, 1)] = 1.0;
    }
    let (sol, info) = solve_regularized(gram, &rhs, jitter_scale)?;
    let sum_f: f64 = sol.column(0).iter().sum();
    let sum_1: f64 = sol.column(1).iter().sum();
    let a = sum_f / sum_1;
    Ok((sol, a, info))
}

fn cf_standard_core(
    ks: &SteinKernel,
    split: &SampleSplit,
    v0: &[f64],
    v1: &[f64],
    jitter_scale: f64,
) -> Result<(f64, CfDiagnostics)> {
    if split.x1.is_empty() {
        return Err(Error::EmptyInput("standard estimator evaluation set X1"));
    }
    let gram = ks.gram(&split.x0)?;
    let (sol, a, info) = cf_weights(&gram, v0, jitter_scale)?;
    // w = G^-1 (f(X0) - a 1), assembled from the two solve columns.
    let m = split.x0.len();
    let w: Vec<f64> = (0..m).map(|i| sol[(i, 0)] - a * sol[(i, 1)]).collect();
    let cross = ks.cross(&split.x1, &split.x0)?;
    let mut acc = 0.0;
    for (i, &vi) in v1.iter().enumerate() {
        let mut corr = 0.0;
        for j in 0..m {
            corr += cross[(i, j)] * w[j];
        }
        acc += vi - corr;
    }
    let estimate = acc / v1.len() as f64;
    Ok((estimate, CfDiagnostics { a, gram_cond: info.cond_estimate, jitter: info.jitter }))
}

fn cf_simplified_core(
    ks: &SteinKernel,
    points: &[Point],
    values: &[f64],
    jitter_scale: f64,
) -> Result<(f64, CfDiagnostics)> {
    let gram = ks.gram(points)?;
    let (_, a, info) = cf_weights(&gram, values, jitter_scale)?;
    Ok((a, CfDiagnostics { a, gram_cond: info.cond_estimate, jitter: info.jitter }))
}

/// Standard control functional estimator: fit the Stein-kernel interpolant
/// on `X0`, average the corrected residual over `X1`. Unbiased for the
/// target integral when `X1` is i.i.d. from the target.
pub fn cf_standard(
    ks: &SteinKernel,
    f: &dyn Fn(&Point) -> Result<f64>,
    split: &SampleSplit,
    jitter_scale: f64,
) -> Result<f64> {
    let v0: Vec<f64> = split.x0.iter().map(|p| f(p)).collect::<Result<_>>()?;
    let v1: Vec<f64> = split.x1.iter().map(|p| f(p)).collect::<Result<_>>()?;
    cf_standard_core(ks, split, &v0, &v1, jitter_scale).map(|(e, _)| e)
}

/// Simplified control functional estimator
/// `1' G^-1 f(X) / (1' G^-1 1)`; biased but typically lower MSE, exact for
/// constants, and free of sampling-design restrictions.
pub fn cf_simplified(
    ks: &SteinKernel,
    f: &dyn Fn(&Point) -> Result<f64>,
    points: &[Point],
    jitter_scale: f64,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("simplified estimator point set"));
    }
    let values: Vec<f64> = points.iter().map(|p| f(p)).collect::<Result<_>>()?;
    cf_simplified_core(ks, points, &values, jitter_scale).map(|(e, _)| e)
}

/// Per-level entry of an [`EstimateReport`].
#[derive(Debug, Clone)]
pub struct LevelReport {
    pub level: usize,
    /// This level's contribution to the estimate.
    pub contribution: f64,
    /// Weighted-mean coefficient of the control-functional fit (absent for
    /// plain MLMC levels).
    pub a: Option<f64>,
    pub gram_cond: Option<f64>,
    pub jitter: Option<f64>,
    pub lengthscale: Option<f64>,
    /// Fitting-set size (equals `n` for the simplified estimator).
    pub m: usize,
    /// Total points at this level.
    pub n: usize,
}

/// A multilevel estimate with per-level contributions and diagnostics.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub estimate: f64,
    pub per_level: Vec<LevelReport>,
    /// Modeled cost `sum_l n_l C_l` in seconds.
    pub total_cost: f64,
}

impl EstimateReport {
    fn from_levels(per_level: Vec<LevelReport>, hierarchy: &LevelHierarchy) -> Self {
        let estimate = per_level.iter().map(|l| l.contribution).sum();
        let total_cost =
            per_level.iter().map(|l| l.n as f64 * hierarchy.cost(l.level)).sum();
        EstimateReport { estimate, per_level, total_cost }
    }
}

fn check_level_count(hierarchy: &LevelHierarchy, got: usize, what: &str) -> Result<()> {
    if got != hierarchy.num_levels() {
        return Err(Error::InvalidParameter(format!(
            "{what}: expected one entry per level ({}), got {got}",
            hierarchy.num_levels()
        )));
    }
    Ok(())
}

/// Multilevel Monte Carlo: sum over levels of the plain mean of the
/// increments.
pub fn mlmc_estimate(
    hierarchy: &LevelHierarchy,
    samples: &[Vec<Point>],
) -> Result<EstimateReport> {
    check_level_count(hierarchy, samples.len(), "mlmc samples")?;
    let mut per_level = Vec::with_capacity(samples.len());
    for (l, pts) in samples.iter().enumerate() {
        if pts.is_empty() {
            return Err(Error::EmptyInput("mlmc level sample"));
        }
        let incs: Vec<f64> =
            pts.iter().map(|p| hierarchy.eval_increment(l, p)).collect::<Result<_>>()?;
        per_level.push(LevelReport {
            level: l,
            contribution: mc_estimate(&incs)?,
            a: None,
            gram_cond: None,
            jitter: None,
            lengthscale: None,
            m: pts.len(),
            n: pts.len(),
        });
    }
    Ok(EstimateReport::from_levels(per_level, hierarchy))
}

/// Standard multilevel control functional: the standard CF estimator applied
/// to each increment with its own level kernel. Unbiased when every level's
/// `X1` is i.i.d. from the target.
pub fn mlcf_standard(
    kernels: &[SteinKernel],
    hierarchy: &LevelHierarchy,
    splits: &[SampleSplit],
    jitter_scale: f64,
) -> Result<EstimateReport> {
    check_level_count(hierarchy, splits.len(), "mlcf splits")?;
    check_level_count(hierarchy, kernels.len(), "mlcf kernels")?;
    let mut per_level = Vec::with_capacity(splits.len());
    for (l, split) in splits.iter().enumerate() {
        let v0: Vec<f64> =
            split.x0.iter().map(|p| hierarchy.eval_increment(l, p)).collect::<Result<_>>()?;
        let v1: Vec<f64> =
            split.x1.iter().map(|p| hierarchy.eval_increment(l, p)).collect::<Result<_>>()?;
        let (contribution, diag) = cf_standard_core(&kernels[l], split, &v0, &v1, jitter_scale)?;
        per_level.push(LevelReport {
            level: l,
            contribution,
            a: Some(diag.a),
            gram_cond: Some(diag.gram_cond),
            jitter: Some(diag.jitter),
            lengthscale: Some(kernels[l].base().lengthscale()),
            m: split.x0.len(),
            n: split.total(),
        });
    }
    Ok(EstimateReport::from_levels(per_level, hierarchy))
}

/// Simplified multilevel control functional: the simplified CF estimator
/// applied to each increment. Any sampling design is permitted.
pub fn mlcf_simplified(
    kernels: &[SteinKernel],
    hierarchy: &LevelHierarchy,
    points: &[Vec<Point>],
    jitter_scale: f64,
) -> Result<EstimateReport> {
    check_level_count(hierarchy, points.len(), "mlcf points")?;
    check_level_count(hierarchy, kernels.len(), "mlcf kernels")?;
    let mut per_level = Vec::with_capacity(points.len());
    for (l, pts) in points.iter().enumerate() {
        if pts.is_empty() {
            return Err(Error::EmptyInput("mlcf level point set"));
        }
        let values: Vec<f64> =
            pts.iter().map(|p| hierarchy.eval_increment(l, p)).collect::<Result<_>>()?;
        let (contribution, diag) = cf_simplified_core(&kernels[l], pts, &values, jitter_scale)?;
        per_level.push(LevelReport {
            level: l,
            contribution,
            a: Some(diag.a),
            gram_cond: Some(diag.gram_cond),
            jitter: Some(diag.jitter),
            lengthscale: Some(kernels[l].base().lengthscale()),
            m: pts.len(),
            n: pts.len(),
        });
    }
    Ok(EstimateReport::from_levels(per_level, hierarchy))
}

/// Lengthscale selection rule for per-level kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthscaleRule {
    /// Median pairwise distance of the level's fitting set.
    MedianHeuristic,
    Fixed(f64),
}

/// Build one Stein kernel per level, choosing each lengthscale from that
/// level's fitting set (`X0` for the standard estimator, all points for the
/// simplified one).
pub fn level_kernels(
    targets: &[TargetDensity],
    rule: LengthscaleRule,
    amplitude: f64,
    fitting_sets: &[&[Point]],
) -> Result<Vec<SteinKernel>> {
    if targets.len() != fitting_sets.len() {
        return Err(Error::InvalidParameter(format!(
            "level kernels: {} targets vs {} fitting sets",
            targets.len(),
            fitting_sets.len()
        )));
    }
    targets
        .iter()
        .zip(fitting_sets)
        .map(|(target, set)| {
            let l = match rule {
                LengthscaleRule::MedianHeuristic => median_heuristic(set),
                LengthscaleRule::Fixed(l) => l,
            };
            Ok(SteinKernel::new(SqExpKernel::new(l, amplitude)?, target.clone()))
        })
        .collect()
}

/// Fill distance: the largest distance from any probe point to its nearest
/// fitting point. The probe set stands in for the supremum over the domain.
pub fn fill_distance(x0: &[Point], probe: &[Point]) -> Result<f64> {
    if x0.is_empty() || probe.is_empty() {
        return Err(Error::EmptyInput("fill distance point set"));
    }
    let dim = x0[0].dim();
    let mut worst = 0.0f64;
    for p in probe {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
        let mut best = f64::INFINITY;
        for q in x0 {
            if q.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: q.dim() });
            }
            let d2: f64 = p
                .coords()
                .iter()
                .zip(q.coords())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            best = best.min(d2);
        }
        worst = worst.max(best);
    }
    Ok(worst.sqrt())
}

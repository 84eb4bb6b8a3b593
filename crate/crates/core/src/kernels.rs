//! Base kernels with analytic derivatives and Langevin-Stein kernel assembly.
//!
//! The Stein kernel built here is
//!
//! ```text
//! k0(x, y) = div_x div_y k(x, y)
//!          + score(x) . grad_y k(x, y)
//!          + score(y) . grad_x k(x, y)
//!          + (score(x) . score(y)) k(x, y)
//! ```
//!
//! with `score = grad log pi`. Every section `k0(., y)` integrates to zero
//! under `pi`, which is what makes it usable as a control-variate kernel for
//! unnormalized densities: the score is insensitive to the normalization
//! constant.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A point in the d-dimensional model-parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Squared-exponential kernel `k(x,y) = amplitude * exp(-||x-y||^2 / (2 l^2))`.
#[derive(Debug, Clone, Copy)]
pub struct SqExpKernel {
    lengthscale: f64,
    amplitude: f64,
}

impl SqExpKernel {
    /// `lengthscale` and `amplitude` (the variance `k(x,x)`) must be positive.
    pub fn new(lengthscale: f64, amplitude: f64) -> Result<Self> {
        if !(lengthscale > 0.0) || !lengthscale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lengthscale must be positive and finite, got {lengthscale}"
            )));
        }
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be positive and finite, got {amplitude}"
            )));
        }
        Ok(SqExpKernel { lengthscale, amplitude })
    }

    /// Unit-amplitude kernel with the given lengthscale.
    pub fn with_lengthscale(lengthscale: f64) -> Result<Self> {
        Self::new(lengthscale, 1.0)
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    fn check_dims(&self, x: &Point, y: &Point) -> Result<()> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
        }
        Ok(())
    }

    /// k(x, y).
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_dims(x, y)?;
        Ok(self.eval_unchecked(x.coords(), y.coords()))
    }

    #[inline]
    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let l2 = self.lengthscale * self.lengthscale;
        self.amplitude * (-sq_dist(x, y) / (2.0 * l2)).exp()
    }

    /// Gradient of k with respect to its first argument:
    /// `grad_x k = -((x - y) / l^2) k(x, y)`.
    pub fn grad_x(&self, x: &Point, y: &Point) -> Result<Vec<f64>> {
        self.check_dims(x, y)?;
        let k = self.eval_unchecked(x.coords(), y.coords());
        let l2 = self.lengthscale * self.lengthscale;
        Ok(x.coords()
            .iter()
            .zip(y.coords())
            .map(|(a, b)| -(a - b) / l2 * k)
            .collect())
    }

    /// Gradient of k with respect to its second argument:
    /// `grad_y k = +((x - y) / l^2) k(x, y)`.
    pub fn grad_y(&self, x: &Point, y: &Point) -> Result<Vec<f64>> {
        let mut g = self.grad_x(x, y)?;
        for gi in &mut g {
            *gi = -*gi;
        }
        Ok(g)
    }

    /// Mixed divergence `div_x div_y k = (d / l^2 - ||x-y||^2 / l^4) k(x, y)`.
    pub fn div_grad(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_dims(x, y)?;
        let l2 = self.lengthscale * self.lengthscale;
        let r2 = sq_dist(x.coords(), y.coords());
        let k = self.eval_unchecked(x.coords(), y.coords());
        Ok((x.dim() as f64 / l2 - r2 / (l2 * l2)) * k)
    }
}

/// One evaluation of a target density at a point.
#[derive(Debug, Clone)]
pub struct DensityEval {
    /// `grad log pi(x)`; length equals the target dimension.
    pub score: Vec<f64>,
    /// Unnormalized `log pi(x)`, when the target can provide it. A value of
    /// `-inf` marks a point outside the computable support (e.g. a failed
    /// trajectory); samplers treat such proposals as rejectable.
    pub log_density: Option<f64>,
}

type DensityFn = dyn Fn(&Point) -> Result<DensityEval> + Send + Sync;

/// A target distribution known through its score function `grad log pi`,
/// optionally with an unnormalized log-density (needed for MCMC).
///
/// Cloning is cheap; the evaluation closure is shared.
#[derive(Clone)]
pub struct TargetDensity {
    dim: usize,
    eval: Arc<DensityFn>,
}

impl fmt::Debug for TargetDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetDensity").field("dim", &self.dim).finish()
    }
}

impl TargetDensity {
    pub fn new(
        dim: usize,
        eval: impl Fn(&Point) -> Result<DensityEval> + Send + Sync + 'static,
    ) -> Self {
        TargetDensity { dim, eval: Arc::new(eval) }
    }

    /// Target known only through its score.
    pub fn from_score(
        dim: usize,
        score: impl Fn(&Point) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self::new(dim, move |x| Ok(DensityEval { score: score(x), log_density: None }))
    }

    /// Target known only through an unnormalized log-density; the score falls
    /// back to central finite differences with step `1e-6 * (1 + |x_i|)`.
    pub fn from_log_density(
        dim: usize,
        log_density: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(dim, move |x| {
            let mut score = vec![0.0; x.dim()];
            let mut coords = x.coords().to_vec();
            for i in 0..x.dim() {
                let h = 1e-6 * (1.0 + coords[i].abs());
                let orig = coords[i];
                coords[i] = orig + h;
                let hi = log_density(&Point::new(coords.clone()));
                coords[i] = orig - h;
                let lo = log_density(&Point::new(coords.clone()));
                coords[i] = orig;
                score[i] = (hi - lo) / (2.0 * h);
            }
            Ok(DensityEval { score, log_density: Some(log_density(x)) })
        })
    }

    /// Independent Gaussian target with the given componentwise mean and sd.
    pub fn gaussian(spec: &crate::sampling::GaussianSpec) -> Self {
        let mean = spec.mean().to_vec();
        let sd = spec.sd().to_vec();
        Self::new(mean.len(), move |x| {
            let mut score = Vec::with_capacity(mean.len());
            let mut logp = 0.0;
            for i in 0..mean.len() {
                let z = x[i] - mean[i];
                let v = sd[i] * sd[i];
                score.push(-z / v);
                logp -= z * z / (2.0 * v);
            }
            Ok(DensityEval { score, log_density: Some(logp) })
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &Point) -> Result<DensityEval> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.dim() });
        }
        (self.eval)(x)
    }

    /// Score at `x`, validated to be finite and of the right length.
    pub fn score(&self, x: &Point) -> Result<Vec<f64>> {
        let eval = self.eval(x)?;
        if eval.score.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: eval.score.len() });
        }
        if eval.score.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite { context: "score", point: x.coords().to_vec() });
        }
        Ok(eval.score)
    }
}

/// Langevin-Stein kernel `k0` built from a base kernel and a target density.
#[derive(Debug, Clone)]
pub struct SteinKernel {
    base: SqExpKernel,
    target: TargetDensity,
}

impl SteinKernel {
    pub fn new(base: SqExpKernel, target: TargetDensity) -> Self {
        SteinKernel { base, target }
    }

    pub fn base(&self) -> &SqExpKernel {
        &self.base
    }

    pub fn target(&self) -> &TargetDensity {
        &self.target
    }

    /// k0(x, y).
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        let sx = self.target.score(x)?;
        let sy = self.target.score(y)?;
        self.eval_with_scores(x, y, &sx, &sy)
    }

    /// k0 with the scores supplied by the caller (used by gram assembly so
    /// each point's score is computed once).
    fn eval_with_scores(&self, x: &Point, y: &Point, sx: &[f64], sy: &[f64]) -> Result<f64> {
        self.base.check_dims(x, y)?;
        let xc = x.coords();
        let yc = y.coords();
        let l2 = self.base.lengthscale * self.base.lengthscale;
        let k = self.base.eval_unchecked(xc, yc);
        let r2 = sq_dist(xc, yc);
        let d = xc.len() as f64;

        let div_grad = (d / l2 - r2 / (l2 * l2)) * k;
        let mut sx_grad_y = 0.0; // score(x) . grad_y k
        let mut sy_grad_x = 0.0; // score(y) . grad_x k
        let mut sx_sy = 0.0;
        for i in 0..xc.len() {
            let diff = (xc[i] - yc[i]) / l2;
            sx_grad_y += sx[i] * diff * k;
            sy_grad_x += sy[i] * (-diff) * k;
            sx_sy += sx[i] * sy[i];
        }
        Ok(div_grad + sx_grad_y + sy_grad_x + sx_sy * k)
    }

    fn scores(&self, points: &[Point]) -> Result<Vec<Vec<f64>>> {
        points.iter().map(|p| self.target.score(p)).collect()
    }

    /// Symmetric gram matrix `k0(X, X)`.
    pub fn gram(&self, points: &[Point]) -> Result<DMatrix<f64>> {
        if points.is_empty() {
            return Err(Error::EmptyInput("gram point list"));
        }
        let scores = self.scores(points)?;
        let n = points.len();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.eval_with_scores(&points[i], &points[j], &scores[i], &scores[j])?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// Cross-gram matrix `k0(X1, X0)` with shape `|X1| x |X0|`.
    pub fn cross(&self, x1: &[Point], x0: &[Point]) -> Result<DMatrix<f64>> {
        if x1.is_empty() || x0.is_empty() {
            return Err(Error::EmptyInput("cross-gram point list"));
        }
        let s1 = self.scores(x1)?;
        let s0 = self.scores(x0)?;
        let mut g = DMatrix::zeros(x1.len(), x0.len());
        for i in 0..x1.len() {
            for j in 0..x0.len() {
                g[(i, j)] = self.eval_with_scores(&x1[i], &x0[j], &s1[i], &s0[j])?;
            }
        }
        Ok(g)
    }
}

/// Median pairwise distance of a point set; the standard scale-free default
/// for the squared-exponential lengthscale. Returns 1.0 when the set has
/// fewer than two distinct points.
pub fn median_heuristic(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 1.0;
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(sq_dist(points[i].coords(), points[j].coords()).sqrt());
        }
    }
    dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("non-finite distance"));
    let med = dists[dists.len() / 2];
    if med > 0.0 {
        med
    } else {
        1.0
    }
}

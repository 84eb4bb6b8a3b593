//! Experiment configuration: TOML schema, defaults, and validation.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use mlcf_core::estimators::LengthscaleRule;
use mlcf_core::models::lv::LvDataset;
use mlcf_core::models::NoiseScale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemId {
    Bvp,
    LotkaVolterra,
    Synthetic,
}

impl std::fmt::Display for ProblemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProblemId::Bvp => write!(f, "bvp"),
            ProblemId::LotkaVolterra => write!(f, "lotka-volterra"),
            ProblemId::Synthetic => write!(f, "synthetic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Mc,
    CfStandard,
    CfSimplified,
    Mlmc,
    MlcfStandard,
    MlcfSimplified,
}

impl EstimatorKind {
    pub fn is_multilevel(self) -> bool {
        matches!(self, EstimatorKind::Mlmc | EstimatorKind::MlcfStandard | EstimatorKind::MlcfSimplified)
    }

    /// The standard control-functional forms are unbiased only for i.i.d.
    /// evaluation points.
    pub fn requires_iid(self) -> bool {
        matches!(self, EstimatorKind::CfStandard | EstimatorKind::MlcfStandard)
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Mc => "mc",
            EstimatorKind::CfStandard => "cf-standard",
            EstimatorKind::CfSimplified => "cf-simplified",
            EstimatorKind::Mlmc => "mlmc",
            EstimatorKind::MlcfStandard => "mlcf-standard",
            EstimatorKind::MlcfSimplified => "mlcf-simplified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Iid,
    Sobol,
    Lhs,
    Mcmc,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Iid => "iid",
            SamplerKind::Sobol => "sobol",
            SamplerKind::Lhs => "lhs",
            SamplerKind::Mcmc => "mcmc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub estimator: EstimatorKind,
    pub sampler: SamplerKind,
}

impl std::fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({})", self.estimator.name(), self.sampler.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetPolicy {
    PaperPreset,
    Explicit,
    MlmcOptimal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub policy: BudgetPolicy,
    /// Budget in seconds (preset and mlmc-optimal policies).
    #[serde(default)]
    pub t_seconds: Option<f64>,
    /// Per-level sizes (explicit policy).
    #[serde(default)]
    pub levels: Option<Vec<usize>>,
    /// Single-level size for mc / cf methods (explicit policy).
    #[serde(default)]
    pub single: Option<usize>,
    /// Pilot sample size per level for the mlmc-optimal policy.
    #[serde(default = "default_pilot")]
    pub pilot: usize,
}

fn default_pilot() -> usize {
    32
}

/// Lengthscale choice: the string `"median"` or a fixed positive number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthscaleSpec {
    Named(String),
    Fixed(f64),
}

impl LengthscaleSpec {
    pub fn rule(&self) -> Result<LengthscaleRule> {
        match self {
            LengthscaleSpec::Named(s) if s == "median" => Ok(LengthscaleRule::MedianHeuristic),
            LengthscaleSpec::Named(s) => bail!("unknown lengthscale rule {s:?}; use \"median\" or a number"),
            LengthscaleSpec::Fixed(l) if *l > 0.0 => Ok(LengthscaleRule::Fixed(*l)),
            LengthscaleSpec::Fixed(l) => bail!("lengthscale must be positive, got {l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub lengthscale: LengthscaleSpec,
    pub amplitude: f64,
    pub jitter_scale: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            lengthscale: LengthscaleSpec::Named("median".into()),
            amplitude: 1.0,
            jitter_scale: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    /// Fitting fraction: `m = ceil(ratio * n)` per level.
    pub ratio: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { ratio: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcConfig {
    pub burn_in: usize,
    pub step_scale: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig { burn_in: 300, step_scale: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostSource {
    /// Published per-level cost vectors.
    Paper,
    /// Time 50 evaluations per level at build time.
    Measure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseScaleConfig {
    Sd,
    Variance,
}

impl From<NoiseScaleConfig> for NoiseScale {
    fn from(v: NoiseScaleConfig) -> NoiseScale {
        match v {
            NoiseScaleConfig::Sd => NoiseScale::Sd,
            NoiseScaleConfig::Variance => NoiseScale::Variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BvpConfig {
    /// Grid steps as integer reciprocals `h = 1/k`.
    pub inv_steps: Vec<usize>,
    /// Reading of the x1 noise scale 0.2: standard deviation (default) or
    /// variance. Under the variance reading roughly 1.3% of draws degenerate
    /// the coefficient and fail their replication.
    pub x1_noise: NoiseScaleConfig,
    pub costs: CostSource,
}

impl Default for BvpConfig {
    fn default() -> Self {
        BvpConfig {
            inv_steps: mlcf_core::models::bvp::BVP_DEFAULT_INV_STEPS.to_vec(),
            x1_noise: NoiseScaleConfig::Sd,
            costs: CostSource::Paper,
        }
    }
}

impl BvpConfig {
    pub fn steps(&self) -> Vec<f64> {
        self.inv_steps.iter().map(|&k| 1.0 / k as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LvConfig {
    pub steps: Vec<f64>,
    /// Path to the hare-lynx CSV (`year,hare,lynx`, populations in
    /// thousands), relative to the working directory.
    pub data: String,
    /// Observation/integration horizon; defaults to the dataset span.
    pub horizon: Option<f64>,
    pub costs: CostSource,
}

impl Default for LvConfig {
    fn default() -> Self {
        LvConfig {
            steps: mlcf_core::models::lv::LV_DEFAULT_STEPS.to_vec(),
            data: "data/hare_lynx.csv".into(),
            horizon: None,
            costs: CostSource::Paper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruthConfig {
    /// Fixed reference value (skips the oracle computation).
    pub value: Option<f64>,
    /// Long-chain reference parameters for the Lotka-Volterra problem.
    pub lv_states: usize,
    pub lv_step: f64,
    pub lv_chains: usize,
    pub lv_burn_in: usize,
    /// Gauss-Hermite nodes per dimension for the BVP oracle.
    pub bvp_nodes: usize,
    pub bvp_fine_inv_step: usize,
}

impl Default for TruthConfig {
    fn default() -> Self {
        TruthConfig {
            value: None,
            lv_states: 200_000,
            lv_step: 0.01,
            lv_chains: 8,
            lv_burn_in: 2_000,
            bvp_nodes: 64,
            bvp_fine_inv_step: 1024,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub methods: Vec<MethodSpec>,
    pub budget: BudgetConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default)]
    pub bvp: BvpConfig,
    #[serde(default)]
    pub lv: LvConfig,
    #[serde(default)]
    pub truth: TruthConfig,
}

fn default_seed() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            bail!("replications must be >= 1");
        }
        if self.methods.is_empty() {
            bail!("at least one method is required");
        }
        for m in &self.methods {
            if m.estimator.requires_iid() && m.sampler != SamplerKind::Iid {
                bail!(
                    "{} with sampler {:?} is invalid: the standard control-functional \
                     estimators are unbiased only when the evaluation points are i.i.d. \
                     from the target; use sampler = \"iid\" or the simplified variant",
                    m.estimator.name(),
                    m.sampler.name()
                );
            }
            if self.problem == ProblemId::LotkaVolterra && m.sampler != SamplerKind::Mcmc {
                bail!(
                    "problem \"lotka-volterra\" supports only the mcmc sampler \
                     (the posterior cannot be sampled directly); got {}",
                    m
                );
            }
        }
        match self.budget.policy {
            BudgetPolicy::Explicit => {
                let levels = self
                    .budget
                    .levels
                    .as_ref()
                    .context("budget.policy = \"explicit\" requires budget.levels")?;
                if levels.iter().any(|&n| n == 0) {
                    bail!("explicit level sizes must be positive");
                }
                if self.methods.iter().any(|m| !m.estimator.is_multilevel())
                    && self.budget.single.is_none()
                {
                    bail!("single-level methods need budget.single under the explicit policy");
                }
            }
            BudgetPolicy::PaperPreset | BudgetPolicy::MlmcOptimal => {
                let t = self
                    .budget
                    .t_seconds
                    .context("this budget policy requires budget.t_seconds")?;
                if !(t > 0.0) {
                    bail!("budget.t_seconds must be positive, got {t}");
                }
            }
        }
        if !(self.split.ratio > 0.0 && self.split.ratio <= 1.0) {
            bail!("split.ratio must lie in (0, 1], got {}", self.split.ratio);
        }
        if self.split.ratio >= 1.0 && self.methods.iter().any(|m| m.estimator.requires_iid()) {
            bail!(
                "split.ratio = 1 leaves the standard estimators no evaluation points; \
                 use a ratio below 1"
            );
        }
        if !(self.kernel.amplitude > 0.0) {
            bail!("kernel.amplitude must be positive");
        }
        if self.kernel.jitter_scale < 0.0 {
            bail!("kernel.jitter_scale must be nonnegative");
        }
        self.kernel.lengthscale.rule()?;
        if self.problem == ProblemId::Bvp && self.bvp.inv_steps.is_empty() {
            bail!("bvp.inv_steps must be nonempty");
        }
        if self.problem == ProblemId::LotkaVolterra && self.lv.steps.is_empty() {
            bail!("lv.steps must be nonempty");
        }
        Ok(())
    }
}

/// Load the hare-lynx CSV (`year,hare,lynx`); observation times become year
/// offsets from the first row.
pub fn load_hare_lynx(path: impl AsRef<Path>) -> Result<LvDataset> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening dataset {}", path.display()))?;
    let mut years = Vec::new();
    let mut hare = Vec::new();
    let mut lynx = Vec::new();
    for record in reader.deserialize() {
        let (year, h, l): (f64, f64, f64) = record.context("parsing dataset row")?;
        years.push(year);
        hare.push(h);
        lynx.push(l);
    }
    if years.is_empty() {
        bail!("dataset {} has no rows", path.display());
    }
    let t0 = years[0];
    let times = years.iter().map(|y| y - t0).collect();
    Ok(LvDataset::new(times, hare, lynx)?)
}

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use mlcf_cli::config::{CostSource, ExperimentConfig, ProblemId};
use mlcf_cli::runner;
use mlcf_cli::{allocate_budget, emit_results, AllocationPolicy};

#[derive(Parser)]
#[command(name = "mlcf", about = "Multilevel control functional experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write results.csv + summary.json.
    Run {
        /// TOML experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Recalibrate per-level costs by timing evaluations instead of
        /// using the published vectors.
        #[arg(long)]
        measure_costs: bool,
    },
    /// Print the per-level sample sizes for a problem and budget.
    Allocate {
        #[arg(long, value_enum)]
        problem: ProblemArg,
        /// Budget in seconds.
        #[arg(long)]
        budget: f64,
        #[arg(long, value_enum, default_value = "paper-preset")]
        policy: PolicyArg,
        /// Pilot samples per level for the mlmc-optimal policy.
        #[arg(long, default_value_t = 32)]
        pilot: usize,
        /// Config file supplying hierarchy settings for mlmc-optimal pilots.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Report per-level sampling and kernel diagnostics for a config.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Bvp,
    LotkaVolterra,
    Synthetic,
}

impl From<ProblemArg> for ProblemId {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Bvp => ProblemId::Bvp,
            ProblemArg::LotkaVolterra => ProblemId::LotkaVolterra,
            ProblemArg::Synthetic => ProblemId::Synthetic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    PaperPreset,
    MlmcOptimal,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, seed, out, measure_costs } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if measure_costs {
                cfg.bvp.costs = CostSource::Measure;
                cfg.lv.costs = CostSource::Measure;
            }
            let result = runner::run_experiment(&cfg)?;
            let (csv_path, summary_path) = emit_results(&result, &out)?;
            println!(
                "problem {}  truth {:.6} (+/- {:.2e}, {})",
                result.problem, result.truth.value, result.truth.error_estimate, result.truth.method
            );
            println!("allocation: levels {:?}, single cf {}", result.allocation.levels, result.allocation.single_cf);
            for m in &result.methods {
                println!(
                    "{:>16}({:<5})  median |err| {:.6e}  iqr [{:.3e}, {:.3e}]  failures {}",
                    m.estimator, m.sampler, m.median_abs_error, m.q25_abs_error, m.q75_abs_error, m.failures
                );
            }
            println!("wrote {} and {}", csv_path.display(), summary_path.display());
            Ok(())
        }
        Command::Allocate { problem, budget, policy, pilot, config } => {
            let problem: ProblemId = problem.into();
            let (costs, variances) = match policy {
                PolicyArg::PaperPreset => (preset_costs(problem)?, None),
                PolicyArg::MlmcOptimal => {
                    let cfg_path =
                        config.context("--policy mlmc-optimal needs --config for the pilot run")?;
                    let mut cfg = ExperimentConfig::load(&cfg_path)?;
                    cfg.budget.pilot = pilot;
                    let built = runner::build_problem(&cfg)?;
                    let vars = runner::pilot_variances(&cfg, &built, pilot)?;
                    (built.hierarchy.costs(), Some(vars))
                }
            };
            let policy = match policy {
                PolicyArg::PaperPreset => AllocationPolicy::PaperPreset,
                PolicyArg::MlmcOptimal => AllocationPolicy::MlmcOptimal,
            };
            let alloc = allocate_budget(problem, &costs, budget, policy, variances.as_deref())?;
            println!("problem {problem}, budget {budget} s");
            for (l, n) in alloc.levels.iter().enumerate() {
                println!("  level {l}: n = {n}");
            }
            println!("  single-level cf: n = {}", alloc.single_cf);
            if let Some(mcmc) = alloc.single_mcmc {
                println!("  plain mcmc:      n = {mcmc}");
            }
            Ok(())
        }
        Command::Diagnose { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = runner::diagnose(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

fn preset_costs(problem: ProblemId) -> Result<Vec<f64>> {
    match problem {
        ProblemId::Bvp => Ok(mlcf_core::models::bvp::BVP_PAPER_COSTS.to_vec()),
        ProblemId::LotkaVolterra => Ok(mlcf_core::models::lv::LV_PAPER_COSTS.to_vec()),
        ProblemId::Synthetic => {
            anyhow::bail!("the synthetic problem has no preset cost vector; use a config")
        }
    }
}

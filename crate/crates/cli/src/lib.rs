//! Experiment harness for multilevel control functional estimation: config
//! parsing, budget allocation, the replication runner, diagnostics, and
//! result serialization. The `mlcf` binary wraps these as subcommands.

pub mod allocate;
pub mod config;
pub mod emit;
pub mod runner;
pub mod stats;

pub use allocate::{allocate_budget, Allocation, AllocationPolicy};
pub use config::{EstimatorKind, ExperimentConfig, MethodSpec, ProblemId, SamplerKind};
pub use emit::emit_results;
pub use runner::{build_problem, diagnose, run_experiment, RunResult};

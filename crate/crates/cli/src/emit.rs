//! Result serialization: per-replication CSV and a JSON summary.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::runner::RunResult;

/// Write `results.csv` (one row per replication x method, failures omitted)
/// and `summary.json` into `out_dir`. Returns the two paths.
pub fn emit_results(result: &RunResult, out_dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let csv_path = out_dir.join("results.csv");
    let mut writer = csv::Writer::from_path(&csv_path)
        .with_context(|| format!("creating {}", csv_path.display()))?;
    writer.write_record(["method", "sampler", "replication", "estimate", "abs_error", "cost_seconds"])?;
    for m in &result.methods {
        for r in 0..m.estimates.len() {
            if let (Some(est), Some(err), Some(cost)) =
                (m.estimates[r], m.abs_errors[r], m.cost_seconds[r])
            {
                writer.write_record([
                    m.estimator.clone(),
                    m.sampler.clone(),
                    r.to_string(),
                    format!("{est}"),
                    format!("{err}"),
                    format!("{cost}"),
                ])?;
            }
        }
    }
    writer.flush()?;

    let summary_path = out_dir.join("summary.json");
    let summary = Summary::from(result);
    let file = fs::File::create(&summary_path)
        .with_context(|| format!("creating {}", summary_path.display()))?;
    serde_json::to_writer_pretty(file, &summary)?;
    Ok((csv_path, summary_path))
}

#[derive(Serialize)]
struct Summary<'a> {
    problem: &'a str,
    replications: usize,
    seed: u64,
    truth: &'a crate::runner::TruthSummary,
    allocation: &'a crate::allocate::Allocation,
    methods: Vec<MethodSummary<'a>>,
    wall_seconds: f64,
    config: &'a crate::config::ExperimentConfig,
}

#[derive(Serialize)]
struct MethodSummary<'a> {
    estimator: &'a str,
    sampler: &'a str,
    failures: usize,
    first_failure: Option<&'a str>,
    median_abs_error: f64,
    q25_abs_error: f64,
    q75_abs_error: f64,
    mean_cost_seconds: f64,
}

impl<'a> From<&'a RunResult> for Summary<'a> {
    fn from(r: &'a RunResult) -> Self {
        Summary {
            problem: &r.problem,
            replications: r.replications,
            seed: r.seed,
            truth: &r.truth,
            allocation: &r.allocation,
            methods: r
                .methods
                .iter()
                .map(|m| {
                    let costs: Vec<f64> = m.cost_seconds.iter().flatten().copied().collect();
                    MethodSummary {
                        estimator: &m.estimator,
                        sampler: &m.sampler,
                        failures: m.failures,
                        first_failure: m.first_failure.as_deref(),
                        median_abs_error: m.median_abs_error,
                        q25_abs_error: m.q25_abs_error,
                        q75_abs_error: m.q75_abs_error,
                        mean_cost_seconds: if costs.is_empty() {
                            f64::NAN
                        } else {
                            costs.iter().sum::<f64>() / costs.len() as f64
                        },
                    }
                })
                .collect(),
            wall_seconds: r.wall_seconds,
            config: &r.config,
        }
    }
}

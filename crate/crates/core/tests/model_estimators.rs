//! Estimators driven by the benchmark models, checked against the
//! quadrature truth oracle.

use mlcf_core::estimators::mlmc_estimate;
use mlcf_core::models::bvp::{
    bvp_spec, bvp_truth, make_bvp_hierarchy, BvpTruthOptions, BVP_DEFAULT_INV_STEPS,
    BVP_PAPER_COSTS,
};
use mlcf_core::models::NoiseScale;
use mlcf_core::sampling::{sample_iid, SeededStream};

/// MLMC on the boundary-value hierarchy is unbiased: over 100 replications
/// the mean estimate lands within three standard errors of the fine-grid
/// tensor Gauss-Hermite truth.
#[test]
fn mlmc_on_bvp_hierarchy_is_unbiased_against_quadrature() {
    let steps: Vec<f64> = BVP_DEFAULT_INV_STEPS.iter().map(|&k| 1.0 / k as f64).collect();
    let hierarchy = make_bvp_hierarchy(&steps, Some(&BVP_PAPER_COSTS)).unwrap();
    let spec = bvp_spec(NoiseScale::Sd);
    let truth = bvp_truth(&spec, BvpTruthOptions::default()).unwrap();

    let reps = 100u64;
    let sizes = [70usize, 10, 2];
    let estimates: Vec<f64> = (0..reps)
        .map(|r| {
            let samples: Vec<_> = sizes
                .iter()
                .enumerate()
                .map(|(l, &n)| sample_iid(&spec, n, &SeededStream::new(55_000 + l as u64, r)))
                .collect();
            mlmc_estimate(&hierarchy, &samples).unwrap().estimate
        })
        .collect();
    let mean = estimates.iter().sum::<f64>() / reps as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let se = (var / reps as f64).sqrt();
    assert!(
        (mean - truth.value).abs() < 3.0 * se,
        "mean {mean} vs truth {} (se {se})",
        truth.value
    );

    // The estimate carries a discretization bias from the top level; it
    // should be small next to the sampling noise at these sizes.
    assert!(truth.error_estimate < 1e-5 * truth.value.abs());
}

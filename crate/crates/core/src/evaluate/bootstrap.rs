//! Bootstrap stability of subspace estimates on a fixed data set.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use super::{mean_sd, median, with_workers};
use crate::error::{Result, SdrError};
use crate::estimators::{estimate_subspace, DataSet, MethodSpec};
use crate::linalg::{subspace_distance, trace_correlation};
use crate::simgen::SimRng;

const MAX_RETRIES: usize = 10;

/// Per-method bootstrap summary.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub spec: MethodSpec,
    pub mean_dist: f64,
    pub sd_dist: f64,
    /// Mean of `dist²`.
    pub mse_dist: f64,
    /// Median of `1 − r` with `r` the trace correlation.
    pub median_one_minus_r: f64,
    pub sd_one_minus_r: f64,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapReport {
    pub resamples: usize,
    pub methods: Vec<BootstrapSummary>,
}

/// Compares each method's full-data estimate with its estimates on `resamples`
/// row resamples drawn with replacement. Resample `b` is drawn from seed
/// `seed ^ b` and shared by all methods.
pub fn bootstrap_eval(
    data: &DataSet,
    methods: &[MethodSpec],
    d: usize,
    resamples: usize,
    seed: u64,
    workers: usize,
) -> Result<BootstrapReport> {
    bootstrap_eval_with(data, methods, d, resamples, seed, workers, |rng, n| {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    })
}

/// [`bootstrap_eval`] with a caller-supplied resampler mapping
/// `(rng, n)` to the selected row indices.
pub fn bootstrap_eval_with<F>(
    data: &DataSet,
    methods: &[MethodSpec],
    d: usize,
    resamples: usize,
    seed: u64,
    workers: usize,
    resampler: F,
) -> Result<BootstrapReport>
where
    F: Fn(&mut SimRng, usize) -> Vec<usize> + Sync,
{
    if resamples == 0 {
        return Err(SdrError::InvalidSpec("bootstrap needs at least one resample".into()));
    }
    let needed = (data.p() + 2).max(10);
    if data.n() < needed {
        return Err(SdrError::TooFewSamples { needed, got: data.n() });
    }
    let full = methods.iter().map(|m| estimate_subspace(data, m, d, 0.0)).collect::<Result<Vec<_>>>()?;

    let one = |b: usize| -> Vec<Result<(f64, f64)>> {
        let mut rng = SimRng::seed_from_u64(seed ^ b as u64);
        for _ in 0..=MAX_RETRIES {
            let rows = resampler(&mut rng, data.n());
            let sample = data.select_rows(&rows);
            let estimates: Vec<_> = methods.iter().map(|m| estimate_subspace(&sample, m, d, 0.0)).collect();
            if estimates.iter().any(|e| matches!(e, Err(SdrError::SingularCovariance { .. }))) {
                continue;
            }
            return estimates
                .into_iter()
                .zip(&full)
                .map(|(est, reference)| {
                    let est = est?;
                    let dist = subspace_distance(&reference.basis, &est.basis)?;
                    let r = trace_correlation(&reference.basis, &est.basis)?;
                    Ok((dist, 1.0 - r))
                })
                .collect();
        }
        vec![Err(SdrError::SingularCovariance { min_eigenvalue: 0.0 }); methods.len()]
    };
    let outcomes: Vec<Vec<Result<(f64, f64)>>> =
        with_workers(workers, || (0..resamples).into_par_iter().map(one).collect())?;

    let summaries = methods
        .iter()
        .enumerate()
        .map(|(m, spec)| {
            let ok: Vec<(f64, f64)> = outcomes.iter().filter_map(|o| o[m].as_ref().ok().copied()).collect();
            let dists: Vec<f64> = ok.iter().map(|o| o.0).collect();
            let gaps: Vec<f64> = ok.iter().map(|o| o.1).collect();
            let (mean_dist, sd_dist) = mean_sd(&dists);
            let mse_dist = dists.iter().map(|x| x * x).sum::<f64>() / dists.len() as f64;
            BootstrapSummary {
                spec: *spec,
                mean_dist,
                sd_dist,
                mse_dist,
                median_one_minus_r: median(&gaps),
                sd_one_minus_r: mean_sd(&gaps).1,
                failed: resamples - ok.len(),
            }
        })
        .collect();
    Ok(BootstrapReport { resamples, methods: summaries })
}

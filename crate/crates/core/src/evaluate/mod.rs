//! Monte Carlo experiments, bootstrap stability and runtime benchmarks.
//!
//! Replications run in parallel on a dedicated thread pool, but each one
//! draws from its own seed and results are collected in replication order,
//! so every number reported here is independent of the worker count.

mod bench;
mod bootstrap;

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Result, SdrError};
use crate::estimators::{candidate_matrix, center, subspace_from_candidate, DataSet, MethodSpec};
use crate::kernels::KernelSpec;
use crate::linalg::{subspace_distance, SubspaceEstimate};
use crate::simgen::{generate, SimSpec};

pub use bench::{runtime_bench, BenchReport, BenchRow, BenchSlope};
pub use bootstrap::{bootstrap_eval, bootstrap_eval_with, BootstrapReport, BootstrapSummary};

/// A simulation template, the methods to compare and the replication count.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub sim: SimSpec,
    pub methods: Vec<MethodSpec>,
    pub replications: usize,
    /// Assumed structural dimension.
    pub d: usize,
}

impl ExperimentPlan {
    /// A plan that assumes the design's true dimension.
    pub fn new(sim: SimSpec, methods: Vec<MethodSpec>, replications: usize) -> Result<Self> {
        let d = sim.example().d();
        Self::with_dimension(sim, methods, replications, d)
    }

    pub fn with_dimension(sim: SimSpec, methods: Vec<MethodSpec>, replications: usize, d: usize) -> Result<Self> {
        if replications == 0 {
            return Err(SdrError::InvalidSpec("replications must be at least 1".into()));
        }
        if methods.is_empty() {
            return Err(SdrError::InvalidSpec("no methods to run".into()));
        }
        if d == 0 || d > sim.p() {
            return Err(SdrError::DimensionMismatch(format!("dimension {d} must lie in 1..={}", sim.p())));
        }
        Ok(Self { sim, methods, replications, d })
    }
}

/// Per-method aggregate over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub spec: MethodSpec,
    pub mean_dist: f64,
    /// Sample SD (divisor `reps − 1`); 0 with fewer than two successes.
    pub sd_dist: f64,
    /// Mean seconds spent building the candidate matrix.
    pub mean_runtime_s: f64,
    /// Mean seconds for the whole estimate, eigendecomposition included.
    pub mean_runtime_inclusive_s: f64,
    pub failed: usize,
    /// `dist(Γ̂, Γ₀)` of every successful replication, in replication order.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub methods: Vec<MethodResult>,
}

/// Mean and sample standard deviation; SD is 0 for fewer than two values.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        (sorted[m - 1] + sorted[m]) / 2.0
    }
}

/// Runs `f` on a pool of `workers` threads (0 means one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SdrError::InvalidSpec(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// One timed estimate: the candidate matrix alone, then the full estimate.
#[derive(Debug, Clone)]
pub(crate) struct TimedEstimate {
    pub estimate: SubspaceEstimate,
    pub exclusive_s: f64,
    pub inclusive_s: f64,
}

pub(crate) fn timed_estimate(data: &DataSet, spec: &MethodSpec, d: usize) -> Result<TimedEstimate> {
    let start = Instant::now();
    let lambda = candidate_matrix(data, spec)?;
    let exclusive_s = start.elapsed().as_secs_f64();
    let cov = center(data.x())?.cov;
    let estimate = subspace_from_candidate(&cov, &lambda, d, 0.0)?;
    let inclusive_s = start.elapsed().as_secs_f64();
    Ok(TimedEstimate { estimate, exclusive_s, inclusive_s })
}

type Outcome = Result<(f64, f64, f64)>;

fn replicate(plan: &ExperimentPlan, index: usize) -> Vec<Outcome> {
    let sample = match generate(&plan.sim.replication(index as u64)) {
        Ok(s) => s,
        Err(e) => return vec![Err(e); plan.methods.len()],
    };
    plan.methods
        .iter()
        .map(|spec| {
            let t = timed_estimate(&sample.data, spec, plan.d)?;
            let dist = subspace_distance(&t.estimate.basis, &sample.truth)?;
            Ok((dist, t.exclusive_s, t.inclusive_s))
        })
        .collect()
}

/// Runs every method on `plan.replications` simulated data sets and
/// summarizes `dist(Γ̂, Γ₀)`. Replications whose estimate fails are left out
/// of the summary and counted in `failed`.
pub fn run_monte_carlo(plan: &ExperimentPlan, workers: usize) -> Result<SimResult> {
    let outcomes: Vec<Vec<Outcome>> =
        with_workers(workers, || (0..plan.replications).into_par_iter().map(|r| replicate(plan, r)).collect())?;
    let methods = plan
        .methods
        .iter()
        .enumerate()
        .map(|(m, spec)| {
            let mut distances = Vec::with_capacity(plan.replications);
            let (mut exclusive, mut inclusive, mut failed) = (0.0, 0.0, 0);
            for rep in &outcomes {
                match &rep[m] {
                    Ok((dist, ex, inc)) => {
                        distances.push(*dist);
                        exclusive += ex;
                        inclusive += inc;
                    }
                    Err(_) => failed += 1,
                }
            }
            let ok = distances.len().max(1) as f64;
            let (mean_dist, sd_dist) = mean_sd(&distances);
            MethodResult {
                spec: *spec,
                mean_dist,
                sd_dist,
                mean_runtime_s: exclusive / ok,
                mean_runtime_inclusive_s: inclusive / ok,
                failed,
                distances,
            }
        })
        .collect();
    Ok(SimResult { methods })
}

/// One point of a bandwidth sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub gamma: f64,
    pub spec: MethodSpec,
    /// Mean of `dist²` over successful replications.
    pub mse_dist: f64,
    pub failed: usize,
}

/// Reruns the kernel methods of `plan` at each bandwidth in `gammas`;
/// non-kernel methods in the plan are ignored.
pub fn gamma_sweep(plan: &ExperimentPlan, gammas: &[f64], workers: usize) -> Result<Vec<SweepPoint>> {
    let kernel_methods: Vec<&MethodSpec> = plan.methods.iter().filter(|m| m.method().is_kernel()).collect();
    if kernel_methods.is_empty() {
        return Err(SdrError::InvalidSpec("gamma sweep needs at least one kernel method".into()));
    }
    let mut points = Vec::new();
    for &gamma in gammas {
        let methods = kernel_methods
            .iter()
            .map(|m| {
                let kernel = KernelSpec::new(m.kernel().expect("kernel method").family(), gamma)?;
                MethodSpec::new(m.method(), Some(kernel), None)
            })
            .collect::<Result<Vec<_>>>()?;
        let sub = ExperimentPlan { methods, ..plan.clone() };
        for r in run_monte_carlo(&sub, workers)?.methods {
            let mse = r.distances.iter().map(|d| d * d).sum::<f64>() / r.distances.len() as f64;
            points.push(SweepPoint { gamma, spec: r.spec, mse_dist: mse, failed: r.failed });
        }
    }
    Ok(points)
}

//! Wall-clock timing of the estimators across sample sizes.

use super::{timed_estimate, ExperimentPlan};
use crate::error::{Result, SdrError};
use crate::estimators::MethodSpec;
use crate::simgen::generate;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub spec: MethodSpec,
    pub n: usize,
    /// Mean seconds building the candidate matrix.
    pub exclusive_s: f64,
    /// Mean seconds for the full estimate.
    pub inclusive_s: f64,
}

/// Least-squares slope of `ln(seconds)` against `ln(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSlope {
    pub spec: MethodSpec,
    pub exclusive: f64,
    pub inclusive: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Empty when fewer than two sizes were timed.
    pub slopes: Vec<BenchSlope>,
}

/// Times each method of `plan` at every size in `sizes`, averaging over
/// `plan.replications` data sets per size. Runs on the calling thread.
pub fn runtime_bench(plan: &ExperimentPlan, sizes: &[usize]) -> Result<BenchReport> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SdrError::InvalidSpec("bench sizes must be non-empty and strictly ascending".into()));
    }
    let mut rows = Vec::new();
    for &n in sizes {
        let sim = plan.sim.with_n(n)?;
        let samples =
            (0..plan.replications).map(|r| generate(&sim.replication(r as u64))).collect::<Result<Vec<_>>>()?;
        for spec in &plan.methods {
            let (mut ex, mut inc) = (0.0, 0.0);
            for s in &samples {
                let t = timed_estimate(&s.data, spec, plan.d.min(s.data.p()))?;
                ex += t.exclusive_s;
                inc += t.inclusive_s;
            }
            let reps = plan.replications as f64;
            rows.push(BenchRow { spec: *spec, n, exclusive_s: ex / reps, inclusive_s: inc / reps });
        }
    }
    let slopes = if sizes.len() < 2 {
        Vec::new()
    } else {
        plan.methods
            .iter()
            .map(|spec| {
                let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.spec == *spec).collect();
                let xs: Vec<f64> = mine.iter().map(|r| (r.n as f64).ln()).collect();
                let ex: Vec<f64> = mine.iter().map(|r| r.exclusive_s.ln()).collect();
                let inc: Vec<f64> = mine.iter().map(|r| r.inclusive_s.ln()).collect();
                BenchSlope { spec: *spec, exclusive: slope(&xs, &ex), inclusive: slope(&xs, &inc) }
            })
            .collect()
    };
    Ok(BenchReport { rows, slopes })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

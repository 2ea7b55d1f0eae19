//! Subcommand implementations.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Subcommand;
use sdrkit::evaluate::{
    bootstrap_eval, gamma_sweep, run_monte_carlo, runtime_bench, ExperimentPlan,
};
use sdrkit::simgen::{MixtureScale, SimSpec};
use sdrkit::{estimate_subspace, MethodSpec};

use crate::config::Opts;
use crate::data::{load_csv, LoadedData, Transform};
use crate::error::{CliError, Stage, StageError};

pub const THREADS_VAR: &str = "SDRKIT_THREADS";

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Estimate the central subspace of a CSV data set.
    Estimate(Opts),
    /// Monte Carlo comparison on a simulation design.
    Simulate(Opts),
    /// Time methods across sample sizes and fit log-log slopes.
    Bench(Opts),
    /// Bootstrap stability of estimates on a CSV data set.
    Bootstrap(Opts),
    /// Mean squared subspace distance across kernel bandwidths.
    GammaSweep(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::Simulate(_) => "simulate",
            Command::Bench(_) => "bench",
            Command::Bootstrap(_) => "bootstrap",
            Command::GammaSweep(_) => "gamma-sweep",
        }
    }

    pub fn run(self) -> Result<(), StageError> {
        let name = self.name();
        let opts = match self {
            Command::Estimate(o)
            | Command::Simulate(o)
            | Command::Bench(o)
            | Command::Bootstrap(o)
            | Command::GammaSweep(o) => o,
        };
        let opts = opts.resolve().stage("config")?;
        let workers = workers().stage("config")?;
        match name {
            "estimate" => estimate(&opts),
            "simulate" => simulate(&opts, workers),
            "bench" => bench(&opts),
            "bootstrap" => bootstrap(&opts, workers),
            _ => sweep(&opts, workers),
        }?;
        write_manifest(name, &opts).stage("output")
    }
}

/// Worker count from `SDRKIT_THREADS`; unset or 0 means all cores.
pub fn workers() -> Result<usize, CliError> {
    match std::env::var(THREADS_VAR) {
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| CliError::Config(format!("{THREADS_VAR} must be a count, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NA".to_string()
    }
}

fn fmt_gamma(spec: &MethodSpec) -> String {
    spec.gamma().map(fmt_f64).unwrap_or_else(|| "NA".into())
}

fn load(opts: &Opts) -> Result<LoadedData, CliError> {
    let input = Opts::required(&opts.input, "input")?;
    let x = Opts::required(&opts.x, "x")?;
    let y = Opts::required(&opts.y, "y")?;
    let transforms: HashMap<String, Transform> =
        opts.sqrt.iter().flatten().map(|c| (c.clone(), Transform::Sqrt)).collect();
    let loaded = load_csv(input, x, y, &transforms, opts.strict)?;
    if loaded.dropped > 0 {
        eprintln!("sdrkit: warning: dropped {} row(s) with missing or non-numeric cells", loaded.dropped);
    }
    Ok(loaded)
}

fn sim_spec(opts: &Opts) -> Result<SimSpec, CliError> {
    let n = *Opts::required(&opts.n, "n")?;
    let spec = SimSpec::new(opts.example()?, n, opts.error_law()?, opts.seed.unwrap_or(0))?;
    Ok(if opts.mixture_sd { spec.with_mixture_scale(MixtureScale::StdDev) } else { spec })
}

fn plan(opts: &Opts, sim: SimSpec, default_reps: usize) -> Result<ExperimentPlan, CliError> {
    let methods = opts.methods()?;
    let reps = opts.reps.unwrap_or(default_reps);
    let d = opts.d.unwrap_or(sim.example().d());
    Ok(ExperimentPlan::with_dimension(sim, methods, reps, d)?)
}

fn writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// `out.csv` becomes `out.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn estimate(opts: &Opts) -> Result<(), StageError> {
    let out = opts.output().stage("config")?.to_path_buf();
    let methods = opts.methods().stage("config")?;
    let [spec] = methods.as_slice() else {
        return Err(CliError::Config("estimate takes exactly one method".into())).stage("config");
    };
    let d = *Opts::required(&opts.d, "d").stage("config")?;
    let loaded = load(opts).stage("load")?;
    let est = estimate_subspace(&loaded.data, spec, d, opts.ridge.unwrap_or(0.0)).stage("estimate")?;

    let lead = est.eigenvalues.first().map_or(0.0, |v| v.abs());
    if est.eigenvalues[d - 1].abs() <= 1e-10 * lead.max(1.0) {
        eprintln!("sdrkit: warning: degenerate spectrum, eigenvalue {d} is numerically zero; the basis is arbitrary");
    }

    let mut w = writer(&out).stage("output")?;
    let mut header = vec!["variable".to_string()];
    header.extend((1..=d).map(|k| format!("dir{k}")));
    w.write_record(&header).stage("output")?;
    for (i, name) in loaded.x_names.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend((0..d).map(|k| fmt_f64(est.basis[(i, k)])));
        w.write_record(&row).stage("output")?;
    }
    w.flush().map_err(|e| CliError::io(&out, e)).stage("output")?;

    let eig_path = sibling(&out, "eigenvalues.csv");
    let mut w = writer(&eig_path).stage("output")?;
    w.write_record(["component", "eigenvalue"]).stage("output")?;
    for (k, v) in est.eigenvalues.iter().enumerate() {
        w.write_record([(k + 1).to_string(), fmt_f64(*v)]).stage("output")?;
    }
    w.flush().map_err(|e| CliError::io(&eig_path, e)).stage("output")
}

fn simulate(opts: &Opts, workers: usize) -> Result<(), StageError> {
    let out = opts.output().stage("config")?.to_path_buf();
    let sim = sim_spec(opts).stage("config")?;
    let plan = plan(opts, sim, 500).stage("config")?;
    let result = run_monte_carlo(&plan, workers).stage("simulate")?;

    let mut w = writer(&out).stage("output")?;
    w.write_record([
        "example", "error", "method", "gamma", "n", "p", "mean_dist", "sd_dist", "mean_runtime_s", "failed_reps",
    ])
    .stage("output")?;
    for r in &result.methods {
        let runtime = if opts.timing { fmt_f64(r.mean_runtime_s) } else { "NA".into() };
        w.write_record([
            plan.sim.example().name().to_string(),
            plan.sim.error().name().to_string(),
            r.spec.label(),
            fmt_gamma(&r.spec),
            plan.sim.n().to_string(),
            plan.sim.p().to_string(),
            fmt_f64(r.mean_dist),
            fmt_f64(r.sd_dist),
            runtime,
            r.failed.to_string(),
        ])
        .stage("output")?;
    }
    w.flush().map_err(|e| CliError::io(&out, e)).stage("output")?;

    println!(
        "{} {} n={} p={} reps={}",
        plan.sim.example(),
        plan.sim.error().name(),
        plan.sim.n(),
        plan.sim.p(),
        plan.replications
    );
    for r in &result.methods {
        println!("  {:<24} {:.3} ({:.3})  failed {}", r.spec.to_string(), r.mean_dist, r.sd_dist, r.failed);
    }
    Ok(())
}

fn bench(opts: &Opts) -> Result<(), StageError> {
    let out = opts.output().stage("config")?.to_path_buf();
    let sizes = Opts::required(&opts.sizes, "sizes").stage("config")?.clone();
    let first = *sizes.first().ok_or_else(|| CliError::Config("--sizes is empty".into())).stage("config")?;
    let sim = opts.n.map_or_else(|| sim_spec(&Opts { n: Some(first), ..opts.clone() }), |_| sim_spec(opts));
    let plan = plan(opts, sim.stage("config")?, 10).stage("config")?;
    let report = runtime_bench(&plan, &sizes).stage("bench")?;

    let mut w = writer(&out).stage("output")?;
    w.write_record(["method", "gamma", "n", "exclusive_s", "inclusive_s"]).stage("output")?;
    for r in &report.rows {
        w.write_record([r.spec.label(), fmt_gamma(&r.spec), r.n.to_string(), fmt_f64(r.exclusive_s), fmt_f64(r.inclusive_s)])
            .stage("output")?;
    }
    w.flush().map_err(|e| CliError::io(&out, e)).stage("output")?;

    let slope_path = sibling(&out, "slopes.csv");
    let mut w = writer(&slope_path).stage("output")?;
    w.write_record(["method", "gamma", "exclusive_slope", "inclusive_slope"]).stage("output")?;
    for s in &report.slopes {
        w.write_record([s.spec.label(), fmt_gamma(&s.spec), fmt_f64(s.exclusive), fmt_f64(s.inclusive)])
            .stage("output")?;
        println!("  {:<24} slope {:.2} (inclusive {:.2})", s.spec.to_string(), s.exclusive, s.inclusive);
    }
    w.flush().map_err(|e| CliError::io(&slope_path, e)).stage("output")
}

fn bootstrap(opts: &Opts, workers: usize) -> Result<(), StageError> {
    let out = opts.output().stage("config")?.to_path_buf();
    let methods = opts.methods().stage("config")?;
    let d = *Opts::required(&opts.d, "d").stage("config")?;
    let resamples = opts.resamples.unwrap_or(2000);
    let loaded = load(opts).stage("load")?;
    let report =
        bootstrap_eval(&loaded.data, &methods, d, resamples, opts.seed.unwrap_or(0), workers).stage("bootstrap")?;

    let mut w = writer(&out).stage("output")?;
    w.write_record([
        "method",
        "gamma",
        "d",
        "resamples",
        "mean_dist",
        "sd_dist",
        "mse_dist",
        "median_one_minus_r",
        "sd_one_minus_r",
        "failed",
    ])
    .stage("output")?;
    for m in &report.methods {
        w.write_record([
            m.spec.label(),
            fmt_gamma(&m.spec),
            d.to_string(),
            report.resamples.to_string(),
            fmt_f64(m.mean_dist),
            fmt_f64(m.sd_dist),
            fmt_f64(m.mse_dist),
            fmt_f64(m.median_one_minus_r),
            fmt_f64(m.sd_one_minus_r),
            m.failed.to_string(),
        ])
        .stage("output")?;
        println!("  {:<24} mse {:.4}  median 1-r {:.4}", m.spec.to_string(), m.mse_dist, m.median_one_minus_r);
    }
    w.flush().map_err(|e| CliError::io(&out, e)).stage("output")
}

fn sweep(opts: &Opts, workers: usize) -> Result<(), StageError> {
    let out = opts.output().stage("config")?.to_path_buf();
    let gammas = Opts::required(&opts.gammas, "gammas").stage("config")?.clone();
    if gammas.is_empty() {
        return Err(CliError::Config("--gammas is empty".into())).stage("config");
    }
    // Methods are named without a bandwidth here; the sweep supplies it.
    let probe = Opts { gamma: Some(gammas[0]), ..opts.clone() };
    let plan = plan(&probe, sim_spec(opts).stage("config")?, 500).stage("config")?;
    let points = gamma_sweep(&plan, &gammas, workers).stage("gamma-sweep")?;

    let mut w = writer(&out).stage("output")?;
    w.write_record(["gamma", "method", "mse_dist"]).stage("output")?;
    for pt in &points {
        w.write_record([fmt_f64(pt.gamma), pt.spec.label(), fmt_f64(pt.mse_dist)]).stage("output")?;
    }
    w.flush().map_err(|e| CliError::io(&out, e)).stage("output")
}

/// Writes `<output stem>.manifest.json` next to the main output.
fn write_manifest(command: &str, opts: &Opts) -> Result<(), CliError> {
    let out = opts.output()?;
    let manifest = serde_json::json!({
        "tool": "sdrkit",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": opts.seed.unwrap_or(0),
        "config": opts,
    });
    let path = sibling(out, "manifest.json");
    let mut file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Data(e.to_string()))?;
    writeln!(file, "{text}").map_err(|e| CliError::io(&path, e))
}

//! Options shared by every subcommand, read from flags and an optional
//! flat TOML file. Flags win over the file.

use std::path::{Path, PathBuf};

use clap::Args;
use sdrkit::simgen::{ErrorLaw, Example};
use sdrkit::MethodSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Opts {
    /// TOML file with any of these options (flat keys, snake_case).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Input CSV with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Predictor column names.
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<String>>,
    /// Response column names.
    #[arg(long, value_delimiter = ',')]
    pub y: Option<Vec<String>>,
    /// Columns to square-root before estimation.
    #[arg(long, value_delimiter = ',')]
    pub sqrt: Option<Vec<String>>,
    /// Fail on blank or non-numeric cells instead of dropping the row.
    #[arg(long)]
    #[serde(default)]
    pub strict: bool,

    /// Methods, e.g. `im_pr,im_gauss:40,sir`. A `:gamma` suffix overrides --gamma.
    #[arg(long, value_delimiter = ',')]
    pub method: Option<Vec<String>>,
    /// Bandwidth for kernel methods without their own suffix.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Bandwidths for gamma-sweep.
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
    /// Slice count for SIR and SAVE.
    #[arg(long)]
    pub slices: Option<usize>,
    /// Structural dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Ridge added to the covariance before whitening.
    #[arg(long)]
    pub ridge: Option<f64>,

    /// Simulation design: ex1i, ex1ii, ex2, ex3i, ex3ii, ex4, ex5.
    #[arg(long)]
    pub example: Option<String>,
    /// Error law: normal, cauchy, mixnormal, mvt1.
    #[arg(long)]
    pub error: Option<String>,
    /// Sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Sample sizes for bench, ascending.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Monte Carlo replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Bootstrap resamples.
    #[arg(long)]
    pub resamples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Read the 10 in the mixture component N(0, 10) as a standard deviation.
    #[arg(long)]
    #[serde(default)]
    pub mixture_sd: bool,
    /// Record wall-clock runtimes in the simulate table (otherwise NA).
    #[arg(long)]
    #[serde(default)]
    pub timing: bool,

    /// Output CSV path.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl Opts {
    /// Loads `--config` (if any) and lays the flags over it.
    pub fn resolve(self) -> Result<Opts, CliError> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: Opts =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
        Ok(self.over(file))
    }

    fn over(self, file: Opts) -> Opts {
        Opts {
            config: self.config,
            input: self.input.or(file.input),
            x: self.x.or(file.x),
            y: self.y.or(file.y),
            sqrt: self.sqrt.or(file.sqrt),
            strict: self.strict || file.strict,
            method: self.method.or(file.method),
            gamma: self.gamma.or(file.gamma),
            gammas: self.gammas.or(file.gammas),
            slices: self.slices.or(file.slices),
            d: self.d.or(file.d),
            ridge: self.ridge.or(file.ridge),
            example: self.example.or(file.example),
            error: self.error.or(file.error),
            n: self.n.or(file.n),
            sizes: self.sizes.or(file.sizes),
            reps: self.reps.or(file.reps),
            resamples: self.resamples.or(file.resamples),
            seed: self.seed.or(file.seed),
            mixture_sd: self.mixture_sd || file.mixture_sd,
            timing: self.timing || file.timing,
            output: self.output.or(file.output),
        }
    }

    pub fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
        value.as_ref().ok_or_else(|| CliError::Config(format!("missing --{flag}")))
    }

    pub fn output(&self) -> Result<&Path, CliError> {
        Ok(Self::required(&self.output, "output")?.as_path())
    }

    pub fn example(&self) -> Result<Example, CliError> {
        Ok(Self::required(&self.example, "example")?.parse()?)
    }

    pub fn error_law(&self) -> Result<ErrorLaw, CliError> {
        match &self.error {
            Some(e) => Ok(e.parse()?),
            None => Ok(ErrorLaw::Normal),
        }
    }

    /// Parses `--method` tokens of the form `name` or `name:gamma`.
    pub fn methods(&self) -> Result<Vec<MethodSpec>, CliError> {
        let tokens = Self::required(&self.method, "method")?;
        if tokens.is_empty() {
            return Err(CliError::Config("--method lists no methods".into()));
        }
        tokens
            .iter()
            .map(|token| {
                let (name, gamma) = match token.split_once(':') {
                    Some((name, g)) => {
                        let g: f64 =
                            g.parse().map_err(|_| CliError::Config(format!("bad gamma in method '{token}'")))?;
                        (name, Some(g))
                    }
                    None => (token.as_str(), self.gamma),
                };
                let name = name.trim();
                let takes_gamma = name.starts_with("im_") && name != "im_pr" || name.starts_with("iv_") && name != "iv_pr";
                let slices = if matches!(name, "sir" | "save") { self.slices } else { None };
                Ok(MethodSpec::from_name(name, if takes_gamma { gamma } else { None }, slices)?)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file: Opts = toml::from_str("n = 100\nseed = 3\nmethod = [\"sir\"]\ntiming = true").unwrap();
        let flags = Opts { n: Some(200), ..Opts::default() };
        let merged = flags.over(file);
        assert_eq!(merged.n, Some(200));
        assert_eq!(merged.seed, Some(3));
        assert_eq!(merged.method, Some(vec!["sir".to_string()]));
        assert!(merged.timing);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Opts>("bogus = 1").is_err());
    }

    #[test]
    fn method_tokens() {
        let opts = Opts {
            method: Some(vec!["im_gauss:40".into(), "iv_lap".into(), "im_pr".into(), "save".into()]),
            gamma: Some(2.0),
            slices: Some(4),
            ..Opts::default()
        };
        let m = opts.methods().unwrap();
        assert_eq!(m[0].gamma(), Some(40.0));
        assert_eq!(m[1].gamma(), Some(2.0));
        assert_eq!(m[2].gamma(), None);
        assert_eq!(m[3].slices(), Some(4));
        let missing = Opts { method: Some(vec!["im_rq".into()]), ..Opts::default() };
        assert!(missing.methods().is_err());
    }
}

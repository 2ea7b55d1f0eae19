//! Seeded generators for the five simulation designs.
//!
//! Every draw comes from a [`ChaCha8Rng`] seeded with `seed_from_u64`, so a
//! [`SimSpec`] fully determines its sample. Monte Carlo replication `r` of a
//! template seeded with `s` uses seed `s ^ r` (see [`SimSpec::replication`]).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SdrError};
use crate::estimators::DataSet;

/// The generator used everywhere in this module.
pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Example {
    /// `Y = β₁ᵀX + ε`, `p = ⌊√n⌋ − 5`.
    Ex1i,
    /// `Y = sin(β₂ᵀX) + exp(β₃ᵀX) ε`, `p = ⌊√n⌋ − 5`.
    Ex1ii,
    /// Four responses, two linear in `X`, `p = 6`.
    Ex2,
    /// Heteroscedastic errors, `Y₁ = 2 exp(ε₁)`.
    Ex3i,
    /// Heteroscedastic errors, `Y = ε`.
    Ex3ii,
    /// Scalar response with a surface symmetric about zero.
    Ex4,
    /// Four responses with zero-symmetric surfaces, `p = 6`.
    Ex5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorLaw {
    Normal,
    Cauchy,
    /// `0.7 N(0, 1) + 0.3 N(0, 10)`, independently per coordinate.
    MixNormal,
    /// Multivariate t with one degree of freedom.
    Mvt1,
}

/// How the `10` in the mixture component `N(0, 10)` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MixtureScale {
    #[default]
    Variance,
    StdDev,
}

impl MixtureScale {
    fn wide_sd(self) -> f64 {
        match self {
            MixtureScale::Variance => 10f64.sqrt(),
            MixtureScale::StdDev => 10.0,
        }
    }
}

impl Example {
    pub const ALL: [Example; 7] =
        [Example::Ex1i, Example::Ex1ii, Example::Ex2, Example::Ex3i, Example::Ex3ii, Example::Ex4, Example::Ex5];

    pub fn name(self) -> &'static str {
        match self {
            Example::Ex1i => "ex1i",
            Example::Ex1ii => "ex1ii",
            Example::Ex2 => "ex2",
            Example::Ex3i => "ex3i",
            Example::Ex3ii => "ex3ii",
            Example::Ex4 => "ex4",
            Example::Ex5 => "ex5",
        }
    }

    /// Predictor dimension at sample size `n`.
    pub fn p(self, n: usize) -> usize {
        match self {
            Example::Ex1i | Example::Ex1ii | Example::Ex4 => n.isqrt().saturating_sub(5),
            _ => 6,
        }
    }

    pub fn q(self) -> usize {
        match self {
            Example::Ex1i | Example::Ex1ii | Example::Ex4 => 1,
            _ => 4,
        }
    }

    /// True structural dimension.
    pub fn d(self) -> usize {
        match self {
            Example::Ex1i | Example::Ex3i | Example::Ex3ii => 1,
            _ => 2,
        }
    }

    /// Smallest predictor dimension that holds every nonzero β entry.
    pub fn min_p(self) -> usize {
        match self {
            Example::Ex1i => 4,
            Example::Ex1ii => 2,
            _ => 6,
        }
    }

    /// Error laws the design accepts.
    pub fn allows(self, law: ErrorLaw) -> bool {
        use ErrorLaw::*;
        match self {
            Example::Ex1i | Example::Ex1ii => matches!(law, Normal | Cauchy | MixNormal),
            Example::Ex2 => matches!(law, Normal | Mvt1 | MixNormal),
            Example::Ex3i | Example::Ex3ii => law == Normal,
            Example::Ex4 => matches!(law, Normal | Cauchy),
            Example::Ex5 => true,
        }
    }
}

impl ErrorLaw {
    pub fn name(self) -> &'static str {
        match self {
            ErrorLaw::Normal => "normal",
            ErrorLaw::Cauchy => "cauchy",
            ErrorLaw::MixNormal => "mixnormal",
            ErrorLaw::Mvt1 => "mvt1",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for ErrorLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = SdrError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Example::ALL
            .into_iter()
            .find(|e| e.name() == lower)
            .ok_or_else(|| SdrError::InvalidSpec(format!("unknown example '{s}'")))
    }
}

impl FromStr for ErrorLaw {
    type Err = SdrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(ErrorLaw::Normal),
            "cauchy" => Ok(ErrorLaw::Cauchy),
            "mixnormal" | "mix" => Ok(ErrorLaw::MixNormal),
            "mvt1" | "t1" => Ok(ErrorLaw::Mvt1),
            _ => Err(SdrError::InvalidSpec(format!("unknown error law '{s}'"))),
        }
    }
}

/// One simulation setting: design, sample size, error law and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSpec {
    example: Example,
    n: usize,
    error: ErrorLaw,
    seed: u64,
    mixture: MixtureScale,
}

impl SimSpec {
    pub fn new(example: Example, n: usize, error: ErrorLaw, seed: u64) -> Result<Self> {
        if !example.allows(error) {
            return Err(SdrError::InvalidSpec(format!("{example} does not support {error} errors")));
        }
        if example.p(n) < example.min_p() {
            return Err(SdrError::InvalidSpec(format!(
                "{example} needs at least {} predictors, n = {n} gives {}",
                example.min_p(),
                example.p(n)
            )));
        }
        if n < 2 {
            return Err(SdrError::InvalidSpec(format!("sample size must be at least 2, got {n}")));
        }
        Ok(Self { example, n, error, seed, mixture: MixtureScale::Variance })
    }

    pub fn with_mixture_scale(mut self, mixture: MixtureScale) -> Self {
        self.mixture = mixture;
        self
    }

    pub fn with_n(self, n: usize) -> Result<Self> {
        Ok(Self::new(self.example, n, self.error, self.seed)?.with_mixture_scale(self.mixture))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The spec for Monte Carlo replication `index`: seed `seed ^ index`.
    pub fn replication(&self, index: u64) -> Self {
        self.with_seed(self.seed ^ index)
    }

    pub fn example(&self) -> Example {
        self.example
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.example.p(self.n)
    }

    pub fn error(&self) -> ErrorLaw {
        self.error
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mixture_scale(&self) -> MixtureScale {
        self.mixture
    }
}

/// A simulated data set with the basis of its true central subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSample {
    pub data: DataSet,
    /// `p x d`, unit-norm columns.
    pub truth: DMatrix<f64>,
    pub d: usize,
}

fn normal(rng: &mut SimRng) -> f64 {
    rng.sample(StandardNormal)
}

/// `count x dims` independent draws from `law` (mixture read as variance 10).
///
/// `Mvt1` rows are uncorrelated here: each row is a standard normal vector
/// divided by the square root of one χ²₁ draw. Designs that need a scale
/// matrix multiply rows by its Cholesky factor afterwards.
pub fn sample_error(law: ErrorLaw, count: usize, dims: usize, rng: &mut SimRng) -> Result<DMatrix<f64>> {
    sample_error_with(law, count, dims, MixtureScale::Variance, rng)
}

pub fn sample_error_with(
    law: ErrorLaw,
    count: usize,
    dims: usize,
    mixture: MixtureScale,
    rng: &mut SimRng,
) -> Result<DMatrix<f64>> {
    if count == 0 || dims == 0 {
        return Err(SdrError::InvalidSpec("error sample needs count >= 1 and dims >= 1".into()));
    }
    let mut out = DMatrix::zeros(count, dims);
    for i in 0..count {
        match law {
            ErrorLaw::Normal => {
                for c in 0..dims {
                    out[(i, c)] = normal(rng);
                }
            }
            ErrorLaw::Cauchy => {
                for c in 0..dims {
                    let num = normal(rng);
                    out[(i, c)] = num / normal(rng);
                }
            }
            ErrorLaw::MixNormal => {
                for c in 0..dims {
                    let sd = if rng.gen::<f64>() < 0.7 { 1.0 } else { mixture.wide_sd() };
                    out[(i, c)] = sd * normal(rng);
                }
            }
            ErrorLaw::Mvt1 => {
                for c in 0..dims {
                    out[(i, c)] = normal(rng);
                }
                let chi = normal(rng).abs();
                for c in 0..dims {
                    out[(i, c)] /= chi;
                }
            }
        }
    }
    Ok(out)
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn padded(head: &[f64], p: usize) -> Vec<f64> {
    let mut v = vec![0.0; p];
    v[..head.len()].copy_from_slice(head);
    v
}

fn dot_row(x: &DMatrix<f64>, i: usize, beta: &[f64]) -> f64 {
    beta.iter().enumerate().filter(|(_, b)| **b != 0.0).map(|(c, b)| x[(i, c)] * b).sum()
}

/// Lower Cholesky factor of `[[1, −0.5], [−0.5, 1]]` applied to the first
/// two columns of each row.
fn correlate_first_pair(e: &mut DMatrix<f64>) {
    let rho = -0.5f64;
    let tail = (1.0 - rho * rho).sqrt();
    for i in 0..e.nrows() {
        let (a, b) = (e[(i, 0)], e[(i, 1)]);
        e[(i, 1)] = rho * a + tail * b;
    }
}

/// Draws one sample from `spec`.
pub fn generate(spec: &SimSpec) -> Result<GeneratedSample> {
    let (n, p, q) = (spec.n, spec.p(), spec.example.q());
    let mut rng = SimRng::seed_from_u64(spec.seed);
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        for c in 0..p {
            x[(i, c)] = normal(&mut rng);
        }
    }
    let mut y = DMatrix::zeros(n, q);
    let truth_cols: Vec<Vec<f64>> = match spec.example {
        Example::Ex1i => {
            let b1 = padded(&[0.5, 0.5, 0.5, 0.5], p);
            let e = sample_error_with(spec.error, n, 1, spec.mixture, &mut rng)?;
            for i in 0..n {
                y[(i, 0)] = dot_row(&x, i, &b1) + e[(i, 0)];
            }
            vec![b1]
        }
        Example::Ex1ii => {
            let (b2, b3) = (padded(&[1.0], p), padded(&[0.0, 1.0], p));
            let e = sample_error_with(spec.error, n, 1, spec.mixture, &mut rng)?;
            for i in 0..n {
                y[(i, 0)] = dot_row(&x, i, &b2).sin() + dot_row(&x, i, &b3).exp() * e[(i, 0)];
            }
            vec![b2, b3]
        }
        Example::Ex2 | Example::Ex5 => {
            let (b1, b2) = (padded(&[1.0], p), padded(&[0.0, 2.0, 1.0], p));
            let mut e = sample_error_with(spec.error, n, 4, spec.mixture, &mut rng)?;
            if matches!(spec.error, ErrorLaw::Normal | ErrorLaw::Mvt1) {
                correlate_first_pair(&mut e);
            }
            let zero_symmetric = spec.example == Example::Ex5;
            for i in 0..n {
                let (u1, u2) = (dot_row(&x, i, &b1), dot_row(&x, i, &b2));
                let (m1, m2) = if zero_symmetric { (u1 * u1, u2.abs()) } else { (u1, u2) };
                y[(i, 0)] = m1 + e[(i, 0)];
                y[(i, 1)] = m2 + e[(i, 1)];
                y[(i, 2)] = e[(i, 2)];
                y[(i, 3)] = e[(i, 3)];
            }
            vec![b1, b2]
        }
        Example::Ex3i | Example::Ex3ii => {
            let beta = padded(&[0.8, 0.6], p);
            let e = sample_error_with(ErrorLaw::Normal, n, 4, spec.mixture, &mut rng)?;
            for i in 0..n {
                let rho = dot_row(&x, i, &beta).sin();
                let e1 = e[(i, 0)];
                let e2 = rho * e1 + (1.0 - rho * rho).max(0.0).sqrt() * e[(i, 1)];
                y[(i, 0)] = if spec.example == Example::Ex3i { 2.0 * e1.exp() } else { e1 };
                y[(i, 1)] = e2;
                y[(i, 2)] = e[(i, 2)];
                y[(i, 3)] = e[(i, 3)];
            }
            vec![beta]
        }
        Example::Ex4 => {
            let b1 = padded(&[1.0, 1.0, 1.0], p);
            let b2 = padded(&[1.0, 0.0, 0.0, 0.0, 1.0, 3.0], p);
            let e = sample_error_with(spec.error, n, 1, spec.mixture, &mut rng)?;
            for i in 0..n {
                let u1 = dot_row(&x, i, &b1);
                let u2 = dot_row(&x, i, &b2);
                y[(i, 0)] = 0.4 * u1 * u1 + u2.abs().sqrt() + 0.4 * e[(i, 0)];
            }
            vec![b1, b2]
        }
    };
    let d = spec.example.d();
    let cols: Vec<f64> = truth_cols.into_iter().flat_map(unit).collect();
    let truth = DMatrix::from_column_slice(p, d, &cols);
    Ok(GeneratedSample { data: DataSet::new(x, y)?, truth, d })
}

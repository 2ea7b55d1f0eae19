//! Candidate-matrix estimators and central subspace extraction.
//!
//! Every estimator maps a [`DataSet`] to a symmetric `p x p` candidate
//! matrix whose Σ-whitened column space estimates the central subspace.
//! The pairwise sums are V-statistics (all index tuples, repeats included)
//! evaluated through matrix factorizations instead of literal loops:
//!
//! * first order: `Σ_ij W_ij Z_i Z_jᵀ = Zᵀ W Z`
//! * second order: `Σ_ij W_ij A_i A_j` with `A_i = Z_i Z_iᵀ − Σ̂`, expanded as
//!   `Zᵀ(W∘ZZᵀ)Z − (Zᵀ diag(w) Z)Σ̂ − Σ̂(Zᵀ diag(w) Z) + (Σ_i w_i) Σ̂²`
//!   where `w = W 1`.

mod first_order;
mod second_order;
mod slicing;
mod subspace;

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SdrError};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::linalg::SymmetricMatrix;

pub use first_order::{icmi_id, icmi_kernel, icmi_pr, mddm};
pub use second_order::{icvi_kernel, icvi_pr};
pub use slicing::{save, sir, slice_labels};
pub use subspace::{estimate_subspace, subspace_from_candidate};

/// A `p x p` candidate matrix produced by any estimator.
pub type CandidateMatrix = SymmetricMatrix;

/// Slice count used by SIR and SAVE unless told otherwise.
pub const DEFAULT_SLICES: usize = 5;

/// Predictors `x` (n x p) paired with responses `y` (n x q).
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl DataSet {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(SdrError::DimensionMismatch(format!(
                "x has {} rows but y has {}",
                x.nrows(),
                y.nrows()
            )));
        }
        if x.nrows() == 0 || x.ncols() == 0 || y.ncols() == 0 {
            return Err(SdrError::DimensionMismatch("empty data set".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(SdrError::InvalidMatrix("data set contains non-finite values".into()));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn q(&self) -> usize {
        self.y.ncols()
    }

    /// The data set formed by the given rows, in order (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> DataSet {
        DataSet { x: self.x.select_rows(rows), y: self.y.select_rows(rows) }
    }
}

/// Predictors centered at their sample mean, with the divisor-`n` covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDesign {
    pub z: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub cov: SymmetricMatrix,
}

/// Centers `x` and forms `Σ̂ = ZᵀZ / n`.
pub fn center(x: &DMatrix<f64>) -> Result<CenteredDesign> {
    let (n, p) = x.shape();
    if n < 2 {
        return Err(SdrError::TooFewSamples { needed: 2, got: n });
    }
    if p == 0 {
        return Err(SdrError::DimensionMismatch("no predictors".into()));
    }
    let mean = DVector::from_fn(p, |c, _| x.column(c).sum() / n as f64);
    let mut z = x.clone();
    for c in 0..p {
        let m = mean[c];
        z.column_mut(c).iter_mut().for_each(|v| *v -= m);
    }
    let cov = SymmetricMatrix::new(z.tr_mul(&z) / n as f64)?;
    Ok(CenteredDesign { z, mean, cov })
}

pub(crate) fn require_samples(data: &DataSet, needed: usize) -> Result<()> {
    if data.n() < needed {
        Err(SdrError::TooFewSamples { needed, got: data.n() })
    } else {
        Ok(())
    }
}

/// Which estimator a [`MethodSpec`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Projection (angle) ICMI matrix.
    ImPr,
    /// Kernel ICMI matrix.
    ImKernel,
    /// Projection (angle) ICVI matrix.
    IvPr,
    /// Kernel ICVI matrix.
    IvKernel,
    /// Indicator-weight ICMI matrix, any response dimension.
    IcmiId,
    /// Cumulative mean estimator: the indicator ICMI matrix for a scalar response.
    Cume,
    Mddm,
    Sir,
    Save,
}

impl Method {
    pub fn is_kernel(self) -> bool {
        matches!(self, Method::ImKernel | Method::IvKernel)
    }

    pub fn is_sliced(self) -> bool {
        matches!(self, Method::Sir | Method::Save)
    }

    pub fn is_second_order(self) -> bool {
        matches!(self, Method::IvPr | Method::IvKernel | Method::Save)
    }

    /// Methods whose candidate matrix is unchanged by `Y -> QY + c` for orthogonal `Q`.
    pub fn is_isometry_invariant(self) -> bool {
        matches!(self, Method::ImPr | Method::ImKernel | Method::IvPr | Method::IvKernel | Method::Mddm)
    }
}

/// An estimator together with its tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSpec {
    method: Method,
    kernel: Option<KernelSpec>,
    slices: Option<usize>,
}

impl MethodSpec {
    /// Checks that a kernel is present exactly for the kernel methods and a
    /// slice count exactly for SIR/SAVE.
    pub fn new(method: Method, kernel: Option<KernelSpec>, slices: Option<usize>) -> Result<Self> {
        match (method.is_kernel(), kernel.is_some()) {
            (true, false) => return Err(SdrError::MissingKernelSpec(method_stem(method))),
            (false, true) => {
                return Err(SdrError::InvalidSpec(format!("{} takes no kernel", method_stem(method))));
            }
            _ => {}
        }
        match (method.is_sliced(), slices) {
            (true, None) => return Err(SdrError::InvalidSpec(format!("{} needs a slice count", method_stem(method)))),
            (true, Some(0)) => return Err(SdrError::InvalidSpec("slice count must be positive".into())),
            (false, Some(_)) => {
                return Err(SdrError::InvalidSpec(format!("{} takes no slice count", method_stem(method))));
            }
            _ => {}
        }
        Ok(Self { method, kernel, slices })
    }

    pub fn im_pr() -> Self {
        Self { method: Method::ImPr, kernel: None, slices: None }
    }

    pub fn im_kernel(kernel: KernelSpec) -> Self {
        Self { method: Method::ImKernel, kernel: Some(kernel), slices: None }
    }

    pub fn iv_pr() -> Self {
        Self { method: Method::IvPr, kernel: None, slices: None }
    }

    pub fn iv_kernel(kernel: KernelSpec) -> Self {
        Self { method: Method::IvKernel, kernel: Some(kernel), slices: None }
    }

    pub fn icmi_id() -> Self {
        Self { method: Method::IcmiId, kernel: None, slices: None }
    }

    pub fn cume() -> Self {
        Self { method: Method::Cume, kernel: None, slices: None }
    }

    pub fn mddm() -> Self {
        Self { method: Method::Mddm, kernel: None, slices: None }
    }

    pub fn sir(slices: usize) -> Result<Self> {
        Self::new(Method::Sir, None, Some(slices))
    }

    pub fn save(slices: usize) -> Result<Self> {
        Self::new(Method::Save, None, Some(slices))
    }

    /// Builds a spec from a short name such as `im_pr`, `iv_gauss` or `sir`.
    ///
    /// Kernel names (`{im,iv}_{gauss,lap,rq}`) need `gamma`; `sir`/`save`
    /// use `slices`, defaulting to [`DEFAULT_SLICES`].
    pub fn from_name(name: &str, gamma: Option<f64>, slices: Option<usize>) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        let kernel_for = |family: &str| -> Result<KernelSpec> {
            let family: KernelFamily = family.parse()?;
            let gamma = gamma.ok_or_else(|| SdrError::InvalidSpec(format!("method {lower} needs a gamma")))?;
            KernelSpec::new(family, gamma)
        };
        let spec = match lower.as_str() {
            "im_pr" => Self::im_pr(),
            "iv_pr" => Self::iv_pr(),
            "icmi_id" => Self::icmi_id(),
            "cume" => Self::cume(),
            "mddm" => Self::mddm(),
            "sir" => Self::sir(slices.unwrap_or(DEFAULT_SLICES))?,
            "save" => Self::save(slices.unwrap_or(DEFAULT_SLICES))?,
            other => {
                if let Some(family) = other.strip_prefix("im_") {
                    Self::im_kernel(kernel_for(family)?)
                } else if let Some(family) = other.strip_prefix("iv_") {
                    Self::iv_kernel(kernel_for(family)?)
                } else {
                    return Err(SdrError::InvalidSpec(format!("unknown method '{name}'")));
                }
            }
        };
        Ok(spec)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn kernel(&self) -> Option<&KernelSpec> {
        self.kernel.as_ref()
    }

    pub fn slices(&self) -> Option<usize> {
        self.slices
    }

    pub fn gamma(&self) -> Option<f64> {
        self.kernel.map(|k| k.gamma())
    }

    /// Short name, e.g. `im_gauss`; round-trips through [`MethodSpec::from_name`].
    pub fn label(&self) -> String {
        match (self.method, self.kernel) {
            (Method::ImKernel, Some(k)) => format!("im_{}", k.family()),
            (Method::IvKernel, Some(k)) => format!("iv_{}", k.family()),
            (m, _) => method_stem(m).to_string(),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gamma() {
            Some(g) => write!(f, "{}(gamma={g})", self.label()),
            None => f.write_str(&self.label()),
        }
    }
}

fn method_stem(method: Method) -> &'static str {
    match method {
        Method::ImPr => "im_pr",
        Method::ImKernel => "im_kernel",
        Method::IvPr => "iv_pr",
        Method::IvKernel => "iv_kernel",
        Method::IcmiId => "icmi_id",
        Method::Cume => "cume",
        Method::Mddm => "mddm",
        Method::Sir => "sir",
        Method::Save => "save",
    }
}

/// Runs the estimator named by `spec` on `data`.
pub fn candidate_matrix(data: &DataSet, spec: &MethodSpec) -> Result<CandidateMatrix> {
    let kernel = || spec.kernel.ok_or(SdrError::MissingKernelSpec(method_stem(spec.method)));
    let slices = spec.slices.unwrap_or(DEFAULT_SLICES);
    match spec.method {
        Method::ImPr => icmi_pr(data),
        Method::ImKernel => icmi_kernel(data, &kernel()?),
        Method::IvPr => icvi_pr(data),
        Method::IvKernel => icvi_kernel(data, &kernel()?),
        Method::IcmiId => icmi_id(data),
        Method::Cume => {
            if data.q() != 1 {
                return Err(SdrError::UnivariateOnly("cume"));
            }
            icmi_id(data)
        }
        Method::Mddm => mddm(data),
        Method::Sir => sir(data, slices),
        Method::Save => save(data, slices),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn center_two_points() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, -1.0]);
        let c = center(&x).unwrap();
        assert_eq!(c.mean[0], 0.0);
        assert_eq!(c.z, x);
        assert_eq!(c.cov.as_matrix()[(0, 0)], 1.0);
    }

    #[test]
    fn center_constant_column_has_zero_covariance_row() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 4.0, 2.0, 4.0, 6.0, 4.0]);
        let c = center(&x).unwrap();
        let cov = c.cov.as_matrix();
        assert_eq!(cov[(1, 1)], 0.0);
        assert_eq!(cov[(0, 1)], 0.0);
        assert_abs_diff_eq!(c.z.column(0).sum(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn center_rejects_single_row() {
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert_eq!(center(&x).unwrap_err(), SdrError::TooFewSamples { needed: 2, got: 1 });
    }

    #[test]
    fn data_set_validation() {
        let x = DMatrix::<f64>::zeros(3, 2);
        assert!(DataSet::new(x.clone(), DMatrix::zeros(2, 1)).is_err());
        let mut y = DMatrix::<f64>::zeros(3, 1);
        y[(1, 0)] = f64::NAN;
        assert!(DataSet::new(x.clone(), y).is_err());
        let ok = DataSet::new(x, DMatrix::zeros(3, 1)).unwrap();
        assert_eq!((ok.n(), ok.p(), ok.q()), (3, 2, 1));
    }

    #[test]
    fn method_spec_invariants() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        assert!(MethodSpec::new(Method::ImKernel, None, None).is_err());
        assert!(MethodSpec::new(Method::ImPr, Some(k), None).is_err());
        assert!(MethodSpec::new(Method::Sir, None, None).is_err());
        assert!(MethodSpec::new(Method::Mddm, None, Some(5)).is_err());
        assert!(MethodSpec::sir(0).is_err());
        assert!(MethodSpec::new(Method::IvKernel, Some(k), None).is_ok());
    }

    #[test]
    fn labels_round_trip() {
        let names = [
            "im_pr", "im_gauss", "im_lap", "im_rq", "iv_pr", "iv_gauss", "iv_lap", "iv_rq", "icmi_id", "cume", "mddm",
            "sir", "save",
        ];
        for name in names {
            let spec = MethodSpec::from_name(name, Some(2.0), None).unwrap();
            assert_eq!(spec.label(), name);
        }
        assert!(MethodSpec::from_name("im_gauss", None, None).is_err());
        assert!(MethodSpec::from_name("pca", None, None).is_err());
        assert_eq!(MethodSpec::from_name("sir", None, None).unwrap().slices(), Some(5));
    }

    #[test]
    fn cume_requires_scalar_response() {
        let data = DataSet::new(DMatrix::from_fn(4, 2, |i, j| (i * 2 + j) as f64), DMatrix::zeros(4, 2)).unwrap();
        assert_eq!(candidate_matrix(&data, &MethodSpec::cume()).unwrap_err(), SdrError::UnivariateOnly("cume"));
        assert!(candidate_matrix(&data, &MethodSpec::icmi_id()).is_ok());
    }
}

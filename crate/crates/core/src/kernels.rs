//! Pairwise response weights: the angle function used by the projection
//! estimators and the translation-invariant kernels used by the kernel
//! estimators.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Result, SdrError};

/// Relative threshold below which a difference vector counts as zero.
const DEGENERATE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Gaussian,
    Laplace,
    RationalQuadratic,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gauss",
            KernelFamily::Laplace => "lap",
            KernelFamily::RationalQuadratic => "rq",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = SdrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauss" | "gaussian" => Ok(KernelFamily::Gaussian),
            "lap" | "laplace" | "laplacian" => Ok(KernelFamily::Laplace),
            "rq" | "rationalquadratic" | "rational_quadratic" => Ok(KernelFamily::RationalQuadratic),
            other => Err(SdrError::InvalidSpec(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// A kernel family together with its bandwidth `gamma > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    gamma: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(SdrError::InvalidSpec(format!("kernel bandwidth must be positive and finite, got {gamma}")));
        }
        Ok(Self { family, gamma })
    }

    pub fn gaussian(gamma: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, gamma)
    }

    pub fn laplace(gamma: f64) -> Result<Self> {
        Self::new(KernelFamily::Laplace, gamma)
    }

    pub fn rational_quadratic(gamma: f64) -> Result<Self> {
        Self::new(KernelFamily::RationalQuadratic, gamma)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Kernel value at a difference with squared norm `sq`.
    #[inline]
    pub fn eval_sq_norm(&self, sq: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-sq / self.gamma).exp(),
            KernelFamily::Laplace => (-sq.sqrt() / self.gamma).exp(),
            KernelFamily::RationalQuadratic => 1.0 - sq / (sq + self.gamma),
        }
    }
}

/// Which pairwise weight a [`PairWeightMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    KernelGram,
    AngleAggregate,
}

/// Symmetric `n x n` matrix of pairwise response weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PairWeightMatrix {
    pub kind: WeightKind,
    pub entries: DMatrix<f64>,
}

impl PairWeightMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(SdrError::InvalidVector("non-finite component".into()))
    }
}

/// Angle between `u` and `v` in `[0, π]`.
///
/// Returns 0 when either vector has norm at most
/// `1e-12 * max(‖u‖, ‖v‖, 1)`, which is how the tied and `i == k` terms of
/// the angle sums are treated.
pub fn ang(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(SdrError::DimensionMismatch(format!("vectors of length {} and {}", u.len(), v.len())));
    }
    check_finite(u)?;
    check_finite(v)?;
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let eps = DEGENERATE_REL * nu.max(nv).max(1.0);
    if nu <= eps || nv <= eps {
        return Ok(0.0);
    }
    let uu: Vec<f64> = u.iter().map(|x| x / nu).collect();
    let vv: Vec<f64> = v.iter().map(|x| x / nv).collect();
    let dot: f64 = uu.iter().zip(&vv).map(|(a, b)| a * b).sum();
    Ok(unit_angle(dot, &uu, &vv))
}

/// Angle between unit vectors with inner product `dot`. `acos` loses about
/// half the digits right next to ±1, so nearly (anti)parallel pairs go
/// through `2 asin(‖u ∓ v‖ / 2)` instead.
#[inline]
fn unit_angle(dot: f64, u: &[f64], v: &[f64]) -> f64 {
    if dot.abs() < 0.999 {
        return dot.acos();
    }
    let sign = dot.signum();
    let chord: f64 = u.iter().zip(v).map(|(a, b)| (a - sign * b) * (a - sign * b)).sum::<f64>().sqrt();
    let small = 2.0 * (0.5 * chord).min(1.0).asin();
    if sign > 0.0 { small } else { PI - small }
}

/// `K(delta)` for the given kernel; 1 at the origin for every family.
pub fn kernel_eval(spec: &KernelSpec, delta: &[f64]) -> Result<f64> {
    check_finite(delta)?;
    Ok(spec.eval_sq_norm(delta.iter().map(|x| x * x).sum()))
}

/// Copies the rows of `y` into one contiguous row-major buffer.
pub(crate) fn row_major(y: &DMatrix<f64>) -> Vec<f64> {
    let (n, q) = y.shape();
    let mut out = Vec::with_capacity(n * q);
    for i in 0..n {
        for c in 0..q {
            out.push(y[(i, c)]);
        }
    }
    out
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Kernel gram matrix `G[i][j] = K(Y_i − Y_j)`.
pub fn kernel_gram(spec: &KernelSpec, y: &DMatrix<f64>) -> Result<PairWeightMatrix> {
    check_finite(y.as_slice())?;
    let (n, q) = y.shape();
    let rows = row_major(y);
    let k0 = spec.eval_sq_norm(0.0);
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = k0;
        let yi = &rows[i * q..(i + 1) * q];
        for j in (i + 1)..n {
            let v = spec.eval_sq_norm(sq_dist(yi, &rows[j * q..(j + 1) * q]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(PairWeightMatrix { kind: WeightKind::KernelGram, entries: g })
}

/// Angle aggregate `W[i][j] = (1/n) Σ_k ang(Y_i − Y_k, Y_j − Y_k)`.
///
/// Θ(n³q) work. Only the upper triangle is computed and then mirrored; each
/// entry sums over `k` in ascending order, so the result does not depend on
/// how rows are distributed over threads.
pub fn angle_aggregate(y: &DMatrix<f64>) -> Result<PairWeightMatrix> {
    check_finite(y.as_slice())?;
    let (n, q) = y.shape();
    let rows = row_major(y);
    let upper: Vec<Vec<f64>> = if q == 1 {
        (0..n)
            .into_par_iter()
            .map(|i| (i..n).map(|j| scalar_angle_sum(&rows, i, j)).collect())
            .collect()
    } else {
        vector_angle_sums(&rows, n, q)
    };
    let inv_n = 1.0 / n as f64;
    let mut w = DMatrix::zeros(n, n);
    for (i, row) in upper.into_iter().enumerate() {
        for (offset, s) in row.into_iter().enumerate() {
            let j = i + offset;
            w[(i, j)] = s * inv_n;
            w[(j, i)] = s * inv_n;
        }
    }
    Ok(PairWeightMatrix { kind: WeightKind::AngleAggregate, entries: w })
}

/// `Σ_k ang(y_i − y_k, y_j − y_k)` for scalar responses: each term is π when
/// the two differences have opposite signs and 0 otherwise.
fn scalar_angle_sum(y: &[f64], i: usize, j: usize) -> f64 {
    let (yi, yj) = (y[i], y[j]);
    let mut count = 0u32;
    for &yk in y {
        let a = yi - yk;
        let b = yj - yk;
        let eps = DEGENERATE_REL * a.abs().max(b.abs()).max(1.0);
        if a.abs() > eps && b.abs() > eps && (a < 0.0) != (b < 0.0) {
            count += 1;
        }
    }
    count as f64 * PI
}

/// `Σ_k ang(Y_i − Y_k, Y_j − Y_k)` for every `j ≥ i`, returned per row `i`.
///
/// The anchor `k` is the outer loop so the `n` unit directions
/// `(Y_i − Y_k)/‖Y_i − Y_k‖` for one anchor stay in cache while every pair
/// is visited. Rows are split across threads, and each entry still adds its
/// terms in ascending `k`.
fn vector_angle_sums(rows: &[f64], n: usize, q: usize) -> Vec<Vec<f64>> {
    let mut upper: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; n - i]).collect();
    let mut units = vec![0.0; n * q];
    let mut norms = vec![0.0; n];
    for k in 0..n {
        let yk = &rows[k * q..(k + 1) * q];
        for i in 0..n {
            let d = &mut units[i * q..(i + 1) * q];
            let mut sq = 0.0;
            for c in 0..q {
                d[c] = rows[i * q + c] - yk[c];
                sq += d[c] * d[c];
            }
            let norm = sq.sqrt();
            norms[i] = norm;
            if norm > 0.0 {
                d.iter_mut().for_each(|v| *v /= norm);
            }
        }
        let (units, norms) = (&units, &norms);
        upper.par_iter_mut().enumerate().for_each(|(i, row)| match q {
            2 => accumulate_row::<2>(row, i, units, norms),
            3 => accumulate_row::<3>(row, i, units, norms),
            4 => accumulate_row::<4>(row, i, units, norms),
            _ => accumulate_row_dyn(row, i, q, units, norms),
        });
    }
    upper
}

fn accumulate_row<const Q: usize>(row: &mut [f64], i: usize, units: &[f64], norms: &[f64]) {
    let a = norms[i];
    let ui: &[f64; Q] = units[i * Q..(i + 1) * Q].try_into().expect("row width");
    let tail = units[(i + 1) * Q..].chunks_exact(Q).zip(&norms[i + 1..]);
    for (slot, (uj, &b)) in row[1..].iter_mut().zip(tail) {
        if a.min(b) <= DEGENERATE_REL * a.max(b).max(1.0) {
            continue;
        }
        let uj: &[f64; Q] = uj.try_into().expect("row width");
        let mut dot = 0.0;
        for c in 0..Q {
            dot += ui[c] * uj[c];
        }
        *slot += unit_angle(dot, ui, uj);
    }
}

fn accumulate_row_dyn(row: &mut [f64], i: usize, q: usize, units: &[f64], norms: &[f64]) {
    let a = norms[i];
    let ui = &units[i * q..(i + 1) * q];
    let tail = units[(i + 1) * q..].chunks_exact(q).zip(&norms[i + 1..]);
    for (slot, (uj, &b)) in row[1..].iter_mut().zip(tail) {
        if a.min(b) <= DEGENERATE_REL * a.max(b).max(1.0) {
            continue;
        }
        let dot: f64 = ui.iter().zip(uj).map(|(x, y)| x * y).sum();
        *slot += unit_angle(dot, ui, uj);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn ang_closed_forms() {
        assert_eq!(ang(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(ang(&[1.0, 2.0], &[-1.0, -2.0]).unwrap(), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(ang(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(ang(&[0.0, 0.0], &[3.0, 1.0]).unwrap(), 0.0);
        assert_eq!(ang(&[3.0, 1.0], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn ang_rejects_bad_input() {
        assert!(matches!(ang(&[f64::NAN], &[1.0]), Err(SdrError::InvalidVector(_))));
        assert!(matches!(ang(&[1.0], &[1.0, 2.0]), Err(SdrError::DimensionMismatch(_))));
    }

    #[test]
    fn kernel_closed_forms() {
        for family in [KernelFamily::Gaussian, KernelFamily::Laplace, KernelFamily::RationalQuadratic] {
            let spec = KernelSpec::new(family, 3.0).unwrap();
            assert_eq!(kernel_eval(&spec, &[0.0, 0.0]).unwrap(), 1.0);
        }
        let g = KernelSpec::gaussian(40.0).unwrap();
        // ‖delta‖² = 40
        let delta = [2.0, 6.0];
        assert_abs_diff_eq!(kernel_eval(&g, &delta).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        let rq = KernelSpec::rational_quadratic(5.0).unwrap();
        assert_abs_diff_eq!(kernel_eval(&rq, &[1.0, 2.0]).unwrap(), 0.5, epsilon = 1e-15);
        let lap = KernelSpec::laplace(2.0).unwrap();
        assert_abs_diff_eq!(kernel_eval(&lap, &[3.0, 4.0]).unwrap(), (-2.5f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn kernel_spec_rejects_bad_gamma() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::laplace(-1.0).is_err());
        assert!(KernelSpec::rational_quadratic(f64::NAN).is_err());
        assert!(KernelSpec::gaussian(f64::INFINITY).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("Gauss".parse::<KernelFamily>().unwrap(), KernelFamily::Gaussian);
        assert_eq!("laplace".parse::<KernelFamily>().unwrap(), KernelFamily::Laplace);
        assert_eq!("rq".parse::<KernelFamily>().unwrap(), KernelFamily::RationalQuadratic);
        assert!("cosine".parse::<KernelFamily>().is_err());
    }

    #[test]
    fn gram_small_cases() {
        let spec = KernelSpec::gaussian(1.0).unwrap();
        let one = DMatrix::from_row_slice(1, 2, &[0.3, -1.0]);
        assert_eq!(kernel_gram(&spec, &one).unwrap().entries, DMatrix::from_element(1, 1, 1.0));

        let constant = DMatrix::from_element(4, 2, 7.5);
        assert_eq!(kernel_gram(&spec, &constant).unwrap().entries, DMatrix::from_element(4, 4, 1.0));

        let bad = DMatrix::from_row_slice(2, 1, &[0.0, f64::INFINITY]);
        assert!(kernel_gram(&spec, &bad).is_err());
    }

    #[test]
    fn angle_aggregate_small_cases() {
        let one = DMatrix::from_row_slice(1, 1, &[2.0]);
        assert_eq!(angle_aggregate(&one).unwrap().entries, DMatrix::zeros(1, 1));

        let two = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 3.0, -2.0]);
        assert_eq!(angle_aggregate(&two).unwrap().entries, DMatrix::zeros(2, 2));
        let two_scalar = DMatrix::from_row_slice(2, 1, &[0.0, 5.0]);
        assert_eq!(angle_aggregate(&two_scalar).unwrap().entries, DMatrix::zeros(2, 2));
    }

    #[test]
    fn angle_aggregate_scalar_path_matches_general_formula() {
        // The q = 1 shortcut must agree with the definition term by term.
        let ys = [0.0, 1.0, 3.0, 1.0, -2.5, 0.7];
        let y = DMatrix::from_column_slice(ys.len(), 1, &ys);
        let w = angle_aggregate(&y).unwrap().entries;
        let n = ys.len();
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += ang(&[ys[i] - ys[k]], &[ys[j] - ys[k]]).unwrap();
                }
                assert_abs_diff_eq!(w[(i, j)], s / n as f64, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn angle_aggregate_entries_in_range_and_symmetric() {
        let y = DMatrix::from_row_slice(5, 2, &[0.0, 1.0, 2.0, -1.0, 0.5, 0.5, -3.0, 2.0, 1.0, 1.0]);
        let w = angle_aggregate(&y).unwrap().entries;
        assert_eq!(w, w.transpose());
        assert!(w.iter().all(|v| (0.0..=PI).contains(v)));
    }
}

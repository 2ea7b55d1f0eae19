//! Dense symmetric linear algebra.
//!
//! Everything here works on small `p x p` matrices (p is the predictor
//! dimension, tens at most), so the eigen solver is a plain cyclic Jacobi
//! iteration: deterministic for a fixed input and accurate to working
//! precision on every eigenpair.

use nalgebra::DMatrix;

use crate::error::{Result, SdrError};

/// Largest number of full Jacobi sweeps. Convergence is quadratic, so real
/// inputs finish in well under twenty.
const MAX_SWEEPS: usize = 64;

/// A real symmetric matrix with finite entries.
///
/// Construction symmetrizes the input as `(A + Aᵀ) / 2`, which makes
/// `entries[i][j] == entries[j][i]` hold exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(SdrError::InvalidMatrix(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(SdrError::InvalidMatrix("empty matrix".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(SdrError::InvalidMatrix("non-finite entry".into()));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self(sym))
    }

    pub fn identity(p: usize) -> Self {
        Self(DMatrix::identity(p, p))
    }

    pub fn zeros(p: usize) -> Self {
        Self(DMatrix::zeros(p, p))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let p = diag.len();
        let mut m = DMatrix::zeros(p, p);
        for (i, v) in diag.iter().enumerate() {
            m[(i, i)] = *v;
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// `self * factor`, still symmetric.
    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }
}

/// Full spectral decomposition of a symmetric matrix.
///
/// `values` are sorted by descending signed value; column `k` of `vectors`
/// pairs with `values[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// `V diag(values) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, k| {
            self.vectors[(i, k)] * self.values[k]
        });
        scaled * self.vectors.transpose()
    }
}

/// A `p x d` basis with orthonormal columns and the eigenvalues that
/// selected it (descending by absolute value).
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceEstimate {
    pub basis: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

impl SubspaceEstimate {
    pub fn d(&self) -> usize {
        self.basis.ncols()
    }

    pub fn p(&self) -> usize {
        self.basis.nrows()
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back sorted descending by signed value (ties keep their
/// diagonal order) and every eigenvector has its largest-magnitude component
/// positive, so the output is a deterministic function of the input.
pub fn sym_eig(a: &SymmetricMatrix) -> EigenDecomposition {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.norm();

    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += m[(p, q)] * m[(p, q)];
                }
            }
            if off.sqrt() <= f64::EPSILON * 1e-2 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                    let t = if theta.is_finite() {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    } else {
                        0.0
                    };
                    if t == 0.0 {
                        m[(p, q)] = 0.0;
                        m[(q, p)] = 0.0;
                        continue;
                    }
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));

    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut col = v.column(src).clone_owned();
        fix_sign(col.as_mut_slice());
        vectors.set_column(k, &col);
    }
    EigenDecomposition { values, vectors }
}

/// Flips `v` so its largest-magnitude component (first one on ties) is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Default ridge used when a covariance fails to invert: `1e-10 * trace / p`.
pub fn default_ridge(a: &SymmetricMatrix) -> f64 {
    1e-10 * a.trace() / a.dim() as f64
}

/// Inverse square root of `A + ridge * I`.
///
/// Fails with [`SdrError::SingularCovariance`] when an eigenvalue of the
/// shifted matrix is at or below `1e-14 * trace(A) / p`.
pub fn spd_inv_sqrt(a: &SymmetricMatrix, ridge: f64) -> Result<SymmetricMatrix> {
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(SdrError::InvalidSpec(format!("ridge must be finite and nonnegative, got {ridge}")));
    }
    let p = a.dim();
    let threshold = 1e-14 * a.trace() / p as f64;
    let shifted = if ridge > 0.0 {
        SymmetricMatrix::new(a.as_matrix() + DMatrix::<f64>::identity(p, p) * ridge)?
    } else {
        a.clone()
    };
    let eig = sym_eig(&shifted);
    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > threshold) || min <= 0.0 {
        return Err(SdrError::SingularCovariance { min_eigenvalue: min });
    }
    let inv = EigenDecomposition {
        values: eig.values.iter().map(|l| 1.0 / l.sqrt()).collect(),
        vectors: eig.vectors,
    };
    SymmetricMatrix::new(inv.reconstruct())
}

/// Orthogonal projection onto the column span of `g`, `G (GᵀG)⁻¹ Gᵀ`.
pub fn projection_matrix(g: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    if g.ncols() == 0 || g.nrows() == 0 {
        return Err(SdrError::DimensionMismatch("empty basis".into()));
    }
    if g.ncols() > g.nrows() {
        return Err(SdrError::RankDeficient { ratio: 0.0 });
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(SdrError::InvalidMatrix("non-finite basis entry".into()));
    }
    let gram = SymmetricMatrix::new(g.transpose() * g)?;
    let eig = sym_eig(&gram);
    let largest = eig.values[0];
    let smallest = *eig.values.last().unwrap();
    // singular values of G are the square roots of the gram eigenvalues
    let ratio = if largest > 0.0 { smallest.max(0.0).sqrt() / largest.sqrt() } else { 0.0 };
    if !(ratio > 1e-10) {
        return Err(SdrError::RankDeficient { ratio });
    }
    let gram_inv = EigenDecomposition {
        values: eig.values.iter().map(|l| 1.0 / l).collect(),
        vectors: eig.vectors,
    }
    .reconstruct();
    SymmetricMatrix::new(g * gram_inv * g.transpose())
}

/// `‖P_G1 − P_G2‖_F`, the distance between two column spans.
pub fn subspace_distance(g1: &DMatrix<f64>, g2: &DMatrix<f64>) -> Result<f64> {
    if g1.nrows() != g2.nrows() {
        return Err(SdrError::DimensionMismatch(format!(
            "bases live in R^{} and R^{}",
            g1.nrows(),
            g2.nrows()
        )));
    }
    let p1 = projection_matrix(g1)?;
    let p2 = projection_matrix(g2)?;
    Ok((p1.as_matrix() - p2.as_matrix()).norm())
}

/// Trace correlation `sqrt(tr(P_G1 P_G2) / d)` between two `d`-dimensional spans.
pub fn trace_correlation(g1: &DMatrix<f64>, g2: &DMatrix<f64>) -> Result<f64> {
    if g1.ncols() != g2.ncols() || g1.nrows() != g2.nrows() {
        return Err(SdrError::DimensionMismatch(format!(
            "trace correlation needs equal shapes, got {}x{} and {}x{}",
            g1.nrows(),
            g1.ncols(),
            g2.nrows(),
            g2.ncols()
        )));
    }
    let p1 = projection_matrix(g1)?;
    let p2 = projection_matrix(g2)?;
    // tr(P1 P2) = sum of entrywise products for symmetric P1, P2
    let tr = p1.as_matrix().component_mul(p2.as_matrix()).sum();
    let d = g1.ncols() as f64;
    Ok((tr / d).clamp(0.0, 1.0).sqrt())
}

/// Orthonormalizes the columns of `g` (modified Gram-Schmidt, two passes)
/// and applies the largest-component-positive sign convention per column.
pub fn orthonormalize_columns(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (p, d) = g.shape();
    let mut q = g.clone();
    let scale = g.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    for k in 0..d {
        for _ in 0..2 {
            for j in 0..k {
                let proj = q.column(j).dot(&q.column(k));
                let qj = q.column(j).clone_owned();
                let mut ck = q.column_mut(k);
                ck.axpy(-proj, &qj, 1.0);
            }
        }
        let norm = q.column(k).norm();
        if !(norm > 1e-12 * scale) {
            return Err(SdrError::RankDeficient { ratio: if scale > 0.0 { norm / scale } else { 0.0 } });
        }
        let mut col = q.column(k) / norm;
        fix_sign(col.as_mut_slice());
        q.set_column(k, &col);
    }
    debug_assert_eq!(q.nrows(), p);
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(p: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(p, p, |_, _| rng.gen_range(-1.0..1.0));
        SymmetricMatrix::new(m).unwrap()
    }

    fn random_spd(p: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(p, p + 3, |_, _| rng.gen_range(-1.0..1.0));
        SymmetricMatrix::new(&b * b.transpose()).unwrap()
    }

    #[test]
    fn construction_symmetrizes_and_rejects_nan() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 4.0, 3.0]);
        let s = SymmetricMatrix::new(m).unwrap();
        assert_eq!(s.as_matrix()[(0, 1)], 3.0);
        assert_eq!(s.as_matrix()[(1, 0)], 3.0);

        let bad = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(SymmetricMatrix::new(bad), Err(SdrError::InvalidMatrix(_))));
        let nonsquare = DMatrix::<f64>::zeros(2, 3);
        assert!(SymmetricMatrix::new(nonsquare).is_err());
    }

    #[test]
    fn eig_diagonal_is_sorted_signed_permutation() {
        let a = SymmetricMatrix::from_diagonal(&[3.0, 1.0, 2.0]).unwrap();
        let e = sym_eig(&a);
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(e.vectors, expected);
    }

    #[test]
    fn eig_identity() {
        let e = sym_eig(&SymmetricMatrix::identity(4));
        assert!(e.values.iter().all(|v| *v == 1.0));
    }

    #[test]
    fn eig_reconstructs_random_symmetric() {
        for seed in 0..20 {
            let a = random_symmetric(5, seed);
            let e = sym_eig(&a);
            let err = (e.reconstruct() - a.as_matrix()).norm();
            assert!(err <= 1e-8 * (1.0 + a.frobenius_norm()), "seed {seed}: {err}");
            let orth = (e.vectors.transpose() * &e.vectors - DMatrix::<f64>::identity(5, 5)).norm();
            assert!(orth <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_sign_convention_and_determinism() {
        let a = random_symmetric(6, 99);
        let e1 = sym_eig(&a);
        let e2 = sym_eig(&a);
        assert_eq!(e1, e2);
        for col in e1.vectors.column_iter() {
            let (mut best, mut mag) = (0.0, 0.0);
            for x in col.iter() {
                if x.abs() > mag {
                    mag = x.abs();
                    best = *x;
                }
            }
            assert!(best > 0.0);
        }
    }

    #[test]
    fn eig_zero_matrix() {
        let e = sym_eig(&SymmetricMatrix::zeros(3));
        assert_eq!(e.values, vec![0.0; 3]);
        assert_eq!(e.vectors, DMatrix::<f64>::identity(3, 3));
    }

    #[test]
    fn inv_sqrt_closed_forms() {
        let b = spd_inv_sqrt(&SymmetricMatrix::identity(3), 0.0).unwrap();
        assert_abs_diff_eq!(b.as_matrix(), &DMatrix::<f64>::identity(3, 3), epsilon = 1e-15);

        let b = spd_inv_sqrt(&SymmetricMatrix::from_diagonal(&[4.0, 1.0]).unwrap(), 0.0).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(b.as_matrix(), &expected, epsilon = 1e-15);
    }

    #[test]
    fn inv_sqrt_multiplies_back_to_identity() {
        for seed in 0..10 {
            let a = random_spd(6, seed);
            let b = spd_inv_sqrt(&a, 0.0).unwrap();
            let prod = b.as_matrix() * a.as_matrix() * b.as_matrix();
            assert!((prod - DMatrix::<f64>::identity(6, 6)).norm() <= 1e-8);
        }
    }

    #[test]
    fn inv_sqrt_singular_and_ridge() {
        let a = SymmetricMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(spd_inv_sqrt(&a, 0.0), Err(SdrError::SingularCovariance { .. })));
        let b = spd_inv_sqrt(&a, 1.0).unwrap();
        assert_abs_diff_eq!(b.as_matrix()[(1, 1)], 1.0, epsilon = 1e-14);
        assert!(spd_inv_sqrt(&SymmetricMatrix::zeros(2), 0.0).is_err());
        assert!(spd_inv_sqrt(&a, -1.0).is_err());
    }

    #[test]
    fn projection_closed_forms() {
        let e1 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let p = projection_matrix(&e1).unwrap();
        assert_eq!(p.as_matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));

        let s = 0.5f64.sqrt();
        let diag = DMatrix::from_column_slice(2, 1, &[s, s]);
        let p = projection_matrix(&diag).unwrap();
        assert_abs_diff_eq!(p.as_matrix(), &DMatrix::from_element(2, 2, 0.5), epsilon = 1e-15);
    }

    #[test]
    fn projection_is_idempotent_with_trace_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..=3 {
            let g = DMatrix::from_fn(6, d, |_, _| rng.gen_range(-2.0..2.0));
            let p = projection_matrix(&g).unwrap();
            let pm = p.as_matrix();
            assert!((pm * pm - pm).norm() <= 1e-8);
            assert_abs_diff_eq!(p.trace(), d as f64, epsilon = 1e-8);
            for v in sym_eig(&p).values {
                assert!(v.abs() < 1e-8 || (v - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn projection_rejects_rank_deficient() {
        let g = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(matches!(projection_matrix(&g), Err(SdrError::RankDeficient { .. })));
        let z = DMatrix::<f64>::zeros(3, 1);
        assert!(matches!(projection_matrix(&z), Err(SdrError::RankDeficient { .. })));
    }

    #[test]
    fn distance_closed_forms() {
        let e1 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let e2 = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let s = 0.5f64.sqrt();
        let diag = DMatrix::from_column_slice(2, 1, &[s, s]);
        assert_eq!(subspace_distance(&e1, &e1).unwrap(), 0.0);
        assert_abs_diff_eq!(subspace_distance(&e1, &e2).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(subspace_distance(&e1, &diag).unwrap(), 1.0, epsilon = 1e-15);
        let e3 = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        assert!(matches!(subspace_distance(&e1, &e3), Err(SdrError::DimensionMismatch(_))));
    }

    #[test]
    fn trace_correlation_closed_forms() {
        let e1 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let e2 = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let s = 0.5f64.sqrt();
        let diag = DMatrix::from_column_slice(2, 1, &[s, s]);
        assert_abs_diff_eq!(trace_correlation(&e1, &e1).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(trace_correlation(&e1, &e2).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(trace_correlation(&e1, &diag).unwrap(), s, epsilon = 1e-12);
        let two = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(trace_correlation(&e1, &two), Err(SdrError::DimensionMismatch(_))));
    }

    #[test]
    fn orthonormalize_keeps_span() {
        let g = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let q = orthonormalize_columns(&g).unwrap();
        assert_abs_diff_eq!(q.transpose() * &q, DMatrix::<f64>::identity(2, 2), epsilon = 1e-14);
        assert!(subspace_distance(&g, &q).unwrap() < 1e-12);
    }
}

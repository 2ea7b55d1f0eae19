//! First-order (inverse conditional mean) estimators.

use nalgebra::DMatrix;

use super::{center, require_samples, CandidateMatrix, DataSet};
use crate::error::Result;
use crate::kernels::{angle_aggregate, row_major, sq_dist, KernelSpec};
use crate::linalg::SymmetricMatrix;

/// `Λ̂_PR = −(1/n³) Σ_ijk Z_i Z_jᵀ ang(Y_i − Y_k, Y_j − Y_k) = −Zᵀ W Z / n²`.
pub fn icmi_pr(data: &DataSet) -> Result<CandidateMatrix> {
    require_samples(data, 2)?;
    let design = center(data.x())?;
    let w = angle_aggregate(data.y())?.entries;
    let n = data.n() as f64;
    SymmetricMatrix::new(-design.z.tr_mul(&(w * &design.z)) / (n * n))
}

/// `Λ̂_K = (1/n²) Σ_ij Z_i Z_jᵀ K(Y_i − Y_j)`.
///
/// The gram matrix is never materialized: each pair weight is folded into
/// `V = G Z` as it is computed, so memory stays O(np).
pub fn icmi_kernel(data: &DataSet, kernel: &KernelSpec) -> Result<CandidateMatrix> {
    require_samples(data, 2)?;
    let design = center(data.x())?;
    let y = row_major(data.y());
    let q = data.q();
    let weighted = pair_weighted_sum(&design.z, kernel.eval_sq_norm(0.0), |i, j| {
        kernel.eval_sq_norm(sq_dist(&y[i * q..(i + 1) * q], &y[j * q..(j + 1) * q]))
    });
    let n = data.n() as f64;
    SymmetricMatrix::new(design.z.tr_mul(&weighted) / (n * n))
}

/// Sample martingale difference divergence matrix,
/// `−(1/n²) Σ_ij Z_i Z_jᵀ ‖Y_i − Y_j‖`.
pub fn mddm(data: &DataSet) -> Result<CandidateMatrix> {
    require_samples(data, 2)?;
    let design = center(data.x())?;
    let y = row_major(data.y());
    let q = data.q();
    let weighted =
        pair_weighted_sum(&design.z, 0.0, |i, j| sq_dist(&y[i * q..(i + 1) * q], &y[j * q..(j + 1) * q]).sqrt());
    let n = data.n() as f64;
    SymmetricMatrix::new(-design.z.tr_mul(&weighted) / (n * n))
}

/// Indicator-weight ICMI matrix,
/// `(1/n³) Σ_ijk Z_i Z_jᵀ I(Y_i ≤ Y_k) I(Y_j ≤ Y_k)` with `≤` taken
/// component-wise. For a scalar response this is the cumulative mean
/// estimator with unit weight.
///
/// Computed as `(1/n³) Σ_k a_k a_kᵀ` with `a_k = Σ_i Z_i I(Y_i ≤ Y_k)`.
pub fn icmi_id(data: &DataSet) -> Result<CandidateMatrix> {
    require_samples(data, 2)?;
    let design = center(data.x())?;
    let (n, p, q) = (data.n(), data.p(), data.q());
    let y = row_major(data.y());
    let z = row_major(&design.z);
    let mut cumulative = DMatrix::<f64>::zeros(p, n);
    for k in 0..n {
        let yk = &y[k * q..(k + 1) * q];
        let mut col = cumulative.column_mut(k);
        for i in 0..n {
            if y[i * q..(i + 1) * q].iter().zip(yk).all(|(a, b)| a <= b) {
                for c in 0..p {
                    col[c] += z[i * p + c];
                }
            }
        }
    }
    let nf = n as f64;
    SymmetricMatrix::new(&cumulative * cumulative.transpose() / (nf * nf * nf))
}

/// `V = W Z` for the symmetric pair weight `W[i][j] = weight(i, j)` (called
/// once per unordered pair, `i < j`) with constant diagonal `diag`.
pub(super) fn pair_weighted_sum(z: &DMatrix<f64>, diag: f64, weight: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let (n, p) = z.shape();
    let rows = row_major(z);
    let mut v: Vec<f64> = rows.iter().map(|x| x * diag).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weight(i, j);
            if w == 0.0 {
                continue;
            }
            for c in 0..p {
                v[i * p + c] += w * rows[j * p + c];
                v[j * p + c] += w * rows[i * p + c];
            }
        }
    }
    DMatrix::from_row_slice(n, p, &v)
}

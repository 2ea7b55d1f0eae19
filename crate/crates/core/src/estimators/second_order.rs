//! Second-order (inverse conditional variance) estimators.

use nalgebra::{DMatrix, DVector};

use super::{center, require_samples, CandidateMatrix, CenteredDesign, DataSet};
use crate::error::Result;
use crate::kernels::{angle_aggregate, row_major, sq_dist, KernelSpec};
use crate::linalg::SymmetricMatrix;

/// `Λ̂_V.PR = −(1/n³) Σ_ijk (Z_iZ_iᵀ − Σ̂)(Z_jZ_jᵀ − Σ̂) ang(Y_i − Y_k, Y_j − Y_k)`.
pub fn icvi_pr(data: &DataSet) -> Result<CandidateMatrix> {
    require_samples(data, 2)?;
    let design = center(data.x())?;
    let w = angle_aggregate(data.y())?.entries;
    let z = &design.z;
    let hadamard = w.component_mul(&(z * z.transpose()));
    let u = hadamard * z;
    let row_sums = DVector::from_fn(w.nrows(), |i, _| w.row(i).sum());
    combine(&design, &u, &row_sums, -1.0)
}

/// `Λ̂_V.K = (1/n²) Σ_ij (Z_iZ_iᵀ − Σ̂)(Z_jZ_jᵀ − Σ̂) K(Y_i − Y_j)`.
pub fn icvi_kernel(data: &DataSet, kernel: &KernelSpec) -> Result<CandidateMatrix> {
    require_samples(data, 2)?;
    let design = center(data.x())?;
    let y = row_major(data.y());
    let q = data.q();
    let (u, row_sums) = streamed_sums(&design.z, kernel.eval_sq_norm(0.0), |i, j| {
        kernel.eval_sq_norm(sq_dist(&y[i * q..(i + 1) * q], &y[j * q..(j + 1) * q]))
    });
    combine(&design, &u, &row_sums, 1.0)
}

/// Assembles `sign/n² · [ZᵀU − S_wΣ̂ − Σ̂S_w + (Σw)Σ̂²]` where
/// `U = (W∘ZZᵀ)Z`, `w = W1` and `S_w = Zᵀ diag(w) Z`.
fn combine(design: &CenteredDesign, u: &DMatrix<f64>, row_sums: &DVector<f64>, sign: f64) -> Result<CandidateMatrix> {
    let z = &design.z;
    let sigma = design.cov.as_matrix();
    let (n, p) = z.shape();
    let mut scaled = z.clone();
    for i in 0..n {
        scaled.row_mut(i).scale_mut(row_sums[i]);
    }
    let s_w = z.tr_mul(&scaled);
    let total: f64 = row_sums.sum();
    let mut out = z.tr_mul(u);
    out -= &s_w * sigma;
    out -= sigma * &s_w;
    out += sigma * sigma * total;
    debug_assert_eq!(out.shape(), (p, p));
    let nf = n as f64;
    SymmetricMatrix::new(out * (sign / (nf * nf)))
}

/// Streams a symmetric pair weight into `U = (W∘ZZᵀ)Z` and `w = W1`.
fn streamed_sums(z: &DMatrix<f64>, diag: f64, weight: impl Fn(usize, usize) -> f64) -> (DMatrix<f64>, DVector<f64>) {
    let (n, p) = z.shape();
    let rows = row_major(z);
    let mut u = vec![0.0; n * p];
    let mut w = vec![diag; n];
    for i in 0..n {
        let zi = &rows[i * p..(i + 1) * p];
        let self_dot: f64 = zi.iter().map(|x| x * x).sum();
        for c in 0..p {
            u[i * p + c] += diag * self_dot * zi[c];
        }
        for j in (i + 1)..n {
            let k = weight(i, j);
            if k == 0.0 {
                continue;
            }
            let zj = &rows[j * p..(j + 1) * p];
            let g = k * zi.iter().zip(zj).map(|(a, b)| a * b).sum::<f64>();
            for c in 0..p {
                u[i * p + c] += g * zj[c];
                u[j * p + c] += g * zi[c];
            }
            w[i] += k;
            w[j] += k;
        }
    }
    (DMatrix::from_row_slice(n, p, &u), DVector::from_vec(w))
}

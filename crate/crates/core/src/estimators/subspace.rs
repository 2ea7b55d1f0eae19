//! From a candidate matrix to an orthonormal subspace basis.

use super::{candidate_matrix, center, DataSet, MethodSpec};
use crate::error::{Result, SdrError};
use crate::linalg::{default_ridge, orthonormalize_columns, spd_inv_sqrt, sym_eig, SubspaceEstimate, SymmetricMatrix};

/// Estimates a `d`-dimensional central subspace basis.
///
/// With `ridge == 0` a singular covariance is retried once with
/// [`default_ridge`]; a positive `ridge` is used as given.
pub fn estimate_subspace(data: &DataSet, spec: &MethodSpec, d: usize, ridge: f64) -> Result<SubspaceEstimate> {
    check_dimension(d, data.p())?;
    let lambda = candidate_matrix(data, spec)?;
    let cov = center(data.x())?.cov;
    subspace_from_candidate(&cov, &lambda, d, ridge)
}

/// Leading `d` generalized eigenvectors of `(lambda, cov)`, ranked by
/// absolute eigenvalue, mapped back to the predictor scale and orthonormalized.
pub fn subspace_from_candidate(
    cov: &SymmetricMatrix,
    lambda: &SymmetricMatrix,
    d: usize,
    ridge: f64,
) -> Result<SubspaceEstimate> {
    let p = cov.dim();
    if lambda.dim() != p {
        return Err(SdrError::DimensionMismatch(format!(
            "candidate is {}x{} but covariance is {p}x{p}",
            lambda.dim(),
            lambda.dim()
        )));
    }
    check_dimension(d, p)?;
    let root = match spd_inv_sqrt(cov, ridge) {
        Err(SdrError::SingularCovariance { .. }) if ridge == 0.0 => spd_inv_sqrt(cov, default_ridge(cov))?,
        other => other?,
    };
    let root = root.as_matrix();
    let whitened = SymmetricMatrix::new(root * lambda.as_matrix() * root)?;
    let eig = sym_eig(&whitened);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.values[b].abs().total_cmp(&eig.values[a].abs()).then(a.cmp(&b)));
    let chosen = &order[..d];
    let directions = eig.vectors.select_columns(chosen);
    let basis = orthonormalize_columns(&(root * directions))?;
    Ok(SubspaceEstimate { basis, eigenvalues: chosen.iter().map(|&k| eig.values[k]).collect() })
}

fn check_dimension(d: usize, p: usize) -> Result<()> {
    if d == 0 || d > p {
        Err(SdrError::DimensionMismatch(format!("structural dimension {d} must lie in 1..={p}")))
    } else {
        Ok(())
    }
}

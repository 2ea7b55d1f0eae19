//! Slicing baselines: SIR and SAVE.

use nalgebra::DMatrix;

use super::{center, CandidateMatrix, DataSet};
use crate::error::{Result, SdrError};
use crate::linalg::SymmetricMatrix;

/// Slice index in `0..slices` for every response value.
///
/// Boundaries are the empirical quantiles at `k / slices`
/// (`sorted[ceil(k n / slices) - 1]`); a value equal to a boundary falls in
/// the lower slice, so heavy ties can leave some slices empty.
pub fn slice_labels(y: &[f64], slices: usize) -> Result<Vec<usize>> {
    let n = y.len();
    if slices == 0 {
        return Err(SdrError::InvalidSpec("slice count must be positive".into()));
    }
    if slices > n {
        return Err(SdrError::TooManySlices { slices, n });
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let bounds: Vec<f64> = (1..slices).map(|k| sorted[(k * n).div_ceil(slices) - 1]).collect();
    Ok(y.iter().map(|v| bounds.iter().filter(|b| v > b).count()).collect())
}

fn sliced_rows(data: &DataSet, slices: usize, method: &'static str) -> Result<Vec<Vec<usize>>> {
    if data.q() != 1 {
        return Err(SdrError::UnivariateOnly(method));
    }
    let y: Vec<f64> = data.y().column(0).iter().copied().collect();
    let labels = slice_labels(&y, slices)?;
    let mut groups = vec![Vec::new(); slices];
    for (i, h) in labels.into_iter().enumerate() {
        groups[h].push(i);
    }
    Ok(groups)
}

/// Sliced inverse regression, `Σ_h (n_h/n)(m_h − X̄)(m_h − X̄)ᵀ`.
pub fn sir(data: &DataSet, slices: usize) -> Result<CandidateMatrix> {
    let groups = sliced_rows(data, slices, "sir")?;
    let design = center(data.x())?;
    let (n, p) = design.z.shape();
    let mut out = DMatrix::zeros(p, p);
    for rows in groups.iter().filter(|r| !r.is_empty()) {
        let nh = rows.len() as f64;
        let mut m = nalgebra::DVector::zeros(p);
        for &i in rows {
            m += design.z.row(i).transpose();
        }
        m /= nh;
        out += &m * m.transpose() * (nh / n as f64);
    }
    SymmetricMatrix::new(out)
}

/// Sliced average variance estimation, `Σ_h (n_h/n)(Σ̂ − Σ̂_h)²` with
/// divisor-`n_h` slice covariances.
pub fn save(data: &DataSet, slices: usize) -> Result<CandidateMatrix> {
    let groups = sliced_rows(data, slices, "save")?;
    let design = center(data.x())?;
    let (n, p) = design.z.shape();
    let sigma = design.cov.as_matrix();
    let mut out = DMatrix::zeros(p, p);
    for (h, rows) in groups.iter().enumerate().filter(|(_, r)| !r.is_empty()) {
        if rows.len() < 2 {
            return Err(SdrError::SliceTooSmall { slice: h, size: rows.len() });
        }
        let within = center(&design.z.select_rows(rows))?;
        let diff = sigma - within.cov.as_matrix();
        out += &diff * &diff * (rows.len() as f64 / n as f64);
    }
    SymmetricMatrix::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn data(x: &[f64], p: usize, y: &[f64]) -> DataSet {
        let n = y.len();
        DataSet::new(DMatrix::from_row_slice(n, p, x), DMatrix::from_column_slice(n, 1, y)).unwrap()
    }

    #[test]
    fn labels_split_evenly() {
        let y = [5.0, 1.0, 3.0, 2.0, 6.0, 4.0];
        assert_eq!(slice_labels(&y, 2).unwrap(), vec![1, 0, 0, 0, 1, 1]);
        assert_eq!(slice_labels(&y, 3).unwrap(), vec![2, 0, 1, 0, 2, 1]);
        assert_eq!(slice_labels(&y, 1).unwrap(), vec![0; 6]);
    }

    #[test]
    fn ties_go_to_the_lower_slice() {
        let y = [1.0, 2.0, 2.0, 2.0, 3.0];
        assert_eq!(slice_labels(&y, 2).unwrap(), vec![0, 0, 0, 0, 1]);
    }

    #[test]
    fn too_many_slices() {
        assert_eq!(slice_labels(&[1.0, 2.0], 3), Err(SdrError::TooManySlices { slices: 3, n: 2 }));
    }

    #[test]
    fn sir_two_groups_by_hand() {
        let x = [0.0, 1.0, 2.0, 10.0, 11.0, 12.0];
        let d = data(&x, 1, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        // slice means 1 and 11, grand mean 6: 0.5·25 + 0.5·25
        assert_relative_eq!(sir(&d, 2).unwrap().as_matrix()[(0, 0)], 25.0, epsilon = 1e-12);
        assert!(sir(&d, 1).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn save_two_groups_by_hand() {
        let x = [-1.0, 1.0, -1.0, 1.0, -3.0, 3.0, -3.0, 3.0];
        let d = data(&x, 1, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        // Σ̂ = 5, slice variances 1 and 9
        let m = save(&d, 2).unwrap();
        assert_relative_eq!(m.as_matrix()[(0, 0)], 16.0, epsilon = 1e-12);
        assert!(save(&d, 1).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn save_rejects_singleton_slice() {
        let d = data(&[1.0, 2.0, 3.0], 1, &[1.0, 2.0, 3.0]);
        assert!(matches!(save(&d, 3), Err(SdrError::SliceTooSmall { .. })));
    }

    #[test]
    fn constant_x_gives_zero() {
        let d = data(&[2.0; 6], 1, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(sir(&d, 2).unwrap().as_matrix()[(0, 0)], 0.0);
        assert_eq!(save(&d, 2).unwrap().as_matrix()[(0, 0)], 0.0);
    }

    #[test]
    fn multivariate_response_is_rejected() {
        let d = DataSet::new(DMatrix::from_element(4, 1, 1.0), DMatrix::from_element(4, 2, 1.0)).unwrap();
        assert_eq!(sir(&d, 2), Err(SdrError::UnivariateOnly("sir")));
    }
}

//! Literal-sum reference implementations of every estimator, written
//! independently of the factorized library code and only fit for tiny n.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdrkit::DataSet;

pub struct Instance {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

impl Instance {
    pub fn data(&self) -> DataSet {
        DataSet::new(self.x.clone(), self.y.clone()).unwrap()
    }
}

/// Random instance with `n ≤ 8`, `p ≤ 3`, `q ≤ 2`. Every fourth instance
/// rounds `Y` to a coarse grid so ties and zero differences show up.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=8);
    let p = rng.gen_range(1..=3);
    let q = rng.gen_range(1..=2);
    let x: DMatrix<f64> = DMatrix::from_fn(n, p, |_, _| rng.gen_range(-2.0..2.0));
    let mut y: DMatrix<f64> = DMatrix::from_fn(n, q, |_, _| rng.gen_range(-2.0..2.0));
    if seed % 4 == 3 {
        y.iter_mut().for_each(|v| *v = v.round());
    }
    Instance { x, y }
}

pub fn centered(x: &DMatrix<f64>) -> (Vec<DVector<f64>>, DMatrix<f64>) {
    let n = x.nrows();
    let mean: DVector<f64> = x.row_sum().transpose() / n as f64;
    let z: Vec<DVector<f64>> = (0..n).map(|i| x.row(i).transpose() - &mean).collect();
    let mut cov = DMatrix::zeros(x.ncols(), x.ncols());
    for zi in &z {
        cov += zi * zi.transpose();
    }
    (z, cov / n as f64)
}

fn row(y: &DMatrix<f64>, i: usize) -> DVector<f64> {
    y.row(i).transpose()
}

/// Angle via `2 atan2(‖û − v̂‖, ‖û + v̂‖)`, zero for (relatively) null vectors.
pub fn oracle_ang(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let (nu, nv) = (u.norm(), v.norm());
    let eps = 1e-12 * nu.max(nv).max(1.0);
    if nu <= eps || nv <= eps {
        return 0.0;
    }
    let (a, b) = (u / nu, v / nv);
    2.0 * (&a - &b).norm().atan2((&a + &b).norm())
}

pub fn gaussian(gamma: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| (-(r * r) / gamma).exp()
}

pub fn laplace(gamma: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| (-r / gamma).exp()
}

pub fn rational_quadratic(gamma: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| 1.0 - r * r / (r * r + gamma)
}

pub fn icmi_pr(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let (z, _) = centered(x);
    let n = z.len();
    let mut out = DMatrix::zeros(x.ncols(), x.ncols());
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let a = oracle_ang(&(row(y, i) - row(y, k)), &(row(y, j) - row(y, k)));
                out -= &z[i] * z[j].transpose() * a;
            }
        }
    }
    out / (n as f64).powi(3)
}

/// `kernel` takes the distance `‖Y_i − Y_j‖`.
pub fn icmi_kernel(x: &DMatrix<f64>, y: &DMatrix<f64>, kernel: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (z, _) = centered(x);
    let n = z.len();
    let mut out = DMatrix::zeros(x.ncols(), x.ncols());
    for i in 0..n {
        for j in 0..n {
            out += &z[i] * z[j].transpose() * kernel((row(y, i) - row(y, j)).norm());
        }
    }
    out / (n * n) as f64
}

pub fn mddm(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    icmi_kernel(x, y, |r| -r)
}

pub fn icmi_id(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let (z, _) = centered(x);
    let n = z.len();
    let below = |i: usize, k: usize| (0..y.ncols()).all(|c| y[(i, c)] <= y[(k, c)]);
    let mut out = DMatrix::zeros(x.ncols(), x.ncols());
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if below(i, k) && below(j, k) {
                    out += &z[i] * z[j].transpose();
                }
            }
        }
    }
    out / (n as f64).powi(3)
}

fn second_moments(x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let (z, cov) = centered(x);
    z.iter().map(|zi| zi * zi.transpose() - &cov).collect()
}

pub fn icvi_pr(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let a = second_moments(x);
    let n = a.len();
    let mut out = DMatrix::zeros(x.ncols(), x.ncols());
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let w = oracle_ang(&(row(y, i) - row(y, k)), &(row(y, j) - row(y, k)));
                out -= &a[i] * &a[j] * w;
            }
        }
    }
    out / (n as f64).powi(3)
}

pub fn icvi_kernel(x: &DMatrix<f64>, y: &DMatrix<f64>, kernel: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let a = second_moments(x);
    let n = a.len();
    let mut out = DMatrix::zeros(x.ncols(), x.ncols());
    for i in 0..n {
        for j in 0..n {
            out += &a[i] * &a[j] * kernel((row(y, i) - row(y, j)).norm());
        }
    }
    out / (n * n) as f64
}

/// Groups of row indices per slice, boundaries at the `k/h` empirical
/// quantiles with ties kept in the lower slice.
pub fn slices(y: &[f64], h: usize) -> Vec<Vec<usize>> {
    let n = y.len();
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut groups = vec![Vec::new(); h];
    for (i, v) in y.iter().enumerate() {
        let mut slice = 0;
        for k in 1..h {
            let cut = sorted[(k * n + h - 1) / h - 1];
            if *v > cut {
                slice = k;
            }
        }
        groups[slice].push(i);
    }
    groups
}

pub fn sir(x: &DMatrix<f64>, y: &[f64], h: usize) -> DMatrix<f64> {
    let n = x.nrows();
    let grand: DVector<f64> = x.row_sum().transpose() / n as f64;
    let mut out = DMatrix::zeros(x.ncols(), x.ncols());
    for g in slices(y, h).into_iter().filter(|g| !g.is_empty()) {
        let m: DVector<f64> = g.iter().map(|&i| x.row(i).transpose()).sum::<DVector<f64>>() / g.len() as f64;
        let d = m - &grand;
        out += &d * d.transpose() * (g.len() as f64 / n as f64);
    }
    out
}

pub fn save(x: &DMatrix<f64>, y: &[f64], h: usize) -> DMatrix<f64> {
    let n = x.nrows();
    let (_, cov) = centered(x);
    let mut out = DMatrix::zeros(x.ncols(), x.ncols());
    for g in slices(y, h).into_iter().filter(|g| !g.is_empty()) {
        let (_, within) = centered(&x.select_rows(&g));
        let d = &cov - within;
        out += &d * &d * (g.len() as f64 / n as f64);
    }
    out
}

/// `‖a − b‖_F ≤ tol · max(‖b‖_F, floor)`.
pub fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64, floor: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(floor)
}

/// Smallest eigenvalue is at least `−tol · trace`.
pub fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    let eig = m.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    min >= -tol * m.trace().abs().max(f64::MIN_POSITIVE)
}

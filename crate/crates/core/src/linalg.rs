//! Small dense arrays (n <= 4) and the few factorizations the crate needs.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};

pub type Mat = Vec<Vec<f64>>;
pub type Tensor3 = Vec<Vec<Vec<f64>>>;
pub type Tensor4 = Vec<Vec<Vec<Vec<f64>>>>;

pub fn zeros(n: usize) -> Mat {
    vec![vec![0.0; n]; n]
}

pub fn zeros3(n: usize) -> Tensor3 {
    vec![zeros(n); n]
}

pub fn zeros4(n: usize) -> Tensor4 {
    vec![zeros3(n); n]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn to_na(m: &Mat) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j])
}

fn from_na(m: &DMatrix<f64>) -> Mat {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Determinant by LU factorization.
pub fn det(m: &Mat) -> f64 {
    to_na(m).lu().determinant()
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    to_na(m)
        .try_inverse()
        .map(|inv| from_na(&inv))
        .ok_or(GeomError::SingularMetric)
}

/// Inverse of a symmetric positive-definite matrix; fails if not SPD.
pub fn spd_inverse(m: &Mat) -> Result<Mat> {
    let chol = to_na(m).cholesky().ok_or(GeomError::SingularMetric)?;
    Ok(from_na(&chol.inverse()))
}

pub fn is_spd(m: &Mat) -> bool {
    to_na(m).cholesky().is_some()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            out[i][j] = (0..k).map(|l| a[i][l] * b[l][j]).sum();
        }
    }
    out
}

pub fn mat_vec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn flatten2(m: &Mat) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

pub fn flatten3(t: &Tensor3) -> Vec<f64> {
    t.iter().flatten().flatten().copied().collect()
}

pub fn flatten4(t: &Tensor4) -> Vec<f64> {
    t.iter().flatten().flatten().flatten().copied().collect()
}

/// `|a - b| / max(1, |b|)`, the comparison metric used by every oracle check.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Elementwise maximum of [`rel_err`] over two equally shaped slices.
pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| rel_err(*x, *y))
        .fold(0.0, f64::max)
}

/// Largest `|T_ijk - T_pi(ijk)|` over all index permutations.
pub fn asymmetry3(t: &Tensor3) -> f64 {
    let n = t.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = t[i][j][k];
                for w in [t[j][i][k], t[i][k][j], t[k][j][i], t[j][k][i], t[k][i][j]] {
                    worst = worst.max((v - w).abs());
                }
            }
        }
    }
    worst
}

pub fn asymmetry2(m: &Mat) -> f64 {
    let n = m.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[i][j] - m[j][i]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let m = vec![vec![2.0, 0.5], vec![0.5, 1.0]];
        assert!((det(&m) - 1.75).abs() < 1e-14);
        let inv = spd_inverse(&m).unwrap();
        let id = mat_mul(&m, &inv);
        assert!(max_rel_err(&flatten2(&id), &flatten2(&identity(2))) < 1e-14);
        assert!(spd_inverse(&vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
    }

    #[test]
    fn relative_error_uses_unit_floor() {
        assert_eq!(rel_err(1e-12, 0.0), 1e-12);
        assert!((rel_err(101.0, 100.0) - 0.01).abs() < 1e-15);
    }
}

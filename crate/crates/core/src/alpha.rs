//! Levi-Civita data of `alpha` and covariant derivatives of the two 1-forms.

use serde::Serialize;

use crate::error::Result;
use crate::fields::{norms, EvaluationPoint, FieldSet, MetricField, OneFormField};
use crate::linalg::{self, Mat, Tensor3};

/// Christoffel symbols `chr[i][j][k]` and the spray of `alpha` at `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaConnection {
    pub christoffel: Tensor3,
    pub g_alpha: Vec<f64>,
    /// `d G^i / d y^j`
    pub g_alpha_j: Mat,
    /// `d^2 G^i / d y^j d y^k`
    pub g_alpha_jk: Tensor3,
}

/// `nabla[i][j] = c_{i|j}` split into symmetric and antisymmetric halves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormDerivatives {
    pub nabla: Mat,
    pub r: Mat,
    pub smat: Mat,
}

/// Contractions of one form's `r` and `s` with `y`, the form itself and the
/// other form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormContractions {
    pub r00: f64,
    pub r_i0: Vec<f64>,
    pub r_j: Vec<f64>,
    pub r0: f64,
    pub s_i0: Vec<f64>,
    pub s_j: Vec<f64>,
    pub s0: f64,
    /// `s^i_0 = a^{ij} s_{j0}`
    pub s_up0: Vec<f64>,
    /// `s^i_0` contracted with the other form
    pub s_bar0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contractions {
    pub beta: FormContractions,
    pub gamma: FormContractions,
}

/// Levi-Civita symbols `Gamma^i_{jk}` of `a` at `x`.
pub fn christoffel(m: &MetricField, x: &[f64]) -> Result<Tensor3> {
    let (_, inv) = m.a_and_inverse(x)?;
    let da = m.da(x);
    let n = m.dim();
    let mut out = linalg::zeros3(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j][k] = 0.5
                    * (0..n)
                        .map(|l| inv[i][l] * (da[l][j][k] + da[l][k][j] - da[j][k][l]))
                        .sum::<f64>();
            }
        }
    }
    Ok(out)
}

pub fn connection(m: &MetricField, x: &[f64], y: &[f64]) -> Result<AlphaConnection> {
    let chr = christoffel(m, x)?;
    let n = m.dim();
    let g_alpha_j: Mat = (0..n)
        .map(|i| (0..n).map(|j| linalg::dot(&chr[i][j], y)).collect())
        .collect();
    let g_alpha = (0..n).map(|i| 0.5 * linalg::dot(&g_alpha_j[i], y)).collect();
    Ok(AlphaConnection {
        g_alpha_jk: chr.clone(),
        christoffel: chr,
        g_alpha,
        g_alpha_j,
    })
}

/// Largest `|a_{ij|k}|`; zero up to rounding for a Levi-Civita connection.
pub fn metricity_residual(m: &MetricField, x: &[f64]) -> Result<f64> {
    let chr = christoffel(m, x)?;
    let a = m.a(x);
    let da = m.da(x);
    let n = m.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let corr: f64 = (0..n)
                    .map(|l| chr[l][i][k] * a[l][j] + chr[l][j][k] * a[i][l])
                    .sum();
                worst = worst.max((da[i][j][k] - corr).abs());
            }
        }
    }
    Ok(worst)
}

pub fn covariant_derivative(
    m: &MetricField,
    form: &OneFormField,
    x: &[f64],
) -> Result<FormDerivatives> {
    let chr = christoffel(m, x)?;
    let c = form.coeff(x);
    let dc = form.dcoeff(x);
    let n = m.dim();
    let nabla: Mat = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| dc[i][j] - (0..n).map(|k| chr[k][i][j] * c[k]).sum::<f64>())
                .collect()
        })
        .collect();
    let r = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (nabla[i][j] + nabla[j][i])).collect())
        .collect();
    let smat = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (nabla[i][j] - nabla[j][i])).collect())
        .collect();
    Ok(FormDerivatives { nabla, r, smat })
}

fn contract(
    fd: &FormDerivatives,
    own_up: &[f64],
    other_lower: &[f64],
    a_inv: &Mat,
    y: &[f64],
) -> FormContractions {
    let n = y.len();
    let r_i0 = linalg::mat_vec(&fd.r, y);
    let s_i0 = linalg::mat_vec(&fd.smat, y);
    let r_j: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| own_up[i] * fd.r[i][j]).sum())
        .collect();
    let s_j: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| own_up[i] * fd.smat[i][j]).sum())
        .collect();
    let s_up0 = linalg::mat_vec(a_inv, &s_i0);
    FormContractions {
        r00: linalg::dot(&r_i0, y),
        r0: linalg::dot(&r_j, y),
        s0: linalg::dot(&s_j, y),
        s_bar0: linalg::dot(&s_up0, other_lower),
        r_i0,
        r_j,
        s_i0,
        s_j,
        s_up0,
    }
}

/// All contractions at `p`. Each form's `r_j`, `s_j` use its own raised
/// coefficients; `s_bar0` pairs `s^i_0` with the other form.
pub fn contractions(
    fd_beta: &FormDerivatives,
    fd_gamma: &FormDerivatives,
    m: &MetricField,
    beta: &OneFormField,
    gamma: &OneFormField,
    p: &EvaluationPoint,
) -> Result<Contractions> {
    let (_, inv) = m.a_and_inverse(&p.x)?;
    let b = beta.coeff(&p.x);
    let g = gamma.coeff(&p.x);
    let b_up = linalg::mat_vec(&inv, &b);
    let g_up = linalg::mat_vec(&inv, &g);
    Ok(Contractions {
        beta: contract(fd_beta, &b_up, &g, &inv, &p.y),
        gamma: contract(fd_gamma, &g_up, &b, &inv, &p.y),
    })
}

/// Everything at a base point `x` that the spray needs, independent of `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointGeometry {
    pub x: Vec<f64>,
    pub a: Mat,
    pub a_inv: Mat,
    pub b: Vec<f64>,
    pub gamma: Vec<f64>,
    pub b_up: Vec<f64>,
    pub gamma_up: Vec<f64>,
    pub b2: f64,
    pub g2: f64,
    pub theta: f64,
    pub christoffel: Tensor3,
    pub beta_d: FormDerivatives,
    pub gamma_d: FormDerivatives,
}

pub fn point_geometry(fields: &FieldSet, x: &[f64]) -> Result<PointGeometry> {
    let (a, a_inv) = fields.metric.a_and_inverse(x)?;
    let nm = norms(&fields.metric, &fields.beta, &fields.gamma, x)?;
    let b = fields.beta.coeff(x);
    let gamma = fields.gamma.coeff(x);
    Ok(PointGeometry {
        x: x.to_vec(),
        b_up: linalg::mat_vec(&a_inv, &b),
        gamma_up: linalg::mat_vec(&a_inv, &gamma),
        christoffel: christoffel(&fields.metric, x)?,
        beta_d: covariant_derivative(&fields.metric, &fields.beta, x)?,
        gamma_d: covariant_derivative(&fields.metric, &fields.gamma, x)?,
        a,
        a_inv,
        b,
        gamma,
        b2: nm.b2,
        g2: nm.g2,
        theta: nm.theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{fixture, nonclosed_with, parallel_closed_with, Expr};

    #[test]
    fn flat_metric_has_no_connection() {
        let c = connection(&MetricField::euclidean(3), &[0.1, 0.2, 0.3], &[1.0, 2.0, 3.0]).unwrap();
        assert!(c.christoffel.iter().flatten().flatten().all(|&v| v == 0.0));
        assert!(c.g_alpha.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conformal_symbols() {
        let m = MetricField::conformal(&[0.1, 0.0]);
        let chr = christoffel(&m, &[0.4, -0.3]).unwrap();
        assert!((chr[0][0][0] - 0.1).abs() < 1e-15);
        assert!((chr[0][1][1] + 0.1).abs() < 1e-15);
        assert!((chr[1][0][1] - 0.1).abs() < 1e-15);
        assert!((chr[1][1][0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn metric_compatibility() {
        for name in ["conformal_generic", "euclidean_nonclosed"] {
            let fs = fixture(name, 3).unwrap();
            assert!(metricity_residual(&fs.metric, &[0.3, -0.7, 0.2]).unwrap() < 1e-14);
        }
    }

    #[test]
    fn homogeneity_of_alpha_spray() {
        let m = MetricField::conformal(&[0.1, -0.2, 0.05]);
        let c = connection(&m, &[0.3, 0.1, -0.4], &[1.0, -0.5, 0.25]).unwrap();
        let euler: Vec<f64> = c.g_alpha_j.iter().map(|row| linalg::dot(row, &[1.0, -0.5, 0.25])).collect();
        for i in 0..3 {
            assert!((euler[i] - 2.0 * c.g_alpha[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_form_is_parallel() {
        let fs = parallel_closed_with(2, 0.3, 1.0).unwrap();
        let d = covariant_derivative(&fs.metric, &fs.beta, &[0.5, 0.5]).unwrap();
        assert!(d.nabla.iter().flatten().all(|&v| v == 0.0));
        let d = covariant_derivative(&fs.metric, &fs.gamma, &[0.5, 0.5]).unwrap();
        assert_eq!(d.smat, vec![vec![0.0; 2]; 2]);
        assert_eq!(d.r, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn nonclosed_antisymmetric_part() {
        let fs = nonclosed_with(2, 0.3, 1.0).unwrap();
        let d = covariant_derivative(&fs.metric, &fs.gamma, &[0.0, 1.0]).unwrap();
        assert_eq!(d.smat[0][1], 1.0);
        assert_eq!(d.smat[1][0], -1.0);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(d.r[i][j] + d.smat[i][j], d.nabla[i][j]);
            }
        }
    }

    #[test]
    fn parallel_closed_contractions() {
        let fs = parallel_closed_with(2, 0.3, 1.0).unwrap();
        let p = EvaluationPoint::new(vec![0.2, 0.7], vec![1.5, -0.5]).unwrap();
        let db = covariant_derivative(&fs.metric, &fs.beta, &p.x).unwrap();
        let dg = covariant_derivative(&fs.metric, &fs.gamma, &p.x).unwrap();
        let c = contractions(&db, &dg, &fs.metric, &fs.beta, &fs.gamma, &p).unwrap();
        assert_eq!(c.beta.r00, 0.0);
        assert_eq!(c.gamma.s0, 0.0);
        assert_eq!(c.gamma.r00, 2.0 * 1.5 * -0.5);
    }

    #[test]
    fn crossed_contractions_against_reference() {
        let fs = fixture("conformal_generic", 3).unwrap();
        let p = EvaluationPoint::new(vec![0.2, -0.4, 0.9], vec![0.5, 1.0, -0.3]).unwrap();
        let db = covariant_derivative(&fs.metric, &fs.beta, &p.x).unwrap();
        let dg = covariant_derivative(&fs.metric, &fs.gamma, &p.x).unwrap();
        let c = contractions(&db, &dg, &fs.metric, &fs.beta, &fs.gamma, &p).unwrap();
        // direct sums over all indices
        let inv = linalg::spd_inverse(&fs.metric.a(&p.x)).unwrap();
        let b = fs.beta.coeff(&p.x);
        let g = fs.gamma.coeff(&p.x);
        let mut bs = 0.0;
        let mut gs = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    bs += inv[i][j] * db.smat[j][k] * p.y[k] * g[i];
                    gs += inv[i][j] * dg.smat[j][k] * p.y[k] * b[i];
                }
            }
        }
        assert!((c.beta.s_bar0 - bs).abs() < 1e-15);
        assert!((c.gamma.s_bar0 - gs).abs() < 1e-15);
        let scaled = contractions(&db, &dg, &fs.metric, &fs.beta, &fs.gamma, &p.scaled(2.0)).unwrap();
        assert!((scaled.beta.r00 - 4.0 * c.beta.r00).abs() < 1e-14);
        assert!((scaled.gamma.s_i0[1] - 2.0 * c.gamma.s_i0[1]).abs() < 1e-14);
    }

    #[test]
    fn hessian_of_potential() {
        let f = Expr::parse("x1^2*x2 + 0.5*x3^2", 3).unwrap();
        let d = covariant_derivative(&MetricField::euclidean(3), &OneFormField::exact(&f), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(d.r[0][0], 4.0);
        assert_eq!(d.r[0][1], 2.0);
        assert_eq!(d.r[2][2], 1.0);
    }
}

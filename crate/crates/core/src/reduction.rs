//! Standalone `(alpha, beta)` path for `F = alpha phi(beta/alpha)`.
//!
//! Written with the same floating-point operation order as the general code,
//! so with `gamma = 0` and the `alpha_beta` kernel both produce identical bits.

use serde::Serialize;

use crate::alpha::{christoffel, covariant_derivative};
use crate::error::{GeomError, Result};
use crate::fields::{EvaluationPoint, MetricField, OneFormField};
use crate::linalg::{self, Mat, Tensor3};
use crate::psi::UniFn;

/// `phi` with its admissible bound on `|s|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaBetaMetric {
    pub metric: MetricField,
    pub beta: OneFormField,
    pub phi: UniFn,
    pub b0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaBetaQuantities {
    pub g: Mat,
    pub det: f64,
    pub ginv: Mat,
    pub cartan: Tensor3,
    pub spray: Vec<f64>,
}

struct State {
    n: usize,
    a: Mat,
    a_inv: Mat,
    det_a: f64,
    b: Vec<f64>,
    b_up: Vec<f64>,
    alpha: f64,
    alpha_i: Vec<f64>,
    alpha_ij: Mat,
    alpha_up: Vec<f64>,
    s: f64,
    h: Vec<f64>,
    b2: f64,
    f: [f64; 4],
    pi: f64,
    rho: f64,
    rho0: f64,
    rho1: f64,
    rho2: f64,
    rho0_s: f64,
    gamma: f64,
}

impl AlphaBetaMetric {
    fn state(&self, p: &EvaluationPoint) -> Result<State> {
        let n = self.metric.dim();
        let (a, a_inv) = self.metric.a_and_inverse(&p.x)?;
        let b = self.beta.coeff(&p.x);
        let b_up = linalg::mat_vec(&a_inv, &b);
        let b2 = linalg::dot(&b, &b_up);
        let ay = linalg::mat_vec(&a, &p.y);
        let alpha_sq = linalg::dot(&p.y, &ay);
        if !(alpha_sq > 0.0) {
            return Err(GeomError::NullDirection);
        }
        let alpha = alpha_sq.sqrt();
        let alpha_i: Vec<f64> = ay.iter().map(|v| v / alpha).collect();
        let alpha_ij = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (a[i][j] - alpha_i[i] * alpha_i[j]) / alpha)
                    .collect()
            })
            .collect();
        let s = linalg::dot(&b, &p.y) / alpha;
        if !(s.abs() < self.b0) {
            return Err(GeomError::OutOfDomain {
                s,
                sbar: 0.0,
                b0: self.b0,
                g0: 0.0,
            });
        }
        let h = (0..n).map(|i| b[i] - s * alpha_i[i]).collect();
        let f: [f64; 4] = self.phi.derivs(s);
        let pi = f[0] - s * f[1];
        if !(pi.abs() >= crate::psi::DEGENERACY) {
            return Err(GeomError::DegeneratePi(pi));
        }
        let rho0 = f[0] * f[2] + f[1] * f[1];
        let rho1 = f[0] * f[1] - s * rho0;
        let bb = b2 - s * s;
        Ok(State {
            n,
            det_a: linalg::det(&a),
            alpha_up: p.y.iter().map(|v| v / alpha).collect(),
            a,
            a_inv,
            b,
            b_up,
            alpha,
            alpha_i,
            alpha_ij,
            s,
            h,
            b2,
            f,
            pi,
            rho: f[0] * pi,
            rho0,
            rho1,
            rho2: -(s * rho1),
            rho0_s: f[0] * f[3] + f[1] * f[2] * 3.0,
            gamma: pi + bb * f[2],
        })
    }

    pub fn fundamental(&self, p: &EvaluationPoint) -> Result<(Mat, f64, Mat)> {
        let st = self.state(p)?;
        Ok((g_of(&st), det_of(&st), ginv_of(&st)?))
    }

    pub fn quantities(&self, p: &EvaluationPoint) -> Result<AlphaBetaQuantities> {
        let st = self.state(p)?;
        Ok(AlphaBetaQuantities {
            g: g_of(&st),
            det: det_of(&st),
            ginv: ginv_of(&st)?,
            cartan: cartan_of(&st),
            spray: self.spray(p)?,
        })
    }

    /// Spray coefficients, evaluated at the `alpha`-unit direction and rescaled.
    pub fn spray(&self, p: &EvaluationPoint) -> Result<Vec<f64>> {
        let a = self.metric.a(&p.x);
        let alpha_sq = linalg::dot(&p.y, &linalg::mat_vec(&a, &p.y));
        if !(alpha_sq > 0.0) {
            return Err(GeomError::NullDirection);
        }
        let scale = alpha_sq.sqrt();
        let unit = EvaluationPoint {
            x: p.x.clone(),
            y: p.y.iter().map(|v| v / scale).collect(),
        };
        let st = self.state(&unit)?;
        if !(st.gamma.abs() >= crate::psi::DEGENERACY) {
            return Err(GeomError::DegenerateGamma(st.gamma));
        }
        let chr = christoffel(&self.metric, &p.x)?;
        let d = covariant_derivative(&self.metric, &self.beta, &p.x)?;
        let y = &unit.y;
        let quad = |m: &Mat| linalg::dot(y, &m.iter().map(|row| dot_rev(row, y)).collect::<Vec<f64>>());
        let g_alpha: Vec<f64> = chr.iter().map(|m| quad(m) * 0.5).collect();
        let s_i0: Vec<f64> = d.smat.iter().map(|row| dot_rev(row, y)).collect();
        let s_up0: Vec<f64> = st.a_inv.iter().map(|row| dot_rev(row, &s_i0)).collect();
        let r00 = quad(&d.r);
        let s0 = dot_rev(&st.b_up, &s_i0);
        let f = &st.f;
        let alpha = st.alpha;
        let two_a_pi = alpha * 2.0 / st.pi;
        let r_beta = r00 - two_a_pi * (f[1] * s0);
        let gamma1 = f[2] * r_beta;
        let gamma3 = st.rho1 * r_beta;
        let a_pi = alpha / st.pi;
        let half_gamma = 1.0 / (st.gamma * 2.0);
        Ok((0..st.n)
            .map(|i| {
                let v = g_alpha[i]
                    + a_pi * (f[1] * s_up0[i])
                    + half_gamma * (gamma1 * st.b_up[i] + gamma3 * y[i] / (alpha * f[0]));
                v * alpha_sq
            })
            .collect())
    }
}

/// `sum_i c_i v_i`, accumulated from the left as in the generic helpers.
fn dot_rev(c: &[f64], v: &[f64]) -> f64 {
    let mut acc = v[0] * c[0];
    for i in 1..v.len() {
        acc += v[i] * c[i];
    }
    acc
}

fn g_of(st: &State) -> Mat {
    let (b, al) = (&st.b, &st.alpha_i);
    (0..st.n)
        .map(|i| {
            (0..st.n)
                .map(|j| {
                    st.rho * st.a[i][j]
                        + st.rho0 * b[i] * b[j]
                        + st.rho1 * (b[i] * al[j] + b[j] * al[i])
                        + st.rho2 * al[i] * al[j]
                })
                .collect()
        })
        .collect()
}

fn det_of(st: &State) -> f64 {
    st.f[0].powi(st.n as i32 + 1) * st.pi.powi(st.n as i32 - 2) * st.gamma * st.det_a
}

fn ginv_of(st: &State) -> Result<Mat> {
    if !(st.gamma.abs() >= crate::psi::DEGENERACY) {
        return Err(GeomError::DegenerateGamma(st.gamma));
    }
    let f = &st.f;
    let bb = st.b2 - st.s * st.s;
    let k_bb = f[2] / st.gamma;
    let k_ba = st.rho1 / (f[0] * st.gamma);
    let k_aa = ((st.s * f[0] + bb * f[1]) * st.rho1) / (f[0] * f[0] * st.gamma);
    let (bu, au) = (&st.b_up, &st.alpha_up);
    Ok((0..st.n)
        .map(|i| {
            (0..st.n)
                .map(|j| {
                    (st.a_inv[i][j] - k_bb * bu[i] * bu[j]
                        - k_ba * (bu[i] * au[j] + bu[j] * au[i])
                        + k_aa * au[i] * au[j])
                        / st.rho
                })
                .collect()
        })
        .collect())
}

fn cartan_of(st: &State) -> Tensor3 {
    let (h, aij) = (&st.h, &st.alpha_ij);
    let two_a = 2.0 * st.alpha;
    let n = st.n;
    let mut out = linalg::zeros3(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j][k] = st.rho1 / 2.0
                    * (h[k] * aij[i][j] + h[i] * aij[j][k] + h[j] * aij[i][k])
                    + st.rho0_s / two_a * h[i] * h[j] * h[k];
            }
        }
    }
    out
}

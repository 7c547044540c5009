//! Pointwise fundamental tensor, its determinant and inverse, and the Cartan
//! tensor, together with their jet oracles.

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::fields::{norms, EvaluationPoint, FieldSet};
use crate::jets::eval_y_jet;
use crate::linalg::{self, Mat, Tensor3};
use crate::metric::Quantity;
use crate::psi::{coefficients, psi_eval, CoefficientSet, PsiJet, PsiKernel};

/// Every pointwise scalar and vector the closed forms are built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarState {
    pub n: usize,
    pub y: Vec<f64>,
    pub a: Mat,
    pub a_inv: Mat,
    pub det_a: f64,
    /// lower-index coefficients of beta and gamma
    pub b: Vec<f64>,
    pub gamma: Vec<f64>,
    /// the same, raised with `a^{ij}`
    pub b_up: Vec<f64>,
    pub gamma_up: Vec<f64>,
    pub alpha: f64,
    /// `d alpha / dy^i`
    pub alpha_i: Vec<f64>,
    /// `d^2 alpha / dy^i dy^j`
    pub alpha_ij: Mat,
    /// `y^i / alpha`
    pub alpha_up: Vec<f64>,
    pub s: f64,
    pub sb: f64,
    pub h: Vec<f64>,
    pub hb: Vec<f64>,
    pub b2: f64,
    pub g2: f64,
    pub theta: f64,
    pub psi: PsiJet<f64>,
    pub coeffs: CoefficientSet<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundamentalTensor {
    pub g: Mat,
    pub det: f64,
    pub ginv: Mat,
}

pub fn scalar_state(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<ScalarState> {
    let n = fields.dim();
    if p.dim() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: p.dim(),
        });
    }
    let (a, a_inv) = fields.metric.a_and_inverse(&p.x)?;
    let nm = norms(&fields.metric, &fields.beta, &fields.gamma, &p.x)?;
    let b = fields.beta.coeff(&p.x);
    let gamma = fields.gamma.coeff(&p.x);
    let y = p.y.clone();
    let ay = linalg::mat_vec(&a, &y);
    let alpha_sq = linalg::dot(&y, &ay);
    if !(alpha_sq > 0.0) {
        return Err(GeomError::NullDirection);
    }
    let alpha = alpha_sq.sqrt();
    let alpha_i: Vec<f64> = ay.iter().map(|v| v / alpha).collect();
    let alpha_ij: Mat = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (a[i][j] - alpha_i[i] * alpha_i[j]) / alpha)
                .collect()
        })
        .collect();
    let s = linalg::dot(&b, &y) / alpha;
    let sb = linalg::dot(&gamma, &y) / alpha;
    let h = (0..n).map(|i| b[i] - s * alpha_i[i]).collect();
    let hb = (0..n).map(|i| gamma[i] - sb * alpha_i[i]).collect();
    let psi = psi_eval(k, s, sb)?;
    let coeffs = coefficients(&psi, s, sb, nm.b2, nm.g2, nm.theta)?;
    Ok(ScalarState {
        n,
        b_up: linalg::mat_vec(&a_inv, &b),
        gamma_up: linalg::mat_vec(&a_inv, &gamma),
        alpha_up: y.iter().map(|v| v / alpha).collect(),
        det_a: linalg::det(&a),
        y,
        a,
        a_inv,
        b,
        gamma,
        alpha,
        alpha_i,
        alpha_ij,
        s,
        sb,
        h,
        hb,
        b2: nm.b2,
        g2: nm.g2,
        theta: nm.theta,
        psi,
        coeffs,
    })
}

pub(crate) fn check_gamma(c: &CoefficientSet<f64>) -> Result<()> {
    if !(c.gamma.abs() >= crate::psi::DEGENERACY) {
        return Err(GeomError::DegenerateGamma(c.gamma));
    }
    Ok(())
}

/// The seven-term fundamental tensor.
pub fn fundamental_g(st: &ScalarState) -> Mat {
    let c = &st.coeffs;
    let (b, gm, al) = (&st.b, &st.gamma, &st.alpha_i);
    let n = st.n;
    let mut g = linalg::zeros(n);
    for i in 0..n {
        for j in 0..n {
            g[i][j] = c.rho * st.a[i][j]
                + c.rho0 * b[i] * b[j]
                + c.rhob0 * gm[i] * gm[j]
                + c.rho1 * (b[i] * al[j] + b[j] * al[i])
                + c.rhob1 * (gm[i] * al[j] + gm[j] * al[i])
                + c.rho2 * al[i] * al[j]
                + c.rho3 * (b[i] * gm[j] + b[j] * gm[i]);
        }
    }
    g
}

/// `Psi^{n+1} Pi^{n-2} Gamma det(a)`
pub fn fundamental_det(st: &ScalarState) -> f64 {
    let c = &st.coeffs;
    st.psi.psi.powi(st.n as i32 + 1) * c.pi.powi(st.n as i32 - 2) * c.gamma * st.det_a
}

fn inverse_with_cross(st: &ScalarState, cross: bool) -> Result<Mat> {
    let c = &st.coeffs;
    check_gamma(c)?;
    let p = &st.psi;
    let (bb, gg, tt) = (c.bb(), c.gg(), c.tt());
    let (cb, cg) = (c.cb(), c.cg());
    let k_bb = (p.ss + gg * c.j) / c.gamma;
    let k_gg = (p.sbsb + bb * c.j) / c.gamma;
    let k_bg = if cross {
        (p.ssb - tt * c.j) / c.gamma
    } else {
        0.0
    };
    let k_ba = cb / (p.psi * c.gamma);
    let k_ga = cg / (p.psi * c.gamma);
    let k_aa = ((st.s * p.psi + bb * p.s + tt * p.sb) * cb
        + (st.sb * p.psi + gg * p.sb + tt * p.s) * cg)
        / (p.psi * p.psi * c.gamma);
    let (bu, gu, au) = (&st.b_up, &st.gamma_up, &st.alpha_up);
    let n = st.n;
    let mut out = linalg::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (st.a_inv[i][j]
                - k_bb * bu[i] * bu[j]
                - k_gg * gu[i] * gu[j]
                - k_ba * (bu[i] * au[j] + bu[j] * au[i])
                - k_ga * (gu[i] * au[j] + gu[j] * au[i])
                + k_aa * au[i] * au[j]
                - k_bg * (bu[i] * gu[j] + bu[j] * gu[i]))
                / c.rho;
        }
    }
    Ok(out)
}

/// Closed-form inverse of the fundamental tensor.
///
/// Includes the mixed `b^i gamma^j` block with coefficient
/// `(Psi_{s sbar} - (theta - s sbar) J) / Gamma`, which vanishes whenever
/// `Psi_{s sbar} = J = 0`.
pub fn fundamental_inverse(st: &ScalarState) -> Result<Mat> {
    inverse_with_cross(st, true)
}

/// The inverse without the mixed `b^i gamma^j` block. Exact only for kernels
/// with `Psi_{s sbar} = (theta - s sbar) J`; kept so reports can quantify the gap.
pub fn published_inverse(st: &ScalarState) -> Result<Mat> {
    inverse_with_cross(st, false)
}

pub fn fundamental_closed(st: &ScalarState) -> Result<FundamentalTensor> {
    Ok(FundamentalTensor {
        g: fundamental_g(st),
        det: fundamental_det(st),
        ginv: fundamental_inverse(st)?,
    })
}

/// The six-term Cartan tensor.
pub fn cartan_closed(st: &ScalarState) -> Result<Tensor3> {
    let c = &st.coeffs;
    let (h, hb, aij) = (&st.h, &st.hb, &st.alpha_ij);
    let two_a = 2.0 * st.alpha;
    let n = st.n;
    let mut out = linalg::zeros3(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j][k] = c.rho1 / 2.0
                    * (h[k] * aij[i][j] + h[i] * aij[j][k] + h[j] * aij[i][k])
                    + c.rhob1 / 2.0 * (hb[k] * aij[i][j] + hb[i] * aij[j][k] + hb[j] * aij[i][k])
                    + c.rho0_sb / two_a
                        * (h[i] * h[j] * hb[k] + h[j] * h[k] * hb[i] + h[i] * h[k] * hb[j])
                    + c.rhob0_s / two_a
                        * (hb[i] * hb[j] * h[k] + hb[j] * hb[k] * h[i] + hb[i] * hb[k] * h[j])
                    + c.rho0_s / two_a * h[i] * h[j] * h[k]
                    + c.rhob0_sb / two_a * hb[i] * hb[j] * hb[k];
            }
        }
    }
    Ok(out)
}

/// `F_{y^i}`
pub fn ell(st: &ScalarState) -> Vec<f64> {
    let p = &st.psi;
    (0..st.n)
        .map(|i| p.psi * st.alpha_i[i] + p.s * st.h[i] + p.sb * st.hb[i])
        .collect()
}

/// `F_{y^i y^j}`
pub fn ell2(st: &ScalarState) -> Mat {
    let p = &st.psi;
    let c = &st.coeffs;
    let (h, hb) = (&st.h, &st.hb);
    let n = st.n;
    let mut out = linalg::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = c.pi * st.alpha_ij[i][j]
                + (p.ss * h[i] * h[j]
                    + p.sbsb * hb[i] * hb[j]
                    + p.ssb * (h[i] * hb[j] + hb[i] * h[j]))
                    / st.alpha;
        }
    }
    out
}

/// Hessian of `F^2 / 2` in `y`, from exact jets.
pub fn oracle_g(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<Mat> {
    let j = eval_y_jet(&Quantity::HalfFSq(k.clone()), fields, p, 2)?;
    Ok(j.d2.expect("order two requested"))
}

/// Half the `y`-derivative of the fundamental tensor, from exact jets.
pub fn oracle_cartan(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<Tensor3> {
    let j = eval_y_jet(&Quantity::HalfFSq(k.clone()), fields, p, 3)?;
    let mut c = j.d3.expect("order three requested");
    for v in c.iter_mut().flatten().flatten() {
        *v *= 0.5;
    }
    Ok(c)
}

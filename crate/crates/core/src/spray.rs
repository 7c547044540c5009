//! Spray coefficients: the closed form, the `ell`-system solver it rests on,
//! and a direct oracle from the fundamental tensor's x-derivatives.

use serde::Serialize;

use crate::alpha::{contractions, point_geometry, Contractions, PointGeometry};
use crate::error::{GeomError, Result};
use crate::fields::{EvaluationPoint, FieldSet};
use crate::jets::{dot_c, eval_jet, mat_vec_c, quad_c, Real};
use crate::linalg::{self, Mat};
use crate::metric::Quantity;
use crate::psi::{coefficients, CoefficientSet, PsiJet, PsiKernel, DEGENERACY};
use crate::tensors::{check_gamma, ell, ell2, ScalarState};

/// Right-hand side of `ell_{ir} A^r = B_i`, `ell_r A^r = B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllSystem {
    pub b_i: Vec<f64>,
    pub b: f64,
}

impl EllSystem {
    /// Removes the `y` component of `raw` so that `B_i y^i = 0`.
    pub fn projected(raw: &[f64], b: f64, st: &ScalarState) -> EllSystem {
        let along = linalg::dot(raw, &st.y) / st.alpha;
        EllSystem {
            b_i: raw
                .iter()
                .zip(&st.alpha_i)
                .map(|(r, a)| r - along * a)
                .collect(),
            b,
        }
    }
}

/// Closed-form solution of the `ell` system.
pub fn solve_ell_system(sys: &EllSystem, st: &ScalarState) -> Result<Vec<f64>> {
    let c = &st.coeffs;
    check_gamma(c)?;
    let p = &st.psi;
    let (bb, gg, tt) = (c.bb(), c.gg(), c.tt());
    let bb_up = linalg::dot(&sys.b_i, &st.b_up);
    let bg_up = linalg::dot(&sys.b_i, &st.gamma_up);
    let m11 = c.pi + bb * p.ss + tt * p.ssb;
    let m12 = bb * p.ssb + tt * p.sbsb;
    let m21 = tt * p.ss + gg * p.ssb;
    let m22 = c.pi + tt * p.ssb + gg * p.sbsb;
    let pg = st.alpha / (c.pi * c.gamma);
    let along = (sys.b
        - pg * ((p.s * m22 - p.sb * m21) * bb_up + (p.sb * m11 - p.s * m12) * bg_up))
        / p.psi;
    let mu1 = (p.ss + gg * c.j) * bb_up + (p.ssb - tt * c.j) * bg_up;
    let mu2 = (p.sbsb + bb * c.j) * bg_up + (p.ssb - tt * c.j) * bb_up;
    let b_up = linalg::mat_vec(&st.a_inv, &sys.b_i);
    Ok((0..st.n)
        .map(|i| {
            let h = st.b_up[i] - st.s * st.alpha_up[i];
            let hb = st.gamma_up[i] - st.sb * st.alpha_up[i];
            along * st.alpha_up[i] + st.alpha / c.pi * b_up[i] - pg * (mu1 * h + mu2 * hb)
        })
        .collect())
}

/// Largest substitution residual of `a` in the system, relative to the
/// size of the right-hand side.
pub fn ell_residual(sys: &EllSystem, st: &ScalarState, a: &[f64]) -> f64 {
    let l2 = ell2(st);
    let l1 = ell(st);
    let scale = 1f64.max(linalg::norm(&sys.b_i)).max(sys.b.abs());
    let lhs = linalg::mat_vec(&l2, a);
    let worst = lhs
        .iter()
        .zip(&sys.b_i)
        .map(|(l, r)| (l - r).abs())
        .fold((linalg::dot(&l1, a) - sys.b).abs(), f64::max);
    worst / scale
}

/// Every intermediate of the closed-form spray, in any scalar type.
#[derive(Debug, Clone)]
pub struct SprayTerms<T> {
    pub alpha: T,
    pub psi: PsiJet<T>,
    pub coeffs: CoefficientSet<T>,
    pub g_alpha: Vec<T>,
    pub beta_s_i0: Vec<T>,
    pub gamma_s_i0: Vec<T>,
    pub beta_s_up0: Vec<T>,
    pub gamma_s_up0: Vec<T>,
    pub beta_r00: T,
    pub gamma_r00: T,
    pub r_beta: T,
    pub r_gamma: T,
    pub gamma1: T,
    pub gamma2: T,
    pub gamma3: T,
    pub g: Vec<T>,
}

/// Closed-form spray at `y` over a fixed base point.
pub fn spray_terms<T: Real>(geo: &PointGeometry, k: &PsiKernel, y: &[T]) -> Result<SprayTerms<T>> {
    let n = y.len();
    if n != geo.x.len() {
        return Err(GeomError::DimensionMismatch {
            expected: geo.x.len(),
            got: n,
        });
    }
    let alpha = quad_c(&geo.a, y).sqrt();
    if !(alpha.value() > 0.0) {
        return Err(GeomError::NullDirection);
    }
    let s = dot_c(&geo.b, y) / alpha;
    let sb = dot_c(&geo.gamma, y) / alpha;
    if !k.in_domain(s.value(), sb.value()) {
        return Err(GeomError::OutOfDomain {
            s: s.value(),
            sbar: sb.value(),
            b0: k.b0,
            g0: k.g0,
        });
    }
    let p = k.partials(s, sb);
    let lift = |v: f64| y[0].cst(v);
    let c = coefficients(&p, s, sb, lift(geo.b2), lift(geo.g2), lift(geo.theta))?;
    if !(c.gamma.value().abs() >= DEGENERACY) {
        return Err(GeomError::DegenerateGamma(c.gamma.value()));
    }
    let g_alpha: Vec<T> = geo
        .christoffel
        .iter()
        .map(|m| quad_c(m, y) * 0.5)
        .collect();
    let beta_s_i0 = mat_vec_c(&geo.beta_d.smat, y);
    let gamma_s_i0 = mat_vec_c(&geo.gamma_d.smat, y);
    let beta_s_up0 = mat_vec_c(&geo.a_inv, &beta_s_i0);
    let gamma_s_up0 = mat_vec_c(&geo.a_inv, &gamma_s_i0);
    let beta_r00 = quad_c(&geo.beta_d.r, y);
    let gamma_r00 = quad_c(&geo.gamma_d.r, y);
    let beta_s0 = dot_c(&geo.b_up, &beta_s_i0);
    let gamma_s0 = dot_c(&geo.gamma_up, &gamma_s_i0);
    let beta_sb0 = dot_c(&geo.gamma, &beta_s_up0);
    let gamma_sb0 = dot_c(&geo.b, &gamma_s_up0);
    let two_a_pi = alpha * 2.0 / c.pi;
    let r_beta = beta_r00 - two_a_pi * (p.s * beta_s0 + p.sb * gamma_sb0);
    let r_gamma = gamma_r00 - two_a_pi * (p.s * beta_sb0 + p.sb * gamma_s0);
    let (bb, gg, tt) = (c.bb(), c.gg(), c.tt());
    let cross = p.ssb - tt * c.j;
    let gamma1 = (p.ss + gg * c.j) * r_beta + cross * r_gamma;
    let gamma2 = (p.sbsb + bb * c.j) * r_gamma + cross * r_beta;
    let gamma3 = c.cb() * r_beta + c.cg() * r_gamma;
    let a_pi = alpha / c.pi;
    let half_gamma = (c.gamma * 2.0).recip();
    let g = (0..n)
        .map(|i| {
            g_alpha[i]
                + a_pi * (p.s * beta_s_up0[i] + p.sb * gamma_s_up0[i])
                + half_gamma
                    * (gamma1 * geo.b_up[i]
                        + gamma2 * geo.gamma_up[i]
                        + gamma3 * y[i] / (alpha * p.psi))
        })
        .collect();
    Ok(SprayTerms {
        alpha,
        psi: p,
        coeffs: c,
        g_alpha,
        beta_s_i0,
        gamma_s_i0,
        beta_s_up0,
        gamma_s_up0,
        beta_r00,
        gamma_r00,
        r_beta,
        r_gamma,
        gamma1,
        gamma2,
        gamma3,
        g,
    })
}

/// Spray coefficients at a point, with the scalars they were built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpraySolution {
    pub g: Vec<f64>,
    pub g_alpha: Vec<f64>,
    /// `2 (G - G_alpha)`
    pub d: Vec<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub r_beta: f64,
    pub r_gamma: f64,
}

/// Closed-form spray at `p`. Evaluated at the `alpha`-unit direction and
/// rescaled, every reported quantity being 2-homogeneous in `y`.
pub fn spray_closed(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<SpraySolution> {
    let geo = point_geometry(fields, &p.x)?;
    spray_at(&geo, k, &p.y)
}

pub fn spray_at(geo: &PointGeometry, k: &PsiKernel, y: &[f64]) -> Result<SpraySolution> {
    let alpha_sq = linalg::dot(y, &linalg::mat_vec(&geo.a, y));
    if !(alpha_sq > 0.0) {
        return Err(GeomError::NullDirection);
    }
    let alpha = alpha_sq.sqrt();
    let unit: Vec<f64> = y.iter().map(|v| v / alpha).collect();
    let t = spray_terms(geo, k, &unit)?;
    let sc = |v: &[f64]| v.iter().map(|x| x * alpha_sq).collect::<Vec<f64>>();
    let g = sc(&t.g);
    let g_alpha = sc(&t.g_alpha);
    let d = g.iter().zip(&g_alpha).map(|(a, b)| 2.0 * (a - b)).collect();
    Ok(SpraySolution {
        g,
        g_alpha,
        d,
        gamma1: t.gamma1 * alpha_sq,
        gamma2: t.gamma2 * alpha_sq,
        gamma3: t.gamma3 * alpha_sq,
        r_beta: t.r_beta * alpha_sq,
        r_gamma: t.r_gamma * alpha_sq,
    })
}

/// The right-hand side whose solution is the deviation `D^i`.
pub fn deviation_system(st: &ScalarState, c: &Contractions) -> EllSystem {
    let p = &st.psi;
    let (br, gr) = (c.beta.r00, c.gamma.r00);
    let kh = (p.ss * br + p.ssb * gr) / st.alpha;
    let khb = (p.ssb * br + p.sbsb * gr) / st.alpha;
    EllSystem {
        b_i: (0..st.n)
            .map(|i| {
                2.0 * p.s * c.beta.s_i0[i] + 2.0 * p.sb * c.gamma.s_i0[i] + kh * st.h[i] + khb * st.hb[i]
            })
            .collect(),
        b: p.s * br + p.sb * gr,
    }
}

/// Spray obtained by solving the `ell` system for `D^i` directly.
pub fn spray_via_solver(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<Vec<f64>> {
    let st = crate::tensors::scalar_state(fields, k, p)?;
    let c = point_contractions(fields, p)?;
    let d = solve_ell_system(&deviation_system(&st, &c), &st)?;
    let conn = crate::alpha::connection(&fields.metric, &p.x, &p.y)?;
    Ok(conn
        .g_alpha
        .iter()
        .zip(&d)
        .map(|(g, d)| g + 0.5 * d)
        .collect())
}

pub fn point_contractions(fields: &FieldSet, p: &EvaluationPoint) -> Result<Contractions> {
    let db = crate::alpha::covariant_derivative(&fields.metric, &fields.beta, &p.x)?;
    let dg = crate::alpha::covariant_derivative(&fields.metric, &fields.gamma, &p.x)?;
    contractions(&db, &dg, &fields.metric, &fields.beta, &fields.gamma, p)
}

/// `G^i = (1/4) g^{il} (d_k g_jl + d_j g_lk - d_l g_jk) y^j y^k`, with the
/// x-derivatives of `g` taken exactly through jets.
pub fn spray_oracle(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<Vec<f64>> {
    let n = p.dim();
    let jet = eval_jet(&Quantity::HalfFSq(k.clone()), fields, p, 2, 1)?;
    let g: Mat = (0..n)
        .map(|i| (0..n).map(|j| jet.derivative_along(&[i, j])).collect())
        .collect();
    // dg[j][l][k] = d g_jl / d x^k
    let dg: Vec<Mat> = (0..n)
        .map(|j| {
            (0..n)
                .map(|l| (0..n).map(|kx| jet.derivative_along(&[j, l, n + kx])).collect())
                .collect()
        })
        .collect();
    let ginv = linalg::inverse(&g)?;
    let y = &p.y;
    let lower: Vec<f64> = (0..n)
        .map(|l| {
            let mut acc = 0.0;
            for j in 0..n {
                for kk in 0..n {
                    acc += (dg[j][l][kk] + dg[l][kk][j] - dg[j][kk][l]) * y[j] * y[kk];
                }
            }
            acc
        })
        .collect();
    Ok(linalg::mat_vec(&ginv, &lower)
        .into_iter()
        .map(|v| 0.25 * v)
        .collect())
}

/// Both sides of `ell_r D^r = Psi_s r00(beta) + Psi_sbar r00(gamma)`.
pub fn ell_deviation_identity(st: &ScalarState, c: &Contractions, d: &[f64]) -> (f64, f64) {
    let lhs = linalg::dot(&ell(st), d);
    let rhs = st.psi.s * c.beta.r00 + st.psi.sb * c.gamma.r00;
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{fixture, sample_points, SampleSpec};
    use crate::psi::KernelFamily;
    use crate::tensors::scalar_state;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kernels() -> Vec<PsiKernel> {
        vec![
            PsiKernel::exp_gamma(),
            PsiKernel::randers3(),
            PsiKernel::new(KernelFamily::composed()),
            PsiKernel::new(KernelFamily::alpha_beta()),
        ]
    }

    #[test]
    fn unit_kernel_is_riemannian() {
        let fs = fixture("conformal_generic", 3).unwrap();
        let p = EvaluationPoint::new(vec![0.3, -0.1, 0.5], vec![1.0, 0.2, -0.7]).unwrap();
        let sol = spray_closed(&fs, &PsiKernel::unit(), &p).unwrap();
        let conn = crate::alpha::connection(&fs.metric, &p.x, &p.y).unwrap();
        assert!(linalg::max_rel_err(&sol.g, &conn.g_alpha) < 1e-14);
        let oracle = spray_oracle(&fs, &PsiKernel::unit(), &p).unwrap();
        assert!(linalg::max_rel_err(&oracle, &conn.g_alpha) < 1e-12);
    }

    #[test]
    fn closed_form_matches_oracle() {
        for name in ["euclidean_parallel_closed", "euclidean_nonclosed", "euclidean_nonparallel", "conformal_generic"] {
            for n in [2, 3] {
                let fs = fixture(name, n).unwrap();
                for k in kernels() {
                    for p in sample_points(n, &SampleSpec { points: 2, directions: 4, seed: 7 }) {
                        let sol = spray_closed(&fs, &k, &p).unwrap();
                        let oracle = spray_oracle(&fs, &k, &p).unwrap();
                        let err = linalg::max_rel_err(&sol.g, &oracle);
                        assert!(err < 1e-9, "{name} n={n} {}: {err:e}", k.name());
                        let via = spray_via_solver(&fs, &k, &p).unwrap();
                        assert!(linalg::max_rel_err(&via, &oracle) < 1e-9, "{name} {}", k.name());
                    }
                }
            }
        }
    }

    #[test]
    fn parallel_closed_spray_is_projective() {
        let fs = fixture("euclidean_parallel_closed", 3).unwrap();
        let k = PsiKernel::exp_gamma();
        let p = EvaluationPoint::new(vec![0.4, 0.3, -0.2], vec![0.6, -1.0, 0.3]).unwrap();
        let sol = spray_closed(&fs, &k, &p).unwrap();
        let c = point_contractions(&fs, &p).unwrap();
        let f = crate::metric::AbgMetric::new(fs.clone(), k.clone()).f(&p.x, &p.y);
        let factor = c.gamma.r00 / (2.0 * f);
        assert!(sol.gamma1.abs() < 1e-15 && sol.gamma2.abs() < 1e-15);
        for i in 0..3 {
            assert!((sol.g[i] - factor * p.y[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn homogeneity() {
        let fs = fixture("conformal_generic", 3).unwrap();
        let k = PsiKernel::new(KernelFamily::composed());
        let p = EvaluationPoint::new(vec![0.3, -0.1, 0.5], vec![1.0, 0.2, -0.7]).unwrap();
        let a = spray_closed(&fs, &k, &p).unwrap();
        let b = spray_closed(&fs, &k, &p.scaled(2.0)).unwrap();
        for i in 0..3 {
            assert!((b.g[i] - 4.0 * a.g[i]).abs() < 1e-13);
            assert!((a.d[i] - 2.0 * (a.g[i] - a.g_alpha[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn deviation_identity() {
        let fs = fixture("conformal_generic", 3).unwrap();
        for k in kernels() {
            let p = EvaluationPoint::new(vec![0.3, -0.1, 0.5], vec![1.0, 0.2, -0.7]).unwrap();
            let st = scalar_state(&fs, &k, &p).unwrap();
            let c = point_contractions(&fs, &p).unwrap();
            let sol = spray_closed(&fs, &k, &p).unwrap();
            let (l, r) = ell_deviation_identity(&st, &c, &sol.d);
            assert!(linalg::rel_err(l, r) < 1e-12, "{}", k.name());
        }
    }

    #[test]
    fn solver_trivial_and_radial() {
        let fs = fixture("conformal_generic", 3).unwrap();
        let p = EvaluationPoint::new(vec![0.3, -0.1, 0.5], vec![1.0, 0.2, -0.7]).unwrap();
        let st = scalar_state(&fs, &PsiKernel::exp_gamma(), &p).unwrap();
        let zero = solve_ell_system(&EllSystem { b_i: vec![0.0; 3], b: 0.0 }, &st).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        // A = c y solves ell_ir A^r = 0, ell_r A^r = c F
        let f = st.psi.psi * st.alpha;
        let a = solve_ell_system(&EllSystem { b_i: vec![0.0; 3], b: 1.7 * f }, &st).unwrap();
        for i in 0..3 {
            assert!((a[i] - 1.7 * p.y[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn solver_residuals_random() {
        let fs = fixture("conformal_generic", 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in kernels() {
            let p = EvaluationPoint::new(vec![0.3, -0.1, 0.5], vec![1.0, 0.2, -0.7]).unwrap();
            let st = scalar_state(&fs, &k, &p).unwrap();
            for _ in 0..20 {
                let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let sys = EllSystem::projected(&raw, rng.random_range(-1.0..1.0), &st);
                assert!(linalg::dot(&sys.b_i, &p.y).abs() < 1e-15);
                let a = solve_ell_system(&sys, &st).unwrap();
                assert!(ell_residual(&sys, &st, &a) < 1e-12, "{}", k.name());
            }
        }
    }

    #[test]
    fn generic_terms_agree_with_f64() {
        let fs = fixture("conformal_generic", 2).unwrap();
        let geo = point_geometry(&fs, &[0.2, 0.4]).unwrap();
        let k = PsiKernel::exp_gamma();
        let y = [0.6, 0.8];
        let layout = crate::jets::Layout::uniform(2, 2).unwrap();
        let yj = crate::jets::Jet::variables(layout, 0, &y);
        let tj = spray_terms(&geo, &k, &yj).unwrap();
        let tf = spray_terms(&geo, &k, &y).unwrap();
        for i in 0..2 {
            assert!((tj.g[i].value() - tf.g[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn out_of_domain_direction() {
        let fs = fixture("euclidean_parallel_closed", 2).unwrap();
        let k = PsiKernel::with_bounds(KernelFamily::ExpGamma, 0.1, 0.5);
        let p = EvaluationPoint::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert!(matches!(spray_closed(&fs, &k, &p), Err(GeomError::OutOfDomain { .. })));
    }
}

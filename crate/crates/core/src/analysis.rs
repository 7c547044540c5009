//! Projective flatness and Douglas tests, and the closed/parallel classifier
//! for 1-forms.

use serde::{Deserialize, Serialize};

use crate::alpha::{covariant_derivative, point_geometry, PointGeometry};
use crate::error::Result;
use crate::fields::{EvaluationPoint, FieldSet, MetricField, OneFormField};
use crate::jets::{eval_xy_mixed, Jet, Layout, Real};
use crate::linalg::{self, Mat, Tensor4};
use crate::metric::Quantity;
use crate::psi::PsiKernel;
use crate::spray::{spray_terms, SprayTerms};

/// Below this a residual counts as zero.
pub const ZERO_TOL: f64 = 1e-6;
/// Above this a residual counts as structurally nonzero.
pub const NONZERO_TOL: f64 = 1e-3;

/// Three-way outcome of a vanishing test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vanishing {
    Zero,
    Nonzero,
    Inconclusive,
}

impl Vanishing {
    pub fn of(residual: f64) -> Vanishing {
        Vanishing::with(residual, ZERO_TOL, NONZERO_TOL)
    }

    pub fn with(residual: f64, zero: f64, nonzero: f64) -> Vanishing {
        if residual <= zero {
            Vanishing::Zero
        } else if residual > nonzero {
            Vanishing::Nonzero
        } else {
            Vanishing::Inconclusive
        }
    }

    /// Zero everywhere, nonzero somewhere, or neither.
    pub fn combine(items: impl IntoIterator<Item = Vanishing>) -> Vanishing {
        let mut all_zero = true;
        for v in items {
            match v {
                Vanishing::Nonzero => return Vanishing::Nonzero,
                Vanishing::Inconclusive => all_zero = false,
                Vanishing::Zero => {}
            }
        }
        if all_zero {
            Vanishing::Zero
        } else {
            Vanishing::Inconclusive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatVerdict {
    Flat,
    NotFlat,
    Inconclusive,
}

impl From<Vanishing> for FlatVerdict {
    fn from(v: Vanishing) -> Self {
        match v {
            Vanishing::Zero => FlatVerdict::Flat,
            Vanishing::Nonzero => FlatVerdict::NotFlat,
            Vanishing::Inconclusive => FlatVerdict::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DouglasVerdict {
    Douglas,
    NotDouglas,
    Inconclusive,
}

impl From<Vanishing> for DouglasVerdict {
    fn from(v: Vanishing) -> Self {
        match v {
            Vanishing::Zero => DouglasVerdict::Douglas,
            Vanishing::Nonzero => DouglasVerdict::NotDouglas,
            Vanishing::Inconclusive => DouglasVerdict::Inconclusive,
        }
    }
}

/// `F_{x^k y^j} y^k - F_{x^j}`
pub fn hamel_residual(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<Vec<f64>> {
    let j = eval_xy_mixed(&Quantity::Finsler(k.clone()), fields, p)?;
    let n = p.dim();
    Ok((0..n)
        .map(|jj| (0..n).map(|kk| j.fxy[kk][jj] * p.y[kk]).sum::<f64>() - j.fx[jj])
        .collect())
}

/// `P = F_{x^k} y^k / (2F)`
pub fn projective_factor(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<f64> {
    let j = eval_xy_mixed(&Quantity::Finsler(k.clone()), fields, p)?;
    Ok(linalg::dot(&j.fx, &p.y) / (2.0 * j.value))
}

/// The algebraic flatness condition, evaluated from the spray ingredients.
pub fn condition51(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<Vec<f64>> {
    let geo = point_geometry(fields, &p.x)?;
    let t = spray_terms(&geo, k, &p.y)?;
    Ok(condition_from_terms(&geo, &t, &p.y))
}

fn condition_from_terms(geo: &PointGeometry, t: &SprayTerms<f64>, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let alpha = t.alpha;
    let ay = linalg::mat_vec(&geo.a, y);
    let al: Vec<f64> = ay.iter().map(|v| v / alpha).collect();
    let s = t.coeffs.s;
    let sb = t.coeffs.sb;
    let ps = &t.psi;
    let c = &t.coeffs;
    (0..n)
        .map(|j| {
            let projected: f64 = (0..n)
                .map(|i| (geo.a[i][j] - al[i] * al[j]) * t.g_alpha[i])
                .sum();
            let h = geo.b[j] - s * al[j];
            let hb = geo.gamma[j] - sb * al[j];
            projected
                + alpha / c.pi * (ps.s * t.beta_s_i0[j] + ps.sb * t.gamma_s_i0[j])
                + (t.gamma1 * h + t.gamma2 * hb) / (2.0 * c.gamma)
        })
        .collect()
}

/// Per-point flatness data. Norms are divided by the matching power of `|y|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessReport {
    pub hamel: Vec<f64>,
    pub condition51: Vec<f64>,
    pub projective_factor: f64,
    pub hamel_norm: f64,
    pub condition_norm: f64,
    /// `max_i |G^i - P y^i| / max(1, |G|)`
    pub projective_gap: f64,
    pub verdict: FlatVerdict,
    pub condition_verdict: FlatVerdict,
}

pub fn flatness_report(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<FlatnessReport> {
    let hamel = hamel_residual(fields, k, p)?;
    let cond = condition51(fields, k, p)?;
    let pf = projective_factor(fields, k, p)?;
    let sol = crate::spray::spray_closed(fields, k, p)?;
    let ny = linalg::norm(&p.y);
    let hamel_norm = linalg::norm(&hamel) / ny;
    let condition_norm = linalg::norm(&cond) / (ny * ny);
    let gap = sol
        .g
        .iter()
        .zip(&p.y)
        .map(|(g, y)| (g - pf * y).abs())
        .fold(0.0, f64::max)
        / linalg::norm(&sol.g).max(1.0);
    Ok(FlatnessReport {
        hamel,
        condition51: cond,
        projective_factor: pf,
        hamel_norm,
        condition_norm,
        projective_gap: gap,
        verdict: Vanishing::of(hamel_norm).into(),
        condition_verdict: Vanishing::of(condition_norm).into(),
    })
}

/// Spray as order-4 `y`-jets at `p`.
fn spray_jets(geo: &PointGeometry, k: &PsiKernel, y: &[f64]) -> Result<(SprayTerms<Jet>, Vec<Jet>)> {
    let layout = Layout::uniform(y.len(), 4)?;
    let yj = Jet::variables(layout, 0, y);
    Ok((spray_terms(geo, k, &yj)?, yj))
}

fn third_derivatives(f: &[Jet]) -> Tensor4 {
    let n = f.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|kk| (0..n).map(|l| f[i].derivative_along(&[j, kk, l])).collect())
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `D^i_{jkl}`, third `y`-derivatives of `G^i - (1/(n+1)) (d G^m / d y^m) y^i`.
pub fn douglas_tensor(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<Tensor4> {
    let geo = point_geometry(fields, &p.x)?;
    let (t, yj) = spray_jets(&geo, k, &p.y)?;
    Ok(douglas_from_jets(&t.g, &yj))
}

fn douglas_from_jets(g: &[Jet], y: &[Jet]) -> Tensor4 {
    let n = g.len();
    let mut div = g[0].partial(0);
    for (m, gm) in g.iter().enumerate().skip(1) {
        div += gm.partial(m);
    }
    let trace = div * (1.0 / (n as f64 + 1.0));
    let reduced: Vec<Jet> = (0..n).map(|i| g[i] - trace * y[i]).collect();
    third_derivatives(&reduced)
}

fn bij_generic<T: Real>(geo: &PointGeometry, t: &SprayTerms<T>, y: &[T]) -> Vec<Vec<T>> {
    let n = y.len();
    let c = &t.coeffs;
    let a_pi = t.alpha / c.pi;
    let half = (c.gamma * 2.0).recip();
    let (g1, g2) = (t.gamma1 * half, t.gamma2 * half);
    let wedge = |u: &[T], i: usize, j: usize| u[i] * y[j] - u[j] * y[i];
    let wedge_c = |u: &[f64], i: usize, j: usize| y[j] * u[i] - y[i] * u[j];
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    a_pi * (t.psi.s * wedge(&t.beta_s_up0, i, j)
                        + t.psi.sb * wedge(&t.gamma_s_up0, i, j))
                        + g1 * wedge_c(&geo.b_up, i, j)
                        + g2 * wedge_c(&geo.gamma_up, i, j)
                })
                .collect()
        })
        .collect()
}

/// `B^{ij}` assembled term by term.
pub fn bij(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<Mat> {
    let geo = point_geometry(fields, &p.x)?;
    let t = spray_terms(&geo, k, &p.y)?;
    Ok(bij_generic(&geo, &t, &p.y))
}

/// `(G^i y^j - G^j y^i) - (G_alpha^i y^j - G_alpha^j y^i)` from the spray.
pub fn bij_reconstruction(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<Mat> {
    let sol = crate::spray::spray_closed(fields, k, p)?;
    let n = p.dim();
    let y = &p.y;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (sol.g[i] * y[j] - sol.g[j] * y[i])
                        - (sol.g_alpha[i] * y[j] - sol.g_alpha[j] * y[i])
                })
                .collect()
        })
        .collect())
}

/// Largest fourth `y`-derivative of any `B^{ij}`; zero when `B` is cubic.
pub fn bij_fourth_derivative(fields: &FieldSet, k: &PsiKernel, p: &EvaluationPoint) -> Result<f64> {
    let geo = point_geometry(fields, &p.x)?;
    let (t, yj) = spray_jets(&geo, k, &p.y)?;
    let b = bij_generic(&geo, &t, &yj);
    let n = p.dim();
    let mut worst: f64 = 0.0;
    for row in &b {
        for e in row {
            for i in 0..n {
                for j in i..n {
                    for kk in j..n {
                        for l in kk..n {
                            worst = worst.max(e.derivative_along(&[i, j, kk, l]).abs());
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DouglasReport {
    /// Full tensor, left empty unless requested.
    pub tensor: Option<Tensor4>,
    pub douglas_norm: f64,
    pub bij: Mat,
    pub bij_asymmetry: f64,
    /// relative gap between `B^{ij}` and the spray reconstruction
    pub bij_reconstruction_gap: f64,
    pub bij_fourth: f64,
    pub verdict: DouglasVerdict,
}

pub fn douglas_report(
    fields: &FieldSet,
    k: &PsiKernel,
    p: &EvaluationPoint,
    full: bool,
) -> Result<DouglasReport> {
    let geo = point_geometry(fields, &p.x)?;
    let (t, yj) = spray_jets(&geo, k, &p.y)?;
    let d = douglas_from_jets(&t.g, &yj);
    let ny = linalg::norm(&p.y);
    let douglas_norm = linalg::max_abs(linalg::flatten4(&d)) * ny;
    let b = bij(fields, k, p)?;
    let recon = bij_reconstruction(fields, k, p)?;
    let mut asym: f64 = 0.0;
    for i in 0..b.len() {
        for j in 0..b.len() {
            asym = asym.max((b[i][j] + b[j][i]).abs());
        }
    }
    Ok(DouglasReport {
        tensor: full.then_some(d),
        douglas_norm,
        bij_asymmetry: asym,
        bij_reconstruction_gap: linalg::max_rel_err(&linalg::flatten2(&b), &linalg::flatten2(&recon)),
        bij: b,
        bij_fourth: bij_fourth_derivative(fields, k, p)?,
        verdict: Vanishing::of(douglas_norm).into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormClassification {
    pub closed: bool,
    pub parallel: bool,
    pub max_s: f64,
    pub max_nabla: f64,
}

/// Closed and parallel flags of `form` over the sample base points.
pub fn classify_form(
    m: &MetricField,
    form: &OneFormField,
    xs: &[Vec<f64>],
    tol: f64,
) -> Result<FormClassification> {
    let mut max_s: f64 = 0.0;
    let mut max_nabla: f64 = 0.0;
    for x in xs {
        let d = covariant_derivative(m, form, x)?;
        max_s = max_s.max(linalg::max_abs(linalg::flatten2(&d.smat)));
        max_nabla = max_nabla.max(linalg::max_abs(linalg::flatten2(&d.nabla)));
    }
    Ok(FormClassification {
        closed: max_s <= tol,
        parallel: max_nabla <= tol,
        max_s,
        max_nabla,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{fixture, sample_points, sample_x, Expr, SampleSpec};
    use crate::psi::KernelFamily;

    fn spec() -> SampleSpec {
        SampleSpec {
            points: 3,
            directions: 8,
            seed: 5,
        }
    }

    #[test]
    fn euclidean_alpha_is_flat() {
        let fs = fixture("riemannian_only", 3).unwrap();
        for p in sample_points(3, &spec()) {
            let h = hamel_residual(&fs, &PsiKernel::unit(), &p).unwrap();
            assert!(h.iter().all(|v| v.abs() < 1e-15));
            assert_eq!(projective_factor(&fs, &PsiKernel::unit(), &p).unwrap(), 0.0);
            let c = condition51(&fs, &PsiKernel::exp_gamma(), &p).unwrap();
            assert!(c.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn parallel_closed_is_flat_and_douglas() {
        let fs = fixture("euclidean_parallel_closed", 3).unwrap();
        let k = PsiKernel::exp_gamma();
        for p in sample_points(3, &spec()) {
            let r = flatness_report(&fs, &k, &p).unwrap();
            assert_eq!(r.verdict, FlatVerdict::Flat, "{r:?}");
            assert_eq!(r.condition_verdict, FlatVerdict::Flat);
            assert!(r.projective_gap < 1e-12);
            let d = douglas_report(&fs, &k, &p, false).unwrap();
            assert_eq!(d.verdict, DouglasVerdict::Douglas, "{}", d.douglas_norm);
            assert!(d.bij_fourth < 1e-9);
        }
    }

    #[test]
    fn nonclosed_is_neither() {
        let fs = fixture("euclidean_nonclosed", 3).unwrap();
        let k = PsiKernel::exp_gamma();
        let pts = sample_points(3, &spec());
        let flat: Vec<_> = pts.iter().map(|p| flatness_report(&fs, &k, p).unwrap()).collect();
        assert!(flat.iter().any(|r| r.verdict == FlatVerdict::NotFlat));
        for r in &flat {
            assert_eq!(r.verdict, r.condition_verdict);
        }
        let dv = Vanishing::combine(pts.iter().map(|p| {
            let d = douglas_report(&fs, &k, p, false).unwrap();
            Vanishing::of(d.douglas_norm)
        }));
        assert_eq!(dv, Vanishing::Nonzero);
    }

    #[test]
    fn projective_factor_scaling() {
        let fs = fixture("euclidean_parallel_closed", 2).unwrap();
        let k = PsiKernel::exp_gamma();
        let p = EvaluationPoint::new(vec![0.5, -0.3], vec![0.8, 0.6]).unwrap();
        let a = projective_factor(&fs, &k, &p).unwrap();
        let b = projective_factor(&fs, &k, &p.scaled(2.0)).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-14);
    }

    #[test]
    fn riemannian_douglas_vanishes() {
        let fs = fixture("conformal_generic", 3).unwrap();
        for p in sample_points(3, &spec()).iter().take(6) {
            let d = douglas_tensor(&fs, &PsiKernel::unit(), p).unwrap();
            assert!(linalg::max_abs(linalg::flatten4(&d)) < 1e-12);
            let b = bij(&fs, &PsiKernel::unit(), p).unwrap();
            assert!(b.iter().flatten().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn douglas_symmetric_in_lower_indices() {
        let fs = fixture("euclidean_nonclosed", 3).unwrap();
        let p = EvaluationPoint::new(vec![0.2, 0.9, -0.4], vec![0.6, 0.0, 0.8]).unwrap();
        let d = douglas_tensor(&fs, &PsiKernel::exp_gamma(), &p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        assert_eq!(d[i][j][k][l], d[i][k][j][l]);
                        assert_eq!(d[i][j][k][l], d[i][l][k][j]);
                    }
                }
            }
        }
    }

    #[test]
    fn bij_matches_spray_difference() {
        let fs = fixture("conformal_generic", 3).unwrap();
        for k in [PsiKernel::exp_gamma(), PsiKernel::new(KernelFamily::composed())] {
            for p in sample_points(3, &spec()).iter().take(8) {
                let b = bij(&fs, &k, p).unwrap();
                let r = bij_reconstruction(&fs, &k, p).unwrap();
                assert!(linalg::max_rel_err(&linalg::flatten2(&b), &linalg::flatten2(&r)) < 1e-12);
            }
        }
    }

    #[test]
    fn form_classes() {
        let m = MetricField::euclidean(2);
        let xs = sample_x(2, 6, 1);
        let c = classify_form(&m, &OneFormField::constant(&[0.3, 0.1]), &xs, 1e-12).unwrap();
        assert!(c.parallel && c.closed);
        let f = Expr::parse("x1^2*x2", 2).unwrap();
        let c = classify_form(&m, &OneFormField::exact(&f), &xs, 1e-12).unwrap();
        assert!(c.closed && !c.parallel);
        let fs = crate::fields::nonclosed_with(2, 0.3, 1.0).unwrap();
        let c = classify_form(&m, &fs.gamma, &xs, 1e-12).unwrap();
        assert!(!c.closed);
    }

    #[test]
    fn verdict_bands() {
        assert_eq!(Vanishing::of(1e-7), Vanishing::Zero);
        assert_eq!(Vanishing::of(1e-4), Vanishing::Inconclusive);
        assert_eq!(Vanishing::of(1e-2), Vanishing::Nonzero);
        assert_eq!(
            Vanishing::combine([Vanishing::Zero, Vanishing::Inconclusive]),
            Vanishing::Inconclusive
        );
    }
}

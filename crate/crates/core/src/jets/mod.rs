//! Exact Taylor jets and a finite-difference cross-check for scalar fields on
//! the tangent bundle.

mod fd;
mod jet;
mod real;

pub use fd::{richardson, FdEstimate};
pub use jet::{Jet, Layout, MAX_TERMS, MAX_VARS};
pub use real::{dot, dot_c, mat_vec_c, quad_c, Real};

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::fields::{Env, EvaluationPoint, FieldSet};
use crate::linalg::{self, Mat, Tensor3, Tensor4};

/// A scalar function of `(x, y)` built from the field values at `x`.
pub trait ScalarField {
    fn eval<T: Real>(&self, env: &Env<T>, y: &[T]) -> T;
}

/// Value and `y`-derivatives up to the requested order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YJet {
    pub value: f64,
    pub d1: Vec<f64>,
    pub d2: Option<Mat>,
    pub d3: Option<Tensor3>,
    pub d4: Option<Tensor4>,
}

/// First `x`-derivatives and mixed `x, y` derivatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XYJet {
    pub value: f64,
    pub fx: Vec<f64>,
    /// `fxy[k][j] = d^2 f / dx^k dy^j`
    pub fxy: Mat,
}

fn check_point(fields: &FieldSet, p: &EvaluationPoint) -> Result<()> {
    if p.dim() != fields.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: fields.dim(),
            got: p.dim(),
        });
    }
    if p.y.iter().all(|&v| v == 0.0) {
        return Err(GeomError::DegenerateDirection);
    }
    Ok(())
}

/// Raw jet of `f` with `y` seeded as variables `0..n` (degree cap `y_order`)
/// and, if `x_order > 0`, `x` seeded as variables `n..2n`.
pub fn eval_jet<F: ScalarField>(
    f: &F,
    fields: &FieldSet,
    p: &EvaluationPoint,
    y_order: u8,
    x_order: u8,
) -> Result<Jet> {
    check_point(fields, p)?;
    let n = p.dim();
    let layout = if x_order == 0 {
        Layout::uniform(n, y_order)?
    } else {
        Layout::get(&[(n, y_order), (n, x_order)])?
    };
    let y = Jet::variables(layout, 0, &p.y);
    let env = if x_order == 0 {
        fields.env_at(&p.x, &y[0])
    } else {
        let dx = Jet::variables(layout, n, &vec![0.0; n]);
        fields.env_linear(&p.x, &dx)
    };
    if x_order > 1 {
        return Err(GeomError::UnsupportedOrder(x_order as usize));
    }
    let out = f.eval(&env, &y);
    if !out.value().is_finite() {
        return Err(GeomError::NonSmoothPoint);
    }
    Ok(out)
}

/// Symmetric derivative arrays read off a jet whose first `n` variables are `y`.
pub fn y_derivatives(jet: &Jet, n: usize, order: u8) -> YJet {
    let d = |vars: &[usize]| jet.derivative_along(vars);
    let d1 = (0..n).map(|i| d(&[i])).collect();
    let d2 = (order >= 2).then(|| {
        (0..n)
            .map(|i| (0..n).map(|j| d(&[i, j])).collect())
            .collect()
    });
    let d3 = (order >= 3).then(|| {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| d(&[i, j, k])).collect())
                    .collect()
            })
            .collect()
    });
    let d4 = (order >= 4).then(|| {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| (0..n).map(|l| d(&[i, j, k, l])).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    });
    YJet {
        value: jet.value(),
        d1,
        d2,
        d3,
        d4,
    }
}

/// `y`-derivatives of `f` at `p` up to `order` (1 to 4).
pub fn eval_y_jet<F: ScalarField>(
    f: &F,
    fields: &FieldSet,
    p: &EvaluationPoint,
    order: u8,
) -> Result<YJet> {
    if !(1..=4).contains(&order) {
        return Err(GeomError::UnsupportedOrder(order as usize));
    }
    let jet = eval_jet(f, fields, p, order, 0)?;
    Ok(y_derivatives(&jet, p.dim(), order))
}

/// `f_{x^k}` and `f_{x^k y^j}` at `p`.
pub fn eval_xy_mixed<F: ScalarField>(
    f: &F,
    fields: &FieldSet,
    p: &EvaluationPoint,
) -> Result<XYJet> {
    let n = p.dim();
    let jet = eval_jet(f, fields, p, 1, 1)?;
    Ok(XYJet {
        value: jet.value(),
        fx: (0..n).map(|k| jet.derivative_along(&[n + k])).collect(),
        fxy: (0..n)
            .map(|k| (0..n).map(|j| jet.derivative_along(&[n + k, j])).collect())
            .collect(),
    })
}

/// Finite-difference estimate of the derivative with multi-index `exps`.
///
/// `exps` has length `n` (y only) or `2n` (y then x). Field data at shifted
/// `x` is evaluated exactly, so only `f` itself is differenced.
pub fn fd_check<F: ScalarField>(
    f: &F,
    fields: &FieldSet,
    p: &EvaluationPoint,
    exps: &[u8],
) -> Result<FdEstimate> {
    check_point(fields, p)?;
    let n = p.dim();
    if exps.len() != n && exps.len() != 2 * n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: exps.len(),
        });
    }
    let order: usize = exps.iter().map(|&e| e as usize).sum();
    if order > 4 {
        return Err(GeomError::UnsupportedOrder(order));
    }
    let with_x = exps.len() == 2 * n && exps[n..].iter().any(|&e| e > 0);
    let base: Vec<f64> = p.y.iter().chain(p.x.iter()).copied().collect();
    let fixed_env = fields.env_at(&p.x, &0.0);
    let g = |v: &[f64]| -> f64 {
        if with_x {
            let env = fields.env_at(&v[n..], &0.0);
            f.eval(&env, &v[..n])
        } else {
            f.eval(&fixed_env, &v[..n])
        }
    };
    let mut full = exps.to_vec();
    full.resize(2 * n, 0);
    let scale = 0.5 * linalg::norm(&p.y).min(2.0);
    richardson(&g, &base, &full, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{fixture, Expr, MetricField, OneFormField};
    use crate::metric::Quantity;
    use crate::psi::PsiKernel;

    fn euclid2() -> FieldSet {
        FieldSet::new(
            MetricField::euclidean(2),
            OneFormField::zero(2),
            OneFormField::zero(2),
        )
        .unwrap()
    }

    #[test]
    fn norm_gradient_along_axis() {
        let p = EvaluationPoint::new(vec![0.3, 0.1], vec![1.0, 0.0]).unwrap();
        let j = eval_y_jet(&Quantity::Finsler(PsiKernel::unit()), &euclid2(), &p, 1).unwrap();
        assert_eq!(j.d1, vec![1.0, 0.0]);
    }

    #[test]
    fn quadratic_form_hessian() {
        let fs = fixture("conformal_generic", 3).unwrap();
        let p = EvaluationPoint::new(vec![0.2, -0.5, 0.4], vec![0.3, -1.2, 0.7]).unwrap();
        let j = eval_y_jet(&Quantity::AlphaSq, &fs, &p, 2).unwrap();
        let a = fs.metric.a(&p.x);
        let d2 = j.d2.unwrap();
        for i in 0..3 {
            for k in 0..3 {
                assert!((d2[i][k] - 2.0 * a[i][k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn symmetry_and_euler_at_order_four() {
        let fs = fixture("conformal_generic", 3).unwrap();
        let p = EvaluationPoint::new(vec![0.2, -0.5, 0.4], vec![0.3, -1.2, 0.7]).unwrap();
        let f = Quantity::Finsler(PsiKernel::exp_gamma());
        let j = eval_y_jet(&f, &fs, &p, 4).unwrap();
        let euler: f64 = j.d1.iter().zip(&p.y).map(|(a, b)| a * b).sum();
        assert!((euler - j.value).abs() < 1e-12);
        assert!(linalg::asymmetry3(j.d3.as_ref().unwrap()) < 1e-12);
        let d4 = j.d4.unwrap();
        assert!((d4[0][1][2][0] - d4[2][0][0][1]).abs() < 1e-12);
    }

    #[test]
    fn exp_gamma_gradient_matches_differences() {
        let fs = fixture("euclidean_parallel_closed", 2).unwrap();
        let p = EvaluationPoint::new(vec![0.4, -0.7], vec![0.8, 0.6]).unwrap();
        let f = Quantity::Finsler(PsiKernel::exp_gamma());
        let j = eval_y_jet(&f, &fs, &p, 1).unwrap();
        for i in 0..2 {
            let mut e = [0u8; 2];
            e[i] = 1;
            let est = fd_check(&f, &fs, &p, &e).unwrap();
            assert!(linalg::rel_err(est.value, j.d1[i]) <= 1e-6);
        }
    }

    #[test]
    fn mixed_derivatives_of_an_exact_form() {
        // gamma = d(x1 x2): gamma(y) = x2 y1 + x1 y2
        let fs = FieldSet::new(
            MetricField::euclidean(2),
            OneFormField::zero(2),
            OneFormField::exact(&Expr::parse("x1*x2", 2).unwrap()),
        )
        .unwrap();
        let p = EvaluationPoint::new(vec![0.5, -0.25], vec![2.0, 3.0]).unwrap();
        let xy = eval_xy_mixed(&Quantity::Gamma, &fs, &p).unwrap();
        assert_eq!(xy.fx, vec![3.0, 2.0]);
        assert_eq!(xy.fxy, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let alpha = eval_xy_mixed(&Quantity::Alpha, &fs, &p).unwrap();
        assert_eq!(alpha.fx, vec![0.0, 0.0]);
    }

    #[test]
    fn x_derivatives_match_differences() {
        let fs = fixture("conformal_generic", 2).unwrap();
        let p = EvaluationPoint::new(vec![0.3, -0.6], vec![0.8, -0.6]).unwrap();
        let f = Quantity::Finsler(PsiKernel::exp_gamma());
        let xy = eval_xy_mixed(&f, &fs, &p).unwrap();
        for k in 0..2 {
            let mut e = [0u8; 4];
            e[2 + k] = 1;
            let est = fd_check(&f, &fs, &p, &e).unwrap();
            assert!(linalg::rel_err(est.value, xy.fx[k]) <= 1e-6);
            e[0] = 1;
            let est = fd_check(&f, &fs, &p, &e).unwrap();
            assert!(linalg::rel_err(est.value, xy.fxy[k][0]) <= 1e-6);
        }
    }

    #[test]
    fn zero_direction_refused() {
        let p = EvaluationPoint {
            x: vec![0.0, 0.0],
            y: vec![0.0, 0.0],
        };
        assert_eq!(
            eval_y_jet(&Quantity::Alpha, &euclid2(), &p, 2),
            Err(GeomError::DegenerateDirection)
        );
    }
}

//! Charts, Riemannian metrics and 1-forms with analytic x-derivatives.

mod expr;
mod fixtures;
mod sampling;

pub use expr::{Expr, Term};
pub use fixtures::{fixture, nonclosed_with, parallel_closed_with, FIXTURE_NAMES};
pub use sampling::{sample_points, sample_x, y_directions, SampleSpec};

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::jets::{Jet, Real};
use crate::linalg::{self, Mat, Tensor3};

/// A base point `x` and a nonzero tangent vector `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl EvaluationPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(GeomError::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(GeomError::DimensionMismatch {
                expected: 2,
                got: x.len(),
            });
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(GeomError::DegenerateDirection);
        }
        Ok(EvaluationPoint { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Same base point, tangent vector multiplied by `c`.
    pub fn scaled(&self, c: f64) -> EvaluationPoint {
        EvaluationPoint {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * c).collect(),
        }
    }
}

/// `a_ij(x)`, stored as a symmetric matrix of expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    entries: Vec<Vec<Expr>>,
}

impl MetricField {
    pub fn new(entries: Vec<Vec<Expr>>) -> Result<Self> {
        let n = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(GeomError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(GeomError::Expression(format!(
                        "metric entry ({i},{j}) differs from ({j},{i})"
                    )));
                }
            }
        }
        Ok(MetricField { entries })
    }

    pub fn euclidean(n: usize) -> Self {
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Expr::constant(n, if i == j { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        MetricField { entries }
    }

    /// `e^{2 sigma(x)} delta_ij` with `sigma = rates . x`.
    pub fn conformal(rates: &[f64]) -> Self {
        let n = rates.len();
        let twice: Vec<f64> = rates.iter().map(|r| 2.0 * r).collect();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Expr::exp_linear(n, 1.0, &twice)
                        } else {
                            Expr::zero(n)
                        }
                    })
                    .collect()
            })
            .collect();
        MetricField { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Expr>] {
        &self.entries
    }

    pub fn a(&self, x: &[f64]) -> Mat {
        self.entries
            .iter()
            .map(|row| row.iter().map(|e| e.eval(x)).collect())
            .collect()
    }

    /// `da[i][j][k] = d a_ij / d x^k`.
    pub fn da(&self, x: &[f64]) -> Tensor3 {
        self.entries
            .iter()
            .map(|row| row.iter().map(|e| e.grad(x)).collect())
            .collect()
    }

    /// `a(x)` and its inverse; fails unless `a(x)` is SPD.
    pub fn a_and_inverse(&self, x: &[f64]) -> Result<(Mat, Mat)> {
        let a = self.a(x);
        let inv = linalg::spd_inverse(&a)?;
        Ok((a, inv))
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().flatten().all(|e| {
            e.terms()
                .iter()
                .all(|t| t.powers.iter().all(|&p| p == 0) && t.rates.iter().all(|&r| r == 0.0))
        })
    }
}

/// A 1-form `coeff_i(x) y^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormField {
    comps: Vec<Expr>,
}

impl OneFormField {
    pub fn new(comps: Vec<Expr>) -> Self {
        OneFormField { comps }
    }

    pub fn zero(n: usize) -> Self {
        OneFormField {
            comps: vec![Expr::zero(n); n],
        }
    }

    pub fn constant(c: &[f64]) -> Self {
        let n = c.len();
        OneFormField {
            comps: c.iter().map(|&v| Expr::constant(n, v)).collect(),
        }
    }

    /// The exact form `df`.
    pub fn exact(f: &Expr) -> Self {
        OneFormField {
            comps: (0..f.dim()).map(|k| f.diff(k)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn coeff(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|e| e.eval(x)).collect()
    }

    /// `dcoeff[i][j] = d coeff_i / d x^j`.
    pub fn dcoeff(&self, x: &[f64]) -> Mat {
        self.comps.iter().map(|e| e.grad(x)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }
}

/// The field data of an (alpha, beta, gamma)-metric.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub metric: MetricField,
    pub beta: OneFormField,
    pub gamma: OneFormField,
    /// Declared upper bounds on `||beta||_alpha` and `||gamma||_alpha`.
    pub bounds: Option<(f64, f64)>,
}

impl FieldSet {
    pub fn new(metric: MetricField, beta: OneFormField, gamma: OneFormField) -> Result<Self> {
        let n = metric.dim();
        for got in [beta.dim(), gamma.dim()] {
            if got != n {
                return Err(GeomError::DimensionMismatch { expected: n, got });
            }
        }
        Ok(FieldSet {
            metric,
            beta,
            gamma,
            bounds: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// Verifies that `a` is SPD and both forms respect the declared bounds at
    /// every listed point; collects every violation.
    pub fn check_bounds(&self, xs: &[Vec<f64>]) -> Result<()> {
        let mut problems = Vec::new();
        for x in xs {
            match norms(&self.metric, &self.beta, &self.gamma, x) {
                Err(_) => problems.push(format!("metric is not positive definite at x = {x:?}")),
                Ok(nm) => {
                    if let Some((b0, g0)) = self.bounds {
                        if nm.b2.sqrt() >= b0 {
                            problems.push(format!(
                                "beta norm {} reaches bound {b0} at x = {x:?}",
                                nm.b2.sqrt()
                            ));
                        }
                        if nm.g2.sqrt() >= g0 {
                            problems.push(format!(
                                "gamma norm {} reaches bound {g0} at x = {x:?}",
                                nm.g2.sqrt()
                            ));
                        }
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(GeomError::InvalidConfig(problems))
        }
    }

    /// Field values at `x`, lifted into the context of `like`.
    pub fn env_at<T: Real>(&self, x: &[f64], like: &T) -> Env<T> {
        let lift_v = |v: Vec<f64>| v.into_iter().map(|c| like.cst(c)).collect::<Vec<T>>();
        Env {
            a: self.metric.a(x).into_iter().map(lift_v).collect(),
            b: lift_v(self.beta.coeff(x)),
            gamma: lift_v(self.gamma.coeff(x)),
        }
    }

    /// First-order model of the fields at `x + dx`; exact for all Taylor
    /// coefficients of degree at most one in `dx`.
    pub fn env_linear(&self, x: &[f64], dx: &[Jet]) -> Env<Jet> {
        let lin = |v: f64, grad: &[f64]| {
            let mut acc = dx[0].cst(v);
            for (g, d) in grad.iter().zip(dx) {
                acc += *d * *g;
            }
            acc
        };
        let a = self.metric.a(x);
        let da = self.metric.da(x);
        let b = self.beta.coeff(x);
        let db = self.beta.dcoeff(x);
        let c = self.gamma.coeff(x);
        let dc = self.gamma.dcoeff(x);
        let n = self.dim();
        Env {
            a: (0..n)
                .map(|i| (0..n).map(|j| lin(a[i][j], &da[i][j])).collect())
                .collect(),
            b: (0..n).map(|i| lin(b[i], &db[i])).collect(),
            gamma: (0..n).map(|i| lin(c[i], &dc[i])).collect(),
        }
    }
}

/// Field values at one base point, in whatever scalar type the caller needs.
#[derive(Debug, Clone)]
pub struct Env<T> {
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
    pub gamma: Vec<T>,
}

/// `(b^2, g^2, theta)` of the two forms at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub b2: f64,
    pub g2: f64,
    pub theta: f64,
}

pub fn norms(
    m: &MetricField,
    beta: &OneFormField,
    gamma: &OneFormField,
    x: &[f64],
) -> Result<Norms> {
    let (_, inv) = m.a_and_inverse(x)?;
    let b = beta.coeff(x);
    let g = gamma.coeff(x);
    let b_up = linalg::mat_vec(&inv, &b);
    let g_up = linalg::mat_vec(&inv, &g);
    Ok(Norms {
        b2: linalg::dot(&b, &b_up),
        g2: linalg::dot(&g, &g_up),
        theta: linalg::dot(&b, &g_up),
    })
}

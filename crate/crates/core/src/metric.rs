//! The metric `F = alpha * Psi(beta/alpha, gamma/alpha)` and related scalar
//! fields, written once for every scalar type.

use crate::fields::{Env, FieldSet};
use crate::jets::{dot, Real, ScalarField};
use crate::psi::PsiKernel;

/// Scalar fields on the tangent bundle that the oracles differentiate.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Alpha,
    AlphaSq,
    Beta,
    Gamma,
    /// `beta / alpha`
    S,
    /// `gamma / alpha`
    SBar,
    Constant(f64),
    Finsler(PsiKernel),
    /// `F^2 / 2`
    HalfFSq(PsiKernel),
}

fn quad<T: Real>(a: &[Vec<T>], y: &[T]) -> T {
    let mut acc = y[0].zero_like();
    for (row, yi) in a.iter().zip(y) {
        acc = acc + dot(row, y) * *yi;
    }
    acc
}

/// `F(x, y)` for the given field values.
pub fn finsler<T: Real>(k: &PsiKernel, env: &Env<T>, y: &[T]) -> T {
    let alpha = quad(&env.a, y).sqrt();
    let s = dot(&env.b, y) / alpha;
    let sb = dot(&env.gamma, y) / alpha;
    alpha * k.value(s, sb)
}

impl ScalarField for Quantity {
    fn eval<T: Real>(&self, env: &Env<T>, y: &[T]) -> T {
        match self {
            Quantity::Alpha => quad(&env.a, y).sqrt(),
            Quantity::AlphaSq => quad(&env.a, y),
            Quantity::Beta => dot(&env.b, y),
            Quantity::Gamma => dot(&env.gamma, y),
            Quantity::S => dot(&env.b, y) / quad(&env.a, y).sqrt(),
            Quantity::SBar => dot(&env.gamma, y) / quad(&env.a, y).sqrt(),
            Quantity::Constant(c) => y[0].cst(*c),
            Quantity::Finsler(k) => finsler(k, env, y),
            Quantity::HalfFSq(k) => {
                let f = finsler(k, env, y);
                f * f * 0.5
            }
        }
    }
}

/// Field data together with a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct AbgMetric {
    pub fields: FieldSet,
    pub kernel: PsiKernel,
}

impl AbgMetric {
    pub fn new(fields: FieldSet, kernel: PsiKernel) -> Self {
        AbgMetric { fields, kernel }
    }

    pub fn dim(&self) -> usize {
        self.fields.dim()
    }

    pub fn f(&self, x: &[f64], y: &[f64]) -> f64 {
        finsler(&self.kernel, &self.fields.env_at(x, &0.0), y)
    }
}

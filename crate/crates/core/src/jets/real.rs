use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by plain `f64` and truncated Taylor jets.
///
/// Every closed-form routine in the crate is written against this trait so the
/// same code can be evaluated pointwise or differentiated exactly in `y`.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Constant term.
    fn value(&self) -> f64;
    /// A constant living in the same derivative context as `self`.
    fn cst(&self, v: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn recip(self) -> Self;

    fn zero_like(&self) -> Self {
        self.cst(0.0)
    }

    fn powi(self, k: u32) -> Self {
        let mut out = self.cst(1.0);
        for _ in 0..k {
            out = out * self;
        }
        out
    }

    fn is_finite(&self) -> bool {
        self.value().is_finite()
    }
}

impl Real for f64 {
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn cst(&self, v: f64) -> Self {
        v
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn powi(self, k: u32) -> Self {
        f64::powi(self, k as i32)
    }
}

/// `sum_i u_i v_i`
pub fn dot<T: Real>(u: &[T], v: &[T]) -> T {
    let mut acc = u[0] * v[0];
    for i in 1..u.len() {
        acc = acc + u[i] * v[i];
    }
    acc
}

/// `sum_i c_i v_i` with constant coefficients.
pub fn dot_c<T: Real>(c: &[f64], v: &[T]) -> T {
    let mut acc = v[0] * c[0];
    for i in 1..v.len() {
        acc = acc + v[i] * c[i];
    }
    acc
}

/// `M v` for a constant matrix.
pub fn mat_vec_c<T: Real>(m: &[Vec<f64>], v: &[T]) -> Vec<T> {
    m.iter().map(|row| dot_c(row, v)).collect()
}

/// `v^T M v` for a constant matrix.
pub fn quad_c<T: Real>(m: &[Vec<f64>], v: &[T]) -> T {
    dot(v, &mat_vec_c(m, v))
}

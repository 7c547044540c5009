//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar function around a base
//! point, truncated to a [`Layout`]: variables are split into groups and each
//! group carries its own cap on total degree. The set of retained monomials is
//! closed under division, so every retained coefficient is exact.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use super::real::Real;
use crate::error::{GeomError, Result};

pub const MAX_VARS: usize = 8;
pub const MAX_TERMS: usize = 128;

type Exponents = [u8; MAX_VARS];

/// The monomial basis of a jet space.
pub struct Layout {
    nvars: usize,
    groups: Vec<(usize, u8)>,
    monomials: Vec<Exponents>,
    index: HashMap<Exponents, usize>,
    products: Vec<(u16, u16, u16)>,
    max_degree: usize,
}

/// Interned layouts, keyed by their variable groups.
type Registry = Mutex<HashMap<Vec<(usize, u8)>, &'static Layout>>;

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Layout {
    /// Interned layout for the given `(variable count, degree cap)` groups.
    pub fn get(groups: &[(usize, u8)]) -> Result<&'static Layout> {
        let key = groups.to_vec();
        let mut reg = registry().lock().expect("layout registry poisoned");
        if let Some(l) = reg.get(&key) {
            return Ok(l);
        }
        let layout = Layout::build(groups)?;
        let leaked: &'static Layout = Box::leak(Box::new(layout));
        reg.insert(key, leaked);
        Ok(leaked)
    }

    /// Single group of `n` variables truncated at total degree `order`.
    pub fn uniform(n: usize, order: u8) -> Result<&'static Layout> {
        Layout::get(&[(n, order)])
    }

    fn build(groups: &[(usize, u8)]) -> Result<Layout> {
        let nvars: usize = groups.iter().map(|g| g.0).sum();
        if nvars == 0 || nvars > MAX_VARS {
            return Err(GeomError::DimensionMismatch {
                expected: MAX_VARS,
                got: nvars,
            });
        }
        // enumerate per group, then take the cartesian product
        let mut per_group: Vec<Vec<Vec<u8>>> = Vec::new();
        for &(len, cap) in groups {
            let mut acc = Vec::new();
            let mut cur = vec![0u8; len];
            enumerate(&mut cur, 0, cap, &mut acc);
            per_group.push(acc);
        }
        let mut monomials: Vec<Exponents> = vec![[0; MAX_VARS]];
        let mut offset = 0;
        for (g, &(len, _)) in per_group.iter().zip(groups) {
            let mut next = Vec::with_capacity(monomials.len() * g.len());
            for base in &monomials {
                for part in g {
                    let mut m = *base;
                    m[offset..offset + len].copy_from_slice(part);
                    next.push(m);
                }
            }
            monomials = next;
            offset += len;
        }
        if monomials.len() > MAX_TERMS {
            return Err(GeomError::UnsupportedOrder(monomials.len()));
        }
        let total = |m: &Exponents| m.iter().map(|&e| e as usize).sum::<usize>();
        monomials.sort_by(|a, b| total(a).cmp(&total(b)).then(b.cmp(a)));
        let index: HashMap<Exponents, usize> =
            monomials.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut products = Vec::new();
        for (i, mi) in monomials.iter().enumerate() {
            for (j, mj) in monomials.iter().enumerate() {
                let mut sum = [0u8; MAX_VARS];
                for v in 0..MAX_VARS {
                    sum[v] = mi[v] + mj[v];
                }
                if let Some(&k) = index.get(&sum) {
                    products.push((i as u16, j as u16, k as u16));
                }
            }
        }
        let max_degree = monomials.iter().map(total).max().unwrap_or(0);
        Ok(Layout {
            nvars,
            groups: groups.to_vec(),
            monomials,
            index,
            products,
            max_degree,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn groups(&self) -> &[(usize, u8)] {
        &self.groups
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn index_of(&self, exps: &[u8]) -> Option<usize> {
        let mut key = [0u8; MAX_VARS];
        key[..exps.len()].copy_from_slice(exps);
        self.index.get(&key).copied()
    }
}

fn enumerate(cur: &mut Vec<u8>, pos: usize, remaining: u8, out: &mut Vec<Vec<u8>>) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for e in 0..=remaining {
        cur[pos] = e;
        enumerate(cur, pos + 1, remaining - e, out);
    }
    cur[pos] = 0;
}

/// Truncated Taylor expansion of a scalar around a base point.
#[derive(Clone, Copy)]
pub struct Jet {
    layout: &'static Layout,
    c: [f64; MAX_TERMS],
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("value", &self.c[0])
            .field("terms", &self.layout.len())
            .finish()
    }
}

impl Jet {
    pub fn constant(layout: &'static Layout, v: f64) -> Jet {
        let mut c = [0.0; MAX_TERMS];
        c[0] = v;
        Jet { layout, c }
    }

    /// The coordinate function `var` seeded at `v`.
    pub fn variable(layout: &'static Layout, var: usize, v: f64) -> Jet {
        let mut j = Jet::constant(layout, v);
        let mut e = [0u8; MAX_VARS];
        e[var] = 1;
        let k = layout
            .index_of(&e)
            .expect("variable has zero degree cap in this layout");
        j.c[k] = 1.0;
        j
    }

    /// Variables `offset..offset + values.len()` seeded at `values`.
    pub fn variables(layout: &'static Layout, offset: usize, values: &[f64]) -> Vec<Jet> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(layout, offset + i, v))
            .collect()
    }

    pub fn layout(&self) -> &'static Layout {
        self.layout
    }

    /// Taylor coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exps: &[u8]) -> f64 {
        self.layout.index_of(exps).map_or(0.0, |k| self.c[k])
    }

    /// Partial derivative for the multi-index `exps` (exponent per variable).
    pub fn derivative(&self, exps: &[u8]) -> f64 {
        let fact: f64 = exps.iter().map(|&e| factorial(e as usize)).product();
        self.coeff(exps) * fact
    }

    /// Derivative along the listed variables, e.g. `[0, 0, 2]` is `d^3/dv0^2 dv2`.
    pub fn derivative_along(&self, vars: &[usize]) -> f64 {
        let mut exps = [0u8; MAX_VARS];
        for &v in vars {
            exps[v] += 1;
        }
        self.derivative(&exps[..self.layout.nvars])
    }

    /// Exact derivative of the truncated polynomial with respect to `var`.
    /// The top-degree coefficients of the result are not meaningful.
    pub fn partial(&self, var: usize) -> Jet {
        let mut out = Jet::constant(self.layout, 0.0);
        for (k, m) in self.layout.monomials.iter().enumerate() {
            if m[var] == 0 {
                continue;
            }
            let mut lower = *m;
            lower[var] -= 1;
            if let Some(&t) = self.layout.index.get(&lower) {
                out.c[t] += m[var] as f64 * self.c[k];
            }
        }
        out
    }

    /// `f(self)` given `derivs[k] = f^(k)(self.value())` for `k = 0..=max_degree`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let k_max = self.layout.max_degree;
        debug_assert!(derivs.len() > k_max);
        let mut h = *self;
        h.c[0] = 0.0;
        let mut out = Jet::constant(self.layout, derivs[0]);
        let mut pow = Jet::constant(self.layout, 1.0);
        let mut fact = 1.0;
        for (k, &d) in derivs.iter().enumerate().take(k_max + 1).skip(1) {
            pow = pow * h;
            fact *= k as f64;
            out += pow * (d / fact);
        }
        out
    }

    fn same_layout(&self, other: &Jet) {
        assert!(
            std::ptr::eq(self.layout, other.layout),
            "jets from different layouts combined"
        );
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self.same_layout(&rhs);
        for k in 0..self.layout.len() {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self.same_layout(&rhs);
        for k in 0..self.layout.len() {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.same_layout(&rhs);
        let mut out = Jet::constant(self.layout, 0.0);
        for &(i, j, k) in &self.layout.products {
            out.c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for k in 0..self.layout.len() {
            self.c[k] = -self.c[k];
        }
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for k in 0..self.layout.len() {
            self.c[k] *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(mut self, rhs: f64) -> Jet {
        for k in 0..self.layout.len() {
            self.c[k] /= rhs;
        }
        self
    }
}

impl Real for Jet {
    fn value(&self) -> f64 {
        self.c[0]
    }

    fn cst(&self, v: f64) -> Self {
        Jet::constant(self.layout, v)
    }

    fn exp(self) -> Self {
        let e = self.c[0].exp();
        self.compose(&vec![e; self.layout.max_degree + 1])
    }

    fn ln(self) -> Self {
        let a = self.c[0];
        let mut d = vec![a.ln()];
        let mut fact = 1.0;
        for k in 1..=self.layout.max_degree {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * fact / a.powi(k as i32));
            fact *= k as f64;
        }
        self.compose(&d)
    }

    fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    fn powf(self, p: f64) -> Self {
        let a = self.c[0];
        let mut d = Vec::with_capacity(self.layout.max_degree + 1);
        let mut falling = 1.0;
        for k in 0..=self.layout.max_degree {
            d.push(falling * a.powf(p - k as f64));
            falling *= p - k as f64;
        }
        self.compose(&d)
    }

    fn recip(self) -> Self {
        let a = self.c[0];
        let mut d = Vec::with_capacity(self.layout.max_degree + 1);
        let mut fact = 1.0;
        for k in 0..=self.layout.max_degree {
            if k > 0 {
                fact *= k as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            d.push(sign * fact / a.powi(k as i32 + 1));
        }
        self.compose(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_sizes() {
        assert_eq!(Layout::uniform(2, 2).unwrap().len(), 6);
        assert_eq!(Layout::uniform(4, 4).unwrap().len(), 70);
        // y <= 2 and x <= 1 in dimension 3
        assert_eq!(Layout::get(&[(3, 2), (3, 1)]).unwrap().len(), 40);
        assert!(Layout::uniform(8, 4).is_err());
    }

    #[test]
    fn product_rule_is_exact() {
        let l = Layout::uniform(2, 3).unwrap();
        let x = Jet::variable(l, 0, 1.5);
        let y = Jet::variable(l, 1, -0.5);
        let f = x * x * y; // x^2 y
        assert_eq!(f.value(), 1.5 * 1.5 * -0.5);
        assert_eq!(f.derivative(&[1, 0]), 2.0 * 1.5 * -0.5);
        assert_eq!(f.derivative(&[2, 1]), 2.0);
        assert_eq!(f.derivative(&[0, 2]), 0.0);
        assert_eq!(f.derivative_along(&[0, 0, 1]), 2.0);
    }

    #[test]
    fn elementary_functions() {
        let l = Layout::uniform(1, 4).unwrap();
        let t = Jet::variable(l, 0, 0.3);
        let e = t.exp();
        for k in 0..=4u8 {
            assert!((e.derivative(&[k]) - 0.3f64.exp()).abs() < 1e-14);
        }
        let r = t.recip();
        assert!((r.derivative(&[3]) + 6.0 / 0.3f64.powi(4)).abs() < 1e-9);
        let s = t.sqrt();
        assert!((s.derivative(&[2]) + 0.25 * 0.3f64.powf(-1.5)).abs() < 1e-12);
        let lg = t.ln();
        assert!((lg.derivative(&[4]) + 6.0 / 0.3f64.powi(4)).abs() < 1e-9);
        let q = (t * t + 1.0) / (t + 2.0);
        // d/dt (t^2+1)/(t+2) = (t^2 + 4t - 1)/(t+2)^2
        let expect = (0.09 + 1.2 - 1.0) / 2.3f64.powi(2);
        assert!((q.derivative(&[1]) - expect).abs() < 1e-14);
    }

    #[test]
    fn mixed_groups_truncate_independently() {
        let l = Layout::get(&[(1, 2), (1, 1)]).unwrap();
        let y = Jet::variable(l, 0, 2.0);
        let x = Jet::variable(l, 1, 3.0);
        let f = y * y * x * x;
        // d^2/dy^2 d/dx (y^2 x^2) = 4x
        assert_eq!(f.derivative(&[2, 1]), 12.0);
        // x^2 is truncated away from the retained basis
        assert_eq!(f.coeff(&[0, 2]), 0.0);
    }

    #[test]
    fn partial_lowers_degree() {
        let l = Layout::uniform(2, 3).unwrap();
        let x = Jet::variable(l, 0, 0.7);
        let y = Jet::variable(l, 1, 1.1);
        let f = x * x * y + y.exp();
        let fx = f.partial(0);
        // fx = 2xy
        assert!((fx.value() - 2.0 * 0.7 * 1.1).abs() < 1e-15);
        assert!((fx.derivative(&[1, 1]) - 2.0).abs() < 1e-15);
    }
}

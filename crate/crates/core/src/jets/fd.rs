//! Central finite differences with Richardson extrapolation.
//!
//! This is the second, independent derivative route; it shares no code with
//! the Taylor-jet engine.

use crate::error::{GeomError, Result};

/// A finite-difference estimate and its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEstimate {
    pub value: f64,
    pub error: f64,
    pub step: f64,
}

const LEVELS: usize = 4;
const STEP_FRACTIONS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn binomial(m: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (m - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Tensor-product central difference of multi-index `exps` with step `h`.
/// Returns the estimate and the sum of |weights| times max |f| (for roundoff).
fn central(f: &dyn Fn(&[f64]) -> f64, at: &[f64], exps: &[u8], h: f64) -> (f64, f64) {
    let vars: Vec<(usize, usize)> = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| (i, e as usize))
        .collect();
    let order: usize = vars.iter().map(|v| v.1).sum();
    let mut total = 0.0;
    let mut mag = 0.0;
    let mut ks = vec![0usize; vars.len()];
    let mut point = at.to_vec();
    loop {
        let mut w = 1.0;
        point.copy_from_slice(at);
        for (slot, &(var, m)) in vars.iter().enumerate() {
            let k = ks[slot];
            w *= if k.is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(m, k);
            point[var] += (m as f64 / 2.0 - k as f64) * h;
        }
        let v = f(&point);
        total += w * v;
        mag += w.abs() * v.abs();
        // advance the odometer
        let mut slot = 0;
        loop {
            if slot == vars.len() {
                let scale = h.powi(order as i32);
                return (total / scale, mag / scale);
            }
            ks[slot] += 1;
            if ks[slot] <= vars[slot].1 {
                break;
            }
            ks[slot] = 0;
            slot += 1;
        }
    }
}

/// Richardson-extrapolated derivative of `f` at `at` for the multi-index
/// `exps`, sweeping the base step relative to `scale`.
pub fn richardson(
    f: &dyn Fn(&[f64]) -> f64,
    at: &[f64],
    exps: &[u8],
    scale: f64,
) -> Result<FdEstimate> {
    let order: usize = exps.iter().map(|&e| e as usize).sum();
    if order == 0 {
        let v = f(at);
        return if v.is_finite() {
            Ok(FdEstimate {
                value: v,
                error: 0.0,
                step: 0.0,
            })
        } else {
            Err(GeomError::StepUnderflow)
        };
    }
    if order > 4 {
        return Err(GeomError::UnsupportedOrder(order));
    }
    let mut best: Option<FdEstimate> = None;
    for frac in STEP_FRACTIONS {
        let h0 = frac * scale / order as f64;
        if h0 < 1e-12 {
            continue;
        }
        let mut table = [[0.0f64; LEVELS]; LEVELS];
        let mut roundoff = 0.0;
        let mut finite = true;
        for lvl in 0..LEVELS {
            let h = h0 / (1 << lvl) as f64;
            let (est, mag) = central(f, at, exps, h);
            if !est.is_finite() {
                finite = false;
                break;
            }
            roundoff = mag * f64::EPSILON;
            table[lvl][0] = est;
            let mut factor = 4.0;
            for j in 1..=lvl {
                table[lvl][j] =
                    table[lvl][j - 1] + (table[lvl][j - 1] - table[lvl - 1][j - 1]) / (factor - 1.0);
                factor *= 4.0;
            }
        }
        if !finite {
            continue;
        }
        let value = table[LEVELS - 1][LEVELS - 1];
        let error = (value - table[LEVELS - 1][LEVELS - 2]).abs() + roundoff;
        let cand = FdEstimate {
            value,
            error,
            step: h0,
        };
        if best.is_none_or(|b| cand.error < b.error) {
            best = Some(cand);
        }
    }
    best.ok_or(GeomError::StepUnderflow)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_second_derivative() {
        let f = |y: &[f64]| y[0] * y[0] + y[1] * y[1];
        let d = richardson(&f, &[1.0, 0.0], &[2, 0], 1.0).unwrap();
        assert!((d.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let f = |_: &[f64]| 3.25;
        for e in [[1u8, 0], [0, 2], [1, 2], [2, 2]] {
            let d = richardson(&f, &[0.3, -0.4], &e, 1.0).unwrap();
            assert!(d.value.abs() < 1e-12, "{e:?}: {}", d.value);
        }
    }

    #[test]
    fn mixed_fourth_order_of_exponential() {
        let f = |y: &[f64]| (0.5 * y[0] - 0.25 * y[1]).exp();
        let d = richardson(&f, &[0.2, 0.1], &[3, 1], 1.0).unwrap();
        let expect = 0.125 * -0.25 * (0.1f64 - 0.025).exp();
        assert!((d.value - expect).abs() <= d.error.max(1e-8), "{d:?} vs {expect}");
    }

    #[test]
    fn nan_everywhere_underflows() {
        let f = |_: &[f64]| f64::NAN;
        assert_eq!(
            richardson(&f, &[1.0], &[1], 1.0),
            Err(GeomError::StepUnderflow)
        );
    }
}

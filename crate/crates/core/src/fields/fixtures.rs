use super::{Expr, FieldSet, MetricField, OneFormField};
use crate::error::{GeomError, Result};

pub const FIXTURE_NAMES: [&str; 5] = [
    "euclidean_parallel_closed",
    "euclidean_nonclosed",
    "euclidean_nonparallel",
    "conformal_generic",
    "riemannian_only",
];

/// Amplitude of the `x`-dependent part of gamma in the Euclidean fixtures.
pub const GAMMA_AMPLITUDE: f64 = 0.25;
/// Constant length of beta in the Euclidean fixtures.
pub const BETA_LENGTH: f64 = 0.3;

fn axis_form(n: usize, c: f64) -> OneFormField {
    let mut v = vec![0.0; n];
    v[0] = c;
    OneFormField::constant(&v)
}

/// Euclidean `a`, `beta = (b, 0, ...)`, `gamma = d(kappa x1 x2)`.
pub fn parallel_closed_with(n: usize, b: f64, kappa: f64) -> Result<FieldSet> {
    let mut pw = vec![0u32; n];
    pw[0] = 1;
    pw[1] = 1;
    FieldSet::new(
        MetricField::euclidean(n),
        axis_form(n, b),
        OneFormField::exact(&Expr::monomial(n, kappa, &pw)),
    )
}

/// Euclidean `a`, `beta = (b, 0, ...)`, `gamma = (kappa (x2)^2, 0, ...)`.
pub fn nonclosed_with(n: usize, b: f64, kappa: f64) -> Result<FieldSet> {
    let mut pw = vec![0u32; n];
    pw[1] = 2;
    let mut comps = vec![Expr::zero(n); n];
    comps[0] = Expr::monomial(n, kappa, &pw);
    FieldSet::new(
        MetricField::euclidean(n),
        axis_form(n, b),
        OneFormField::new(comps),
    )
}

fn nonparallel(n: usize) -> Result<FieldSet> {
    // beta = (0.2 + 0.1 x1) dx1 is closed but not parallel
    let mut comps = vec![Expr::zero(n); n];
    comps[0] = Expr::parse("0.2 + 0.1*x1", n)?;
    let mut fs = parallel_closed_with(n, 0.0, GAMMA_AMPLITUDE)?;
    fs.beta = OneFormField::new(comps);
    Ok(fs)
}

fn conformal_generic(n: usize) -> Result<FieldSet> {
    let mut rates = vec![0.0; n];
    rates[0] = 0.1;
    let e = |s: &str| Expr::parse(s, n);
    let mut b = vec![e("0.2 + 0.05*x1*x2")?, e("0.1*x1 - 0.05*x2^2")?];
    let mut g = vec![e("0.1*x2")?, e("-0.15 + 0.05*x1^2")?];
    for k in 3..=n {
        b.push(e(&format!("0.05*x{k}"))?);
        g.push(e(&format!("0.04*x1*x{k}"))?);
    }
    FieldSet::new(
        MetricField::conformal(&rates),
        OneFormField::new(b),
        OneFormField::new(g),
    )
}

/// A named field configuration with its declared norm bounds.
pub fn fixture(name: &str, n: usize) -> Result<FieldSet> {
    if !(2..=4).contains(&n) {
        return Err(GeomError::DimensionMismatch {
            expected: 2,
            got: n,
        });
    }
    let (mut fs, bounds) = match name {
        "euclidean_parallel_closed" => (
            parallel_closed_with(n, BETA_LENGTH, GAMMA_AMPLITUDE)?,
            (0.31, 0.36),
        ),
        "euclidean_nonclosed" => (
            nonclosed_with(n, BETA_LENGTH, GAMMA_AMPLITUDE)?,
            (0.31, 0.26),
        ),
        "euclidean_nonparallel" => (nonparallel(n)?, (0.31, 0.36)),
        "conformal_generic" => (conformal_generic(n)?, (0.34, 0.27)),
        "riemannian_only" => (
            FieldSet::new(
                MetricField::euclidean(n),
                OneFormField::zero(n),
                OneFormField::zero(n),
            )?,
            (0.01, 0.01),
        ),
        other => return Err(GeomError::UnknownFixture(other.to_string())),
    };
    fs.bounds = Some(bounds);
    Ok(fs)
}

//! Closed-form geometry of (alpha, beta, gamma)-Finsler metrics
//! `F = alpha * Psi(beta/alpha, gamma/alpha)`, with exact-jet and
//! finite-difference oracles for every closed form.

// Tensor code indexes several arrays per loop, and `!(x >= tol)` is how
// NaN is sent down the failure branch.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha;
pub mod analysis;
pub mod error;
pub mod fields;
pub mod jets;
pub mod linalg;
pub mod metric;
pub mod psi;
pub mod reduction;
pub mod runner;
pub mod spray;
pub mod tensors;

pub use error::{GeomError, Result};
pub use fields::{EvaluationPoint, FieldSet, MetricField, OneFormField};
pub use metric::{AbgMetric, Quantity};
pub use psi::{KernelFamily, PsiKernel, UniFn};

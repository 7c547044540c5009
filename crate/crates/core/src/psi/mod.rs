//! Kernels `Psi(s, sbar)`, their coefficient algebra and the admissibility sweep.

mod admissibility;
mod coefficients;
mod kernel;

pub use admissibility::{
    admissibility, evaluate_node, grid_nodes, AdmissibilityReport, GridNode, GridSpec, NodeValues,
};
pub use coefficients::{coefficients, pi_of, CoefficientSet};
pub(crate) use coefficients::DEGENERACY;
pub use kernel::{psi_eval, KernelFamily, PsiJet, PsiKernel, UniFn};



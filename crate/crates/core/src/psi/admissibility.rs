use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coefficients::{coefficients, pi_of, DEGENERACY};
use super::kernel::PsiKernel;
use crate::error::{GeomError, Result};

/// Resolution of the admissibility sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub s_points: usize,
    pub sb_points: usize,
    pub b_points: usize,
    pub g_points: usize,
    pub theta_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            s_points: 33,
            sb_points: 33,
            b_points: 9,
            g_points: 9,
            theta_points: 5,
        }
    }
}

/// One node `(s, sbar, b, g, theta)` of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridNode {
    pub s: f64,
    pub sb: f64,
    pub b: f64,
    pub g: f64,
    pub theta: f64,
}

/// `Pi` and `Gamma` at a node; `gamma` is `None` when it cannot be formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeValues {
    pub node: GridNode,
    pub psi: f64,
    pub pi: f64,
    pub gamma: Option<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub kernel: PsiKernel,
    pub dimension: usize,
    pub grid: GridSpec,
    pub admissible: bool,
    pub kernel_positive: bool,
    pub nodes: usize,
    pub violations: usize,
    pub min_pi: f64,
    pub min_gamma: f64,
    pub witness: Option<NodeValues>,
}

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..k)
            .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
            .collect(),
    }
}

/// Every node of the sweep, in a fixed order.
///
/// `theta` ranges over `[s sbar, s sbar + sqrt((b^2 - s^2)(g^2 - sbar^2))]`,
/// the values realizable by actual forms with `theta - s sbar >= 0`. In two
/// dimensions only the upper endpoint is realizable.
pub fn grid_nodes(b0: f64, g0: f64, grid: &GridSpec, n: usize) -> Vec<GridNode> {
    let mut out = Vec::new();
    for kb in 1..=grid.b_points {
        let b = b0 * kb as f64 / (grid.b_points + 1) as f64;
        for kg in 1..=grid.g_points {
            let g = g0 * kg as f64 / (grid.g_points + 1) as f64;
            for s in linspace(-b, b, grid.s_points) {
                for sb in linspace(-g, g, grid.sb_points) {
                    let lo = s * sb;
                    let width = ((b * b - s * s).max(0.0) * (g * g - sb * sb).max(0.0)).sqrt();
                    let thetas = match (n, grid.theta_points) {
                        (_, 0) => vec![],
                        (2, _) => vec![lo + width],
                        (_, 1) => vec![lo],
                        (_, k) => linspace(lo, lo + width, k),
                    };
                    for theta in thetas {
                        out.push(GridNode { s, sb, b, g, theta });
                    }
                }
            }
        }
    }
    out
}

/// `Pi` and `Gamma` at one node, and whether the node passes.
pub fn evaluate_node(k: &PsiKernel, node: GridNode, n: usize) -> NodeValues {
    let p = k.partials(node.s, node.sb);
    let pi = pi_of(&p, node.s, node.sb);
    let (b2, g2) = (node.b * node.b, node.g * node.g);
    let gamma = match coefficients(&p, node.s, node.sb, b2, g2, node.theta) {
        Ok(c) => Some(c.gamma),
        Err(_) => {
            // Pi vanishes; with a vanishing bracket the J term drops out.
            let bb = b2 - node.s * node.s;
            let gg = g2 - node.sb * node.sb;
            let tt = node.theta - node.s * node.sb;
            let bracket = bb * gg - tt * tt;
            if n == 2 && bracket.abs() < DEGENERACY {
                Some(pi + bb * p.ss + gg * p.sbsb + 2.0 * tt * p.ssb)
            } else {
                None
            }
        }
    };
    let gamma_ok = gamma.is_some_and(|g| g > 0.0);
    let ok = if n == 2 { gamma_ok } else { pi > 0.0 && gamma_ok };
    NodeValues {
        node,
        psi: p.psi,
        pi,
        gamma,
        ok,
    }
}

/// Sampled check of `Pi > 0, Gamma > 0` (only `Gamma > 0` when `n = 2`).
pub fn admissibility(k: &PsiKernel, grid: &GridSpec, n: usize) -> Result<AdmissibilityReport> {
    if n < 2 {
        return Err(GeomError::DimensionMismatch {
            expected: 2,
            got: n,
        });
    }
    let nodes = grid_nodes(k.b0, k.g0, grid, n);
    if nodes.is_empty() {
        return Err(GeomError::EmptyGrid);
    }
    let values: Vec<NodeValues> = nodes.par_iter().map(|&nd| evaluate_node(k, nd, n)).collect();
    let violations = values.iter().filter(|v| !v.ok).count();
    let witness = values.iter().find(|v| !v.ok).copied();
    let min_pi = values.iter().map(|v| v.pi).fold(f64::INFINITY, f64::min);
    let min_gamma = values
        .iter()
        .map(|v| v.gamma.unwrap_or(f64::NAN))
        .fold(f64::INFINITY, f64::min);
    Ok(AdmissibilityReport {
        kernel: k.clone(),
        dimension: n,
        grid: grid.clone(),
        admissible: violations == 0,
        kernel_positive: values.iter().all(|v| v.psi > 0.0),
        nodes: values.len(),
        violations,
        min_pi,
        min_gamma,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::KernelFamily;

    fn small() -> GridSpec {
        GridSpec {
            s_points: 9,
            sb_points: 9,
            b_points: 3,
            g_points: 3,
            theta_points: 3,
        }
    }

    #[test]
    fn exp_gamma_half_width_is_admissible() {
        let r = admissibility(&PsiKernel::exp_gamma(), &small(), 3).unwrap();
        assert!(r.admissible && r.kernel_positive);
    }

    #[test]
    fn exp_gamma_wide_fails_beyond_one() {
        let k = PsiKernel::with_bounds(KernelFamily::ExpGamma, 2.0, 0.5);
        for n in [2, 3] {
            let r = admissibility(&k, &small(), n).unwrap();
            assert!(!r.admissible);
            assert!(r.witness.unwrap().node.s >= 1.0);
        }
    }

    #[test]
    fn randers3_admissible() {
        let r = admissibility(&PsiKernel::randers3(), &small(), 4).unwrap();
        assert!(r.admissible);
        assert!((r.min_pi - 1.0).abs() < 1e-15 && (r.min_gamma - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_grid() {
        let g = GridSpec {
            b_points: 0,
            ..small()
        };
        assert_eq!(
            admissibility(&PsiKernel::unit(), &g, 3),
            Err(GeomError::EmptyGrid)
        );
    }

    #[test]
    fn two_dimensional_theta_is_extremal() {
        let nodes = grid_nodes(0.5, 0.5, &small(), 2);
        for nd in nodes {
            let bracket = (nd.b * nd.b - nd.s * nd.s) * (nd.g * nd.g - nd.sb * nd.sb)
                - (nd.theta - nd.s * nd.sb).powi(2);
            assert!(bracket.abs() < 1e-14);
            assert!(nd.theta * nd.theta <= nd.b * nd.b * nd.g * nd.g + 1e-15);
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::jets::Real;

/// A smooth function of one variable, used as a building block for kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UniFn {
    /// `exp(rate * t)`
    Exp { rate: f64 },
    /// `sum_k coeffs[k] * t^k`
    Poly { coeffs: Vec<f64> },
}

impl UniFn {
    /// Value and first three derivatives at `t`.
    pub fn derivs<T: Real>(&self, t: T) -> [T; 4] {
        match self {
            UniFn::Exp { rate } => {
                let e = (t * *rate).exp();
                [e, e * *rate, e * (rate * rate), e * (rate * rate * rate)]
            }
            UniFn::Poly { coeffs } => {
                let mut cur: Vec<f64> = coeffs.clone();
                let mut out = [t.zero_like(); 4];
                for slot in out.iter_mut() {
                    let mut acc = t.zero_like();
                    for &c in cur.iter().rev() {
                        acc = acc * t + c;
                    }
                    *slot = acc;
                    cur = cur
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(k, c)| c * k as f64)
                        .collect();
                }
                out
            }
        }
    }

    pub fn value<T: Real>(&self, t: T) -> T {
        match self {
            UniFn::Exp { rate } => (t * *rate).exp(),
            UniFn::Poly { coeffs } => {
                let mut acc = t.zero_like();
                for &c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                acc
            }
        }
    }
}

fn default_phi() -> UniFn {
    UniFn::Poly {
        coeffs: vec![1.0, 2.0, 1.0],
    }
}

fn default_outer() -> UniFn {
    UniFn::Poly {
        coeffs: vec![1.0, 0.0, 1.0],
    }
}

fn default_inner() -> UniFn {
    UniFn::Poly {
        coeffs: vec![1.0, 1.0, 0.5],
    }
}

/// The built-in kernel families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// `1`: the Riemannian metric itself.
    Unit,
    /// `e^s + sbar`
    ExpGamma,
    /// `1 + s + sbar`
    Randers3,
    /// `phi(s)`
    AlphaBeta {
        #[serde(default = "default_phi")]
        phi: UniFn,
    },
    /// `phi(sbar)`
    AlphaGamma {
        #[serde(default = "default_phi")]
        phi: UniFn,
    },
    /// `phi(s) * psi(sbar / phi(s))`
    Composed {
        #[serde(default = "default_outer")]
        phi: UniFn,
        #[serde(default = "default_inner")]
        psi: UniFn,
    },
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Unit => "unit",
            KernelFamily::ExpGamma => "exp_gamma",
            KernelFamily::Randers3 => "randers3",
            KernelFamily::AlphaBeta { .. } => "alpha_beta",
            KernelFamily::AlphaGamma { .. } => "alpha_gamma",
            KernelFamily::Composed { .. } => "composed",
        }
    }

    /// Default half-widths `(b0, g0)` of the kernel rectangle.
    pub fn default_bounds(&self) -> (f64, f64) {
        match self {
            KernelFamily::Randers3 => (0.45, 0.45),
            _ => (0.5, 0.5),
        }
    }

    pub fn alpha_beta() -> Self {
        KernelFamily::AlphaBeta { phi: default_phi() }
    }

    pub fn alpha_gamma() -> Self {
        KernelFamily::AlphaGamma { phi: default_phi() }
    }

    pub fn composed() -> Self {
        KernelFamily::Composed {
            phi: default_outer(),
            psi: default_inner(),
        }
    }
}

/// `Psi(s, sbar)` and the half-widths of the rectangle it is declared on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiKernel {
    #[serde(flatten)]
    pub family: KernelFamily,
    pub b0: f64,
    pub g0: f64,
}

/// `Psi` and its partial derivatives up to order three.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiJet<T> {
    pub psi: T,
    pub s: T,
    pub sb: T,
    pub ss: T,
    pub ssb: T,
    pub sbsb: T,
    pub sss: T,
    pub sssb: T,
    pub ssbsb: T,
    pub sbsbsb: T,
}

impl<T: Real> PsiJet<T> {
    fn zero(like: T) -> Self {
        let z = like.zero_like();
        PsiJet {
            psi: z,
            s: z,
            sb: z,
            ss: z,
            ssb: z,
            sbsb: z,
            sss: z,
            sssb: z,
            ssbsb: z,
            sbsbsb: z,
        }
    }

    pub fn values(&self) -> PsiJet<f64> {
        PsiJet {
            psi: self.psi.value(),
            s: self.s.value(),
            sb: self.sb.value(),
            ss: self.ss.value(),
            ssb: self.ssb.value(),
            sbsb: self.sbsb.value(),
            sss: self.sss.value(),
            sssb: self.sssb.value(),
            ssbsb: self.ssbsb.value(),
            sbsbsb: self.sbsbsb.value(),
        }
    }
}

impl PsiJet<f64> {
    /// All ten entries in the order `psi, s, sb, ss, ssb, sbsb, sss, sssb, ssbsb, sbsbsb`.
    pub fn to_array(&self) -> [f64; 10] {
        [
            self.psi,
            self.s,
            self.sb,
            self.ss,
            self.ssb,
            self.sbsb,
            self.sss,
            self.sssb,
            self.ssbsb,
            self.sbsbsb,
        ]
    }
}

impl PsiKernel {
    pub fn new(family: KernelFamily) -> Self {
        let (b0, g0) = family.default_bounds();
        PsiKernel { family, b0, g0 }
    }

    pub fn with_bounds(family: KernelFamily, b0: f64, g0: f64) -> Self {
        PsiKernel { family, b0, g0 }
    }

    pub fn unit() -> Self {
        Self::new(KernelFamily::Unit)
    }

    pub fn exp_gamma() -> Self {
        Self::new(KernelFamily::ExpGamma)
    }

    pub fn randers3() -> Self {
        Self::new(KernelFamily::Randers3)
    }

    pub fn alpha_beta(phi: UniFn) -> Self {
        Self::new(KernelFamily::AlphaBeta { phi })
    }

    pub fn alpha_gamma(phi: UniFn) -> Self {
        Self::new(KernelFamily::AlphaGamma { phi })
    }

    pub fn composed(phi: UniFn, psi: UniFn) -> Self {
        Self::new(KernelFamily::Composed { phi, psi })
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    /// Direct evaluation, written independently of [`PsiKernel::partials`].
    pub fn value<T: Real>(&self, s: T, sb: T) -> T {
        match &self.family {
            KernelFamily::Unit => s.cst(1.0),
            KernelFamily::ExpGamma => s.exp() + sb,
            KernelFamily::Randers3 => s + sb + 1.0,
            KernelFamily::AlphaBeta { phi } => phi.value(s),
            KernelFamily::AlphaGamma { phi } => phi.value(sb),
            KernelFamily::Composed { phi, psi } => {
                let outer = phi.value(s);
                outer * psi.value(sb / outer)
            }
        }
    }

    /// Analytic partial derivatives up to order three.
    pub fn partials<T: Real>(&self, s: T, sb: T) -> PsiJet<T> {
        let mut j = PsiJet::zero(s);
        match &self.family {
            KernelFamily::Unit => j.psi = s.cst(1.0),
            KernelFamily::ExpGamma => {
                let e = s.exp();
                j.psi = e + sb;
                j.s = e;
                j.sb = s.cst(1.0);
                j.ss = e;
                j.sss = e;
            }
            KernelFamily::Randers3 => {
                j.psi = s + sb + 1.0;
                j.s = s.cst(1.0);
                j.sb = s.cst(1.0);
            }
            KernelFamily::AlphaBeta { phi } => {
                let [f0, f1, f2, f3] = phi.derivs(s);
                j.psi = f0;
                j.s = f1;
                j.ss = f2;
                j.sss = f3;
            }
            KernelFamily::AlphaGamma { phi } => {
                let [f0, f1, f2, f3] = phi.derivs(sb);
                j.psi = f0;
                j.sb = f1;
                j.sbsb = f2;
                j.sbsbsb = f3;
            }
            KernelFamily::Composed { phi, psi } => {
                let [p0, p1, p2, p3] = phi.derivs(s);
                let t = sb / p0;
                let [q0, q1, q2, q3] = psi.derivs(t);
                let u = q0 - t * q1;
                let p0sq = p0 * p0;
                j.psi = p0 * q0;
                j.sb = q1;
                j.sbsb = q2 / p0;
                j.sbsbsb = q3 / p0sq;
                j.s = p1 * u;
                j.ssb = -(p1 * t * q2) / p0;
                j.ssbsb = -(p1 * (q2 + t * q3)) / p0sq;
                j.ss = p2 * u + p1 * p1 * t * t * q2 / p0;
                j.sssb = -(p2 * t * q2) / p0 + p1 * p1 * (t * q2 * 2.0 + t * t * q3) / p0sq;
                j.sss = p3 * u + p1 * p2 * t * t * q2 * 3.0 / p0
                    - p1 * p1 * p1 * (t * t * q2 * 3.0 + t * t * t * q3) / p0sq;
            }
        }
        j
    }

    pub fn in_domain(&self, s: f64, sb: f64) -> bool {
        s.abs() < self.b0 && sb.abs() < self.g0
    }

    /// Checks `Psi > 0` on a `k x k` grid over the closed rectangle.
    pub fn check_positive(&self, k: usize) -> Result<()> {
        let k = k.max(2);
        for i in 0..k {
            for l in 0..k {
                let s = -self.b0 + 2.0 * self.b0 * i as f64 / (k - 1) as f64;
                let sb = -self.g0 + 2.0 * self.g0 * l as f64 / (k - 1) as f64;
                let v: f64 = self.value(s, sb);
                if !(v > 0.0) {
                    return Err(GeomError::NonPositiveKernel { s, sbar: sb, value: v });
                }
            }
        }
        Ok(())
    }
}

/// Kernel partials at `(s, sbar)`, refusing points outside the rectangle.
pub fn psi_eval(k: &PsiKernel, s: f64, sb: f64) -> Result<PsiJet<f64>> {
    if !k.in_domain(s, sb) {
        return Err(GeomError::OutOfDomain {
            s,
            sbar: sb,
            b0: k.b0,
            g0: k.g0,
        });
    }
    Ok(k.partials(s, sb))
}

use serde::Serialize;

use super::kernel::PsiJet;
use crate::error::{GeomError, Result};
use crate::jets::Real;

pub(crate) const DEGENERACY: f64 = 1e-12;

/// The scalar coefficient algebra of an (alpha, beta, gamma)-metric at one
/// `(s, sbar, b^2, g^2, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSet<T> {
    pub s: T,
    pub sb: T,
    pub b2: T,
    pub g2: T,
    pub theta: T,
    pub rho: T,
    pub rho0: T,
    pub rhob0: T,
    pub rho1: T,
    pub rhob1: T,
    pub rho2: T,
    pub rho3: T,
    pub pi: T,
    pub j: T,
    pub pi1: T,
    pub pi2: T,
    pub gamma: T,
    /// `d rho0 / ds`
    pub rho0_s: T,
    /// `d rho0 / dsbar`
    pub rho0_sb: T,
    /// `d rhob0 / ds`
    pub rhob0_s: T,
    /// `d rhob0 / dsbar`
    pub rhob0_sb: T,
    /// `d rho3 / ds`, written by the product rule
    pub rho3_s: T,
    /// `d rho3 / dsbar`, written by the product rule
    pub rho3_sb: T,
}

impl<T: Real> CoefficientSet<T> {
    /// `b^2 - s^2`
    pub fn bb(&self) -> T {
        self.b2 - self.s * self.s
    }

    /// `g^2 - sbar^2`
    pub fn gg(&self) -> T {
        self.g2 - self.sb * self.sb
    }

    /// `theta - s sbar`
    pub fn tt(&self) -> T {
        self.theta - self.s * self.sb
    }

    /// Coefficient of the mixed `b, alpha` block in the inverse and spray.
    pub fn cb(&self) -> T {
        self.rho1 + self.pi2 * self.tt() - self.pi1 * self.gg()
    }

    /// Coefficient of the mixed `gamma, alpha` block in the inverse and spray.
    pub fn cg(&self) -> T {
        self.rhob1 - self.pi2 * self.bb() + self.pi1 * self.tt()
    }

    pub fn values(&self) -> CoefficientSet<f64> {
        CoefficientSet {
            s: self.s.value(),
            sb: self.sb.value(),
            b2: self.b2.value(),
            g2: self.g2.value(),
            theta: self.theta.value(),
            rho: self.rho.value(),
            rho0: self.rho0.value(),
            rhob0: self.rhob0.value(),
            rho1: self.rho1.value(),
            rhob1: self.rhob1.value(),
            rho2: self.rho2.value(),
            rho3: self.rho3.value(),
            pi: self.pi.value(),
            j: self.j.value(),
            pi1: self.pi1.value(),
            pi2: self.pi2.value(),
            gamma: self.gamma.value(),
            rho0_s: self.rho0_s.value(),
            rho0_sb: self.rho0_sb.value(),
            rhob0_s: self.rhob0_s.value(),
            rhob0_sb: self.rhob0_sb.value(),
            rho3_s: self.rho3_s.value(),
            rho3_sb: self.rho3_sb.value(),
        }
    }
}

/// `Pi = Psi - s Psi_s - sbar Psi_sbar`; needs no division.
pub fn pi_of<T: Real>(p: &PsiJet<T>, s: T, sb: T) -> T {
    p.psi - s * p.s - sb * p.sb
}

/// Assembles every coefficient. Fails when `Pi` vanishes, since `J`, `pi1`
/// and `pi2` divide by it.
pub fn coefficients<T: Real>(
    p: &PsiJet<T>,
    s: T,
    sb: T,
    b2: T,
    g2: T,
    theta: T,
) -> Result<CoefficientSet<T>> {
    let pi = pi_of(p, s, sb);
    if !(pi.value().abs() >= DEGENERACY) {
        return Err(GeomError::DegeneratePi(pi.value()));
    }
    let rho = p.psi * pi;
    let rho0 = p.psi * p.ss + p.s * p.s;
    let rhob0 = p.psi * p.sbsb + p.sb * p.sb;
    let rho3 = p.psi * p.ssb + p.s * p.sb;
    let rho1 = p.psi * p.s - s * rho0 - sb * rho3;
    let rhob1 = p.psi * p.sb - sb * rhob0 - s * rho3;
    let rho2 = -(s * rho1) - sb * rhob1;
    let j = (p.ss * p.sbsb - p.ssb * p.ssb) / pi;
    let pi1 = p.sb * p.ssb - p.s * p.sbsb + s * p.psi * j;
    let pi2 = p.s * p.ssb - p.sb * p.ss + sb * p.psi * j;
    let bb = b2 - s * s;
    let gg = g2 - sb * sb;
    let tt = theta - s * sb;
    let gamma = pi
        + bb * p.ss
        + gg * p.sbsb
        + tt * p.ssb * 2.0
        + (bb * gg - tt * tt) * j;
    Ok(CoefficientSet {
        s,
        sb,
        b2,
        g2,
        theta,
        rho,
        rho0,
        rhob0,
        rho1,
        rhob1,
        rho2,
        rho3,
        pi,
        j,
        pi1,
        pi2,
        gamma,
        rho0_s: p.psi * p.sss + p.s * p.ss * 3.0,
        rho0_sb: p.psi * p.sssb + p.sb * p.ss + p.s * p.ssb * 2.0,
        rhob0_s: p.psi * p.ssbsb + p.s * p.sbsb + p.sb * p.ssb * 2.0,
        rhob0_sb: p.psi * p.sbsbsb + p.sb * p.sbsb * 3.0,
        rho3_s: p.s * p.ssb + p.psi * p.sssb + p.ss * p.sb + p.s * p.ssb,
        rho3_sb: p.sb * p.ssb + p.psi * p.ssbsb + p.ssb * p.sb + p.s * p.sbsb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::{psi_eval, KernelFamily, PsiKernel};

    #[test]
    fn exp_gamma_reference_values() {
        let j = psi_eval(&PsiKernel::exp_gamma(), 0.0, 0.0).unwrap();
        let c = coefficients(&j, 0.0, 0.0, 0.25, 0.04, 0.0).unwrap();
        let got = [
            c.rho, c.rho0, c.rhob0, c.rho1, c.rhob1, c.rho2, c.rho3, c.pi, c.j, c.gamma,
        ];
        assert_eq!(got, [1.0, 2.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.25]);
    }

    #[test]
    fn affine_and_unit_kernels() {
        let j = psi_eval(&PsiKernel::randers3(), 0.2, -0.1).unwrap();
        let c = coefficients(&j, 0.2, -0.1, 0.1, 0.05, 0.01).unwrap();
        assert!((c.pi - 1.0).abs() < 1e-15 && (c.gamma - 1.0).abs() < 1e-15);
        assert_eq!(c.j, 0.0);

        let j = psi_eval(&PsiKernel::unit(), 0.2, -0.1).unwrap();
        let c = coefficients(&j, 0.2, -0.1, 0.1, 0.05, 0.01).unwrap();
        assert_eq!((c.rho, c.gamma, c.pi), (1.0, 1.0, 1.0));
        for v in [c.rho0, c.rhob0, c.rho1, c.rhob1, c.rho2, c.rho3, c.j, c.pi1, c.pi2] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn zero_pi_refused() {
        // e^s + sbar has Pi = (1 - s) e^s
        let k = PsiKernel::with_bounds(KernelFamily::ExpGamma, 2.0, 0.1);
        let j = psi_eval(&k, 1.0, 0.0).unwrap();
        assert!(matches!(
            coefficients(&j, 1.0, 0.0, 1.0, 0.0, 0.0),
            Err(GeomError::DegeneratePi(_))
        ));
    }
}

//! Invariants over random points, directions, fixtures and kernels.

use abg_finsler::analysis::{bij, bij_reconstruction};
use abg_finsler::fields::{fixture, FIXTURE_NAMES};
use abg_finsler::linalg;
use abg_finsler::spray::{ell_residual, solve_ell_system, spray_closed, spray_via_solver, EllSystem};
use abg_finsler::tensors::{cartan_closed, ell, fundamental_closed, scalar_state};
use abg_finsler::{AbgMetric, EvaluationPoint, FieldSet, KernelFamily, PsiKernel};
use approx::assert_relative_eq;
use proptest::prelude::*;

fn kernel(i: usize) -> PsiKernel {
    match i {
        0 => PsiKernel::exp_gamma(),
        1 => PsiKernel::randers3(),
        2 => PsiKernel::new(KernelFamily::composed()),
        3 => PsiKernel::new(KernelFamily::alpha_beta()),
        4 => PsiKernel::new(KernelFamily::alpha_gamma()),
        _ => PsiKernel::unit(),
    }
}

#[derive(Debug, Clone)]
struct Case {
    name: &'static str,
    kernel: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Case {
    fn fields(&self) -> FieldSet {
        fixture(self.name, self.x.len()).unwrap()
    }

    fn point(&self) -> EvaluationPoint {
        EvaluationPoint::new(self.x.clone(), self.y.clone()).unwrap()
    }

    fn scaled(&self, c: f64) -> EvaluationPoint {
        self.point().scaled(c)
    }
}

fn case() -> impl Strategy<Value = Case> {
    (2usize..=3, 0..FIXTURE_NAMES.len(), 0usize..6).prop_flat_map(|(n, f, k)| {
        (
            prop::collection::vec(-1.0..1.0f64, n),
            prop::collection::vec(-1.0..1.0f64, n).prop_filter("y away from zero", |y| linalg::norm(y) > 0.1),
        )
            .prop_map(move |(x, y)| Case {
                name: FIXTURE_NAMES[f],
                kernel: k,
                x,
                y,
            })
    })
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    linalg::max_rel_err(a, b) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn finsler_function_is_positively_homogeneous(c in case(), lambda in 0.1..10.0f64) {
        let m = AbgMetric::new(c.fields(), kernel(c.kernel));
        let f = m.f(&c.x, &c.y);
        let y2: Vec<f64> = c.y.iter().map(|v| v * lambda).collect();
        prop_assert!(f > 0.0);
        assert_relative_eq!(m.f(&c.x, &y2), lambda * f, max_relative = 1e-13);
    }

    #[test]
    fn fundamental_tensor_contracts_to_f_squared(c in case()) {
        let fs = c.fields();
        let k = kernel(c.kernel);
        let st = scalar_state(&fs, &k, &c.point()).unwrap();
        let t = fundamental_closed(&st).unwrap();
        let f = AbgMetric::new(fs, k).f(&c.x, &c.y);
        let gyy = linalg::dot(&c.y, &linalg::mat_vec(&t.g, &c.y));
        assert_relative_eq!(gyy, f * f, max_relative = 1e-12);
        // g_ij y^j = F ell_i
        let gy = linalg::mat_vec(&t.g, &c.y);
        let fl: Vec<f64> = ell(&st).iter().map(|l| f * l).collect();
        prop_assert!(close(&gy, &fl, 1e-12));
        prop_assert!(linalg::is_spd(&t.g));
    }

    #[test]
    fn tensors_scale_with_their_degree(c in case(), lambda in 0.2..5.0f64) {
        let fs = c.fields();
        let k = kernel(c.kernel);
        let st1 = scalar_state(&fs, &k, &c.point()).unwrap();
        let st2 = scalar_state(&fs, &k, &c.scaled(lambda)).unwrap();
        let (t1, t2) = (fundamental_closed(&st1).unwrap(), fundamental_closed(&st2).unwrap());
        prop_assert!(close(&linalg::flatten2(&t2.g), &linalg::flatten2(&t1.g), 1e-12));
        assert_relative_eq!(t2.det, t1.det, max_relative = 1e-12);
        let c1: Vec<f64> = linalg::flatten3(&cartan_closed(&st1).unwrap()).iter().map(|v| v / lambda).collect();
        let c2 = linalg::flatten3(&cartan_closed(&st2).unwrap());
        prop_assert!(close(&c2, &c1, 1e-12));
        let g1: Vec<f64> = spray_closed(&fs, &k, &c.point()).unwrap().g.iter().map(|v| v * lambda * lambda).collect();
        let g2 = spray_closed(&fs, &k, &c.scaled(lambda)).unwrap().g;
        prop_assert!(close(&g2, &g1, 1e-12));
    }

    #[test]
    fn solver_route_agrees_with_closed_spray(c in case()) {
        let fs = c.fields();
        let k = kernel(c.kernel);
        let closed = spray_closed(&fs, &k, &c.point()).unwrap().g;
        let solved = spray_via_solver(&fs, &k, &c.point()).unwrap();
        prop_assert!(close(&solved, &closed, 1e-10), "{closed:?} vs {solved:?}");
    }

    #[test]
    fn solver_satisfies_random_systems(
        c in case(),
        raw in prop::collection::vec(-2.0..2.0f64, 3),
        rhs in -2.0..2.0f64,
    ) {
        let st = scalar_state(&c.fields(), &kernel(c.kernel), &c.point()).unwrap();
        let sys = EllSystem::projected(&raw[..st.n], rhs, &st);
        let a = solve_ell_system(&sys, &st).unwrap();
        prop_assert!(ell_residual(&sys, &st, &a) <= 1e-11);
    }

    #[test]
    fn bij_is_antisymmetric_and_matches_spray(c in case()) {
        let fs = c.fields();
        let k = kernel(c.kernel);
        let b = bij(&fs, &k, &c.point()).unwrap();
        let r = bij_reconstruction(&fs, &k, &c.point()).unwrap();
        prop_assert!(linalg::max_abs(
            (0..b.len()).flat_map(|i| (0..b.len()).map(move |j| (i, j))).map(|(i, j)| b[i][j] + b[j][i])
        ) <= 1e-14);
        prop_assert!(close(&linalg::flatten2(&b), &linalg::flatten2(&r), 1e-11));
    }
}

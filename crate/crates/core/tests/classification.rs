//! Flatness and Douglas verdicts against the beta-parallel / gamma-closed
//! classification, for `F = alpha e^{beta/alpha} + gamma` with Euclidean alpha.

use abg_finsler::analysis::{
    classify_form, douglas_report, flatness_report, DouglasVerdict, FlatVerdict, Vanishing, NONZERO_TOL, ZERO_TOL,
};
use abg_finsler::fields::{fixture, sample_points, sample_x, SampleSpec};
use abg_finsler::PsiKernel;

const EUCLIDEAN: [&str; 4] = [
    "euclidean_parallel_closed",
    "euclidean_nonclosed",
    "euclidean_nonparallel",
    "riemannian_only",
];

fn spec() -> SampleSpec {
    SampleSpec {
        points: 3,
        directions: 8,
        seed: 31,
    }
}

fn expected(name: &str, n: usize) -> bool {
    let fs = fixture(name, n).unwrap();
    let xs = sample_x(n, 6, 3);
    let beta = classify_form(&fs.metric, &fs.beta, &xs, 1e-10).unwrap();
    let gamma = classify_form(&fs.metric, &fs.gamma, &xs, 1e-10).unwrap();
    beta.parallel && gamma.closed
}

#[test]
fn fixture_classification_is_as_constructed() {
    for n in [2, 3] {
        assert!(expected("euclidean_parallel_closed", n));
        assert!(expected("riemannian_only", n));
        assert!(!expected("euclidean_nonclosed", n));
        assert!(!expected("euclidean_nonparallel", n));
    }
}

#[test]
fn flat_exactly_when_beta_parallel_and_gamma_closed() {
    let k = PsiKernel::exp_gamma();
    for n in [2, 3] {
        for name in EUCLIDEAN {
            let fs = fixture(name, n).unwrap();
            let verdicts = sample_points(n, &spec())
                .iter()
                .map(|p| Vanishing::of(flatness_report(&fs, &k, p).unwrap().hamel_norm))
                .collect::<Vec<_>>();
            let verdict: FlatVerdict = Vanishing::combine(verdicts).into();
            let want = if expected(name, n) {
                FlatVerdict::Flat
            } else {
                FlatVerdict::NotFlat
            };
            assert_eq!(verdict, want, "{name} n={n}");
        }
    }
}

#[test]
fn douglas_exactly_when_beta_parallel_and_gamma_closed() {
    let k = PsiKernel::exp_gamma();
    for n in [2, 3] {
        for name in EUCLIDEAN {
            let fs = fixture(name, n).unwrap();
            let verdicts = sample_points(n, &spec())
                .iter()
                .map(|p| Vanishing::of(douglas_report(&fs, &k, p, false).unwrap().douglas_norm))
                .collect::<Vec<_>>();
            let verdict: DouglasVerdict = Vanishing::combine(verdicts).into();
            let want = if expected(name, n) {
                DouglasVerdict::Douglas
            } else {
                DouglasVerdict::NotDouglas
            };
            assert_eq!(verdict, want, "{name} n={n}");
        }
    }
}

#[test]
fn flat_fixtures_have_a_cubic_b_term() {
    let k = PsiKernel::exp_gamma();
    for n in [2, 3] {
        let fs = fixture("euclidean_parallel_closed", n).unwrap();
        for p in sample_points(n, &spec()) {
            let r = douglas_report(&fs, &k, &p, false).unwrap();
            assert!(r.bij_fourth < ZERO_TOL, "{}", r.bij_fourth);
        }
        let fs = fixture("euclidean_nonclosed", n).unwrap();
        let worst = sample_points(n, &spec())
            .iter()
            .map(|p| douglas_report(&fs, &k, p, false).unwrap().bij_fourth)
            .fold(0.0, f64::max);
        assert!(worst > NONZERO_TOL);
    }
}

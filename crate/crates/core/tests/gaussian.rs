use nalgebra::DMatrix;
use proptest::prelude::*;
use qthermal::gaussian::{fock_fidelity_oracle, gaussian_fidelity, symplectic_form, CovarianceMatrix};

fn rotation(n: usize, mode: usize, theta: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    let (c, si) = (theta.cos(), theta.sin());
    let k = 2 * mode;
    s[(k, k)] = c;
    s[(k, k + 1)] = si;
    s[(k + 1, k)] = -si;
    s[(k + 1, k + 1)] = c;
    s
}

fn squeezer(n: usize, mode: usize, r: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    s[(2 * mode, 2 * mode)] = (-r).exp();
    s[(2 * mode + 1, 2 * mode + 1)] = r.exp();
    s
}

/// Beam splitter between modes 0 and 1.
fn mixer(n: usize, theta: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    let (c, si) = (theta.cos(), theta.sin());
    for q in 0..2 {
        s[(q, q)] = c;
        s[(q, 2 + q)] = si;
        s[(2 + q, q)] = -si;
        s[(2 + q, 2 + q)] = c;
    }
    s
}

fn symplectic(n: usize, params: &[(f64, f64)], mix: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    for (mode, &(theta, r)) in params.iter().enumerate().take(n) {
        s = rotation(n, mode, theta) * squeezer(n, mode, r) * s;
    }
    if n >= 2 {
        s = mixer(n, mix) * s;
    }
    s
}

fn epsilon(n: f64) -> f64 {
    n + 0.5
}

fn tmsv_pair(a: f64, b: f64, theta: f64) -> (CovarianceMatrix, CovarianceMatrix) {
    let v1 = CovarianceMatrix::two_mode_squeezed(a).unwrap();
    let v2 = CovarianceMatrix::two_mode_squeezed(b)
        .unwrap()
        .congruence(&rotation(2, 0, theta))
        .unwrap();
    (v1, v2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn thermal_pairs_match_fock_oracle(n1 in 0.0..30.0f64, n2 in 0.0..30.0f64) {
        let v1 = CovarianceMatrix::thermal(&[epsilon(n1)]).unwrap();
        let v2 = CovarianceMatrix::thermal(&[epsilon(n2)]).unwrap();
        let f = gaussian_fidelity(&v1, &v2).unwrap();
        let oracle = fock_fidelity_oracle(&v1, &v2, 1024).unwrap();
        prop_assert!((f - oracle).abs() <= 1e-8, "{} vs {}", f, oracle);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(
        e1 in prop::collection::vec(0.5..20.0f64, 2),
        e2 in prop::collection::vec(0.5..20.0f64, 2),
        p1 in prop::collection::vec((-3.0..3.0f64, -1.0..1.0f64), 2),
        p2 in prop::collection::vec((-3.0..3.0f64, -1.0..1.0f64), 2),
        mix in -1.5..1.5f64,
    ) {
        let v1 = CovarianceMatrix::thermal(&e1).unwrap().congruence(&symplectic(2, &p1, mix)).unwrap();
        let v2 = CovarianceMatrix::thermal(&e2).unwrap().congruence(&symplectic(2, &p2, -mix)).unwrap();
        let f12 = gaussian_fidelity(&v1, &v2).unwrap();
        let f21 = gaussian_fidelity(&v2, &v1).unwrap();
        prop_assert!((f12 - f21).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&f12));
        prop_assert!((gaussian_fidelity(&v1, &v1).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn symplectic_spectrum_is_invariant(
        eps in prop::collection::vec(0.5..10.0f64, 3),
        params in prop::collection::vec((-3.0..3.0f64, -1.2..1.2f64), 3),
        mix in -1.5..1.5f64,
    ) {
        let v = CovarianceMatrix::thermal(&eps).unwrap();
        let s = symplectic(3, &params, mix);
        let omega = symplectic_form(3);
        prop_assert!((&s * &omega * s.transpose() - &omega).abs().max() < 1e-12);
        let w = v.congruence(&s).unwrap();
        let mut expected = eps.clone();
        expected.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in w.symplectic_eigenvalues().iter().zip(&expected) {
            prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
        }
    }

    #[test]
    fn pure_state_overlap(a in 0.5..20.0f64, b in 0.5..20.0f64, theta in -3.0..3.0f64) {
        let (v1, v2) = tmsv_pair(a, b, theta);
        let f = gaussian_fidelity(&v1, &v2).unwrap();
        let det = (v1.matrix() + v2.matrix()).determinant();
        prop_assert!((f * f - 1.0 / det.sqrt()).abs() <= 1e-10, "{} vs {}", f * f, 1.0 / det.sqrt());
    }
}

#[test]
fn thermal_spectrum_and_fidelity_examples() {
    let v1 = CovarianceMatrix::thermal(&[1.5]).unwrap();
    let v2 = CovarianceMatrix::thermal(&[2.5]).unwrap();
    let expected = 1.0 / (6f64.sqrt() - 2f64.sqrt());
    assert!((gaussian_fidelity(&v1, &v2).unwrap() - expected).abs() < 1e-12);
    assert!((fock_fidelity_oracle(&v1, &v2, 512).unwrap() - expected).abs() < 1e-9);
    let vac = CovarianceMatrix::thermal(&[0.5]).unwrap();
    let hot = CovarianceMatrix::thermal(&[5.5]).unwrap();
    assert!((fock_fidelity_oracle(&vac, &hot, 512).unwrap() - (1.0f64 / 6.0).sqrt()).abs() < 1e-9);
}

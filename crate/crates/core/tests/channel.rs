use proptest::prelude::*;
use qthermal::channel::{
    closed_form, fidelity_choi_inf, fidelity_classical, fidelity_finite, temperature_of, EnvironmentPair,
};

const GRID: [f64; 5] = [0.5, 1.0, 2.5, 10.0, 100.0];

fn tau_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![0.05..0.995f64, 1.01..3.0f64]
}

fn check_finite_energy_window(pair: &EnvironmentPair) -> Result<(), TestCaseError> {
    let inf = fidelity_choi_inf(pair).unwrap().value;
    let cl = fidelity_classical(pair).unwrap();
    let mut prev = f64::INFINITY;
    for a in GRID {
        let f = fidelity_finite(pair, a).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(
            f >= inf - 1e-9 && f <= cl + 1e-9,
            "a={} F={} window [{}, {}]",
            a,
            f,
            inf,
            cl
        );
        prop_assert!(f <= prev + 1e-12, "not non-increasing at a={}: {} > {}", a, f, prev);
        prev = f;
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thermal_finite_energy_window(tau in tau_strategy(), eb in 0.5..30.0f64, et in 0.5..30.0f64) {
        check_finite_energy_window(&EnvironmentPair::thermal(tau, eb, et).unwrap())?;
    }

    #[test]
    fn additive_finite_energy_window(nb in 1e-3..1.0f64, nt in 1e-3..1.0f64) {
        check_finite_energy_window(&EnvironmentPair::additive(nb, nt).unwrap())?;
    }

    #[test]
    fn vacuum_idler_is_classical(tau in tau_strategy(), eb in 0.5..30.0f64, et in 0.5..30.0f64) {
        let pair = EnvironmentPair::thermal(tau, eb, et).unwrap();
        let d = fidelity_finite(&pair, 0.5).unwrap() - fidelity_classical(&pair).unwrap();
        prop_assert!(d.abs() <= 1e-10);
    }

    #[test]
    fn identical_channels_have_unit_fidelity(tau in tau_strategy(), e in 0.5..30.0f64, a in 0.5..1e4f64) {
        let pair = EnvironmentPair::thermal(tau, e, e).unwrap();
        prop_assert!((fidelity_finite(&pair, a).unwrap() - 1.0).abs() <= 1e-9);
        prop_assert!((fidelity_classical(&pair).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!((fidelity_choi_inf(&pair).unwrap().value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn distinct_channels_have_fidelity_below_one(tau in tau_strategy(), e in 0.5..30.0f64, d in 0.05..5.0f64) {
        let pair = EnvironmentPair::thermal(tau, e, e + d).unwrap();
        prop_assert!(fidelity_classical(&pair).unwrap() < 1.0 - 1e-9);
        prop_assert!(fidelity_choi_inf(&pair).unwrap().value < 1.0 - 1e-9);
    }

    #[test]
    fn additive_closed_forms_match_covariance_route(nb in 1e-3..1.0f64, nt in 1e-3..1.0f64) {
        let pair = EnvironmentPair::additive(nb, nt).unwrap();
        let inf = fidelity_choi_inf(&pair).unwrap();
        prop_assert!(inf.converged());
        prop_assert!((inf.extrapolation.value - closed_form::additive_choi(nt, nb)).abs() <= 1e-8);
        let cl = fidelity_classical(&pair).unwrap();
        prop_assert!((cl - closed_form::additive_classical(nt, nb)).abs() <= 1e-8);
    }

    #[test]
    fn additive_finite_form_matches(nb in 1e-3..1.0f64, nt in 1e-3..1.0f64, a in 0.5..1e3f64) {
        let pair = EnvironmentPair::additive(nb, nt).unwrap();
        let d = fidelity_finite(&pair, a).unwrap() - closed_form::additive_finite(a, nt, nb);
        prop_assert!(d.abs() <= 1e-10);
    }
}

#[test]
fn thermal_limit_does_not_depend_on_transmissivity() {
    for (eb, et) in [(18.5, 20.2), (0.7, 1.9), (3.0, 2.2), (10.0, 10.5)] {
        let values: Vec<f64> = [0.1, 0.5, 0.9, 0.99]
            .iter()
            .map(|&tau| {
                let inf = fidelity_choi_inf(&EnvironmentPair::thermal(tau, eb, et).unwrap()).unwrap();
                assert!(inf.converged(), "τ={tau}: {:?}", inf.flags);
                inf.extrapolation.value
            })
            .collect();
        for v in &values {
            assert!((v - values[0]).abs() <= 1e-6, "{values:?}");
            assert!((v - closed_form::thermal_choi(et, eb)).abs() <= 1e-6);
        }
    }
}

#[test]
fn temperature_is_monotone() {
    let lambda = 1e-3;
    let t18 = temperature_of(18.0, lambda).unwrap();
    let t19 = temperature_of(19.7, lambda).unwrap();
    assert!(t19 > t18);
    assert!((t18 - 266.1).abs() < 0.1, "{t18}");
    assert!(temperature_of(0.0, lambda).is_err());
}

use kci_core::equilibria::{nonlocal_positive_equilibrium, Sign};
use kci_core::evolution::{Beta, Diffusivity, EvolveOptions, ProblemSpec};
use kci_core::regions::{in_region, invariance_from, invariance_test, region_spec};
use kci_core::spatial::Grid;

#[test]
fn autonomous_equilibrium_is_stationary_inside() {
    let g = Grid::on_pi(255).unwrap();
    let a = Diffusivity::Saturating;
    let spec = region_spec(1, Sign::Plus, 3.0, 1.0, 1.0, &g).unwrap();
    let eq = nonlocal_positive_equilibrium(3.0, 1.0, &a, 1, &g).unwrap();
    assert!(in_region(&eq.profile, &spec, 1e-12).unwrap());
    let p = ProblemSpec::nonlocal(3.0, a, Beta::constant(1.0)).unwrap();
    let r = invariance_from(&spec, &p, 5.0, &[eq.profile], &EvolveOptions::default()).unwrap();
    assert!(r.max_exit_distance <= 1e-8, "{r:?}");
}

#[test]
fn sampled_trajectories_stay_inside() {
    let g = Grid::on_pi(255).unwrap();
    for (j, lambda, sign) in [
        (1, 3.0, Sign::Plus),
        (2, 9.0, Sign::Plus),
        (2, 9.0, Sign::Minus),
    ] {
        let spec = region_spec(j, sign, lambda, 1.0, 2.0, &g).unwrap();
        let p = ProblemSpec::nonlocal(lambda, Diffusivity::Rational, Beta::sinusoidal(1.0, 2.0))
            .unwrap();
        let r = invariance_test(&spec, &p, 6.0, 4, 17, &EvolveOptions::default()).unwrap();
        assert!(r.max_exit_distance <= 1e-6, "j={j}: {r:?}");
        assert!(r.max_pinned_zero <= 1e-8, "j={j}: {r:?}");
        assert!(r.max_sign_violation <= 1e-8, "j={j}: {r:?}");
    }
}

#[test]
fn mismatched_problem_is_rejected() {
    let g = Grid::on_pi(63).unwrap();
    let spec = region_spec(1, Sign::Plus, 3.0, 1.0, 2.0, &g).unwrap();
    let wrong_beta =
        ProblemSpec::nonlocal(3.0, Diffusivity::Saturating, Beta::sinusoidal(0.5, 2.0)).unwrap();
    assert!(invariance_test(&spec, &wrong_beta, 1.0, 1, 0, &EvolveOptions::default()).is_err());
    let wrong_lambda =
        ProblemSpec::nonlocal(4.0, Diffusivity::Saturating, Beta::constant(1.0)).unwrap();
    assert!(invariance_test(&spec, &wrong_lambda, 1.0, 1, 0, &EvolveOptions::default()).is_err());
}

use kci_core::evolution::{
    check_equivalence_timechange, evolve, invert_time_map, propagate, time_map, Beta, Diffusivity,
    EvolveOptions, ProblemSpec,
};
use kci_core::spatial::{
    partial_order_leq, symmetry_defect, symmetry_project, Grid, Profile, SymmetryClass,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn smooth_random(g: Grid, rng: &mut ChaCha8Rng, modes: usize, amp: f64) -> Profile {
    let c: Vec<f64> = (1..=modes)
        .map(|k| amp * rng.gen_range(-1.0..1.0) / (k * k) as f64)
        .collect();
    Profile::from_fn(g, |x| {
        c.iter()
            .enumerate()
            .map(|(k, ck)| ck * ((k + 1) as f64 * x).sin())
            .sum()
    })
}

fn saturating_problem(lambda: f64) -> ProblemSpec {
    ProblemSpec::nonlocal(lambda, Diffusivity::Saturating, Beta::sinusoidal(1.0, 2.0)).unwrap()
}

#[test]
fn process_identity() {
    let g = Grid::on_pi(63).unwrap();
    let u0 = Profile::from_fn(g, |x| 0.3 * x.sin());
    let traj = evolve(
        &u0,
        2.0,
        2.0,
        &saturating_problem(3.0),
        &EvolveOptions::default(),
    )
    .unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(traj.last(), &u0);
    assert_eq!(time_map(&traj), &[0.0]);
}

#[test]
fn cocycle_with_aligned_steps() {
    let g = Grid::on_pi(127).unwrap();
    let u0 = Profile::from_fn(g, |x| 0.4 * x.sin() + 0.1 * (2.0 * x).sin());
    let opts = EvolveOptions::with_dt(1e-3);
    for p in [
        saturating_problem(4.0),
        ProblemSpec::local_upper(4.0, 1.0).unwrap(),
        ProblemSpec::autonomous(4.0, Diffusivity::Rational, 1.5).unwrap(),
    ] {
        let mid = propagate(&u0, -1.0, 0.5, &p, &opts).unwrap();
        let two = propagate(&mid, 0.5, 2.0, &p, &opts).unwrap();
        let one = propagate(&u0, -1.0, 2.0, &p, &opts).unwrap();
        let d = one.sup_distance(&two).unwrap();
        assert!(d <= 1e-9, "{:?}: {d}", p.kind);
    }
}

#[test]
fn small_lambda_decays_to_zero() {
    let g = Grid::on_pi(127).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u0 = smooth_random(g, &mut rng, 6, 0.2);
    let p = saturating_problem(0.5);
    let traj = evolve(
        &u0,
        0.0,
        20.0,
        &p,
        &EvolveOptions::with_dt(1e-2).sampled(100),
    )
    .unwrap();
    assert!(traj.last().sup_norm() < 1e-4 * u0.sup_norm().max(1e-3));
    let norms: Vec<f64> = traj.profiles.iter().map(Profile::l2_norm).collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0] + 1e-14));
}

#[test]
fn time_map_for_constant_diffusivity() {
    let g = Grid::on_pi(31).unwrap();
    let u0 = Profile::from_fn(g, |x| x.sin());
    for c in [1.0, 2.0] {
        let p = ProblemSpec::nonlocal(3.0, Diffusivity::constant(c), Beta::constant(1.0)).unwrap();
        let traj = evolve(&u0, 1.0, 3.0, &p, &EvolveOptions::with_dt(1e-2)).unwrap();
        for (t, phi) in traj.times.iter().zip(time_map(&traj)) {
            assert!((phi - c * (t - 1.0)).abs() < 1e-12, "{c}: {t} {phi}");
        }
    }
}

#[test]
fn time_map_bounds_and_inverse() {
    let g = Grid::on_pi(127).unwrap();
    let u0 = Profile::from_fn(g, |x| 1.5 * x.sin());
    let traj = evolve(
        &u0,
        0.0,
        3.0,
        &saturating_problem(4.0),
        &EvolveOptions::default(),
    )
    .unwrap();
    for (t, phi) in traj.times.iter().zip(&traj.phi) {
        assert!(*phi >= *t - 1e-12 && *phi <= 2.0 * t + 1e-12, "{t} {phi}");
    }
    assert!(traj.phi.windows(2).all(|w| w[1] > w[0]));
    let end = *traj.phi.last().unwrap();
    for k in 0..=20 {
        let tau = end * k as f64 / 20.0;
        let t = invert_time_map(&traj, tau).unwrap();
        assert!((traj.time_map.phi_at(t).unwrap() - tau).abs() < 1e-8);
    }
    assert!(invert_time_map(&traj, end + 1e-3).is_err());
    assert!(invert_time_map(&traj, -1e-3).is_err());
}

#[test]
fn equivalence_with_saturating_diffusivity() {
    let g = Grid::on_pi(255).unwrap();
    let u0 = Profile::from_fn(g, |x| 0.5 * x.sin());
    let p = ProblemSpec::nonlocal(3.0, Diffusivity::Saturating, Beta::constant(1.0)).unwrap();
    let coarse =
        check_equivalence_timechange(&u0, 0.0, 5.0, &p, &EvolveOptions::with_dt(2e-3)).unwrap();
    let fine =
        check_equivalence_timechange(&u0, 0.0, 5.0, &p, &EvolveOptions::with_dt(1e-3)).unwrap();
    assert!(fine <= 5e-3, "{fine}");
    // first order: halving dt roughly halves the gap
    let ratio = coarse / fine;
    assert!(ratio > 1.6 && ratio < 2.4, "{coarse} {fine}");
}

#[test]
fn local_semigroups_preserve_order() {
    let g = Grid::on_pi(255).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let problems = [
        ProblemSpec::local_upper(5.0, 1.0).unwrap(),
        ProblemSpec::local_lower(5.0, 2.0).unwrap(),
    ];
    let opts = EvolveOptions::with_dt(1e-3).sampled(50);
    let mut worst = 0.0f64;
    for pair in 0..100 {
        let p = &problems[pair % 2];
        let u0 = smooth_random(g, &mut rng, 8, 2.0);
        let bump_a: f64 = rng.gen_range(0.0..1.0);
        let bump_m: f64 = rng.gen_range(1.0f64..6.0).floor();
        let gap = Profile::from_fn(g, |x| bump_a * x.sin() * (1.0 + 0.5 * (bump_m * x).cos()));
        let v0 = u0.zip_with(&gap, |a, b| a + b).unwrap();
        let tu = evolve(&u0, 0.0, 1.0, p, &opts).unwrap();
        let tv = evolve(&v0, 0.0, 1.0, p, &opts).unwrap();
        for (a, b) in tu.profiles.iter().zip(&tv.profiles) {
            let check = partial_order_leq(a, b, 1e-8).unwrap();
            worst = worst.max(check.max_violation);
            assert!(
                check.holds,
                "pair {pair}: violation {}",
                check.max_violation
            );
        }
    }
    assert!(worst <= 1e-8);
}

#[test]
fn symmetric_data_stays_symmetric() {
    let g = Grid::on_pi(255).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for j in [1usize, 2, 4] {
        let class = SymmetryClass::new(j).unwrap();
        let u0 = symmetry_project(&smooth_random(g, &mut rng, 40, 1.0), class).unwrap();
        let opts = EvolveOptions::default().sampled(100);

        // moderate growth: round-off off the class stays below tolerance
        let p = saturating_problem(5.0);
        let plain = evolve(&u0, 0.0, 1.0, &p, &opts).unwrap();
        for u in &plain.profiles {
            let d = symmetry_defect(u, class).unwrap();
            assert!(d <= 1e-10, "j={j}: {d}");
        }
        let masked = evolve(&u0, 0.0, 1.0, &p, &opts.symmetric(class)).unwrap();
        let d = masked.last().sup_distance(plain.last()).unwrap();
        assert!(d <= 1e-10, "j={j}: masked vs plain {d}");

        // strong growth of off-class modes: the mask keeps the run in Z_j
        let p = saturating_problem(4.0 * (j * j) as f64);
        let masked = evolve(&u0, 0.0, 1.0, &p, &opts.symmetric(class)).unwrap();
        for u in &masked.profiles {
            let d = symmetry_defect(u, class).unwrap();
            assert!(d <= 1e-10, "j={j}: {d}");
        }
    }
}

#[test]
fn dissipative_bound() {
    let g = Grid::on_pi(127).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (lambda, b1) = (6.0, 1.0);
    let p =
        ProblemSpec::nonlocal(lambda, Diffusivity::Rational, Beta::sinusoidal(b1, 3.0)).unwrap();
    let bound_eq = (2.0 * lambda / b1).sqrt();
    for amp in [0.1, 3.0, 8.0] {
        let u0 = smooth_random(g, &mut rng, 5, amp);
        let traj = evolve(&u0, 0.0, 4.0, &p, &EvolveOptions::default().sampled(10)).unwrap();
        let bound = u0.sup_norm().max(bound_eq) + 1e-6;
        for u in &traj.profiles {
            assert!(u.sup_norm() <= bound, "{} > {bound}", u.sup_norm());
        }
    }
}

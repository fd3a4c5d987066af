use kci_core::spatial::{
    h10_norm_sq, inverse_sine_transform, partial_order_leq, sine_transform, symmetry_project, Grid,
    Profile, SymmetryClass,
};
use proptest::prelude::*;

fn profile(n: usize) -> impl Strategy<Value = Profile> {
    prop::collection::vec(-10.0f64..10.0, n)
        .prop_map(move |v| Profile::new(Grid::on_pi(n).unwrap(), v).unwrap())
}

/// `∫u_x²` by forward differences with the boundary zeros included.
fn difference_h10(u: &Profile) -> f64 {
    let h = u.grid().spacing();
    let mut v = vec![0.0];
    v.extend_from_slice(u.values());
    v.push(0.0);
    v.windows(2).map(|w| (w[1] - w[0]).powi(2) / h).sum()
}

proptest! {
    #[test]
    fn transform_round_trip(u in profile(63)) {
        let back = inverse_sine_transform(&sine_transform(&u), u.grid()).unwrap();
        prop_assert!(back.sup_distance(&u).unwrap() <= 1e-12 * (1.0 + u.sup_norm()));
    }

    #[test]
    fn projection_is_idempotent_contraction(u in profile(95), j in 1usize..4) {
        let class = SymmetryClass::new(j).unwrap();
        let p = symmetry_project(&u, class).unwrap();
        let pp = symmetry_project(&p, class).unwrap();
        prop_assert!(pp.sup_distance(&p).unwrap() <= 1e-12 * (1.0 + u.sup_norm()));
        prop_assert!(p.sup_norm() <= u.sup_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn order_is_reflexive_and_transitive(u in profile(31), d1 in prop::collection::vec(0.0f64..1.0, 31), d2 in prop::collection::vec(0.0f64..1.0, 31)) {
        let g = *u.grid();
        let v = u.zip_with(&Profile::new(g, d1).unwrap(), |a, b| a + b).unwrap();
        let w = v.zip_with(&Profile::new(g, d2).unwrap(), |a, b| a + b).unwrap();
        prop_assert!(partial_order_leq(&u, &u, 0.0).unwrap().holds);
        prop_assert!(partial_order_leq(&u, &v, 0.0).unwrap().holds);
        prop_assert!(partial_order_leq(&v, &w, 0.0).unwrap().holds);
        prop_assert!(partial_order_leq(&u, &w, 0.0).unwrap().holds);
    }
}

#[test]
fn antisymmetry_up_to_tolerance() {
    let g = Grid::on_pi(15).unwrap();
    let u = Profile::from_fn(g, f64::sin);
    let v = u.map(|x| x + 1e-13);
    assert!(partial_order_leq(&u, &v, 1e-12).unwrap().holds);
    assert!(partial_order_leq(&v, &u, 1e-12).unwrap().holds);
    assert!(!partial_order_leq(&v, &u, 0.0).unwrap().holds);
}

#[test]
fn parseval_difference_converges_at_second_order() {
    let f = |x: f64| x.sin() * (1.0 + 0.3 * (2.0 * x).cos()) + 0.2 * (3.0 * x).sin();
    let errs: Vec<f64> = [63usize, 127, 255]
        .iter()
        .map(|&n| {
            let u = Profile::from_fn(Grid::on_pi(n).unwrap(), f);
            (h10_norm_sq(&u) - difference_h10(&u)).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "{errs:?}");
    }
}

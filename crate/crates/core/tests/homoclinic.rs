use pesinlab::dynamics::{torus_reduce, DynamicalSystem, IntMatrix, TorusPoint};
use pesinlab::homoclinic::{
    ehc_membership, homoclinic_relation, nonwandering_probe, periodic_points, PeriodicPointRecord,
};
use proptest::prelude::*;

const V_MINUS: [f64; 2] = [0.5257311121191336, -0.8506508083520399];

fn anchors() -> Vec<PeriodicPointRecord> {
    let cat = IntMatrix::cat();
    (1..=3).flat_map(|n| periodic_points(&cat, n).unwrap()).collect()
}

#[test]
fn nonwandering_probe_on_the_cat_map() {
    let r = nonwandering_probe(&DynamicalSystem::cat(), 32, 50, 16).unwrap();
    assert_eq!(r.fraction, 1.0);
    assert_eq!(r.cells, 1024);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witnesses_are_accurate_and_transversal(i in 0usize..22, j in 0usize..22) {
        let a = anchors();
        let (p, q) = (a[i % a.len()].to_point(), a[j % a.len()].to_point());
        let r = homoclinic_relation(&IntMatrix::cat(), &p, &q, 3).unwrap();
        prop_assert!(r.related);
        for w in [&r.forward, &r.backward] {
            prop_assert!(w.residual < 1e-9);
            prop_assert!(w.angle >= 0.1);
        }
    }

    #[test]
    fn ehc_membership_is_orbit_invariant(x in [0.0..1.0f64, 0.0..1.0], k in 0usize..22) {
        let cat = DynamicalSystem::cat();
        let a = anchors();
        let anchor = &a[k % a.len()];
        let x = torus_reduce(&x).unwrap();
        let here = ehc_membership(&cat, anchor, &x, 2, 10).unwrap();
        let there = ehc_membership(&cat, anchor, &cat.step(&x), 2, 10).unwrap();
        prop_assert_eq!(here.in_ehc, there.in_ehc);
        prop_assert_eq!(here.in_minus, there.in_minus);
        prop_assert_eq!(here.in_plus, there.in_plus);
    }

    #[test]
    fn ehc_minus_is_saturated_by_stable_leaves(x in [0.0..1.0f64, 0.0..1.0], t in -0.05..0.05f64) {
        let cat = DynamicalSystem::cat();
        let anchor = &anchors()[0];
        let x = torus_reduce(&x).unwrap();
        let m = ehc_membership(&cat, anchor, &x, 2, 10).unwrap();
        prop_assume!(m.in_minus);
        let y = torus_reduce(&[x.coord(0) + t * V_MINUS[0], x.coord(1) + t * V_MINUS[1]]).unwrap();
        prop_assert!(ehc_membership(&cat, anchor, &y, 2, 10).unwrap().in_minus);
    }
}

#[test]
fn sphere_membership_uses_regular_anchor() {
    let s2 = DynamicalSystem::sphere_quotient();
    let anchor = periodic_points(&IntMatrix::cat(), 2).unwrap().into_iter().find(|r| r.period == 2).unwrap();
    let x = s2.canonical(&torus_reduce(&[0.123, 0.456]).unwrap());
    let m = ehc_membership(&s2, &anchor, &x, 2, 10).unwrap();
    assert!(m.in_ehc);
    assert_eq!(m.dims.as_tuple(), (1, 0, 1));
    let _ = TorusPoint::origin(2);
}

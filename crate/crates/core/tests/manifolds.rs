use pesinlab::dynamics::{torus_reduce, DynamicalSystem, TorusPoint};
use pesinlab::manifolds::{
    holonomy_jacobian, holonomy_map, invariance_defect, local_manifold, pesin_rate_membership, Sign, Transversal,
};
use proptest::prelude::*;

const V_PLUS: [f64; 2] = [0.8506508083520399, 0.5257311121191336];
const V_MINUS: [f64; 2] = [0.5257311121191336, -0.8506508083520399];

fn transversal(sys: &DynamicalSystem, base: [f64; 2], dir: [f64; 2]) -> Transversal {
    Transversal::new(sys, base, dir, 0.05, 1e-4, Sign::Plus).unwrap()
}

#[test]
fn leaves_are_invariant() {
    let cat = DynamicalSystem::cat();
    for sign in [Sign::Plus, Sign::Minus] {
        for p in [[0.0, 0.0], [0.2, 0.4], [0.4, 0.8]] {
            let seg = local_manifold(&cat, &torus_reduce(&p).unwrap(), sign, 0.1, 0.1, 4).unwrap();
            assert!(invariance_defect(&cat, &seg).unwrap() <= 1e-8);
        }
    }
}

#[test]
fn holonomies_compose_and_are_injective() {
    let cat = DynamicalSystem::cat();
    let t0 = transversal(&cat, [0.3, 0.2], V_MINUS);
    let t1 = transversal(&cat, [0.32, 0.21], [0.0, 1.0]);
    let t2 = transversal(&cat, [0.34, 0.225], [-0.3, 1.0]);
    for r in [-0.02, -0.005, 0.0, 0.01, 0.02] {
        let x = t0.point(r);
        let direct = holonomy_map(&cat, &t0, &t2, x, Sign::Plus).unwrap();
        let via = holonomy_map(&cat, &t1, &t2, holonomy_map(&cat, &t0, &t1, x, Sign::Plus).unwrap(), Sign::Plus).unwrap();
        assert!((direct[0] - via[0]).hypot(direct[1] - via[1]) < 1e-8);
    }
    let j = holonomy_jacobian(&cat, &t0, &t2, Sign::Plus, 200, 10.0).unwrap();
    assert!(j.injective);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rate_verdicts_mirror_under_inversion(x in [0.0..1.0f64, 0.0..1.0], t in 1e-6..1e-3f64) {
        let cat = DynamicalSystem::cat();
        let inv = cat.inverse_system();
        let x = torus_reduce(&x).unwrap();
        let along = |v: [f64; 2]| torus_reduce(&[x.coord(0) + t * v[0], x.coord(1) + t * v[1]]).unwrap();
        let (ys, yu) = (along(V_MINUS), along(V_PLUS));
        prop_assert!(pesin_rate_membership(&cat, &x, &ys, 60).unwrap().member);
        prop_assert!(!pesin_rate_membership(&cat, &x, &yu, 60).unwrap().member);
        prop_assert!(pesin_rate_membership(&inv, &x, &yu, 60).unwrap().member);
        prop_assert!(!pesin_rate_membership(&inv, &x, &ys, 60).unwrap().member);
    }

    #[test]
    fn local_leaf_contains_its_anchor(p in [0.0..1.0f64, 0.0..1.0], plus in any::<bool>()) {
        // only periodic anchors qualify; snap to a period-2 grid point
        let cat = DynamicalSystem::cat();
        let grid = [[0.0, 0.0], [0.2, 0.4], [0.4, 0.8], [0.6, 0.2], [0.8, 0.6]];
        let k = ((p[0] * 5.0) as usize).min(4);
        let anchor = torus_reduce(&grid[k]).unwrap();
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let seg = local_manifold(&cat, &anchor, sign, 0.05, 0.05, 2).unwrap();
        let i = seg.anchor_index.unwrap();
        let a = TorusPoint::new(&seg.points[i]).unwrap();
        prop_assert!(a.distance(&anchor) < 1e-12);
        let _ = p[1];
    }
}

use pesinlab::birkhoff::{
    birkhoff_average, conditional_fubini_check, ensemble_birkhoff_vectors, ergodicity_test, space_average, Direction,
    PartitionDescriptor, TestSet, Verdict,
};
use pesinlab::dynamics::{cosine_family, default_family, torus_reduce, DynamicalSystem, Observable, Space};
use proptest::prelude::*;

fn ensemble_deviation(sys: &DynamicalSystem, phi: &Observable, n: u64) -> f64 {
    let v = ensemble_birkhoff_vectors(sys, std::slice::from_ref(phi), 200, n, 9).unwrap();
    let mean = v.iter().map(|b| b.averages[0]).sum::<f64>() / v.len() as f64;
    (mean - space_average(sys, phi).unwrap()).abs()
}

#[test]
fn ensemble_mean_approaches_the_space_average() {
    for sys in [DynamicalSystem::cat(), DynamicalSystem::sphere_quotient()] {
        for phi in cosine_family(sys.space()).iter().take(3) {
            let (d1, d4) = (ensemble_deviation(&sys, phi, 500), ensemble_deviation(&sys, phi, 2000));
            // CLT slack for an ensemble of 200 means of bounded observables
            let slack = 3.0 / (200.0f64 * 500.0).sqrt();
            assert!(d4 <= d1 + 2.0 * slack, "{} {}: {d1} -> {d4}", sys.name(), phi.id());
        }
    }
}

#[test]
fn fubini_gap_shrinks_with_samples() {
    let cat = DynamicalSystem::cat();
    let b = TestSet::Rectangle { lo: [0.1, 0.2], hi: [0.6, 0.5] };
    let small = conditional_fubini_check(&cat, &PartitionDescriptor::VerticalCircles, &b, 50_000, 3).unwrap();
    let large = conditional_fubini_check(&cat, &PartitionDescriptor::VerticalCircles, &b, 200_000, 3).unwrap();
    assert!(large.gap.abs() <= small.gap.abs() + 2.0 * large.gap_error);
    assert!(large.consistent && small.consistent);
}

#[test]
fn verdicts_are_consistent_with_deviations() {
    for (sys, fam) in [
        (DynamicalSystem::cat(), default_family(Space::T2)),
        (DynamicalSystem::cat_x_id(), cosine_family(Space::T3)),
        (DynamicalSystem::sphere_quotient(), cosine_family(Space::S2)),
    ] {
        let r = ergodicity_test(&sys, &fam, 20, 5_000, 0.05, 4).unwrap();
        match &r.verdict {
            Verdict::ErgodicConsistent => assert!(r.observables.iter().all(|o| o.max_deviation <= r.tolerance)),
            Verdict::NonErgodic { deviation, witness, .. } => {
                assert!(*deviation > r.tolerance);
                assert!(r.observables.iter().any(|o| &o.observable == witness && o.max_deviation == *deviation));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_averages_are_bounded_and_checkpoints_grow(
        x in [0.0..1.0f64, 0.0..1.0], k in [-2i64..=2, -2i64..=2], n in 1u64..20_000, back in any::<bool>()
    ) {
        let cat = DynamicalSystem::cat();
        let phi = Observable::cosine(&k, Space::T2).unwrap();
        let dir = if back { Direction::Backward } else { Direction::Forward };
        let s = birkhoff_average(&cat, &phi, &torus_reduce(&x).unwrap(), n, dir).unwrap();
        prop_assert!(s.checkpoints.iter().all(|c| c.average.abs() <= 1.0 + 1e-12));
        prop_assert!(s.checkpoints.windows(2).all(|w| w[0].n < w[1].n));
        prop_assert_eq!(s.checkpoints.last().unwrap().n, n);
        prop_assert_eq!(s.value, s.checkpoints.last().unwrap().average);
    }
}

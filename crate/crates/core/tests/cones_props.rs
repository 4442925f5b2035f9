mod common;

use common::{elementary_brute, phase_clauses, supercritical_sample};
use hessiasol::cones::{
    critical_phase, distance_to_boundary, phase_structure, shift_into, ConeKind, ConeSpec,
};
use hessiasol::symfun::LambdaVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn lv(v: &[f64]) -> LambdaVector {
    LambdaVector::from_slice(v).unwrap()
}

fn cone_kinds(n: usize) -> Vec<ConeSpec> {
    let mut out: Vec<ConeSpec> = (1..=n).map(|m| ConeSpec::gamma(m, n).unwrap()).collect();
    out.push(ConeSpec::positive(n).unwrap());
    let lo = critical_phase(n);
    out.push(ConeSpec::phase(lo, n).unwrap());
    out.push(ConeSpec::phase(lo + 0.7, n).unwrap());
    out
}

fn cone_and_pair() -> impl Strategy<Value = (ConeSpec, Vec<f64>, Vec<f64>)> {
    (1usize..=4).prop_flat_map(|n| {
        (
            proptest::sample::select(cone_kinds(n)),
            proptest::collection::vec(-2.0f64..4.0, n),
            proptest::collection::vec(-2.0f64..4.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, max_global_rejects: 100_000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cones_are_convex((cone, a, b) in cone_and_pair()) {
        prop_assume!(cone.contains(&lv(&a), false).unwrap() && cone.contains(&lv(&b), false).unwrap());
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        prop_assert!(cone.contains(&lv(&mid), false).unwrap(), "{cone:?}");
    }

    #[test]
    fn sigma_cones_are_cones((cone, a, _b) in cone_and_pair(), t in 1e-3f64..1e3) {
        prop_assume!(!matches!(cone.kind, ConeKind::PhaseCone { .. }));
        prop_assume!(cone.contains(&lv(&a), false).unwrap());
        prop_assert!(cone.contains(&lv(&a).scaled(t), false).unwrap());
    }

    #[test]
    fn gamma_cones_are_nested(lam in proptest::collection::vec(-2.0f64..4.0, 1..=5)) {
        let n = lam.len();
        let l = lv(&lam);
        for m in 2..=n {
            if ConeSpec::gamma(m, n).unwrap().contains(&l, false).unwrap() {
                prop_assert!(ConeSpec::gamma(m - 1, n).unwrap().contains(&l, false).unwrap());
            }
        }
        if ConeSpec::positive(n).unwrap().contains(&l, false).unwrap() {
            prop_assert!(ConeSpec::gamma(n, n).unwrap().contains(&l, false).unwrap());
        }
    }

    #[test]
    fn members_are_subharmonic((cone, a, _b) in cone_and_pair()) {
        prop_assume!(cone.contains(&lv(&a), false).unwrap());
        prop_assert!(a.iter().sum::<f64>() > 0.0, "{cone:?} admits {a:?}");
    }

    #[test]
    fn gamma_membership_matches_subset_sums(lam in proptest::collection::vec(-2.0f64..4.0, 1..=5)) {
        let n = lam.len();
        for m in 1..=n {
            let want = (1..=m).all(|j| elementary_brute(&lam, j) > 0.0);
            prop_assert_eq!(ConeSpec::gamma(m, n).unwrap().contains(&lv(&lam), false).unwrap(), want);
        }
    }

    #[test]
    fn distance_is_the_diagonal_shift_to_the_boundary((cone, a, _b) in cone_and_pair()) {
        let l = lv(&a);
        let d = distance_to_boundary(&cone, &l).unwrap();
        // Just past the boundary on either side.
        prop_assert!(cone.contains(&l.shifted(-d + 1e-8), false).unwrap());
        prop_assert!(!cone.contains(&l.shifted(-d - 1e-8), false).unwrap());
        let moved = shift_into(&cone, &l, 0.25).unwrap();
        prop_assert!(distance_to_boundary(&cone, &moved).unwrap() >= 0.25 - 1e-9);
    }
}

/// 10⁴ rejection-sampled supercritical vectors per n, checked against the test-side clauses
/// and against the library's structure report.
#[test]
fn supercritical_phase_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for n in 2..=4 {
        for delta in [0.05, 0.3, 1.0] {
            for _ in 0..10_000 {
                let lam = supercritical_sample(n, delta, &mut rng);
                let clauses = phase_clauses(&lam, delta);
                assert!(
                    clauses.iter().all(|&c| c),
                    "n = {n}, δ = {delta}, λ = {lam:?}: {clauses:?}"
                );
                let s = phase_structure(&lv(&lam), delta).unwrap();
                assert!(s.all_hold(), "library disagrees at {lam:?}: {s:?}");
            }
        }
    }
}

#[test]
fn one_dimensional_phase_floor_is_raised() {
    assert_eq!(critical_phase(1), 0.0);
    assert_eq!(critical_phase(3), FRAC_PI_2);
    assert!(ConeSpec::phase(-0.5, 1).is_err());
}

#[test]
fn subcritical_vectors_can_break_the_structure() {
    // Σ arctan ≈ 1.11 < π/2 at n = 3, and the smallest entry dominates the middle one.
    let lam = [10.0, 0.1, -0.5];
    let s = phase_structure(&lv(&lam), 0.1).unwrap();
    assert!(!s.all_hold());
    assert_eq!(
        phase_clauses(&lam, 0.1),
        [
            s.second_smallest_positive,
            s.smallest_dominated,
            s.trace_nonnegative,
            s.reciprocal_bound.unwrap_or(true)
        ]
    );
}

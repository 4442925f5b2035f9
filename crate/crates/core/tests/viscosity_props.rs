mod common;

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use common::{quartic, quartic_spectrum, r2, random_smooth, unit_ball};
use hessiasol::cones::ConeSpec;
use hessiasol::grid::{DomainSpec, GridField};
use hessiasol::solver::{solve, SolveConfig};
use hessiasol::symfun::{s_norm, LambdaVector};
use hessiasol::viscosity::{
    certify_both, certify_subsolution, certify_supersolution, compare, gamma_subharmonic_check,
    CertifyOptions, OperatorSpec, Rhs, SuperDefinition, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn operators(n: usize) -> Vec<OperatorSpec> {
    vec![
        OperatorSpec::monge_ampere(n, Rhs::constant(1.0)).unwrap(),
        OperatorSpec::quotient(2, 1, n, Rhs::constant(1.0)).unwrap(),
        OperatorSpec::lagrangian(n, Rhs::constant(FRAC_PI_2), 0.5).unwrap(),
    ]
}

#[test]
fn supersolution_definitions_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let g = unit_ball(2, 0.25);
    let mut split = [0usize; 2];
    for op in operators(2) {
        for _ in 0..30 {
            let u = random_smooth(&g, &mut rng);
            let mut opts = CertifyOptions::with_tol(1e-3);
            let cone =
                certify_supersolution(&u, &op, &opts, SuperDefinition::ConeRestricted).unwrap();
            let inf = certify_supersolution(&u, &op, &opts, SuperDefinition::InfOverN).unwrap();
            opts.psd_sampling = true;
            let sampled = certify_supersolution(&u, &op, &opts, SuperDefinition::InfOverN).unwrap();
            assert_eq!(cone.verdict, inf.verdict);
            assert_eq!(cone.verdict, sampled.verdict);
            split[cone.is_super() as usize] += 1;
        }
    }
    // The fields exercise both outcomes.
    assert!(split[0] > 0 && split[1] > 0, "{split:?}");
}

#[test]
fn nodes_outside_the_cone_pass_vacuously() {
    let g = unit_ball(2, 0.25);
    let u = GridField::from_fn(&g, |x| -r2(x));
    let opts = CertifyOptions::with_tol(1e-12);
    for op in operators(2) {
        for def in [SuperDefinition::InfOverN, SuperDefinition::ConeRestricted] {
            assert!(certify_supersolution(&u, &op, &opts, def)
                .unwrap()
                .is_super());
        }
        assert!(!certify_subsolution(&u, &op, &opts).unwrap().is_sub());
    }
}

/// On C² data the discrete jet is consistent: once the worst margin clears C·h at
/// both resolutions, the verdicts at h and h/2 coincide.
#[test]
fn verdicts_are_consistent_under_refinement() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let (coarse, fine) = (unit_ball(1, 1.0 / 16.0), unit_ball(1, 1.0 / 32.0));
    let op = OperatorSpec::monge_ampere(1, Rhs::of_z("1+x", |z| 1.0 + 0.5 * z[0])).unwrap();
    let mut compared = 0;
    for _ in 0..40 {
        let seed: u64 = rng.random();
        let u_c = random_smooth(&coarse, &mut ChaCha8Rng::seed_from_u64(seed));
        let u_f = random_smooth(&fine, &mut ChaCha8Rng::seed_from_u64(seed));
        let opts = CertifyOptions::with_tol(0.0);
        let a = certify_subsolution(&u_c, &op, &opts).unwrap();
        let b = certify_subsolution(&u_f, &op, &opts).unwrap();
        let gate = 1.0 * coarse.h();
        if a.worst_margin().abs() > gate && b.worst_margin().abs() > gate {
            assert_eq!(
                a.verdict,
                b.verdict,
                "margins {} {}",
                a.worst_margin(),
                b.worst_margin()
            );
            compared += 1;
        }
    }
    assert!(compared >= 20, "only {compared} fields cleared the gate");
}

#[test]
fn certified_subsolutions_are_gamma_subharmonic() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let g = unit_ball(2, 0.25);
    let tol = 10.0 * g.h();
    let mut certified = 0;
    for op in operators(2) {
        for _ in 0..30 {
            let u = random_smooth(&g, &mut rng);
            if certify_subsolution(&u, &op, &CertifyOptions::with_tol(1e-3))
                .unwrap()
                .is_sub()
            {
                certified += 1;
                assert!(gamma_subharmonic_check(&u, &op.cone, tol).unwrap().ok);
            }
        }
    }
    assert!(certified > 10);
}

#[test]
fn gamma_check_examples() {
    let g = unit_ball(2, 0.25);
    let bowl = GridField::from_fn(&g, r2);
    assert!(
        gamma_subharmonic_check(&bowl, &ConeSpec::gamma(2, 2).unwrap(), 0.0)
            .unwrap()
            .ok
    );
    // Re(z_1²) is pluriharmonic, so its spectrum is 0 and the margin is 0.
    let re = GridField::from_fn(&g, |x| x[0] * x[0] - x[1] * x[1]);
    let r = gamma_subharmonic_check(&re, &ConeSpec::gamma(1, 2).unwrap(), 1e-12).unwrap();
    assert!(r.ok);
    assert!(r.worst.unwrap().margin.abs() < 1e-12);
    let cap = GridField::from_fn(&g, |x| -r2(x));
    assert!(
        !gamma_subharmonic_check(&cap, &ConeSpec::gamma(1, 2).unwrap(), 0.1)
            .unwrap()
            .ok
    );
}

fn quartic_rhs(n: usize) -> Rhs {
    Rhs::of_z("quartic", move |z| {
        s_norm(
            n,
            &LambdaVector::from_slice(&quartic_spectrum(n, z)).unwrap(),
        )
        .unwrap()
    })
}

/// Solver outputs certify as both sub- and supersolutions at 5 × the scheme residual.
#[test]
fn solutions_certify_both() {
    let cases = [
        (
            OperatorSpec::monge_ampere(1, quartic_rhs(1)).unwrap(),
            1.0 / 16.0,
        ),
        (
            OperatorSpec::quotient(
                2,
                1,
                2,
                Rhs::of_z("quartic", |z| {
                    let lam = LambdaVector::from_slice(&quartic_spectrum(2, z)).unwrap();
                    s_norm(2, &lam).unwrap() / s_norm(1, &lam).unwrap()
                }),
            )
            .unwrap(),
            0.25,
        ),
    ];
    for (op, h) in cases {
        let n = op.n();
        let cfg = SolveConfig::new(
            op.clone(),
            DomainSpec::ball(n, 1.0).unwrap(),
            Arc::new(quartic),
            h,
        );
        let (u, report) = solve(&cfg).unwrap();
        let opts = CertifyOptions::with_tol(5.0 * report.residual.max(1e-12));
        let (verdict, sub, sup) = certify_both(&u, &op, &opts).unwrap();
        assert_eq!(verdict, Verdict::Both, "n = {n}: {sub:?} {sup:?}");
        assert!(gamma_subharmonic_check(&u, &op.cone, 10.0 * h).unwrap().ok);
    }
}

#[test]
fn comparison_examples() {
    let g = unit_ball(2, 0.25);
    let op = OperatorSpec::monge_ampere(2, Rhs::constant(1.0)).unwrap();
    let exact = GridField::from_fn(&g, r2);
    let r = compare(&exact, &exact, &op, Some(&CertifyOptions::with_tol(1e-9))).unwrap();
    assert!(r.principle_ok);
    assert_eq!(r.interior_gap, r.boundary_gap);
    assert_eq!(
        (r.sub_certified, r.super_certified),
        (Some(true), Some(true))
    );
    // Lowering by an interior bump keeps the band and opens a strict interior gap.
    let mut low = exact.clone();
    for &i in g.interior() {
        let x = g.coords(i);
        low.values_mut()[i] -= 0.1 * (1.0 - r2(&x)).max(0.0).powi(3);
    }
    let r = compare(&low, &exact, &op, None).unwrap();
    assert!(r.principle_ok);
    assert!(r.interior_gap < 0.0 && r.boundary_gap == 0.0);
    // Swapped roles break the principle by more than C·h.
    let r = compare(
        &GridField::from_fn(&g, |x| r2(x) + 0.5 * (1.0 - r2(x))),
        &exact,
        &op,
        None,
    )
    .unwrap();
    assert!(!r.principle_ok);
}

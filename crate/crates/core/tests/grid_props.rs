mod common;

use std::io::Cursor;
use std::sync::Arc;

use common::unit_ball;
use hessiasol::grid::{
    complex_hessian, harmonic_extend, DomainSpec, Grid, GridField, NodeClass, Shape,
};
use hessiasol::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ∂_{z_j}∂_{z̄_k} of a real quadratic ½xᵀQx, from the 2n×2n matrix Q
/// with coordinates ordered (x_1, y_1, ..., x_n, y_n).
fn complex_hessian_of_quadratic(q: &[Vec<f64>], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for k in 0..n {
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            out[j * n + k] = 0.25 * Complex64::new(q[xj][xk] + q[yj][yk], q[xj][yk] - q[yj][xk]);
        }
    }
    out
}

#[test]
fn hessian_is_exact_on_real_quadratics() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        let h = if n == 3 { 0.25 } else { 0.125 };
        let g = unit_ball(n, h);
        let d = 2 * n;
        for _ in 0..3 {
            let mut q = vec![vec![0.0; d]; d];
            for a in 0..d {
                for b in a..d {
                    let v: f64 = rng.random_range(-2.0..2.0);
                    q[a][b] = v;
                    q[b][a] = v;
                }
            }
            let lin: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let qc = q.clone();
            let u = GridField::from_fn(&g, move |x| {
                let quad: f64 = (0..d)
                    .map(|a| (0..d).map(|b| qc[a][b] * x[a] * x[b]).sum::<f64>())
                    .sum();
                0.5 * quad + x.iter().zip(&lin).map(|(a, b)| a * b).sum::<f64>() + 0.3
            });
            let want = complex_hessian_of_quadratic(&q, n);
            let field = complex_hessian(&u).unwrap();
            for hm in &field.hessians {
                for (a, b) in hm.as_slice().iter().zip(&want) {
                    assert!((a - b).norm() < 1e-11, "n = {n}: {a} vs {b}");
                }
            }
        }
    }
}

/// u = e^{x_1} cos y_1 is pluriharmonic, so the exact complex Hessian vanishes and
/// the discrete one is the truncation error ¼·(h²/12)·(∂⁴_x + ∂⁴_y)u = (h²/24)·e^{x_1} cos y_1.
#[test]
fn hessian_converges_at_second_order() {
    let f = |x: &[f64]| x[0].exp() * x[1].cos();
    let probe = [0.25, -0.125];
    let err_at = |h: f64| -> f64 {
        let g = unit_ball(1, h);
        let u = GridField::from_fn(&g, f);
        let node = g.locate(&probe).unwrap();
        assert_eq!(g.class(node), NodeClass::Interior);
        g.hessian_at(u.values(), node).unwrap().get(0, 0).re.abs()
    };
    let coarse = err_at(1.0 / 16.0);
    let fine = err_at(1.0 / 32.0);
    let order = (coarse / fine).log2();
    assert!((1.8..=2.2).contains(&order), "observed order {order}");
    let predicted = (1.0 / 32.0f64).powi(2) / 24.0 * f(&probe);
    assert!((fine - predicted).abs() < 0.05 * predicted);
}

#[test]
fn trace_is_a_quarter_of_the_laplacian() {
    let g = unit_ball(2, 0.125);
    let u = GridField::from_fn(&g, |x| {
        (x[0] * x[3]).sin() + x[1].exp() * x[2] + x[0] * x[0] * x[1]
    });
    for &i in g.interior() {
        let hm = g.hessian_at(u.values(), i).unwrap();
        let tr: f64 = (0..2).map(|j| hm.get(j, j).re).sum();
        let lap = g.laplacian_at(u.values(), i);
        assert!((tr - 0.25 * lap).abs() <= 1e-12 * (1.0 + lap.abs()));
    }
}

#[test]
fn harmonic_extension_has_the_mean_value_property() {
    let g = unit_ball(1, 1.0 / 16.0);
    let tol = 1e-10;
    let u = harmonic_extend(
        &g,
        &|x: &[f64]| x[0] * x[0] - 0.5 * x[1] + (3.0 * x[1]).cos(),
        tol,
    )
    .unwrap();
    let strides = [g.stride(0), g.stride(1)];
    for &i in g.interior() {
        let mean = strides
            .iter()
            .map(|&s| u.value(i + s) + u.value(i - s))
            .sum::<f64>()
            / 4.0;
        assert!((mean - u.value(i)).abs() <= tol);
    }
    // Maximum principle: interior values stay within the band range.
    let (lo, hi) = g
        .band()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &j| {
            (a.min(u.value(j)), b.max(u.value(j)))
        });
    assert!(g
        .interior()
        .iter()
        .all(|&i| u.value(i) >= lo - 1e-9 && u.value(i) <= hi + 1e-9));
}

#[test]
fn harmonic_extension_reproduces_harmonic_data() {
    let g = unit_ball(2, 0.25);
    let phi = |x: &[f64]| x[0] * x[0] - x[3] * x[3] + 2.0 * x[1] * x[2] + x[0];
    let u = harmonic_extend(&g, &phi, 1e-12).unwrap();
    for &i in g.interior() {
        assert!((u.value(i) - phi(&g.coords(i))).abs() < 1e-9);
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let g = unit_ball(1, 0.1);
    let u = GridField::from_fn(&g, |x| (x[0] * 7.3).sin() / 3.0 + x[1] * 1e-7);
    let mut buf = Vec::new();
    u.write_csv(&mut buf).unwrap();
    let back = GridField::read_csv(&g, Cursor::new(&buf)).unwrap();
    assert_eq!(back, u);
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x_1,y_1,value,class\n"));
}

#[test]
fn csv_rejects_other_grids_and_missing_rows() {
    let g = unit_ball(1, 0.1);
    let u = GridField::constant(&g, 1.0);
    let mut buf = Vec::new();
    u.write_csv(&mut buf).unwrap();
    let other = unit_ball(1, 0.2);
    assert!(matches!(
        GridField::read_csv(&other, Cursor::new(&buf)),
        Err(Error::GridMismatch(_))
    ));
    let text = String::from_utf8(buf).unwrap();
    let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    assert!(matches!(
        GridField::read_csv(&g, Cursor::new(truncated.as_bytes())),
        Err(Error::GridMismatch(_))
    ));
    let garbled = text.replacen(",I\n", ",Q\n", 1);
    assert!(GridField::read_csv(&g, Cursor::new(garbled.as_bytes())).is_err());
}

#[test]
fn classification_is_consistent_on_boxes() {
    let d = DomainSpec::new(
        Shape::Box {
            half_widths: vec![0.5, 0.75],
        },
        1,
        vec![0.1, -0.2],
    )
    .unwrap();
    let g = Grid::new(d, 0.125).unwrap();
    for &i in g.interior() {
        assert!(g.domain().contains(&g.coords(i)));
    }
    for &b in g.band() {
        assert!(!g.domain().contains(&g.coords(b)));
    }
    // Interior stencils never reach exterior nodes, so every update reads defined data.
    for &i in g.interior() {
        for off in g.stencil_offsets() {
            assert_ne!(g.class((i as isize + off) as usize), NodeClass::Exterior);
        }
    }
    let u = GridField::from_fn(&g, |x| x[0] * x[1]);
    assert_eq!(u.grid().as_ref(), Arc::as_ref(&g));
}

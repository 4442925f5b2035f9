//! Test-side oracles. None of these route through the library's numerics.
#![allow(dead_code)]

use std::sync::Arc;

use hessiasol::grid::{DomainSpec, Grid, GridField};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = Vec<Vec<Complex64>>;

/// C(n, k) by the multiplicative formula.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// k-element index sets as bitmasks over 0..n.
pub fn masks(n: usize, k: usize) -> impl Iterator<Item = u32> {
    (0u32..(1 << n)).filter(move |m| m.count_ones() as usize == k)
}

fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// e_k as a sum of products over all k-subsets.
pub fn elementary_brute(lam: &[f64], k: usize) -> f64 {
    masks(lam.len(), k)
        .map(|m| members(m).iter().map(|&i| lam[i]).product::<f64>())
        .sum()
}

/// S_k = e_k / C(n, k), so S_k(1, ..., 1) = 1.
pub fn s_norm_brute(lam: &[f64], k: usize) -> f64 {
    elementary_brute(lam, k) / binom(lam.len(), k)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut m: CMat) -> Complex64 {
    let n = m.len();
    let mut d = Complex64::new(1.0, 0.0);
    for c in 0..n {
        let p = (c..n)
            .max_by(|&a, &b| m[a][c].norm().total_cmp(&m[b][c].norm()))
            .unwrap();
        if m[p][c].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..n {
                let v = m[c][j];
                m[r][j] -= f * v;
            }
        }
    }
    d
}

/// ⟨x, y⟩ = Σ x_l · conj(y_l).
fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// S_k(XY*) as the averaged k×k principal minors of the Gram matrix (⟨x_i, y_j⟩).
pub fn gram_s_k(x: &CMat, y: &CMat, k: usize) -> Complex64 {
    let n = x.len();
    let total: Complex64 = masks(n, k)
        .map(|m| {
            let idx = members(m);
            det(idx
                .iter()
                .map(|&i| idx.iter().map(|&j| inner(&x[i], &y[j])).collect())
                .collect())
        })
        .sum();
    total / binom(n, k)
}

/// (S_k(AA*)·S_k(BB*) − |S_k(AB*)|², S_k(AA*)·S_k(BB*)) in Gram form.
pub fn lemma_gap_gram(a: &CMat, b: &CMat, k: usize) -> (f64, f64) {
    let saa = gram_s_k(a, a, k).re;
    let sbb = gram_s_k(b, b, k).re;
    let sab = gram_s_k(a, b, k);
    (saa * sbb - sab.norm_sqr(), saa * sbb)
}

pub fn random_cmat<R: Rng>(n: usize, rng: &mut R) -> CMat {
    (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect()
}

pub fn flatten(m: &CMat) -> Vec<Complex64> {
    m.iter().flatten().copied().collect()
}

/// |z|² over the real coordinates.
pub fn r2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Spectrum of the complex Hessian of |z|⁴ + |z|², worked by hand:
/// ∂_i ∂̄_j |z|⁴ = 2(z̄_i z_j + |z|² δ_ij), eigenvalue 4|z|² along z and 2|z|² across.
pub fn quartic_spectrum(n: usize, x: &[f64]) -> Vec<f64> {
    let r = r2(x);
    (0..n)
        .map(|i| if i == 0 { 1.0 + 4.0 * r } else { 1.0 + 2.0 * r })
        .collect()
}

pub fn quartic(x: &[f64]) -> f64 {
    let r = r2(x);
    r * r + r
}

pub fn unit_ball(n: usize, h: f64) -> Arc<Grid> {
    Grid::new(DomainSpec::ball(n, 1.0).unwrap(), h).unwrap()
}

/// max over closure nodes of |u − exact|.
pub fn sup_error(u: &GridField, exact: impl Fn(&[f64]) -> f64) -> f64 {
    let g = u.grid();
    g.closure_nodes()
        .iter()
        .map(|&i| (u.value(i) - exact(&g.coords(i))).abs())
        .fold(0.0, f64::max)
}

/// The four sign clauses for a sorted-descending supercritical phase vector,
/// checked directly: λ_{n−1} > 0, |λ_n| ≤ λ_{n−1}, Σλ ≥ 0, and Σ1/λ ≤ −tan δ when λ_n < 0.
pub fn phase_clauses(lam: &[f64], delta: f64) -> [bool; 4] {
    let mut s = lam.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let n = s.len();
    let (prev, last) = (s[n - 2], s[n - 1]);
    let recip = if last < 0.0 {
        let sum: f64 = s.iter().map(|v| 1.0 / v).sum();
        let scale: f64 = s.iter().map(|v| (1.0 / v).abs()).sum::<f64>() + delta.tan();
        sum <= -delta.tan() + 1e-12 * scale
    } else {
        true
    };
    [
        prev > 0.0,
        last.abs() <= prev,
        s.iter().sum::<f64>() >= 0.0,
        recip,
    ]
}

/// Rejection sample of λ with Σ arctan λ_i ≥ (n−2)π/2 + δ; entries drawn as tan of
/// uniform angles so the whole supercritical region is reachable.
pub fn supercritical_sample<R: Rng>(n: usize, delta: f64, rng: &mut R) -> Vec<f64> {
    let floor = (n as f64 - 2.0) * std::f64::consts::FRAC_PI_2 + delta;
    loop {
        let angles: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2))
            .collect();
        if angles.iter().sum::<f64>() >= floor {
            let lam: Vec<f64> = angles.iter().map(|a| a.tan()).collect();
            if lam.iter().all(|v| v.is_finite() && v.abs() < 1e12) {
                return lam;
            }
        }
    }
}

/// a|z|² plus a random smooth perturbation; a near 1 so verdicts split both ways.
pub fn random_smooth<R: Rng>(g: &Arc<Grid>, rng: &mut R) -> GridField {
    let d = g.dim();
    let a: f64 = rng.random_range(0.6..1.4);
    let quad: Vec<f64> = (0..d * d).map(|_| rng.random_range(-0.3..0.3)).collect();
    let waves: Vec<(Vec<f64>, f64)> = (0..3)
        .map(|_| {
            (
                (0..d).map(|_| rng.random_range(-2.0..2.0)).collect(),
                rng.random_range(-0.1..0.1),
            )
        })
        .collect();
    GridField::from_fn(g, move |x| {
        let q: f64 = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| quad[i * d + j] * x[i] * x[j])
            .sum();
        let w: f64 = waves
            .iter()
            .map(|(k, c)| c * k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().sin())
            .sum();
        a * r2(x) + q + w
    })
}

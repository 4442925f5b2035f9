//! Jensen sup/inf convolutions, upper contact sets and the ABP volume check.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::{Grid, GridField, NodeClass};
use crate::hermitian::{eigenvalues, HermitianMatrix};

/// Penalty (c0/eps)|z'−z|².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionParams {
    pub eps: f64,
    pub c0: f64,
}

impl ConvolutionParams {
    pub fn new(eps: f64, c0: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return domain("eps must be positive");
        }
        if !(c0 >= 0.0 && c0.is_finite()) {
            return domain("c0 must be non-negative");
        }
        Ok(Self { eps, c0 })
    }

    /// c0 = max of the two oscillations, as used for paired fields.
    pub fn for_pair(eps: f64, u: &GridField, v: &GridField) -> Result<Self> {
        Self::new(eps, u.oscillation().max(v.oscillation()))
    }

    fn weight(&self) -> f64 {
        self.c0 / self.eps
    }
}

/// u^ε(z) = max over closure nodes z' of u(z') − (c0/ε)|z'−z|².
///
/// Computed by one exact 1-D pass per real axis with exterior nodes at −∞.
/// Exterior outputs keep their input value.
pub fn sup_convolution(u: &GridField, params: ConvolutionParams) -> GridField {
    let g = u.grid();
    let mut work: Vec<f64> = (0..g.len())
        .map(|i| {
            if g.class(i) == NodeClass::Exterior {
                f64::NEG_INFINITY
            } else {
                u.value(i)
            }
        })
        .collect();
    let w = params.weight() * g.h() * g.h();
    let mut line = Vec::new();
    let mut out_line = Vec::new();
    for axis in 0..g.dim() {
        let m = g.counts()[axis];
        let stride = g.stride(axis);
        for start in 0..g.len() {
            if g.axis_index(start, axis) != 0 {
                continue;
            }
            line.clear();
            line.extend((0..m).map(|i| work[start + i * stride]));
            out_line.clear();
            out_line.extend((0..m).map(|i| {
                line.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let d = i as f64 - j as f64;
                        v - w * d * d
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            }));
            for (i, &v) in out_line.iter().enumerate() {
                work[start + i * stride] = v;
            }
        }
    }
    for (i, v) in work.iter_mut().enumerate() {
        if g.class(i) == NodeClass::Exterior {
            *v = u.value(i);
        }
    }
    GridField::new(g.clone(), work).expect("finite sup over non-empty closure")
}

/// v_ε = −(−v)^ε, the mirrored inf-convolution.
pub fn inf_convolution(v: &GridField, params: ConvolutionParams) -> GridField {
    sup_convolution(&v.map(|x| -x), params).map(|x| -x)
}

/// Brute-force sup-convolution over closure nodes, returning the value and a
/// maximizing node for every closure node. O(N²); used for diagnostics.
pub fn sup_convolution_brute(
    u: &GridField,
    params: ConvolutionParams,
) -> (GridField, Vec<Option<usize>>) {
    let g = u.grid();
    let closure = g.closure_nodes();
    let coords: Vec<Vec<f64>> = closure.iter().map(|&i| g.coords(i)).collect();
    let w = params.weight();
    let mut values = u.values().to_vec();
    let mut arg = vec![None; g.len()];
    for (a, &i) in closure.iter().enumerate() {
        let mut best = f64::NEG_INFINITY;
        let mut best_node = i;
        for (b, &j) in closure.iter().enumerate() {
            let d2: f64 = coords[a]
                .iter()
                .zip(&coords[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            let v = u.value(j) - w * d2;
            if v > best {
                best = v;
                best_node = j;
            }
        }
        values[i] = best;
        arg[i] = Some(best_node);
    }
    (GridField::new(g.clone(), values).expect("finite"), arg)
}

/// Smallest eigenvalue of the discrete real Hessian over the given nodes.
pub fn min_real_hessian_eigenvalue(u: &GridField, nodes: &[usize]) -> Result<f64> {
    let g = u.grid();
    let d = g.dim();
    let mut worst = f64::INFINITY;
    for &i in nodes {
        let m = HermitianMatrix::from_real(d, &g.real_hessian_at(u.values(), i))?;
        let ev = eigenvalues(&m)?;
        worst = worst.min(ev.as_slice()[d - 1]);
    }
    Ok(worst)
}

/// Smallest curvature (u(x+he) − 2u(x) + u(x−he))/(h²|e|²) over interior nodes and the lattice
/// directions e_a, e_a ± e_b. Unlike the eigenvalue form this never straddles a kink across two axes,
/// so for a sup-convolution with weight w it is ≥ −2w exactly.
pub fn min_directional_curvature(u: &GridField) -> f64 {
    let g = u.grid();
    let h2 = g.h() * g.h();
    let d = g.dim();
    let stride = |a: usize| g.stride(a) as isize;
    let mut dirs: Vec<(isize, f64)> = (0..d).map(|a| (stride(a), 1.0)).collect();
    for a in 0..d {
        for b in a + 1..d {
            dirs.push((stride(a) + stride(b), 2.0));
            dirs.push((stride(a) - stride(b), 2.0));
        }
    }
    let mut worst = f64::INFINITY;
    for &i in g.interior() {
        for &(s, len2) in &dirs {
            // Interior nodes keep every neighbour inside the node array.
            let (p, m) = ((i as isize + s) as usize, (i as isize - s) as usize);
            if g.class(p) == NodeClass::Exterior || g.class(m) == NodeClass::Exterior {
                continue;
            }
            worst = worst.min((u.value(p) - 2.0 * u.value(i) + u.value(m)) / (len2 * h2));
        }
    }
    worst
}

/// Largest Euclidean norm of the centered real gradient over the given nodes.
pub fn max_gradient_norm(u: &GridField, nodes: &[usize]) -> f64 {
    let g = u.grid();
    nodes
        .iter()
        .map(|&i| {
            g.real_gradient_at(u.values(), i)
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Upper contact set of radius δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactSet {
    pub delta: f64,
    /// Interior nodes with a supporting plane of slope in the p-net of B(0, δ).
    pub members: Vec<usize>,
    /// members × h^{dim}.
    pub measure: f64,
    /// Interior nodes whose own centered gradient g has |g| ≤ δ and whose plane of slope g supports u.
    pub gradient_members: Vec<usize>,
    pub gradient_measure: f64,
    pub net_spacing: f64,
    pub net_size: usize,
}

/// Default p-net spacing as a fraction of δ.
pub const NET_FRACTION: f64 = 1.0 / 8.0;

fn support_tol(u: &GridField) -> f64 {
    1e-12 * (1.0 + u.values().iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

/// Cubic lattice of spacing `spacing` clipped to the closed ball B(0, δ) in ℝ^dim.
fn p_net(dim: usize, delta: f64, spacing: f64) -> Vec<Vec<f64>> {
    let m = (delta / spacing).floor() as i64;
    let side = (2 * m + 1) as usize;
    let total = side.pow(dim as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let p: Vec<f64> = (0..dim)
            .map(|_| {
                let i = (c % side) as i64 - m;
                c /= side;
                i as f64 * spacing
            })
            .collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= delta * delta * (1.0 + 1e-12) {
            out.push(p);
        }
    }
    out
}

/// E_δ on the grid. Both the literal p-net membership and the gradient-supported
/// subset are reported; planes are tested against every interior and band node.
pub fn contact_set(u: &GridField, delta: f64) -> Result<ContactSet> {
    contact_set_with_spacing(u, delta, delta * NET_FRACTION)
}

pub fn contact_set_with_spacing(u: &GridField, delta: f64, spacing: f64) -> Result<ContactSet> {
    if !(delta > 0.0) || !(spacing > 0.0) {
        return domain("delta and net spacing must be positive");
    }
    let g = u.grid();
    let closure = g.closure_nodes();
    let coords: Vec<Vec<f64>> = (0..g.len()).map(|i| g.coords(i)).collect();
    let tol = support_tol(u);
    let plane_max = |p: &[f64]| -> f64 {
        closure
            .iter()
            .map(|&z| u.value(z) - dot(p, &coords[z]))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let net = p_net(g.dim(), delta, spacing);
    let mut is_member = vec![false; g.len()];
    for p in &net {
        let top = plane_max(p);
        for &x in g.interior() {
            if u.value(x) - dot(p, &coords[x]) >= top - tol {
                is_member[x] = true;
            }
        }
    }
    let members: Vec<usize> = g
        .interior()
        .iter()
        .copied()
        .filter(|&x| is_member[x])
        .collect();
    let mut gradient_members = Vec::new();
    for &x in g.interior() {
        let grad = g.real_gradient_at(u.values(), x);
        if dot(&grad, &grad) > delta * delta {
            continue;
        }
        if u.value(x) - dot(&grad, &coords[x]) >= plane_max(&grad) - tol {
            gradient_members.push(x);
        }
    }
    let vol = g.node_volume();
    Ok(ContactSet {
        delta,
        measure: members.len() as f64 * vol,
        gradient_measure: gradient_members.len() as f64 * vol,
        members,
        gradient_members,
        net_spacing: spacing,
        net_size: net.len(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Volume of the unit ball in ℝ^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbpEntry {
    pub delta: f64,
    /// Gradient-supported measure of E_δ.
    pub volume: f64,
    /// Literal p-net measure of E_δ.
    pub net_volume: f64,
    /// volume / δ^dim.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbpReport {
    pub delta0: f64,
    pub entries: Vec<AbpEntry>,
    pub bound_ok: bool,
    pub dimension: usize,
    pub k: f64,
    /// Lower bound for `ratio`: half of ω_dim/(2k)^dim.
    pub ratio_floor: f64,
    pub min_hessian_eigenvalue: f64,
    pub semi_convex: bool,
    /// The precondition failed, so the bound says nothing about this field.
    pub vacuous: bool,
}

/// ABP check in real dimension 2n: δ0 = (max interior − max band)/diam and
/// |E_δ| at δ ∈ {δ0/8, δ0/4, δ0/2}.
pub fn abp_check(u: &GridField, k: f64) -> Result<AbpReport> {
    if !(k > 0.0) {
        return domain("semi-convexity constant must be positive");
    }
    let g: &Arc<Grid> = u.grid();
    let delta0 = (u.max_interior() - u.max_band()) / g.domain().diameter();
    if !(delta0 > 0.0) {
        return domain(format!(
            "no interior maximum above the boundary (delta0 = {delta0})"
        ));
    }
    let dim = g.dim();
    let min_eig = min_real_hessian_eigenvalue(u, g.interior())?;
    let semi_convex = min_eig >= -2.0 * k * (1.0 + 1e-9);
    let ratio_floor = 0.5 * unit_ball_volume(dim) / (2.0 * k).powi(dim as i32);
    let mut entries = Vec::new();
    for frac in [8.0, 4.0, 2.0] {
        let delta = delta0 / frac;
        let cs = contact_set(u, delta)?;
        entries.push(AbpEntry {
            delta,
            volume: cs.gradient_measure,
            net_volume: cs.measure,
            ratio: cs.gradient_measure / delta.powi(dim as i32),
        });
    }
    let bound_ok = entries.iter().all(|e| e.ratio >= ratio_floor);
    Ok(AbpReport {
        delta0,
        entries,
        bound_ok,
        dimension: dim,
        k,
        ratio_floor,
        min_hessian_eigenvalue: min_eig,
        semi_convex,
        vacuous: !semi_convex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainSpec;

    fn grid(h: f64) -> Arc<Grid> {
        Grid::new(DomainSpec::ball(1, 1.0).unwrap(), h).unwrap()
    }

    #[test]
    fn constant_is_fixed() {
        let g = grid(0.125);
        let u = GridField::constant(&g, 3.0);
        let p = ConvolutionParams::new(0.1, 1.0).unwrap();
        assert_eq!(sup_convolution(&u, p), u);
    }

    #[test]
    fn separable_matches_brute_force() {
        let g = grid(0.125);
        let u = GridField::from_fn(&g, |x| (3.0 * x[0]).sin() * x[1] + (x[0] - x[1]).abs());
        let p = ConvolutionParams::new(0.05, u.oscillation()).unwrap();
        let fast = sup_convolution(&u, p);
        let (slow, _) = sup_convolution_brute(&u, p);
        for i in g.closure_nodes() {
            assert!((fast.value(i) - slow.value(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn inf_mirrors_sup_exactly() {
        let g = grid(0.125);
        let u = GridField::from_fn(&g, |x| x[0] * x[0] - 0.3 * x[1]);
        let p = ConvolutionParams::new(0.2, 0.7).unwrap();
        assert_eq!(
            inf_convolution(&u.map(|v| -v), p),
            sup_convolution(&u, p).map(|v| -v)
        );
    }

    #[test]
    fn linear_closed_form() {
        // a/(2w) = 0.25 is a grid multiple, so the discrete maximizer is exact.
        let g = Grid::new(DomainSpec::ball(1, 2.0).unwrap(), 0.125).unwrap();
        let a = [1.0, 0.5];
        let p = ConvolutionParams::new(0.5, 1.0).unwrap();
        let u = GridField::from_fn(&g, |x| a[0] * x[0] + a[1] * x[1]);
        let ue = sup_convolution(&u, p);
        let shift = p.eps * (a[0] * a[0] + a[1] * a[1]) / (4.0 * p.c0);
        let mut x = [0.0; 2];
        for &i in g.interior() {
            g.coords_into(i, &mut x);
            if x[0] * x[0] + x[1] * x[1] < 1.0 {
                assert!((ue.value(i) - u.value(i) - shift).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contact_set_of_convex_bowl_is_empty() {
        let g = grid(0.0625);
        let u = GridField::from_fn(&g, |x| x[0] * x[0] + x[1] * x[1]);
        let cs = contact_set(&u, 0.3).unwrap();
        assert!(cs.members.is_empty() && cs.gradient_members.is_empty());
    }

    #[test]
    fn contact_set_of_linear_is_everything() {
        let g = grid(0.125);
        // Slope on the p-net lattice of spacing δ/8.
        let u = GridField::from_fn(&g, |x| 0.125 * x[0] - 0.0625 * x[1]);
        let cs = contact_set(&u, 0.25).unwrap();
        assert_eq!(cs.gradient_members.len(), g.interior().len());
        assert_eq!(cs.members.len(), g.interior().len());
    }

    #[test]
    fn abp_rejects_flat() {
        let g = grid(0.125);
        assert!(abp_check(&GridField::constant(&g, 1.0), 1.0).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-14);
    }
}

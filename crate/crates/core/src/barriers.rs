//! Explicit barriers: the existence bundle (A₁ρ + h) + A₂ρ over the harmonic
//! extension, pointwise Hölder barriers h_ξ and their global envelope.
//!
//! Barriers use the discrete closure radius R_h (largest band-node radius), so
//! ρ_h = (|z−c|² − R_h²)/(2R_h) is ≤ 0 on every interior and band node.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cones::distance_slice;
use crate::error::{domain, Error, Result};
use crate::grid::{ball_defining_field, harmonic_extend, Grid, GridField};
use crate::viscosity::{
    certify_subsolution, certify_supersolution, compare, gamma_subharmonic_check, node_spectra,
    Certificate, CertifyOptions, ComparisonReport, OperatorSpec, Rhs, SuperDefinition,
};

/// Doubling searches stop at 2^60.
pub const DOUBLING_CAP: u32 = 60;
pub const HARMONIC_TOL: f64 = 1e-11;

pub type BoundaryFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Largest distance from the center over band nodes.
pub fn closure_radius(grid: &Grid) -> f64 {
    let c = &grid.domain().center;
    let mut x = vec![0.0; grid.dim()];
    grid.band()
        .iter()
        .map(|&b| {
            grid.coords_into(b, &mut x);
            x.iter()
                .zip(c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct BarrierBundle {
    pub subsolution: GridField,
    pub supersolution: GridField,
    pub a1: f64,
    pub a2: f64,
    pub sub_certificate: Certificate,
    pub super_certificate: Certificate,
    pub log: Vec<String>,
}

fn all_in_cone(u: &GridField, op: &OperatorSpec) -> Result<bool> {
    let s = node_spectra(u, u.grid().interior())?;
    Ok(s.lambdas
        .chunks(s.n)
        .all(|l| op.cone.contains_slice(l, true)))
}

/// Sub/supersolution pair around the harmonic extension of φ.
pub fn build_bundle(
    op: &OperatorSpec,
    grid: &Arc<Grid>,
    phi: &BoundaryFn,
) -> Result<BarrierBundle> {
    let mut log = Vec::new();
    let harm = harmonic_extend(grid, phi, HARMONIC_TOL)?;
    let r = closure_radius(grid);
    let rho = ball_defining_field(grid, &grid.domain().center, r);
    let combine = |a: f64| harm.zip_with(&rho, |h, p| h + a * p).expect("same grid");

    let mut a1 = 1.0;
    let mut j = 0;
    while !all_in_cone(&combine(a1), op)? {
        j += 1;
        if j > DOUBLING_CAP {
            return Err(Error::Construction(
                "A1 search exceeded the doubling cap".into(),
            ));
        }
        a1 *= 2.0;
    }
    log.push(format!("A1 = {a1} puts λ(H(A1ρ + h)) in the closed cone"));

    let n = op.n();
    let (hmin, hmax) = (harm.min_closure(), harm.max_closure());
    let mut x = vec![0.0; grid.dim()];
    let mut psi_max = 0.0f64;
    for i in grid.closure_nodes() {
        grid.coords_into(i, &mut x);
        psi_max = psi_max
            .max(op.rhs_value(&x, hmin))
            .max(op.rhs_value(&x, hmax));
    }
    let base = 1.0 / (2.0 * r);
    let split = |a2: f64| -> f64 {
        let lam = vec![2.0 * a2 * base; n];
        0.5 * op.lhs(&lam)
    };
    let mut a2 = 1.0;
    j = 0;
    // The phase operator is not homogeneous; certification alone drives A2.
    while !op.is_phase() && split(a2) < psi_max {
        j += 1;
        if j > DOUBLING_CAP {
            return Err(Error::Construction(
                "A2 search exceeded the doubling cap".into(),
            ));
        }
        a2 *= 2.0;
    }
    log.push(format!(
        "A2 = {a2} from the concavity split against max ψ = {psi_max}"
    ));

    let opts = CertifyOptions {
        tol: 0.0,
        kink_threshold: None,
        psd_sampling: false,
    };
    loop {
        let sub = combine(a1 + a2);
        let cert = certify_subsolution(&sub, op, &opts)?;
        if cert.is_sub() {
            let sup_cert = certify_supersolution(&harm, op, &opts, SuperDefinition::InfOverN)?;
            log.push(format!("bundle certified with A2 = {a2}"));
            return Ok(BarrierBundle {
                subsolution: sub,
                supersolution: harm,
                a1,
                a2,
                sub_certificate: cert,
                super_certificate: sup_cert,
                log,
            });
        }
        j += 1;
        if j > DOUBLING_CAP {
            let worst = cert.worst.map(|w| format!("{w:?}")).unwrap_or_default();
            return Err(Error::Construction(format!(
                "subsolution certification failed; worst node {worst}"
            )));
        }
        a2 *= 2.0;
        log.push(format!("certification failed, doubling A2 to {a2}"));
    }
}

/// Largest 2α-Hölder quotient of φ over pairs drawn from `points`.
pub fn holder_constant_of(phi: &BoundaryFn, points: &[Vec<f64>], exponent: f64) -> f64 {
    let vals: Vec<f64> = points.iter().map(|p| phi(p)).collect();
    let mut best = 0.0f64;
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let d: f64 = points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            if d > 0.0 {
                best = best.max((vals[a] - vals[b]).abs() / d.powf(exponent));
            }
        }
    }
    best
}

fn band_points(grid: &Grid) -> Vec<Vec<f64>> {
    grid.band().iter().map(|&b| grid.coords(b)).collect()
}

/// Geometry shared by all h_ξ on one grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarrierGeometry {
    pub center: Vec<f64>,
    pub radius: f64,
    pub c: f64,
}

impl BarrierGeometry {
    /// g_ξ(x) = C·ρ_h(x) − |x − ξ|².
    pub fn g(&self, xi: &[f64], x: &[f64]) -> f64 {
        let r2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let d2: f64 = x.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum();
        self.c * (r2 - self.radius * self.radius) / (2.0 * self.radius) - d2
    }

    /// sup |∇g_ξ| over the closed ball of radius R_h.
    pub fn gradient_bound(&self) -> f64 {
        // ∇g = (C/R)(x − c) − 2(x − ξ); both terms are at most C and 4R in norm.
        self.c + 4.0 * self.radius
    }

    /// Projects a point onto the sphere of radius R_h.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        let d: f64 = p
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        p.iter()
            .zip(&self.center)
            .map(|(a, b)| b + (a - b) * self.radius / d)
            .collect()
    }
}

/// Smallest C = 2^j with λ(H g_ξ) strictly inside the cone at every interior node.
pub fn barrier_geometry(grid: &Arc<Grid>, op: &OperatorSpec) -> Result<BarrierGeometry> {
    let radius = closure_radius(grid);
    let mut geo = BarrierGeometry {
        center: grid.domain().center.clone(),
        radius,
        c: 1.0,
    };
    // λ(H g_ξ) = C/(2R_h) − 1 for every ξ, so one representative ξ suffices.
    let xi = {
        let mut p = geo.center.clone();
        p[0] += radius;
        p
    };
    for _ in 0..=DOUBLING_CAP {
        let g = {
            let geo = geo.clone();
            let xi = xi.clone();
            GridField::from_fn(grid, move |x| geo.g(&xi, x))
        };
        let s = node_spectra(&g, grid.interior())?;
        let ok = s.lambdas.chunks(s.n).all(|l| {
            distance_slice(&op.cone, l)
                .map(|d| d > 0.0)
                .unwrap_or(false)
        });
        if ok {
            return Ok(geo);
        }
        geo.c *= 2.0;
    }
    Err(Error::Construction(
        "barrier constant C exceeded the doubling cap".into(),
    ))
}

#[derive(Debug, Clone)]
pub struct HolderBarrier {
    pub xi: Vec<f64>,
    pub alpha: f64,
    pub c: f64,
    pub c_tilde: f64,
    /// h_ξ on every node.
    pub barrier: GridField,
    /// h_ξ + φ(ξ).
    pub field: GridField,
    pub admissibility_margin: f64,
}

/// h_ξ = −C̃(−g_ξ)^α at a boundary point ξ (projected onto the R_h sphere).
///
/// `c_tilde` defaults to the measured 2α-Hölder constant of φ over band nodes and ξ.
pub fn holder_barrier(
    xi: &[f64],
    alpha: f64,
    op: &OperatorSpec,
    grid: &Arc<Grid>,
    phi: &BoundaryFn,
    c_tilde: Option<f64>,
) -> Result<HolderBarrier> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain("alpha must lie in (0, 1)");
    }
    if xi.len() != grid.dim() {
        return Err(Error::Dimension {
            expected: grid.dim(),
            got: xi.len(),
        });
    }
    let geo = barrier_geometry(grid, op)?;
    let xi = geo.project(xi);
    let c_tilde = match c_tilde {
        Some(c) => c,
        None => {
            let mut pts = band_points(grid);
            pts.push(xi.clone());
            holder_constant_of(phi, &pts, 2.0 * alpha)
        }
    };
    let barrier = {
        let geo = geo.clone();
        let xi = xi.clone();
        GridField::from_fn(grid, move |x| {
            -c_tilde * (-geo.g(&xi, x)).max(0.0).powf(alpha)
        })
    };
    let tol = 10.0 * grid.h();
    let gamma = gamma_subharmonic_check(&barrier, &op.cone, tol)?;
    if !gamma.ok {
        return Err(Error::Construction(format!(
            "barrier leaves the cone: {:?}",
            gamma.worst
        )));
    }
    let phi_xi = phi(&xi);
    for &b in grid.band() {
        let x = grid.coords(b);
        if barrier.value(b) > phi(&x) - phi_xi + 1e-12 {
            return Err(Error::Construction(format!(
                "barrier exceeds boundary data at node {b}"
            )));
        }
    }
    let field = barrier.map(|v| v + phi_xi);
    Ok(HolderBarrier {
        xi,
        alpha,
        c: geo.c,
        c_tilde,
        barrier,
        field,
        admissibility_margin: gamma.worst.map_or(f64::INFINITY, |w| w.margin),
    })
}

/// Points on the sphere of radius R_h from a projected cube-surface lattice,
/// spaced at most `spacing` apart on the sphere.
pub fn sphere_net(center: &[f64], radius: f64, spacing: f64) -> Vec<Vec<f64>> {
    let dim = center.len();
    let m = (radius / spacing).ceil().max(1.0) as i64;
    let side = (2 * m + 1) as usize;
    let mut out = Vec::new();
    for code in 0..side.pow(dim as u32) {
        let mut c = code;
        let idx: Vec<i64> = (0..dim)
            .map(|_| {
                let i = (c % side) as i64 - m;
                c /= side;
                i
            })
            .collect();
        if idx.iter().all(|&i| i.abs() < m) {
            continue;
        }
        let norm = idx.iter().map(|&i| (i * i) as f64).sum::<f64>().sqrt();
        out.push(
            idx.iter()
                .zip(center)
                .map(|(&i, c)| c + radius * i as f64 / norm)
                .collect(),
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct GlobalBarrier {
    pub field: GridField,
    pub a: f64,
    pub alpha: f64,
    pub c_tilde: f64,
    pub geometry: BarrierGeometry,
    pub net: Vec<Vec<f64>>,
    pub phi_net: Vec<f64>,
    /// Maximizing net index per node.
    pub argmax: Vec<usize>,
    pub certificate: Certificate,
    /// a·C̃·(sup|∇g|)^α.
    pub predicted_holder: f64,
    pub ordering: ComparisonReport,
    pub max_excess_over_harmonic: f64,
}

impl GlobalBarrier {
    /// Envelope value at an arbitrary point.
    pub fn evaluate_at(&self, x: &[f64]) -> f64 {
        self.net
            .iter()
            .zip(&self.phi_net)
            .map(|(xi, p)| {
                self.a * -self.c_tilde * (-self.geometry.g(xi, x)).max(0.0).powf(self.alpha) + p
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// sup over a boundary net of a·h_ξ + φ(ξ), with a doubled until the envelope
/// certifies as a subsolution at level `a_bound`.
pub fn global_barrier(
    op: &OperatorSpec,
    grid: &Arc<Grid>,
    phi: &BoundaryFn,
    alpha: f64,
    a_bound: f64,
) -> Result<GlobalBarrier> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain("alpha must lie in (0, 1)");
    }
    if !(a_bound > 0.0) {
        return domain("level A must be positive");
    }
    let geo = barrier_geometry(grid, op)?;
    let net = sphere_net(&geo.center, geo.radius, 2.0 * grid.h());
    let phi_net: Vec<f64> = net.iter().map(|p| phi(p)).collect();
    let mut pts = band_points(grid);
    pts.extend(net.iter().cloned());
    let c_tilde = holder_constant_of(phi, &pts, 2.0 * alpha);
    let nodes = grid.len();
    let coords: Vec<Vec<f64>> = (0..nodes).map(|i| grid.coords(i)).collect();
    // base[k][i] = h_ξk(x_i) / a.
    let base: Vec<Vec<f64>> = net
        .iter()
        .map(|xi| {
            coords
                .iter()
                .map(|x| -c_tilde * (-geo.g(xi, x)).max(0.0).powf(alpha))
                .collect()
        })
        .collect();
    let level = OperatorSpec {
        rhs: Rhs::constant(a_bound),
        ..op.clone()
    };
    let opts = CertifyOptions::default_for(grid);
    let mut a = 1.0;
    for _ in 0..=DOUBLING_CAP {
        let mut values = vec![f64::NEG_INFINITY; nodes];
        let mut argmax = vec![0usize; nodes];
        for (k, row) in base.iter().enumerate() {
            for i in 0..nodes {
                let v = a * row[i] + phi_net[k];
                if v > values[i] {
                    values[i] = v;
                    argmax[i] = k;
                }
            }
        }
        let field = GridField::new(grid.clone(), values)?;
        let certificate = certify_subsolution(&field, &level, &opts)?;
        if certificate.is_sub() {
            let harm = harmonic_extend(grid, phi, HARMONIC_TOL)?;
            let ordering = compare(&field, &harm, op, None)?;
            let max_excess_over_harmonic = field.zip_with(&harm, |e, h| e - h)?.max_closure();
            return Ok(GlobalBarrier {
                predicted_holder: a * c_tilde * geo.gradient_bound().powf(alpha),
                field,
                a,
                alpha,
                c_tilde,
                geometry: geo,
                net,
                phi_net,
                argmax,
                certificate,
                ordering,
                max_excess_over_harmonic,
            });
        }
        a *= 2.0;
    }
    Err(Error::Construction(
        "envelope scale exceeded the doubling cap".into(),
    ))
}

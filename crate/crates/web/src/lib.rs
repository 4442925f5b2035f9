//! wasm-bindgen surface for the browser demo. Each export takes plain numbers and
//! returns flat arrays so the page can paint them straight onto a canvas.

use std::sync::Arc;

use hessiasol::cones::{distance_to_boundary, ConeSpec};
use hessiasol::grid::{DomainSpec, Grid, GridField, NodeClass};
use hessiasol::regularize::{sup_convolution, ConvolutionParams};
use hessiasol::solver::{solve, SolveConfig};
use hessiasol::symfun::LambdaVector;
use hessiasol::viscosity::{OperatorSpec, Rhs};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Cone membership over the square [−extent, extent]² of eigenvalue pairs (λ₁, λ₂).
/// `kind` is "gamma1", "gamma2" or "phase"; for "phase" the threshold is `sigma`.
/// Each cell holds the distance to the boundary inside the cone and NaN outside.
#[wasm_bindgen]
pub fn cone_map(
    kind: &str,
    sigma: f64,
    extent: f64,
    resolution: usize,
) -> Result<Vec<f64>, JsError> {
    let cone = match kind {
        "gamma1" => ConeSpec::gamma(1, 2),
        "gamma2" => ConeSpec::gamma(2, 2),
        "phase" => ConeSpec::phase(sigma, 2),
        other => return Err(JsError::new(&format!("unknown cone '{other}'"))),
    }
    .map_err(js_err)?;
    if resolution < 2 {
        return Err(JsError::new("resolution must be at least 2"));
    }
    let step = 2.0 * extent / (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    // Row 0 is the top of the picture, so λ₂ runs downwards.
    for row in 0..resolution {
        let l2 = extent - row as f64 * step;
        for col in 0..resolution {
            let l1 = -extent + col as f64 * step;
            let lam = LambdaVector::from_slice(&[l1, l2]).map_err(js_err)?;
            out.push(if cone.contains(&lam, false).map_err(js_err)? {
                distance_to_boundary(&cone, &lam).map_err(js_err)?
            } else {
                f64::NAN
            });
        }
    }
    Ok(out)
}

/// A field on the unit disc in C (one complex variable, two real axes), laid out
/// row-major with NaN outside the closed domain.
#[wasm_bindgen]
pub struct Picture {
    side: usize,
    values: Vec<f64>,
    residual: f64,
    iterations: usize,
    error: f64,
}

#[wasm_bindgen]
impl Picture {
    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.side
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.residual
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Sup-norm distance to the exact solution, NaN when there is none.
    #[wasm_bindgen(getter)]
    pub fn error(&self) -> f64 {
        self.error
    }
}

fn disc(h: f64) -> Result<Arc<Grid>, JsError> {
    if !(1.0 / 64.0..=0.5).contains(&h) {
        return Err(JsError::new("h must lie in [1/64, 1/2]"));
    }
    Grid::new(DomainSpec::ball(1, 1.0).map_err(js_err)?, h).map_err(js_err)
}

fn picture(u: &GridField, residual: f64, iterations: usize, error: f64) -> Picture {
    let g = u.grid();
    let side = g.counts()[0];
    // Axis 0 is x (fastest), axis 1 is y; flip y so the picture is upright.
    let mut values = vec![f64::NAN; side * side];
    for i in 0..g.len() {
        if g.class(i) != NodeClass::Exterior {
            let (x, y) = (g.axis_index(i, 0), g.axis_index(i, 1));
            values[(side - 1 - y) * side + x] = u.value(i);
        }
    }
    Picture {
        side,
        values,
        residual,
        iterations,
        error,
    }
}

fn profile(name: &str) -> Result<fn(&[f64]) -> f64, JsError> {
    Ok(match name {
        "kink" => |x: &[f64]| -x[0].abs() - 0.5 * x[1].abs(),
        "cone" => |x: &[f64]| -(x[0] * x[0] + x[1] * x[1]).sqrt(),
        "ripple" => |x: &[f64]| (4.0 * x[0]).sin() * (3.0 * x[1]).cos() * 0.5,
        other => return Err(JsError::new(&format!("unknown profile '{other}'"))),
    })
}

/// Sup-convolution u^ε(x) = sup_y u(y) − (c0/ε)|x − y|² of a named profile with c0 its oscillation.
#[wasm_bindgen]
pub fn sup_convolve(profile_name: &str, h: f64, eps: f64) -> Result<Picture, JsError> {
    let g = disc(h)?;
    let u = GridField::from_fn(&g, profile(profile_name)?);
    let ue = sup_convolution(
        &u,
        ConvolutionParams::new(eps, u.oscillation()).map_err(js_err)?,
    );
    Ok(picture(&ue, f64::NAN, 0, f64::NAN))
}

/// The raw profile, for side-by-side display with its regularization.
#[wasm_bindgen]
pub fn sample_profile(profile_name: &str, h: f64) -> Result<Picture, JsError> {
    let g = disc(h)?;
    Ok(picture(
        &GridField::from_fn(&g, profile(profile_name)?),
        f64::NAN,
        0,
        f64::NAN,
    ))
}

/// Solves Δu/4 = ψ on the unit disc, the one-variable Monge–Ampère equation, with boundary
/// data a|z|² + b·x. The exact solution is a|z|² + b·x when ψ = a.
#[wasm_bindgen]
pub fn solve_disc(h: f64, psi: f64, a: f64, b: f64) -> Result<Picture, JsError> {
    if !(psi > 0.0 && psi.is_finite()) {
        return Err(JsError::new("ψ must be positive"));
    }
    let g = disc(h)?;
    let op = OperatorSpec::monge_ampere(1, Rhs::constant(psi)).map_err(js_err)?;
    let phi = move |x: &[f64]| a * (x[0] * x[0] + x[1] * x[1]) + b * x[0];
    let mut cfg = SolveConfig::new(op, g.domain().clone(), Arc::new(phi), h);
    cfg.max_iters = 200_000;
    let (u, report) = solve(&cfg).map_err(js_err)?;
    let error = if (psi - a).abs() < 1e-12 {
        g.closure_nodes()
            .iter()
            .map(|&i| (u.value(i) - phi(&g.coords(i))).abs())
            .fold(0.0, f64::max)
    } else {
        f64::NAN
    };
    Ok(picture(&u, report.residual, report.iterations, error))
}

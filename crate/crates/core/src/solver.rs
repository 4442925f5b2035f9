//! Dirichlet solver: explicit monotone relaxation u ← u + dt_i·(G[u] − T) on the
//! interior with the boundary band frozen and dt_i a locally capped step, plus the penalized approximation,
//! Hölder measurement and pointwise pluripotential crosschecks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::barriers::{build_bundle, BoundaryFn, HARMONIC_TOL};
use crate::cones::critical_phase;
use crate::error::{domain, Error, Result};
use crate::grid::{harmonic_extend, DomainSpec, Grid, GridField, NodeClass, Shape};
use crate::hermitian::{
    eigenvalues_into, mixed_discriminant, normalize_into_cal_b, HermitianMatrix,
};
use crate::symfun::{binomial, elementary_into, phase_slice, SymFunKind};
use crate::viscosity::{
    certify_subsolution, certify_supersolution, gamma_subharmonic_check, is_kink, node_spectra,
    Certificate, CertifyOptions, GammaReport, OperatorSpec, Rhs, SuperDefinition,
};

/// Wall clock that reads zero where the platform has none (wasm32 in the browser).
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        Stopwatch(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        0.0
    }
}

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 5_000_000;
/// Consecutive residual increases treated as instability.
pub const STABILITY_WINDOW: usize = 1000;
/// Slack on the sign of an update when tracking monotone iterates.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Local step cap dt_i ≤ LOCAL_CFL·h²/Σ_j ∂G/∂λ_j, so the own-node coefficient of
/// the update stays ≥ 1 − LOCAL_CFL where G is steep near ∂Γ.
pub const LOCAL_CFL: f64 = 0.5;

pub type BoundaryData = Arc<BoundaryFn>;

#[derive(Debug, Clone)]
pub enum Init {
    Subsolution,
    HarmonicExtension,
    Custom(GridField),
}

impl Init {
    fn label(&self) -> &'static str {
        match self {
            Init::Subsolution => "subsolution",
            Init::HarmonicExtension => "harmonic_extension",
            Init::Custom(_) => "custom",
        }
    }
}

#[derive(Clone)]
pub struct SolveConfig {
    pub op: OperatorSpec,
    pub domain: DomainSpec,
    pub boundary: BoundaryData,
    pub h: f64,
    /// Defaults to min(0.2·n, 0.5)·h².
    pub dt: Option<f64>,
    pub residual_tol: f64,
    pub max_iters: usize,
    pub init: Init,
}

impl std::fmt::Debug for SolveConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolveConfig")
            .field("op", &self.op)
            .field("domain", &self.domain)
            .field("h", &self.h)
            .field("dt", &self.dt)
            .field("residual_tol", &self.residual_tol)
            .field("max_iters", &self.max_iters)
            .field("init", &self.init.label())
            .finish()
    }
}

impl SolveConfig {
    pub fn new(op: OperatorSpec, domain: DomainSpec, boundary: BoundaryData, h: f64) -> Self {
        Self {
            op,
            domain,
            boundary,
            h,
            dt: None,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            init: Init::Subsolution,
        }
    }

    /// Pseudo-time step after the stability guard dt ≤ h²/2.
    pub fn time_step(&self) -> Result<f64> {
        let h2 = self.h * self.h;
        match self.dt {
            Some(dt) if !(dt > 0.0 && dt <= 0.5 * h2) => {
                domain(format!("dt = {dt} violates 0 < dt ≤ h²/2 = {}", 0.5 * h2))
            }
            Some(dt) => Ok(dt),
            None => Ok((0.2 * self.domain.n as f64).min(0.5) * h2),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    pub wall_time_s: f64,
    pub h: f64,
    pub dt: f64,
    pub init: String,
    /// How f and ψ were brought to degree one.
    pub normalization: String,
    pub certify_tol: f64,
    pub subsolution: Certificate,
    pub supersolution: Certificate,
    pub gamma: GammaReport,
    /// Set for subsolution starts: every update was non-negative.
    pub monotone_iterates: Option<bool>,
    /// Node updates that lowered u, and the largest such decrease.
    pub downward_updates: usize,
    pub max_decrease: f64,
    /// Smallest phase minus (n−2)π/2 + δ/2, for the phase operator.
    pub phase_floor_margin: Option<f64>,
    pub caveat: Option<String>,
    #[serde(skip)]
    pub trace: Vec<(usize, f64)>,
}

impl SolveReport {
    pub fn certified(&self) -> bool {
        self.subsolution.is_sub()
            && self.supersolution.is_super()
            && self.gamma.ok
            && self.phase_floor_margin.is_none_or(|m| m >= 0.0)
    }
}

fn normalization_note(op: &OperatorSpec) -> String {
    if op.is_phase() {
        format!("phase(λ) − h(z), target {}", op.rhs.label)
    } else {
        let d = op.normal_degree();
        if d == 1.0 {
            format!("{:?} against ψ = {}", op.f.kind, op.rhs.label)
        } else {
            format!(
                "({:?})^(1/{d}) against ψ^(1/{d}), ψ = {}",
                op.f.kind, op.rhs.label
            )
        }
    }
}

/// Degree-one target T(z, s).
fn normal_target(op: &OperatorSpec, z: &[f64], s: f64) -> f64 {
    let t = op.rhs.eval(z, s);
    let d = op.normal_degree();
    if op.is_phase() || d == 1.0 {
        t
    } else if d == 2.0 {
        t.sqrt()
    } else {
        t.powf(1.0 / d)
    }
}

/// Degree-one G(λ).
fn normal_lhs(op: &OperatorSpec, lambda: &[f64]) -> f64 {
    if op.is_phase() {
        return phase_slice(lambda);
    }
    let v = op.lhs(lambda).max(0.0);
    let d = op.normal_degree();
    if d == 1.0 {
        v
    } else if d == 2.0 {
        v.sqrt()
    } else {
        v.powf(1.0 / d)
    }
}

/// Σ_j ∂G/∂λ_j for the degree-one form; 0 where G vanishes.
fn normal_slope(op: &OperatorSpec, lambda: &[f64]) -> f64 {
    if op.is_phase() {
        return lambda.iter().map(|v| 1.0 / (1.0 + v * v)).sum();
    }
    let g = normal_lhs(op, lambda);
    if !(g > 0.0) {
        return 0.0;
    }
    let n = lambda.len();
    let mut stack = [0.0; 9];
    let mut heap = Vec::new();
    let e: &mut [f64] = if n < 9 {
        &mut stack[..=n]
    } else {
        heap.resize(n + 1, 0.0);
        &mut heap
    };
    elementary_into(lambda, e);
    // Σ_j ∂e_k/∂λ_j = (n − k + 1)·e_{k−1}.
    let log_slope = |k: usize| (n - k + 1) as f64 * e[k - 1] / e[k];
    match op.f.kind {
        SymFunKind::SigmaK { k } | SymFunKind::SNormK { k } => g * log_slope(k) / k as f64,
        SymFunKind::QuotientRoot { k, l } => g * (log_slope(k) - log_slope(l)) / (k - l) as f64,
        SymFunKind::LagrangianPhase => unreachable!("handled above"),
    }
}

/// Pseudo-time step at one node: the global dt, capped where G is steep.
fn local_step(op: &OperatorSpec, lambda: &[f64], dt: f64, h2: f64) -> f64 {
    let slope = normal_slope(op, lambda);
    if slope > 0.0 {
        dt.min(LOCAL_CFL * h2 / slope)
    } else {
        dt
    }
}

struct Scratch {
    hess: Vec<num_complex::Complex64>,
    lam: Vec<f64>,
    z: Vec<f64>,
}

impl Scratch {
    fn new(n: usize, dim: usize) -> Self {
        Self {
            hess: vec![num_complex::Complex64::new(0.0, 0.0); n * n],
            lam: vec![0.0; n],
            z: vec![0.0; dim],
        }
    }
}

struct Relaxation<'a> {
    grid: &'a Grid,
    op: &'a OperatorSpec,
    /// Cached T per interior node when ψ ignores s.
    targets: Option<Vec<f64>>,
}

impl Relaxation<'_> {
    fn residual(&self, u: &[f64], k: usize, node: usize, s: &mut Scratch) -> f64 {
        let n = self.grid.n();
        self.grid.hessian_into(u, node, &mut s.hess);
        if eigenvalues_into(n, &s.hess, &mut s.lam).is_err() {
            return f64::NAN;
        }
        let g = normal_lhs(self.op, &s.lam);
        let t = match &self.targets {
            Some(t) => t[k],
            None => {
                self.grid.coords_into(node, &mut s.z);
                normal_target(self.op, &s.z, u[node])
            }
        };
        g - t
    }

    /// Residual and local step at one node.
    fn step(&self, u: &[f64], k: usize, node: usize, dt: f64, s: &mut Scratch) -> [f64; 2] {
        let r = self.residual(u, k, node, s);
        let h = self.grid.h();
        [r, local_step(self.op, &s.lam, dt, h * h)]
    }

    #[cfg(feature = "parallel")]
    fn steps(&self, u: &[f64], dt: f64, out: &mut [[f64; 2]]) {
        use rayon::prelude::*;
        let (n, dim) = (self.grid.n(), self.grid.dim());
        out.par_iter_mut()
            .zip(self.grid.interior().par_iter())
            .enumerate()
            .for_each_init(
                || Scratch::new(n, dim),
                |s, (k, (r, &node))| *r = self.step(u, k, node, dt, s),
            );
    }

    #[cfg(not(feature = "parallel"))]
    fn steps(&self, u: &[f64], dt: f64, out: &mut [[f64; 2]]) {
        let mut s = Scratch::new(self.grid.n(), self.grid.dim());
        for (k, (r, &node)) in out.iter_mut().zip(self.grid.interior()).enumerate() {
            *r = self.step(u, k, node, dt, &mut s);
        }
    }
}

struct RelaxOutcome {
    values: Vec<f64>,
    iterations: usize,
    residual: f64,
    downward_updates: usize,
    max_decrease: f64,
    trace: Vec<(usize, f64)>,
}

fn keep_in_trace(it: usize) -> bool {
    it < 1000 || it.is_multiple_of(100)
}

fn relax(
    grid: &Grid,
    op: &OperatorSpec,
    init: Vec<f64>,
    dt: f64,
    tol: f64,
    max_iters: usize,
) -> Result<RelaxOutcome> {
    let targets = if op.rhs.depends_on_s {
        None
    } else {
        let mut z = vec![0.0; grid.dim()];
        Some(
            grid.interior()
                .iter()
                .map(|&node| {
                    grid.coords_into(node, &mut z);
                    normal_target(op, &z, 0.0)
                })
                .collect(),
        )
    };
    let relax = Relaxation { grid, op, targets };
    let mut u = init;
    let mut next = u.clone();
    let mut res = vec![[0.0; 2]; grid.interior().len()];
    let mut trace = Vec::new();
    let mut downward_updates = 0usize;
    let mut max_decrease = 0.0f64;
    let mut prev = f64::INFINITY;
    let mut rising = 0usize;
    for it in 0..=max_iters {
        relax.steps(&u, dt, &mut res);
        // Fixed-order fold keeps the reduction deterministic.
        let mut sup = 0.0f64;
        for &[r, _] in &res {
            if !r.is_finite() {
                return Err(Error::Stability {
                    iteration: it,
                    residual: r,
                });
            }
            sup = sup.max(r.abs());
        }
        if keep_in_trace(it) {
            trace.push((it, sup));
        }
        if sup <= tol {
            if !keep_in_trace(it) {
                trace.push((it, sup));
            }
            return Ok(RelaxOutcome {
                values: u,
                iterations: it,
                residual: sup,
                downward_updates,
                max_decrease,
                trace,
            });
        }
        if it == max_iters {
            trace.push((it, sup));
            return Err(Error::NonConvergence {
                iterations: it,
                residual: sup,
                history: trace,
            });
        }
        rising = if sup > prev { rising + 1 } else { 0 };
        if rising >= STABILITY_WINDOW {
            return Err(Error::Stability {
                iteration: it,
                residual: sup,
            });
        }
        prev = sup;
        for (&node, &[r, dt_node]) in grid.interior().iter().zip(&res) {
            if r < -MONOTONE_SLACK {
                downward_updates += 1;
                max_decrease = max_decrease.max(-dt_node * r);
            }
            next[node] = u[node] + dt_node * r;
        }
        std::mem::swap(&mut u, &mut next);
    }
    unreachable!("loop returns on its last iteration")
}

/// One relaxation step u + dt_i·(G(λ(Hu)) − T(z, u)) at interior nodes, with dt_i
/// the local cap of `dt`; band and exterior values pass through unchanged.
pub fn relaxation_step(u: &GridField, op: &OperatorSpec, dt: f64) -> Result<GridField> {
    let grid = u.grid();
    if op.n() != grid.n() {
        return Err(Error::Dimension {
            expected: grid.n(),
            got: op.n(),
        });
    }
    let relax = Relaxation {
        grid,
        op,
        targets: None,
    };
    let mut s = Scratch::new(grid.n(), grid.dim());
    let mut next = u.values().to_vec();
    for (k, &node) in grid.interior().iter().enumerate() {
        let [r, dt_node] = relax.step(u.values(), k, node, dt, &mut s);
        if !r.is_finite() {
            return Err(Error::Stability {
                iteration: 0,
                residual: r,
            });
        }
        next[node] += dt_node * r;
    }
    GridField::new(grid.clone(), next)
}

fn initial_field(cfg: &SolveConfig, grid: &Arc<Grid>) -> Result<GridField> {
    let mut u = match &cfg.init {
        Init::Subsolution => build_bundle(&cfg.op, grid, cfg.boundary.as_ref())?.subsolution,
        Init::HarmonicExtension => harmonic_extend(grid, cfg.boundary.as_ref(), HARMONIC_TOL)?,
        Init::Custom(f) => {
            if f.grid().as_ref() != grid.as_ref() {
                return Err(Error::GridMismatch(
                    "custom initial field lives on another grid".into(),
                ));
            }
            f.clone()
        }
    };
    u.impose_band(cfg.boundary.as_ref());
    Ok(u)
}

fn solve_on(cfg: &SolveConfig, grid: &Arc<Grid>) -> Result<(GridField, SolveReport)> {
    let start = Stopwatch::start();
    if !(cfg.residual_tol > 0.0) {
        return domain("residual_tol must be positive");
    }
    let dt = cfg.time_step()?;
    let init = initial_field(cfg, grid)?;
    cfg.op
        .validate(grid, (init.min_closure() - 1.0, init.max_closure() + 1.0))?;
    let out = relax(
        grid,
        &cfg.op,
        init.into_values(),
        dt,
        cfg.residual_tol,
        cfg.max_iters,
    )?;
    let u = GridField::new(grid.clone(), out.values)?;
    let certify_tol = 10.0 * cfg.residual_tol + 10.0 * grid.h();
    let opts = CertifyOptions::with_tol(certify_tol);
    let subsolution = certify_subsolution(&u, &cfg.op, &opts)?;
    let supersolution = certify_supersolution(&u, &cfg.op, &opts, SuperDefinition::InfOverN)?;
    let gamma = gamma_subharmonic_check(&u, &cfg.op.cone, 10.0 * grid.h())?;
    let phase_floor_margin = match cfg.op.phase_delta {
        Some(delta) => {
            let floor = critical_phase(cfg.op.n()) + 0.5 * delta;
            let s = node_spectra(&u, grid.interior())?;
            Some(
                s.lambdas
                    .chunks(s.n)
                    .map(|l| phase_slice(l) - floor)
                    .fold(f64::INFINITY, f64::min),
            )
        }
        None => None,
    };
    let caveat = match cfg.domain.shape {
        Shape::Box { .. } => Some("box domain: barriers use the enclosing ball".to_string()),
        Shape::Ball { .. } => None,
    };
    let report = SolveReport {
        iterations: out.iterations,
        residual: out.residual,
        wall_time_s: start.seconds(),
        h: grid.h(),
        dt,
        init: cfg.init.label().to_string(),
        normalization: normalization_note(&cfg.op),
        certify_tol,
        subsolution,
        supersolution,
        gamma,
        monotone_iterates: matches!(cfg.init, Init::Subsolution)
            .then_some(out.downward_updates == 0),
        downward_updates: out.downward_updates,
        max_decrease: out.max_decrease,
        phase_floor_margin,
        caveat,
        trace: out.trace,
    };
    Ok((u, report))
}

/// Solves f(λ(Hu)) = ψ(z, u) with u = φ on the boundary band.
pub fn solve(cfg: &SolveConfig) -> Result<(GridField, SolveReport)> {
    let grid = match &cfg.init {
        Init::Custom(f) => f.grid().clone(),
        _ => Grid::new(cfg.domain.clone(), cfg.h)?,
    };
    if grid.domain() != &cfg.domain || grid.h() != cfg.h {
        return Err(Error::GridMismatch(
            "custom initial field does not match domain and h".into(),
        ));
    }
    solve_on(cfg, &grid)
}

/// S_{k,ℓ}(λ(Hu)) = ψ, solved as S_{k,ℓ}^{1/(k−ℓ)} = ψ^{1/(k−ℓ)}.
pub fn solve_quotient(
    k: usize,
    l: usize,
    psi: Rhs,
    boundary: BoundaryData,
    domain: DomainSpec,
    h: f64,
    residual_tol: f64,
) -> Result<(GridField, SolveReport)> {
    if l >= k {
        return self::domain("quotient needs l < k");
    }
    let root = 1.0 / (k - l) as f64;
    let label = format!("({})^(1/{})", psi.label, k - l);
    let rooted = Rhs::new(label, psi.monotone_in_s, psi.depends_on_s, move |z, s| {
        psi.eval(z, s).powf(root)
    });
    let op = OperatorSpec::quotient(k, l, domain.n, rooted)?;
    let mut cfg = SolveConfig::new(op, domain, boundary, h);
    cfg.residual_tol = residual_tol;
    let (u, mut report) = solve(&cfg)?;
    report.normalization = format!(
        "S_{{{k},{l}}}^(1/{}) against ψ^(1/{}); {}",
        k - l,
        k - l,
        report.normalization
    );
    Ok((u, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    /// Order k of the inverse-σ form (dd^c v)^n / ((dd^c v)^{n−k} ∧ ω^k).
    pub k: usize,
    pub residual_tol: f64,
    pub max_iters: usize,
    pub dt: Option<f64>,
}

impl PenaltyConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            dt: None,
        }
    }
}

/// v_j solving S_n/S_{n−k}(λ(Hv)) = e^{j(v−u)}g with v = u on the boundary band,
/// relaxed from u itself.
pub fn penalized_supersolution(
    u: &GridField,
    g: BoundaryData,
    j: f64,
    cfg: &PenaltyConfig,
) -> Result<(GridField, SolveReport)> {
    if !(j > 0.0) {
        return domain("penalty parameter must be positive");
    }
    let grid = u.grid().clone();
    let n = grid.n();
    if cfg.k == 0 || cfg.k > n {
        return domain(format!("k = {} outside 1..={n}", cfg.k));
    }
    // k = n is S_n itself, kept in its raw degree; otherwise the quotient root takes ψ^{1/k}.
    let inv_k = if cfg.k == n { 1.0 } else { 1.0 / cfg.k as f64 };
    let base = Arc::new(u.clone());
    let lookup = {
        let base = base.clone();
        move |z: &[f64]| base.grid().locate(z).map_or(f64::NAN, |i| base.value(i))
    };
    let lookup = Arc::new(lookup);
    let rhs = {
        let lookup = lookup.clone();
        Rhs::new(
            format!("(exp({j}(s − u))·g)^(1/{})", cfg.k),
            true,
            true,
            move |z, s| ((j * (s - lookup(z))).exp() * g(z)).powf(inv_k),
        )
    };
    let op = if cfg.k == n {
        OperatorSpec::monge_ampere(n, rhs)?
    } else {
        OperatorSpec::quotient(n, n - cfg.k, n, rhs)?
    };
    let boundary: BoundaryData = {
        let lookup = lookup.clone();
        Arc::new(move |z: &[f64]| lookup(z))
    };
    let solve_cfg = SolveConfig {
        op,
        domain: grid.domain().clone(),
        boundary,
        h: grid.h(),
        dt: cfg.dt,
        residual_tol: cfg.residual_tol,
        max_iters: cfg.max_iters,
        init: Init::Custom(u.clone()),
    };
    solve_on(&solve_cfg, &grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderBand {
    pub lower: f64,
    pub upper: f64,
    pub pairs: usize,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub alpha: f64,
    pub holder_constant: f64,
    pub pairs: usize,
    /// Dyadic distance bands, largest distances first.
    pub bands: Vec<HolderBand>,
    /// Constant of each used band over the next larger used band.
    pub band_ratios: Vec<f64>,
    pub stable: bool,
    /// Least-squares slope of log(band constant) against log(distance).
    pub slope: f64,
    pub divergent: bool,
}

pub const HOLDER_RANDOM_PAIRS: usize = 100_000;
pub const HOLDER_SEED: u64 = 0x4f1d;
pub const HOLDER_MIN_BAND_PAIRS: usize = 10;
pub const HOLDER_RATIO_RANGE: (f64, f64) = (0.5, 2.0);

/// Hölder-α quotients over all pairs at offset ≤ 2 per axis plus seeded random pairs.
pub fn measure_holder(u: &GridField, alpha: f64) -> Result<HolderReport> {
    measure_holder_seeded(u, alpha, HOLDER_SEED)
}

pub fn measure_holder_seeded(u: &GridField, alpha: f64, seed: u64) -> Result<HolderReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain("alpha must lie in (0, 1]");
    }
    let grid = u.grid();
    let h = grid.h();
    let dim = grid.dim();
    let diam = grid.domain().diameter();
    let levels = ((diam / h).log2().ceil() as usize + 2).max(1);
    let mut bands: Vec<HolderBand> = (0..levels)
        .map(|m| HolderBand {
            lower: diam / 2f64.powi(m as i32 + 1),
            upper: diam / 2f64.powi(m as i32),
            pairs: 0,
            constant: 0.0,
        })
        .collect();
    let mut total = 0usize;
    let mut record = |d: f64, du: f64| {
        if d <= 0.0 {
            return;
        }
        let m = ((diam / d).log2().floor().max(0.0) as usize).min(levels - 1);
        // Guard rounding at band edges.
        let m = if d > bands[m].upper {
            m.saturating_sub(1)
        } else {
            m
        };
        let q = du / d.powf(alpha);
        let b = &mut bands[m];
        b.pairs += 1;
        b.constant = b.constant.max(q);
        total += 1;
    };
    let vals = u.values();
    let closure = grid.closure_nodes();
    // Lexicographically positive offsets in [−2, 2]^dim.
    let side = 5usize;
    let mut offsets: Vec<Vec<i64>> = Vec::new();
    for code in 0..side.pow(dim as u32) {
        let mut c = code;
        let o: Vec<i64> = (0..dim)
            .map(|_| {
                let v = (c % side) as i64 - 2;
                c /= side;
                v
            })
            .collect();
        if o.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0) {
            offsets.push(o);
        }
    }
    let strides: Vec<i64> = (0..dim).map(|a| grid.stride(a) as i64).collect();
    let counts: Vec<i64> = grid.counts().iter().map(|&c| c as i64).collect();
    let mut idx = vec![0i64; dim];
    for &i in &closure {
        for (a, v) in idx.iter_mut().enumerate() {
            *v = grid.axis_index(i, a) as i64;
        }
        'offset: for o in &offsets {
            let mut j = i as i64;
            let mut d2 = 0i64;
            for a in 0..dim {
                let t = idx[a] + o[a];
                if t < 0 || t >= counts[a] {
                    continue 'offset;
                }
                j += o[a] * strides[a];
                d2 += o[a] * o[a];
            }
            let j = j as usize;
            if grid.class(j) == NodeClass::Exterior {
                continue;
            }
            record(h * (d2 as f64).sqrt(), (vals[i] - vals[j]).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xa = vec![0.0; dim];
    let mut xb = vec![0.0; dim];
    if closure.len() > 1 {
        for _ in 0..HOLDER_RANDOM_PAIRS {
            let a = closure[rng.random_range(0..closure.len())];
            let b = closure[rng.random_range(0..closure.len())];
            if a == b {
                continue;
            }
            grid.coords_into(a, &mut xa);
            grid.coords_into(b, &mut xb);
            let d = xa
                .iter()
                .zip(&xb)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
            record(d, (vals[a] - vals[b]).abs());
        }
    }
    let holder_constant = bands.iter().map(|b| b.constant).fold(0.0, f64::max);
    bands.retain(|b| b.pairs > 0);
    let used: Vec<&HolderBand> = bands
        .iter()
        .filter(|b| b.pairs >= HOLDER_MIN_BAND_PAIRS)
        .collect();
    let band_ratios: Vec<f64> = used
        .windows(2)
        .map(|w| {
            if w[0].constant > 0.0 {
                w[1].constant / w[0].constant
            } else {
                1.0
            }
        })
        .collect();
    let stable = band_ratios
        .iter()
        .all(|&r| r >= HOLDER_RATIO_RANGE.0 && r <= HOLDER_RATIO_RANGE.1);
    let pts: Vec<(f64, f64)> = used
        .iter()
        .filter(|b| b.constant > 0.0)
        .map(|b| ((b.lower * b.upper).sqrt().ln(), b.constant.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / m, sy / m);
        let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), p| {
            (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2))
        });
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(HolderReport {
        alpha,
        holder_constant,
        pairs: total,
        bands,
        band_ratios,
        stable,
        slope,
        divergent: slope < -alpha / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckOptions {
    pub tol: f64,
    /// Sampled B in 𝔅(Id, n−k) per node, B = Id included.
    pub samples: usize,
    pub seed: u64,
    pub kink_threshold: Option<f64>,
}

impl CrosscheckOptions {
    pub fn default_for(grid: &Grid) -> Self {
        Self {
            tol: 10.0 * grid.h(),
            samples: 10,
            seed: 0xc0ffee,
            kink_threshold: Some(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub failures: usize,
    pub worst_margin: f64,
    pub worst_node: Option<usize>,
}

impl CheckSummary {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            failures: 0,
            worst_margin: f64::INFINITY,
            worst_node: None,
        }
    }

    fn push(&mut self, node: usize, margin: f64, tol: f64) {
        if margin < -tol {
            self.failures += 1;
        }
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_node = Some(node);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub n: usize,
    pub k: usize,
    pub tol: f64,
    pub checked_nodes: usize,
    pub kink_nodes: usize,
    /// quotient: S_n ≥ ψ·S_{n−k}; sigma_k: S_k ≥ ψ/C(n,k);
    /// explicit_b: λ_1⋯λ_k ≥ ψ/C(n,k) on ascending spectra;
    /// mixed_b: D(Hu×k, B²×(n−k)) ≥ ψ for sampled B ∈ 𝔅(Id, n−k).
    pub checks: Vec<CheckSummary>,
    pub ok: bool,
}

/// Pointwise forms of the inverse-σ_k inequality at every non-kink interior node.
/// S_j are normalized so S_j(𝟙) = 1, which makes the inverse-σ_k quotient exactly S_n/S_{n−k}.
pub fn pluripotential_crosscheck(
    u: &GridField,
    psi: &Rhs,
    k: usize,
    opts: &CrosscheckOptions,
) -> Result<CrosscheckReport> {
    let grid = u.grid();
    let n = grid.n();
    if k == 0 || k > n {
        return domain(format!("k = {k} outside 1..={n}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut bs = vec![HermitianMatrix::identity(n)];
    if k < n {
        let mut guard = 0;
        while bs.len() < opts.samples.max(1) && guard < 100 * opts.samples.max(1) {
            guard += 1;
            let raw = HermitianMatrix::random_psd(n, &mut rng);
            if let Some(b) = normalize_into_cal_b(&raw, &HermitianMatrix::identity(n), n - k)? {
                bs.push(b.square());
            }
        }
    }
    let binom = binomial(n, k);
    let spectra = node_spectra(u, grid.interior())?;
    let mut checks = ["quotient", "sigma_k", "explicit_b", "mixed_b"].map(CheckSummary::new);
    let mut e = vec![0.0; n + 1];
    let mut z = vec![0.0; grid.dim()];
    let mut checked = 0;
    let mut kinks = 0;
    let mut mats = Vec::with_capacity(n);
    for (idx, &node) in spectra.nodes.iter().enumerate() {
        if let Some(kappa) = opts.kink_threshold {
            if is_kink(grid, u.values(), node, kappa) {
                kinks += 1;
                continue;
            }
        }
        checked += 1;
        grid.coords_into(node, &mut z);
        let psi_v = psi.eval(&z, u.value(node));
        let mut lam = spectra.lambdas[idx * n..(idx + 1) * n].to_vec();
        lam.sort_by(f64::total_cmp);
        elementary_into(&lam, &mut e);
        let s = |j: usize| e[j] / binomial(n, j);
        checks[0].push(node, s(n) - psi_v * s(n - k), opts.tol);
        checks[1].push(node, s(k) - psi_v / binom, opts.tol);
        checks[2].push(
            node,
            lam[..k].iter().product::<f64>() - psi_v / binom,
            opts.tol,
        );
        let hess =
            HermitianMatrix::new(n, spectra.hessians[idx * n * n..(idx + 1) * n * n].to_vec())?;
        let mut worst = f64::INFINITY;
        for b2 in &bs {
            mats.clear();
            mats.extend(std::iter::repeat_n(hess.clone(), k));
            mats.extend(std::iter::repeat_n(b2.clone(), n - k));
            worst = worst.min(mixed_discriminant(&mats)? - psi_v);
        }
        checks[3].push(node, worst, opts.tol);
    }
    let ok = checks.iter().all(|c| c.failures == 0);
    Ok(CrosscheckReport {
        n,
        k,
        tol: opts.tol,
        checked_nodes: checked,
        kink_nodes: kinks,
        checks: checks.to_vec(),
        ok,
    })
}

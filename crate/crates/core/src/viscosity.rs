//! Discrete viscosity certification: sub/supersolution tests on the discrete
//! jet, Γ-subharmonicity and the comparison harness.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cones::{critical_phase, distance_slice, ConeKind, ConeSpec};
use crate::error::{domain, Result};
use crate::grid::{Grid, GridField};
use crate::hermitian::eigenvalues_into;
use crate::symfun::{
    binomial, elementary_into, in_closed_gamma, phase_slice, quotient_from_elementary, SymFun,
    SymFunKind,
};

type RhsFn = dyn Fn(&[f64], f64) -> f64 + Send + Sync;

/// Right-hand side ψ(z, s) (or the phase target h(z)).
#[derive(Clone)]
pub struct Rhs {
    f: Arc<RhsFn>,
    pub label: String,
    pub monotone_in_s: bool,
    pub depends_on_s: bool,
}

impl fmt::Debug for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rhs")
            .field("label", &self.label)
            .field("monotone_in_s", &self.monotone_in_s)
            .field("depends_on_s", &self.depends_on_s)
            .finish()
    }
}

impl Rhs {
    pub fn new(
        label: impl Into<String>,
        monotone_in_s: bool,
        depends_on_s: bool,
        f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            label: label.into(),
            monotone_in_s,
            depends_on_s,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), true, false, move |_, _| c)
    }

    /// ψ depending on position only.
    pub fn of_z(
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, true, false, move |z, _| f(z))
    }

    pub fn eval(&self, z: &[f64], s: f64) -> f64 {
        (self.f)(z, s)
    }
}

/// The triple (f, Γ, ψ).
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub f: SymFun,
    pub cone: ConeSpec,
    pub rhs: Rhs,
    /// Supercritical margin δ of the phase target, for the phase operator.
    pub phase_delta: Option<f64>,
}

impl OperatorSpec {
    /// f on its natural cone Γ_k.
    pub fn new(f: SymFun, rhs: Rhs) -> Result<Self> {
        let Some(cone) = f.natural_cone() else {
            return domain("use OperatorSpec::lagrangian for the phase operator");
        };
        Ok(Self {
            f,
            cone,
            rhs,
            phase_delta: None,
        })
    }

    pub fn monge_ampere(n: usize, rhs: Rhs) -> Result<Self> {
        Self::new(SymFun::new(SymFunKind::SNormK { k: n }, n)?, rhs)
    }

    pub fn hessian(k: usize, n: usize, rhs: Rhs) -> Result<Self> {
        Self::new(SymFun::new(SymFunKind::SNormK { k }, n)?, rhs)
    }

    pub fn quotient(k: usize, l: usize, n: usize, rhs: Rhs) -> Result<Self> {
        Self::new(SymFun::new(SymFunKind::QuotientRoot { k, l }, n)?, rhs)
    }

    /// Σ arctan λ_i = h(z) with h ≥ critical_phase(n) + δ.
    pub fn lagrangian(n: usize, target: Rhs, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return domain("supercritical margin must be positive");
        }
        let f = SymFun::new(SymFunKind::LagrangianPhase, n)?;
        let cone = ConeSpec::phase(critical_phase(n), n)?;
        Ok(Self {
            f,
            cone,
            rhs: Rhs {
                monotone_in_s: true,
                depends_on_s: false,
                ..target
            },
            phase_delta: Some(delta),
        })
    }

    pub fn n(&self) -> usize {
        self.f.n
    }

    pub fn is_phase(&self) -> bool {
        self.f.kind == SymFunKind::LagrangianPhase
    }

    /// Degree used to bring f to the homogeneous degree-one normal form.
    pub fn normal_degree(&self) -> f64 {
        match self.f.kind {
            SymFunKind::SigmaK { k } | SymFunKind::SNormK { k } => k as f64,
            SymFunKind::QuotientRoot { .. } | SymFunKind::LagrangianPhase => 1.0,
        }
    }

    /// f_ext(λ) for σ-kinds, the phase for the phase operator.
    pub fn lhs(&self, lambda: &[f64]) -> f64 {
        let n = lambda.len();
        if self.f.kind == SymFunKind::LagrangianPhase {
            return phase_slice(lambda);
        }
        let mut stack = [0.0; 9];
        let mut heap = Vec::new();
        let e: &mut [f64] = if n < 9 {
            &mut stack[..=n]
        } else {
            heap.resize(n + 1, 0.0);
            &mut heap
        };
        elementary_into(lambda, e);
        let inside = match self.cone.kind {
            ConeKind::GammaM { m } => in_closed_gamma(e, m),
            _ => self.cone.contains_slice(lambda, true),
        };
        if !inside {
            return 0.0;
        }
        match self.f.kind {
            SymFunKind::SigmaK { k } => e[k],
            SymFunKind::SNormK { k } => e[k] / binomial(n, k),
            SymFunKind::QuotientRoot { k, l } => {
                if in_closed_gamma(e, k) {
                    quotient_from_elementary(e, n, k, l)
                } else {
                    0.0
                }
            }
            SymFunKind::LagrangianPhase => unreachable!(),
        }
    }

    pub fn rhs_value(&self, z: &[f64], s: f64) -> f64 {
        self.rhs.eval(z, s)
    }

    /// Degree-one residual G(λ) − T(z, s) driving the relaxation.
    pub fn normal_residual(&self, lambda: &[f64], z: &[f64], s: f64) -> f64 {
        match self.f.kind {
            SymFunKind::LagrangianPhase => phase_slice(lambda) - self.rhs.eval(z, s),
            _ => {
                let d = self.normal_degree();
                let lhs = self.lhs(lambda);
                let rhs = self.rhs.eval(z, s);
                if d == 1.0 {
                    lhs - rhs
                } else {
                    lhs.max(0.0).powf(1.0 / d) - rhs.powf(1.0 / d)
                }
            }
        }
    }

    /// Sampled checks of ψ > 0, monotonicity in s and the phase range.
    pub fn validate(&self, grid: &Grid, s_range: (f64, f64)) -> Result<()> {
        if grid.n() != self.n() {
            return domain(format!(
                "operator has n = {}, grid has n = {}",
                self.n(),
                grid.n()
            ));
        }
        let nodes = grid.closure_nodes();
        let step = (nodes.len() / 2000).max(1);
        let samples = [s_range.0, 0.5 * (s_range.0 + s_range.1), s_range.1];
        let mut x = vec![0.0; grid.dim()];
        for &i in nodes.iter().step_by(step) {
            grid.coords_into(i, &mut x);
            let vals: Vec<f64> = samples.iter().map(|&s| self.rhs.eval(&x, s)).collect();
            if let Some(delta) = self.phase_delta {
                let n = self.n() as f64;
                let lo = critical_phase(self.n()) + delta;
                if vals
                    .iter()
                    .any(|&v| !(v >= lo - 1e-12 && v < n * FRAC_PI_2))
                {
                    return domain(format!(
                        "phase target leaves [{lo}, {}) at {x:?}",
                        n * FRAC_PI_2
                    ));
                }
            } else if vals.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return domain(format!("right-hand side not positive at {x:?}"));
            }
            if self.rhs.monotone_in_s && vals.windows(2).any(|w| w[1] < w[0]) {
                return domain(format!("right-hand side decreases in s at {x:?}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Subsolution,
    Supersolution,
    Both,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuperDefinition {
    /// inf over N ≥ 0 of F at λ(Hu + N).
    InfOverN,
    /// Only test Hessians with λ ∈ Γ̄ count.
    ConeRestricted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub node: usize,
    pub coords: Vec<f64>,
    pub margin: f64,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub tol: f64,
    pub checked_nodes: usize,
    pub failures: usize,
    /// Smallest margin; negative below −tol means failure.
    pub worst: Option<NodeReport>,
    /// Nodes excluded as kinks.
    pub kink_nodes: Vec<usize>,
}

impl Certificate {
    pub fn is_sub(&self) -> bool {
        matches!(self.verdict, Verdict::Subsolution | Verdict::Both)
    }

    pub fn is_super(&self) -> bool {
        matches!(self.verdict, Verdict::Supersolution | Verdict::Both)
    }

    pub fn worst_margin(&self) -> f64 {
        self.worst.as_ref().map_or(f64::INFINITY, |w| w.margin)
    }
}

/// Options shared by the certification routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub tol: f64,
    /// A node is a kink when its pure second differences reach +κ/h and −κ/h.
    pub kink_threshold: Option<f64>,
    /// Evaluate the supersolution infimum by random rank-one PSD augmentations.
    pub psd_sampling: bool,
}

impl CertifyOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            kink_threshold: Some(1.0),
            psd_sampling: false,
        }
    }

    /// 10·h, dominated by first-order boundary localization.
    pub fn default_for(grid: &Grid) -> Self {
        Self::with_tol(10.0 * grid.h())
    }
}

/// Per-node spectral data of a field.
pub(crate) struct NodeSpectra {
    pub nodes: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub hessians: Vec<Complex64>,
    pub n: usize,
}

pub(crate) fn node_spectra(u: &GridField, nodes: &[usize]) -> Result<NodeSpectra> {
    let g = u.grid();
    let n = g.n();
    let mut lambdas = vec![0.0; nodes.len() * n];
    let mut hessians = vec![Complex64::new(0.0, 0.0); nodes.len() * n * n];
    for (k, &node) in nodes.iter().enumerate() {
        let hb = &mut hessians[k * n * n..(k + 1) * n * n];
        g.hessian_into(u.values(), node, hb);
        eigenvalues_into(n, hb, &mut lambdas[k * n..(k + 1) * n])?;
    }
    Ok(NodeSpectra {
        nodes: nodes.to_vec(),
        lambdas,
        hessians,
        n,
    })
}

pub(crate) fn is_kink(grid: &Grid, u: &[f64], node: usize, kappa: f64) -> bool {
    let h = grid.h();
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for a in 0..grid.dim() {
        let s = grid.stride(a);
        let d = (u[node + s] - 2.0 * u[node] + u[node - s]) / (h * h);
        hi = hi.max(d);
        lo = lo.min(d);
    }
    hi * h >= kappa && lo * h <= -kappa
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Runs `margin` on every interior node and gathers the certificate pieces.
fn scan(
    u: &GridField,
    opts: &CertifyOptions,
    mut margin: impl FnMut(usize, &[f64], &[Complex64], &[f64], f64) -> f64,
) -> Result<(usize, usize, Option<NodeReport>, Vec<usize>)> {
    let g = u.grid();
    let spectra = node_spectra(u, g.interior())?;
    let n = spectra.n;
    let mut x = vec![0.0; g.dim()];
    let mut failures = 0;
    let mut checked = 0;
    let mut worst: Option<NodeReport> = None;
    let mut kinks = Vec::new();
    for (k, &node) in spectra.nodes.iter().enumerate() {
        if let Some(kappa) = opts.kink_threshold {
            if is_kink(g, u.values(), node, kappa) {
                kinks.push(node);
                continue;
            }
        }
        checked += 1;
        g.coords_into(node, &mut x);
        let lam = &spectra.lambdas[k * n..(k + 1) * n];
        let hess = &spectra.hessians[k * n * n..(k + 1) * n * n];
        let m = margin(node, lam, hess, &x, u.value(node));
        if m < -opts.tol {
            failures += 1;
        }
        if worst.as_ref().is_none_or(|w| m < w.margin) {
            worst = Some(NodeReport {
                node,
                coords: x.clone(),
                margin: m,
                lambda: sorted_desc(lam),
            });
        }
    }
    Ok((checked, failures, worst, kinks))
}

/// Passes when f_ext(λ(Hu)) ≥ ψ(z, u) − tol at every non-kink interior node.
pub fn certify_subsolution(
    u: &GridField,
    op: &OperatorSpec,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let (checked, failures, worst, kink_nodes) =
        scan(u, opts, |_, lam, _, z, s| op.lhs(lam) - op.rhs_value(z, s))?;
    Ok(Certificate {
        verdict: if failures == 0 {
            Verdict::Subsolution
        } else {
            Verdict::Neither
        },
        tol: opts.tol,
        checked_nodes: checked,
        failures,
        worst,
        kink_nodes,
    })
}

const PSD_SAMPLES: usize = 20;

fn sampled_infimum(op: &OperatorSpec, hess: &[Complex64], node: usize) -> Result<f64> {
    let n = op.n();
    let mut rng = ChaCha8Rng::seed_from_u64(node as u64);
    let mut best = op.lhs(&{
        let mut l = vec![0.0; n];
        eigenvalues_into(n, hess, &mut l)?;
        l
    });
    let mut aug = hess.to_vec();
    let mut lam = vec![0.0; n];
    for _ in 0..PSD_SAMPLES {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for e in -3..=3 {
            let t = 10f64.powi(e) / (norm * norm);
            for i in 0..n {
                for j in 0..n {
                    aug[i * n + j] = hess[i * n + j] + v[i] * v[j].conj() * t;
                }
            }
            eigenvalues_into(n, &aug, &mut lam)?;
            best = best.min(op.lhs(&lam));
        }
    }
    Ok(best)
}

/// Supersolution test under either definition.
pub fn certify_supersolution(
    u: &GridField,
    op: &OperatorSpec,
    opts: &CertifyOptions,
    definition: SuperDefinition,
) -> Result<Certificate> {
    let mut err = None;
    let (checked, failures, worst, kink_nodes) = scan(u, opts, |node, lam, hess, z, s| {
        let psi = op.rhs_value(z, s);
        match definition {
            SuperDefinition::InfOverN => {
                // f_ext is monotone along Γ_n, so the infimum sits at N = 0.
                let inf = if opts.psd_sampling {
                    match sampled_infimum(op, hess, node) {
                        Ok(v) => v,
                        Err(e) => {
                            err = Some(e);
                            f64::NAN
                        }
                    }
                } else {
                    op.lhs(lam)
                };
                psi - inf
            }
            SuperDefinition::ConeRestricted => {
                if !op.cone.contains_slice(lam, true) {
                    f64::INFINITY
                } else {
                    psi - op.lhs(lam)
                }
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Certificate {
        verdict: if failures == 0 {
            Verdict::Supersolution
        } else {
            Verdict::Neither
        },
        tol: opts.tol,
        checked_nodes: checked,
        failures,
        worst,
        kink_nodes,
    })
}

/// Combined verdict from both tests (InfOverN supersolution definition).
pub fn certify_both(
    u: &GridField,
    op: &OperatorSpec,
    opts: &CertifyOptions,
) -> Result<(Verdict, Certificate, Certificate)> {
    let sub = certify_subsolution(u, op, opts)?;
    let sup = certify_supersolution(u, op, opts, SuperDefinition::InfOverN)?;
    let verdict = match (sub.is_sub(), sup.is_super()) {
        (true, true) => Verdict::Both,
        (true, false) => Verdict::Subsolution,
        (false, true) => Verdict::Supersolution,
        (false, false) => Verdict::Neither,
    };
    Ok((verdict, sub, sup))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub ok: bool,
    pub tol: f64,
    pub worst: Option<NodeReport>,
}

/// λ(Hu) ∈ Γ̄ up to a diagonal shift of tol at every interior node.
pub fn gamma_subharmonic_check(u: &GridField, cone: &ConeSpec, tol: f64) -> Result<GammaReport> {
    let g = u.grid();
    let spectra = node_spectra(u, g.interior())?;
    let n = spectra.n;
    let mut worst: Option<NodeReport> = None;
    for (k, &node) in spectra.nodes.iter().enumerate() {
        let lam = &spectra.lambdas[k * n..(k + 1) * n];
        let d = distance_slice(cone, lam)?;
        if worst.as_ref().is_none_or(|w| d < w.margin) {
            worst = Some(NodeReport {
                node,
                coords: g.coords(node),
                margin: d,
                lambda: sorted_desc(lam),
            });
        }
    }
    let ok = worst.as_ref().is_none_or(|w| w.margin >= -tol);
    Ok(GammaReport { ok, tol, worst })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub interior_gap: f64,
    pub boundary_gap: f64,
    pub tol_grid: f64,
    pub principle_ok: bool,
    pub sub_certified: Option<bool>,
    pub super_certified: Option<bool>,
}

/// Constant C in the comparison allowance C·h.
pub const COMPARE_C: f64 = 1.0;

/// max_interior(u − v) ≤ max(max_band(u − v), 0) + C·h.
///
/// With `certify` set, both inputs are certified first and the outcome recorded.
pub fn compare(
    u_sub: &GridField,
    v_super: &GridField,
    op: &OperatorSpec,
    certify: Option<&CertifyOptions>,
) -> Result<ComparisonReport> {
    let diff = u_sub.zip_with(v_super, |a, b| a - b)?;
    let h = u_sub.grid().h();
    let interior_gap = diff.max_interior();
    let boundary_gap = diff.max_band();
    let tol_grid = COMPARE_C * h;
    let (sub_certified, super_certified) = match certify {
        Some(o) => (
            Some(certify_subsolution(u_sub, op, o)?.is_sub()),
            Some(certify_supersolution(v_super, op, o, SuperDefinition::InfOverN)?.is_super()),
        ),
        None => (None, None),
    };
    Ok(ComparisonReport {
        interior_gap,
        boundary_gap,
        tol_grid,
        principle_ok: interior_gap <= boundary_gap.max(0.0) + tol_grid,
        sub_certified,
        super_certified,
    })
}

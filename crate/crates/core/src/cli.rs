//! Command-line driver: JSON configs in, `report.json` plus CSV fields and
//! traces out.
//!
//! Exit codes: 0 success, 1 malformed input, 2 certification or comparison
//! failure, 3 numeric non-convergence.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::barriers::{build_bundle, global_barrier, holder_barrier};
use crate::error::Error;
use crate::grid::{fmt17, DomainSpec, Grid, GridField};
use crate::hermitian::{matrix_lemma_gap, ComplexMatrix};
use crate::regularize::{
    abp_check, inf_convolution, max_gradient_norm, min_directional_curvature,
    min_real_hessian_eigenvalue, sup_convolution, ConvolutionParams,
};
use crate::report::to_json_string;
use crate::solver::{
    measure_holder_seeded, pluripotential_crosscheck, solve, BoundaryData, CrosscheckOptions, Init,
    SolveConfig, SolveReport, DEFAULT_MAX_ITERS, DEFAULT_RESIDUAL_TOL,
};
use crate::viscosity::{
    certify_subsolution, certify_supersolution, compare, CertifyOptions, OperatorSpec, Rhs,
    SuperDefinition,
};
use crate::VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_FAILED_CHECK: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

pub const DEFAULT_SEED: u64 = 0;
/// Matrix-lemma pass threshold on the normalized gap.
pub const LEMMA_GAP_FLOOR: f64 = -1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "hessiasol",
    version,
    about = "Solve and certify complex Hessian equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for report.json and CSV artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for all sampling; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true, env = "HESSIASOL_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Certify,
    Compare,
    Convolve,
    Abp,
    Barriers,
    MatrixLemma {
        /// Complex dimension.
        #[arg(long)]
        n: Option<usize>,
        /// Random pairs per k.
        #[arg(long)]
        samples: Option<usize>,
    },
    Crosscheck,
    Holder,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Certify => "certify",
            Command::Compare => "compare",
            Command::Convolve => "convolve",
            Command::Abp => "abp",
            Command::Barriers => "barriers",
            Command::MatrixLemma { .. } => "matrix-lemma",
            Command::Crosscheck => "crosscheck",
            Command::Holder => "holder",
        }
    }
}

/// Closed-form functions usable as boundary data, fields and exact solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    /// offset + scale·|z|².
    Quadratic {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    /// |z|⁴ + |z|².
    Quartic,
    /// |z − ξ|^{2α}.
    Holder {
        xi: Vec<f64>,
        alpha: f64,
    },
    Linear {
        coeffs: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// 1 above the hyperplane x_axis = 0, 0 below.
    Jump {
        axis: usize,
    },
}

fn one() -> f64 {
    1.0
}

impl FunctionSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2 = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        match self {
            FunctionSpec::Constant { value } => *value,
            FunctionSpec::Quadratic { scale, offset } => offset + scale * r2(x),
            FunctionSpec::Quartic => {
                let s = r2(x);
                s * s + s
            }
            FunctionSpec::Holder { xi, alpha } => {
                let d2: f64 = x.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.powf(*alpha)
            }
            FunctionSpec::Linear { coeffs, offset } => {
                offset + x.iter().zip(coeffs).map(|(a, b)| a * b).sum::<f64>()
            }
            FunctionSpec::Jump { axis } => {
                if x[*axis] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self, dim: usize) -> Result<(), String> {
        match self {
            FunctionSpec::Holder { xi, alpha } => {
                if xi.len() != dim {
                    return Err(format!("holder.xi needs {dim} entries, got {}", xi.len()));
                }
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err("holder.alpha must lie in (0, 1)".into());
                }
            }
            FunctionSpec::Linear { coeffs, .. } if coeffs.len() != dim => {
                return Err(format!(
                    "linear.coeffs needs {dim} entries, got {}",
                    coeffs.len()
                ));
            }
            FunctionSpec::Jump { axis } if *axis >= dim => {
                return Err(format!("jump.axis must be < {dim}"))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn boundary(&self) -> BoundaryData {
        let f = self.clone();
        Arc::new(move |x: &[f64]| f.eval(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorChoice {
    /// Normalized S_n = ψ.
    MongeAmpere,
    /// Normalized S_k = ψ.
    Hessian { k: usize },
    /// S_k/S_l = ψ, solved in root form.
    Quotient { k: usize, l: usize },
    /// Σ arctan λ_i = h(z) with supercritical margin δ.
    Lagrangian { delta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhsSpec {
    Constant {
        value: f64,
    },
    /// scale·e^s.
    ExpS {
        scale: f64,
    },
    /// The operator applied to the spectrum of |z|⁴ + |z|²: (1 + 4|z|², 1 + 2|z|², …).
    Quartic,
}

/// The Dirichlet problem shared by most commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainSpec,
    pub h: f64,
    pub operator: OperatorChoice,
    pub rhs: RhsSpec,
    pub boundary: FunctionSpec,
    /// Known solution, for sup-error reporting.
    #[serde(default)]
    pub exact: Option<FunctionSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitChoice {
    Subsolution,
    HarmonicExtension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveParams {
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_init")]
    pub init: InitChoice,
}

fn default_residual_tol() -> f64 {
    DEFAULT_RESIDUAL_TOL
}
fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}
fn default_init() -> InitChoice {
    InitChoice::Subsolution
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            dt: None,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            init: InitChoice::Subsolution,
        }
    }
}

/// Where a field comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    /// A CSV dump on the problem grid.
    Csv {
        path: PathBuf,
    },
    Function {
        function: FunctionSpec,
    },
    /// Solve the problem first.
    Solve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Sub,
    Super,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyParams {
    pub field: FieldSource,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default = "default_expect")]
    pub expect: Expectation,
    #[serde(default = "default_definition")]
    pub definition: SuperDefinition,
}

fn default_expect() -> Expectation {
    Expectation::Both
}
fn default_definition() -> SuperDefinition {
    SuperDefinition::InfOverN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareParams {
    pub sub: FieldSource,
    #[serde(rename = "super")]
    pub sup: FieldSource,
    #[serde(default)]
    pub certify: bool,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionKind {
    Sup,
    Inf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvolveParams {
    pub field: FieldSource,
    pub eps: f64,
    /// Defaults to the oscillation of the field.
    #[serde(default)]
    pub c0: Option<f64>,
    #[serde(default = "default_conv_kind")]
    pub kind: ConvolutionKind,
}

fn default_conv_kind() -> ConvolutionKind {
    ConvolutionKind::Sup
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbpParams {
    pub field: FieldSource,
    /// Semi-convexity constant: D²u ≥ −2k.
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierKind {
    Bundle,
    Holder,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierParams {
    pub kind: BarrierKind,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub xi: Option<Vec<f64>>,
    #[serde(default)]
    pub a_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixLemmaParams {
    pub n: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Defaults to every k in 1..=n.
    #[serde(default)]
    pub k: Option<Vec<usize>>,
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosscheckParams {
    pub field: FieldSource,
    pub k: usize,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default = "default_b_samples")]
    pub samples: usize,
}

fn default_b_samples() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderParams {
    pub field: FieldSource,
    pub alpha: f64,
}

/// Whole configuration file. Each command reads its own section plus `problem`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub solve: Option<SolveParams>,
    #[serde(default)]
    pub certify: Option<CertifyParams>,
    #[serde(default)]
    pub compare: Option<CompareParams>,
    #[serde(default)]
    pub convolve: Option<ConvolveParams>,
    #[serde(default)]
    pub abp: Option<AbpParams>,
    #[serde(default)]
    pub barriers: Option<BarrierParams>,
    #[serde(default)]
    pub matrix_lemma: Option<MatrixLemmaParams>,
    #[serde(default)]
    pub crosscheck: Option<CrosscheckParams>,
    #[serde(default)]
    pub holder: Option<HolderParams>,
}

/// Why a run stopped early, mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Malformed(String),
    Check(Value),
    NonConvergence(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. } | Error::Stability { .. } => {
                Failure::NonConvergence(e.to_string())
            }
            other => Failure::Malformed(other.to_string()),
        }
    }
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Malformed(_) => EXIT_MALFORMED,
            Failure::Check(_) => EXIT_FAILED_CHECK,
            Failure::NonConvergence(_) => EXIT_NONCONVERGENCE,
        }
    }
}

type CmdResult = Result<(Value, bool), Failure>;

fn malformed(msg: impl Into<String>) -> Failure {
    Failure::Malformed(msg.into())
}

/// λ(H(|z|⁴ + |z|²)) = (1 + 4|z|², 1 + 2|z|², …, 1 + 2|z|²).
pub fn quartic_spectrum(n: usize, z: &[f64]) -> Vec<f64> {
    let r2: f64 = z.iter().map(|v| v * v).sum();
    let mut lam = vec![1.0 + 2.0 * r2; n];
    lam[0] = 1.0 + 4.0 * r2;
    lam
}

impl ProblemConfig {
    fn validate(&self) -> Result<(), Failure> {
        self.domain
            .validate()
            .map_err(|e| malformed(format!("problem.domain: {e}")))?;
        let dim = self.domain.real_dim();
        self.boundary
            .validate(dim)
            .map_err(|e| malformed(format!("problem.boundary: {e}")))?;
        if let Some(x) = &self.exact {
            x.validate(dim)
                .map_err(|e| malformed(format!("problem.exact: {e}")))?;
        }
        if !(self.h > 0.0) {
            return Err(malformed("problem.h must be positive"));
        }
        Ok(())
    }

    /// Builds the operator; `ψ` is root-normalized for quotients.
    pub fn operator(&self) -> Result<OperatorSpec, Failure> {
        let n = self.domain.n;
        let base = self.operator.clone();
        let raw_op = |rhs: Rhs| -> Result<OperatorSpec, Error> {
            match &base {
                OperatorChoice::MongeAmpere => OperatorSpec::monge_ampere(n, rhs),
                OperatorChoice::Hessian { k } => OperatorSpec::hessian(*k, n, rhs),
                OperatorChoice::Quotient { k, l } => OperatorSpec::quotient(*k, *l, n, rhs),
                OperatorChoice::Lagrangian { delta } => OperatorSpec::lagrangian(n, rhs, *delta),
            }
        };
        let root = match self.operator {
            OperatorChoice::Quotient { k, l } if k > l => 1.0 / (k - l) as f64,
            _ => 1.0,
        };
        let rhs = match &self.rhs {
            RhsSpec::Constant { value } => Rhs::constant(value.powf(root)),
            RhsSpec::ExpS { scale } => {
                let c = *scale;
                Rhs::new(
                    format!("({c}·e^s)^{root}"),
                    true,
                    true,
                    move |_, s: f64| (c * s.exp()).powf(root),
                )
            }
            RhsSpec::Quartic => {
                // The lhs of the raw operator on the analytic spectrum is ψ itself.
                let probe = raw_op(Rhs::constant(1.0))
                    .map_err(|e| malformed(format!("problem.operator: {e}")))?;
                Rhs::of_z("quartic", move |z: &[f64]| {
                    probe.lhs(&quartic_spectrum(n, z))
                })
            }
        };
        raw_op(rhs).map_err(|e| malformed(format!("problem.operator: {e}")))
    }

    pub fn grid(&self) -> Result<Arc<Grid>, Failure> {
        Grid::new(self.domain.clone(), self.h).map_err(|e| malformed(format!("problem: {e}")))
    }
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    seed: u64,
}

impl Runner<'_> {
    fn problem(&self) -> Result<&ProblemConfig, Failure> {
        let p = self
            .cfg
            .problem
            .as_ref()
            .ok_or_else(|| malformed("missing section: problem"))?;
        p.validate()?;
        Ok(p)
    }

    fn section<'b, T>(&self, s: &'b Option<T>, name: &str) -> Result<&'b T, Failure> {
        s.as_ref()
            .ok_or_else(|| malformed(format!("missing section: {name}")))
    }

    fn write_field(&self, name: &str, f: &GridField) -> Result<(), Failure> {
        let file =
            fs::File::create(self.out.join(name)).map_err(|e| malformed(format!("{name}: {e}")))?;
        f.write_csv(BufWriter::new(file))?;
        Ok(())
    }

    fn write_trace(&self, trace: &[(usize, f64)]) -> Result<(), Failure> {
        let file = fs::File::create(self.out.join("trace.csv"))
            .map_err(|e| malformed(format!("trace.csv: {e}")))?;
        let mut w = BufWriter::new(file);
        let io = |e: std::io::Error| malformed(format!("trace.csv: {e}"));
        writeln!(w, "iter,residual").map_err(io)?;
        for (i, r) in trace {
            writeln!(w, "{i},{}", fmt17(*r)).map_err(io)?;
        }
        Ok(())
    }

    fn run_solve(&self) -> Result<(GridField, SolveReport), Failure> {
        let p = self.problem()?;
        let params = self.cfg.solve.clone().unwrap_or_default();
        let mut sc = SolveConfig::new(p.operator()?, p.domain.clone(), p.boundary.boundary(), p.h);
        sc.dt = params.dt;
        sc.residual_tol = params.residual_tol;
        sc.max_iters = params.max_iters;
        sc.init = match params.init {
            InitChoice::Subsolution => Init::Subsolution,
            InitChoice::HarmonicExtension => Init::HarmonicExtension,
        };
        let (u, report) = solve(&sc)?;
        self.write_trace(&report.trace)?;
        Ok((u, report))
    }

    fn field(&self, src: &FieldSource) -> Result<GridField, Failure> {
        let p = self.problem()?;
        match src {
            FieldSource::Csv { path } => {
                let grid = p.grid()?;
                let file = fs::File::open(path)
                    .map_err(|e| malformed(format!("{}: {e}", path.display())))?;
                GridField::read_csv(&grid, BufReader::new(file))
                    .map_err(|e| malformed(format!("{}: {e}", path.display())))
            }
            FieldSource::Function { function } => {
                function.validate(p.domain.real_dim()).map_err(malformed)?;
                let grid = p.grid()?;
                Ok(GridField::from_fn(&grid, |x| function.eval(x)))
            }
            FieldSource::Solve => Ok(self.run_solve()?.0),
        }
    }

    fn solve_cmd(&self) -> CmdResult {
        let p = self.problem()?;
        let (u, report) = self.run_solve()?;
        self.write_field("u.csv", &u)?;
        let sup_error = p.exact.as_ref().map(|x| {
            let g = u.grid();
            g.closure_nodes()
                .iter()
                .map(|&i| (u.value(i) - x.eval(&g.coords(i))).abs())
                .fold(0.0, f64::max)
        });
        let ok = report.certified();
        Ok((
            json!({ "solve": report, "sup_error": sup_error, "certified": ok }),
            ok,
        ))
    }

    fn certify_cmd(&self) -> CmdResult {
        let p = self.problem()?;
        let c = self.section(&self.cfg.certify, "certify")?;
        let u = self.field(&c.field)?;
        let op = p.operator()?;
        let opts = match c.tol {
            Some(t) => CertifyOptions::with_tol(t),
            None => CertifyOptions::default_for(u.grid()),
        };
        let sub = certify_subsolution(&u, &op, &opts)?;
        let sup = certify_supersolution(&u, &op, &opts, c.definition)?;
        let ok = match c.expect {
            Expectation::Sub => sub.is_sub(),
            Expectation::Super => sup.is_super(),
            Expectation::Both => sub.is_sub() && sup.is_super(),
        };
        Ok((
            json!({ "expect": c.expect, "subsolution": sub, "supersolution": sup, "passed": ok }),
            ok,
        ))
    }

    fn compare_cmd(&self) -> CmdResult {
        let p = self.problem()?;
        let c = self.section(&self.cfg.compare, "compare")?;
        let u = self.field(&c.sub)?;
        let v = self.field(&c.sup)?;
        let op = p.operator()?;
        let opts = c.tol.map_or_else(
            || CertifyOptions::default_for(u.grid()),
            CertifyOptions::with_tol,
        );
        let r = compare(&u, &v, &op, c.certify.then_some(&opts))?;
        let ok =
            r.principle_ok && r.sub_certified != Some(false) && r.super_certified != Some(false);
        Ok((json!({ "comparison": r }), ok))
    }

    fn convolve_cmd(&self) -> CmdResult {
        let c = self.section(&self.cfg.convolve, "convolve")?;
        let u = self.field(&c.field)?;
        let c0 =
            c.c0.unwrap_or_else(|| u.oscillation().max(f64::MIN_POSITIVE));
        let params = ConvolutionParams::new(c.eps, c0)?;
        let out = match c.kind {
            ConvolutionKind::Sup => sup_convolution(&u, params),
            ConvolutionKind::Inf => inf_convolution(&u, params),
        };
        self.write_field("convolved.csv", &out)?;
        let g = u.grid();
        let nodes = g.closure_nodes();
        let signed = |a: f64, b: f64| {
            if c.kind == ConvolutionKind::Sup {
                a - b
            } else {
                b - a
            }
        };
        let min_gap = nodes
            .iter()
            .map(|&i| signed(out.value(i), u.value(i)))
            .fold(f64::INFINITY, f64::min);
        let lipschitz = max_gradient_norm(&out, g.interior());
        let bound = 2.0 * c0 / c.eps;
        // Curvatures of the sup side: u^ε itself, or −u_ε for the inf-convolution.
        let lower = if c.kind == ConvolutionKind::Sup {
            out.clone()
        } else {
            out.map(|v| -v)
        };
        let directional = min_directional_curvature(&lower);
        let eigen = min_real_hessian_eigenvalue(&lower, g.interior())?;
        let ok = min_gap >= 0.0;
        Ok((
            json!({
                "kind": c.kind,
                "eps": c.eps,
                "c0": c0,
                "min_order_gap": min_gap,
                "lipschitz_measured": lipschitz,
                "lipschitz_bound": bound,
                "ordered": ok,
                "semi_convexity": {
                    "min_directional_curvature": directional,
                    "min_hessian_eigenvalue": eigen,
                    "bound": -bound,
                    "bound_eps_squared": -2.0 * c0 / (c.eps * c.eps),
                    "directional_holds": directional >= -bound * (1.0 + 1e-9),
                },
            }),
            ok,
        ))
    }

    fn abp_cmd(&self) -> CmdResult {
        let c = self.section(&self.cfg.abp, "abp")?;
        let u = self.field(&c.field)?;
        let r = abp_check(&u, c.k)?;
        let ok = r.bound_ok || r.vacuous;
        Ok((json!({ "abp": r }), ok))
    }

    fn barriers_cmd(&self) -> CmdResult {
        let p = self.problem()?;
        let c = self.section(&self.cfg.barriers, "barriers")?;
        let op = p.operator()?;
        let grid = p.grid()?;
        let phi = p.boundary.boundary();
        let need_alpha = || {
            c.alpha
                .ok_or_else(|| malformed("barriers.alpha is required"))
        };
        match c.kind {
            BarrierKind::Bundle => {
                let b = build_bundle(&op, &grid, phi.as_ref())?;
                self.write_field("subsolution.csv", &b.subsolution)?;
                self.write_field("supersolution.csv", &b.supersolution)?;
                let ok = b.sub_certificate.is_sub() && b.super_certificate.is_super();
                Ok((
                    json!({
                        "kind": "bundle",
                        "a1": b.a1,
                        "a2": b.a2,
                        "subsolution": b.sub_certificate,
                        "supersolution": b.super_certificate,
                        "log": b.log,
                    }),
                    ok,
                ))
            }
            BarrierKind::Holder => {
                let alpha = need_alpha()?;
                let xi =
                    c.xi.clone()
                        .ok_or_else(|| malformed("barriers.xi is required"))?;
                let hb = holder_barrier(&xi, alpha, &op, &grid, phi.as_ref(), None)?;
                self.write_field("barrier.csv", &hb.field)?;
                Ok((
                    json!({
                        "kind": "holder",
                        "xi": hb.xi,
                        "alpha": hb.alpha,
                        "c": hb.c,
                        "c_tilde": hb.c_tilde,
                        "admissibility_margin": hb.admissibility_margin,
                    }),
                    true,
                ))
            }
            BarrierKind::Global => {
                let alpha = need_alpha()?;
                let a_bound = c
                    .a_bound
                    .ok_or_else(|| malformed("barriers.a_bound is required"))?;
                let gb = global_barrier(&op, &grid, phi.as_ref(), alpha, a_bound)?;
                self.write_field("envelope.csv", &gb.field)?;
                let measured = measure_holder_seeded(&gb.field, alpha, self.seed)?;
                let ok = gb.certificate.is_sub() && gb.ordering.principle_ok;
                Ok((
                    json!({
                        "kind": "global",
                        "a": gb.a,
                        "alpha": gb.alpha,
                        "c_tilde": gb.c_tilde,
                        "c": gb.geometry.c,
                        "net_size": gb.net.len(),
                        "predicted_holder": gb.predicted_holder,
                        "measured_holder": measured.holder_constant,
                        "certificate": gb.certificate,
                        "ordering": gb.ordering,
                        "max_excess_over_harmonic": gb.max_excess_over_harmonic,
                    }),
                    ok,
                ))
            }
        }
    }

    fn matrix_lemma_cmd(&self, n_flag: Option<usize>, samples_flag: Option<usize>) -> CmdResult {
        let section = self.cfg.matrix_lemma.as_ref();
        let n = n_flag
            .or(section.map(|s| s.n))
            .ok_or_else(|| malformed("matrix-lemma needs --n or matrix_lemma.n"))?;
        let samples = samples_flag
            .or(section.map(|s| s.samples))
            .unwrap_or_else(default_samples);
        if n == 0 {
            return Err(malformed("n must be positive"));
        }
        let ks: Vec<usize> = section
            .and_then(|s| s.k.clone())
            .unwrap_or_else(|| (1..=n).collect());
        if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > n) {
            return Err(malformed(format!("k = {k} outside 1..={n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut per_k = Vec::new();
        let mut min_gap = f64::INFINITY;
        for &k in &ks {
            let mut worst = f64::INFINITY;
            for _ in 0..samples {
                let a = ComplexMatrix::random_gaussian(n, &mut rng);
                let b = ComplexMatrix::random_gaussian(n, &mut rng);
                worst = worst.min(matrix_lemma_gap(k, &a, &b)?.normalized());
            }
            min_gap = min_gap.min(worst);
            per_k.push(json!({ "k": k, "min_gap": worst }));
        }
        let ok = min_gap >= LEMMA_GAP_FLOOR;
        Ok((
            json!({ "n": n, "samples": samples, "per_k": per_k, "min_gap": min_gap }),
            ok,
        ))
    }

    fn crosscheck_cmd(&self) -> CmdResult {
        let p = self.problem()?;
        let c = self.section(&self.cfg.crosscheck, "crosscheck")?;
        let u = self.field(&c.field)?;
        // Checks are phrased for the raw ψ of the inverse-σ form.
        let psi = match &p.rhs {
            RhsSpec::Constant { value } => Rhs::constant(*value),
            RhsSpec::ExpS { scale } => {
                let s0 = *scale;
                Rhs::new("e^s", true, true, move |_, s: f64| s0 * s.exp())
            }
            RhsSpec::Quartic => {
                return Err(malformed(
                    "crosscheck needs a constant or exp_s right-hand side",
                ))
            }
        };
        let mut opts = CrosscheckOptions::default_for(u.grid());
        opts.samples = c.samples;
        opts.seed = self.seed;
        if let Some(t) = c.tol {
            opts.tol = t;
        }
        let r = pluripotential_crosscheck(&u, &psi, c.k, &opts)?;
        let ok = r.ok;
        Ok((json!({ "crosscheck": r }), ok))
    }

    fn holder_cmd(&self) -> CmdResult {
        let c = self.section(&self.cfg.holder, "holder")?;
        let u = self.field(&c.field)?;
        let r = measure_holder_seeded(&u, c.alpha, self.seed)?;
        let ok = r.stable && !r.divergent;
        Ok((json!({ "holder": r }), ok))
    }
}

/// Hex SHA-256 of the canonical JSON of the effective configuration.
pub fn config_hash(cfg: &RunConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses a config file, with line and column in the diagnostic on failure.
pub fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn configure_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads.filter(|&t| t > 0) {
        // A second call in the same process keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            match &f {
                Failure::Malformed(m) | Failure::NonConvergence(m) => eprintln!("hessiasol: {m}"),
                Failure::Check(v) => eprintln!("hessiasol: {v}"),
            }
            f.code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, Failure> {
    configure_threads(cli.threads);
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None if matches!(cli.command, Command::MatrixLemma { .. }) => RunConfig::default(),
        None => return Err(malformed("--config is required for this command")),
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    fs::create_dir_all(&cli.out).map_err(|e| malformed(format!("{}: {e}", cli.out.display())))?;
    let runner = Runner {
        cfg: &cfg,
        out: &cli.out,
        seed,
    };
    let outcome = match cli.command {
        Command::Solve => runner.solve_cmd(),
        Command::Certify => runner.certify_cmd(),
        Command::Compare => runner.compare_cmd(),
        Command::Convolve => runner.convolve_cmd(),
        Command::Abp => runner.abp_cmd(),
        Command::Barriers => runner.barriers_cmd(),
        Command::MatrixLemma { n, samples } => runner.matrix_lemma_cmd(n, samples),
        Command::Crosscheck => runner.crosscheck_cmd(),
        Command::Holder => runner.holder_cmd(),
    };
    let (payload, ok, code) = match outcome {
        Ok((v, true)) => (v, true, EXIT_OK),
        Ok((v, false)) => (v, false, EXIT_FAILED_CHECK),
        Err(Failure::NonConvergence(m)) => (json!({ "error": m }), false, EXIT_NONCONVERGENCE),
        Err(f) => return Err(f),
    };
    let report = json!({
        "version": VERSION,
        "command": cli.command.name(),
        "config_hash": config_hash(&cfg),
        "seed": seed,
        "ok": ok,
        "result": payload,
    });
    let text = to_json_string(&report).map_err(|e| malformed(e.to_string()))?;
    fs::write(cli.out.join("report.json"), text + "\n")
        .map_err(|e| malformed(format!("report.json: {e}")))?;
    if code == EXIT_FAILED_CHECK {
        eprintln!(
            "hessiasol: {} check failed; see {}",
            cli.command.name(),
            cli.out.join("report.json").display()
        );
    }
    Ok(code)
}

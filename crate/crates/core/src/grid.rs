//! Uniform grids over balls and boxes in ℂⁿ ≅ ℝ^{2n}, finite-difference
//! complex Hessians, defining functions, harmonic extension and CSV dumps.
//!
//! Real axis 2j carries x_{j+1} and axis 2j+1 carries y_{j+1}.

use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::hermitian::HermitianMatrix;

/// Largest supported complex dimension.
pub const MAX_COMPLEX_DIM: usize = 3;
pub const MIN_NODES_PER_AXIS: usize = 5;
pub const HARMONIC_MAX_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Ball { radius: f64 },
    Box { half_widths: Vec<f64> },
}

/// A ball or box in ℂⁿ; `center` lists 2n real coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub shape: Shape,
    pub n: usize,
    pub center: Vec<f64>,
}

impl DomainSpec {
    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Self::new(Shape::Ball { radius }, n, vec![0.0; 2 * n])
    }

    pub fn new(shape: Shape, n: usize, center: Vec<f64>) -> Result<Self> {
        let d = Self { shape, n, center };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_COMPLEX_DIM).contains(&self.n) {
            return domain(format!(
                "complex dimension {} outside 1..={MAX_COMPLEX_DIM}",
                self.n
            ));
        }
        if self.center.len() != 2 * self.n {
            return Err(Error::Dimension {
                expected: 2 * self.n,
                got: self.center.len(),
            });
        }
        match &self.shape {
            Shape::Ball { radius } if !(*radius > 0.0 && radius.is_finite()) => {
                domain("radius must be positive")
            }
            Shape::Box { half_widths } if half_widths.len() != 2 * self.n => {
                Err(Error::Dimension {
                    expected: 2 * self.n,
                    got: half_widths.len(),
                })
            }
            Shape::Box { half_widths }
                if half_widths.iter().any(|w| !(*w > 0.0 && w.is_finite())) =>
            {
                domain("half-widths must be positive")
            }
            _ => Ok(()),
        }
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    /// Half-extent of the bounding box along each real axis.
    pub fn extents(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Ball { radius } => vec![*radius; 2 * self.n],
            Shape::Box { half_widths } => half_widths.clone(),
        }
    }

    /// Strict membership in the open domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball { radius } => {
                let r2: f64 = x
                    .iter()
                    .zip(&self.center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                r2 < radius * radius
            }
            Shape::Box { half_widths } => x
                .iter()
                .zip(&self.center)
                .zip(half_widths)
                .all(|((a, c), w)| (a - c).abs() < *w),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => 2.0 * radius,
            Shape::Box { half_widths } => {
                2.0 * half_widths.iter().map(|w| w * w).sum::<f64>().sqrt()
            }
        }
    }

    /// Radius of the smallest centered ball containing the domain.
    pub fn enclosing_radius(&self) -> f64 {
        self.diameter() / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeClass {
    Interior,
    Band,
    Exterior,
}

impl NodeClass {
    pub fn code(self) -> char {
        match self {
            NodeClass::Interior => 'I',
            NodeClass::Band => 'B',
            NodeClass::Exterior => 'E',
        }
    }

    pub fn from_code(c: &str) -> Option<Self> {
        match c {
            "I" => Some(NodeClass::Interior),
            "B" => Some(NodeClass::Band),
            "E" => Some(NodeClass::Exterior),
            _ => None,
        }
    }
}

/// Node layout and classification. Shared between fields through `Arc`.
#[derive(Debug, Clone)]
pub struct Grid {
    domain: DomainSpec,
    h: f64,
    counts: Vec<usize>,
    strides: Vec<usize>,
    classes: Vec<NodeClass>,
    interior: Vec<usize>,
    band: Vec<usize>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.h == other.h
    }
}

impl Grid {
    pub fn new(domain: DomainSpec, h: f64) -> Result<Arc<Self>> {
        domain.validate()?;
        if !(h > 0.0 && h.is_finite()) {
            return crate::error::domain("grid spacing must be positive");
        }
        let counts: Vec<usize> = domain
            .extents()
            .iter()
            .map(|e| 2 * ((e / h - 1e-9).ceil().max(0.0) as usize) + 1)
            .collect();
        if let Some(c) = counts.iter().find(|&&c| c < MIN_NODES_PER_AXIS) {
            return Err(Error::Invalid(format!(
                "only {c} nodes on an axis; need at least {MIN_NODES_PER_AXIS}"
            )));
        }
        let dim = counts.len();
        let mut strides = vec![1usize; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * counts[a + 1];
        }
        let total = strides[0] * counts[0];
        let mut grid = Self {
            domain,
            h,
            counts,
            strides,
            classes: vec![NodeClass::Exterior; total],
            interior: Vec::new(),
            band: Vec::new(),
        };
        let mut x = vec![0.0; dim];
        for node in 0..total {
            grid.coords_into(node, &mut x);
            if grid.domain.contains(&x) {
                grid.classes[node] = NodeClass::Interior;
            }
        }
        let interior: Vec<usize> = (0..total)
            .filter(|&i| grid.classes[i] == NodeClass::Interior)
            .collect();
        let offsets = grid.stencil_offsets();
        for &node in &interior {
            for &off in &offsets {
                let nb = (node as isize + off) as usize;
                if grid.classes[nb] == NodeClass::Exterior {
                    grid.classes[nb] = NodeClass::Band;
                }
            }
        }
        grid.band = (0..total)
            .filter(|&i| grid.classes[i] == NodeClass::Band)
            .collect();
        grid.interior = interior;
        Ok(Arc::new(grid))
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, node: usize) -> NodeClass {
        self.classes[node]
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn band(&self) -> &[usize] {
        &self.band
    }

    /// Interior followed by band nodes.
    pub fn closure_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.len())
            .filter(|&i| self.classes[i] != NodeClass::Exterior)
            .collect();
        v.sort_unstable();
        v
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn node_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.counts[axis]
    }

    pub fn coords_into(&self, node: usize, out: &mut [f64]) {
        for (a, o) in out.iter_mut().enumerate() {
            let i = self.axis_index(node, a) as f64;
            let half = ((self.counts[a] - 1) / 2) as f64;
            *o = self.domain.center[a] + (i - half) * self.h;
        }
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.coords_into(node, &mut x);
        x
    }

    /// Nearest node to a point of the bounding box.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut node = 0;
        for (a, &v) in x.iter().enumerate() {
            let half = ((self.counts[a] - 1) / 2) as f64;
            let i = ((v - self.domain.center[a]) / self.h + half).round();
            if i < 0.0 || i >= self.counts[a] as f64 {
                return None;
            }
            node += i as usize * self.strides[a];
        }
        Some(node)
    }

    /// Signed index offsets of the axis and two-axis diagonal stencil.
    pub fn stencil_offsets(&self) -> Vec<isize> {
        let dim = self.dim();
        let s: Vec<isize> = self.strides.iter().map(|&v| v as isize).collect();
        let mut out = Vec::with_capacity(2 * dim + 2 * dim * (dim - 1));
        for a in 0..dim {
            out.push(s[a]);
            out.push(-s[a]);
            for b in a + 1..dim {
                out.extend([s[a] + s[b], s[a] - s[b], -s[a] + s[b], -s[a] - s[b]]);
            }
        }
        out
    }

    fn second_pure(&self, u: &[f64], node: usize, a: usize) -> f64 {
        let s = self.strides[a];
        (u[node + s] - 2.0 * u[node] + u[node - s]) / (self.h * self.h)
    }

    fn second_mixed(&self, u: &[f64], node: usize, a: usize, b: usize) -> f64 {
        let (sa, sb) = (self.strides[a], self.strides[b]);
        (u[node + sa + sb] - u[node + sa - sb] - u[node - sa + sb] + u[node - sa - sb])
            / (4.0 * self.h * self.h)
    }

    fn first(&self, u: &[f64], node: usize, a: usize) -> f64 {
        let s = self.strides[a];
        (u[node + s] - u[node - s]) / (2.0 * self.h)
    }

    fn check_interior(&self, node: usize) -> Result<()> {
        if self.classes.get(node) != Some(&NodeClass::Interior) {
            return Err(Error::Classification(format!(
                "node {node} is not interior"
            )));
        }
        Ok(())
    }

    /// Complex Hessian at an interior node, row-major into `out` (n² entries).
    pub(crate) fn hessian_into(&self, u: &[f64], node: usize, out: &mut [Complex64]) {
        let n = self.n();
        for j in 0..n {
            let djj =
                0.25 * (self.second_pure(u, node, 2 * j) + self.second_pure(u, node, 2 * j + 1));
            out[j * n + j] = Complex64::new(djj, 0.0);
            for k in j + 1..n {
                let re = self.second_mixed(u, node, 2 * j, 2 * k)
                    + self.second_mixed(u, node, 2 * j + 1, 2 * k + 1);
                let im = self.second_mixed(u, node, 2 * j, 2 * k + 1)
                    - self.second_mixed(u, node, 2 * j + 1, 2 * k);
                let z = Complex64::new(0.25 * re, 0.25 * im);
                out[j * n + k] = z;
                out[k * n + j] = z.conj();
            }
        }
    }

    /// Complex Hessian at one interior node.
    pub fn hessian_at(&self, u: &[f64], node: usize) -> Result<HermitianMatrix> {
        self.check_interior(node)?;
        let n = self.n();
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        self.hessian_into(u, node, &mut buf);
        HermitianMatrix::new(n, buf)
    }

    /// ∂_{z_j} u = ½(∂_{x_j} − i∂_{y_j})u at one interior node.
    pub fn gradient_at(&self, u: &[f64], node: usize) -> Result<Vec<Complex64>> {
        self.check_interior(node)?;
        Ok((0..self.n())
            .map(|j| {
                0.5 * Complex64::new(self.first(u, node, 2 * j), -self.first(u, node, 2 * j + 1))
            })
            .collect())
    }

    /// Real gradient (2n entries) by centered differences.
    pub fn real_gradient_at(&self, u: &[f64], node: usize) -> Vec<f64> {
        (0..self.dim()).map(|a| self.first(u, node, a)).collect()
    }

    /// Real 2n×2n Hessian by centered differences, row-major.
    pub fn real_hessian_at(&self, u: &[f64], node: usize) -> Vec<f64> {
        let d = self.dim();
        let mut m = vec![0.0; d * d];
        for a in 0..d {
            m[a * d + a] = self.second_pure(u, node, a);
            for b in a + 1..d {
                let v = self.second_mixed(u, node, a, b);
                m[a * d + b] = v;
                m[b * d + a] = v;
            }
        }
        m
    }

    /// Sum of pure second differences, the discrete real Laplacian.
    pub fn laplacian_at(&self, u: &[f64], node: usize) -> f64 {
        (0..self.dim()).map(|a| self.second_pure(u, node, a)).sum()
    }
}

/// A function sampled at every node of a grid.
#[derive(Debug, Clone)]
pub struct GridField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for GridField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl GridField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| v.is_nan()) {
            return domain("field has NaN values");
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.coords_into(i, &mut x);
                f(&x)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields live on different grids".into()))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Maximum over interior and band nodes.
    pub fn max_closure(&self) -> f64 {
        self.fold_class(|c| c != NodeClass::Exterior, f64::NEG_INFINITY, f64::max)
    }

    pub fn max_interior(&self) -> f64 {
        self.fold_class(|c| c == NodeClass::Interior, f64::NEG_INFINITY, f64::max)
    }

    pub fn max_band(&self) -> f64 {
        self.fold_class(|c| c == NodeClass::Band, f64::NEG_INFINITY, f64::max)
    }

    pub fn min_closure(&self) -> f64 {
        self.fold_class(|c| c != NodeClass::Exterior, f64::INFINITY, f64::min)
    }

    fn fold_class(
        &self,
        keep: impl Fn(NodeClass) -> bool,
        init: f64,
        op: impl Fn(f64, f64) -> f64,
    ) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|&(i, _)| keep(self.grid.class(i)))
            .fold(init, |acc, (_, &v)| op(acc, v))
    }

    /// Oscillation over interior and band nodes.
    pub fn oscillation(&self) -> f64 {
        self.max_closure() - self.min_closure()
    }

    /// Replaces band values by `phi` at the node coordinates.
    pub fn impose_band(&mut self, phi: &dyn Fn(&[f64]) -> f64) {
        let mut x = vec![0.0; self.grid.dim()];
        for &b in self.grid.band() {
            self.grid.coords_into(b, &mut x);
            self.values[b] = phi(&x);
        }
    }

    /// CSV dump `x_1,y_1,...,x_n,y_n,value,class` at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.grid.n();
        let header: Vec<String> = (1..=n)
            .flat_map(|j| [format!("x_{j}"), format!("y_{j}")])
            .collect();
        writeln!(w, "{},value,class", header.join(","))?;
        let mut x = vec![0.0; self.grid.dim()];
        for (i, &v) in self.values.iter().enumerate() {
            self.grid.coords_into(i, &mut x);
            for c in &x {
                write!(w, "{},", fmt17(*c))?;
            }
            writeln!(w, "{},{}", fmt17(v), self.grid.class(i).code())?;
        }
        Ok(())
    }

    /// Reads a CSV dump written for the same grid; node positions and classes must match.
    pub fn read_csv<R: BufRead>(grid: &Arc<Grid>, r: R) -> Result<Self> {
        let dim = grid.dim();
        let mut values = vec![f64::NAN; grid.len()];
        let mut seen = 0usize;
        let tol = 1e-9 * grid.h();
        for (line_no, line) in r.lines().enumerate().skip(1) {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != dim + 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns",
                    line_no + 1,
                    dim + 2
                )));
            }
            let nums: Vec<f64> = parts[..=dim]
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", line_no + 1)))?;
            let node = grid.locate(&nums[..dim]).ok_or_else(|| {
                Error::GridMismatch(format!("line {}: point outside grid", line_no + 1))
            })?;
            let x = grid.coords(node);
            if x.iter().zip(&nums[..dim]).any(|(a, b)| (a - b).abs() > tol) {
                return Err(Error::GridMismatch(format!(
                    "line {}: point off the grid lattice",
                    line_no + 1
                )));
            }
            let class = NodeClass::from_code(parts[dim + 1].trim())
                .ok_or_else(|| Error::Parse(format!("line {}: bad class code", line_no + 1)))?;
            if class != grid.class(node) {
                return Err(Error::GridMismatch(format!(
                    "line {}: class disagrees with grid",
                    line_no + 1
                )));
            }
            if values[node].is_nan() {
                seen += 1;
            }
            values[node] = nums[dim];
        }
        if seen != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{seen} of {} nodes present",
                grid.len()
            )));
        }
        Self::new(grid.clone(), values)
    }
}

/// Decimal rendering with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Complex Hessians and gradients at every interior node.
#[derive(Debug, Clone)]
pub struct ComplexHessianField {
    pub nodes: Vec<usize>,
    pub hessians: Vec<HermitianMatrix>,
    pub gradients: Vec<Vec<Complex64>>,
}

pub fn complex_hessian(u: &GridField) -> Result<ComplexHessianField> {
    let g = u.grid();
    let nodes = g.interior().to_vec();
    let mut hessians = Vec::with_capacity(nodes.len());
    let mut gradients = Vec::with_capacity(nodes.len());
    for &node in &nodes {
        hessians.push(g.hessian_at(u.values(), node)?);
        gradients.push(g.gradient_at(u.values(), node)?);
    }
    Ok(ComplexHessianField {
        nodes,
        hessians,
        gradients,
    })
}

/// ρ = (|z−c|² − R²)/(2R) for the domain's enclosing ball.
#[derive(Debug, Clone)]
pub struct DefiningFunction {
    pub field: GridField,
    pub radius: f64,
    /// Set for boxes, which borrow the enclosing ball's function.
    pub caveat: Option<String>,
}

pub fn defining_function(grid: &Arc<Grid>) -> DefiningFunction {
    let d = grid.domain();
    let (radius, caveat) = match &d.shape {
        Shape::Ball { radius } => (*radius, None),
        Shape::Box { .. } => (
            d.enclosing_radius() + grid.h(),
            Some("box domain: defining function of a strictly larger enclosing ball".to_string()),
        ),
    };
    DefiningFunction {
        field: ball_defining_field(grid, &d.center, radius),
        radius,
        caveat,
    }
}

/// (|z−c|² − R²)/(2R) on every node; its complex Hessian is Id/(2R).
pub fn ball_defining_field(grid: &Arc<Grid>, center: &[f64], radius: f64) -> GridField {
    GridField::from_fn(grid, |x| {
        let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
        (r2 - radius * radius) / (2.0 * radius)
    })
}

/// Pseudoconvexity witness −d + C·d² with d = R − |z−c| and C = 1/(2R).
pub fn pseudoconvexity_witness(grid: &Arc<Grid>) -> Result<GridField> {
    let d = grid.domain();
    let Shape::Ball { radius } = d.shape else {
        return domain("witness is provided for balls only");
    };
    let c = 1.0 / (2.0 * radius);
    let center = d.center.clone();
    Ok(GridField::from_fn(grid, move |x| {
        let r: f64 = x
            .iter()
            .zip(&center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let dist = radius - r;
        -dist + c * dist * dist
    }))
}

/// Discrete harmonic extension of band data `phi` by red–black SOR.
///
/// Stops once max |mean of axis neighbours − value| ≤ tol over interior nodes.
pub fn harmonic_extend(
    grid: &Arc<Grid>,
    phi: &dyn Fn(&[f64]) -> f64,
    tol: f64,
) -> Result<GridField> {
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let mut u = GridField::constant(grid, 0.0);
    u.impose_band(phi);
    let band_mean = if grid.band().is_empty() {
        0.0
    } else {
        grid.band().iter().map(|&b| u.values[b]).sum::<f64>() / grid.band().len() as f64
    };
    for &i in grid.interior() {
        u.values[i] = band_mean;
    }
    let dim = grid.dim();
    let strides: Vec<usize> = (0..dim).map(|a| grid.stride(a)).collect();
    let parity: Vec<bool> = grid
        .interior()
        .iter()
        .map(|&i| (0..dim).map(|a| grid.axis_index(i, a)).sum::<usize>() % 2 == 0)
        .collect();
    let extent = grid
        .domain()
        .extents()
        .iter()
        .fold(0.0f64, |a, &b| a.max(b));
    let omega = 2.0 / (1.0 + (std::f64::consts::PI * grid.h() / (2.0 * extent)).sin());
    let inv = 1.0 / (2 * dim) as f64;
    let mean = |v: &[f64], i: usize| -> f64 {
        strides.iter().map(|&s| v[i + s] + v[i - s]).sum::<f64>() * inv
    };
    for _sweep in 0..HARMONIC_MAX_SWEEPS {
        for colour in [true, false] {
            for (k, &i) in grid.interior().iter().enumerate() {
                if parity[k] == colour {
                    let m = mean(&u.values, i);
                    u.values[i] += omega * (m - u.values[i]);
                }
            }
        }
        let res = grid
            .interior()
            .iter()
            .map(|&i| (mean(&u.values, i) - u.values[i]).abs())
            .fold(0.0, f64::max);
        if res <= tol {
            return Ok(u);
        }
    }
    Err(Error::Numeric(format!(
        "harmonic extension exceeded {HARMONIC_MAX_SWEEPS} sweeps"
    )))
}

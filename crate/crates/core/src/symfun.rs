//! Symmetric functions of eigenvalue vectors.
//!
//! Values of the cone-bound kinds are zero-extended outside their cone by
//! [`eval_extended`]; gradients are never extended.

use serde::{Deserialize, Serialize};

use crate::cones::ConeSpec;
use crate::error::{domain, Error, Result};

/// Ordered real eigenvalue vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LambdaVector(Vec<f64>);

impl LambdaVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return domain("eigenvalue vector must be non-empty");
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return domain("eigenvalue vector has non-finite entries");
        }
        Ok(Self(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    /// The vector (t, ..., t).
    pub fn constant(n: usize, t: f64) -> Result<Self> {
        Self::new(vec![t; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Entries in non-increasing order; the stored order is untouched.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Adds `t` to every entry.
    pub fn shifted(&self, t: f64) -> Self {
        Self(self.0.iter().map(|v| v + t).collect())
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self(self.0.iter().map(|v| v * t).collect())
    }
}

impl TryFrom<Vec<f64>> for LambdaVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LambdaVector> for Vec<f64> {
    fn from(v: LambdaVector) -> Self {
        v.0
    }
}

/// Which symmetric function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymFunKind {
    SigmaK { k: usize },
    SNormK { k: usize },
    QuotientRoot { k: usize, l: usize },
    LagrangianPhase,
}

/// A symmetric function on ℝⁿ together with its dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymFun {
    pub kind: SymFunKind,
    pub n: usize,
}

impl SymFun {
    pub fn new(kind: SymFunKind, n: usize) -> Result<Self> {
        if n == 0 {
            return domain("dimension must be positive");
        }
        match kind {
            SymFunKind::SigmaK { k } | SymFunKind::SNormK { k } if !(1..=n).contains(&k) => {
                domain(format!("k = {k} outside 1..={n}"))
            }
            SymFunKind::QuotientRoot { k, l } if !(1 <= l && l < k && k <= n) => domain(format!(
                "quotient needs 1 <= l < k <= n, got k = {k}, l = {l}, n = {n}"
            )),
            _ => Ok(Self { kind, n }),
        }
    }

    /// Complex Monge–Ampère operator in degree-one form uses S_n; this is S_n itself.
    pub fn monge_ampere(n: usize) -> Self {
        Self {
            kind: SymFunKind::SNormK { k: n },
            n,
        }
    }

    /// The cone on whose closure the function is evaluated (`None` for the phase).
    pub fn natural_cone(&self) -> Option<ConeSpec> {
        match self.kind {
            SymFunKind::SigmaK { k }
            | SymFunKind::SNormK { k }
            | SymFunKind::QuotientRoot { k, .. } => {
                Some(ConeSpec::gamma(k, self.n).expect("validated k"))
            }
            SymFunKind::LagrangianPhase => None,
        }
    }

    /// Homogeneity degree on the cone (the phase is not homogeneous).
    pub fn degree(&self) -> Option<f64> {
        match self.kind {
            SymFunKind::SigmaK { k } | SymFunKind::SNormK { k } => Some(k as f64),
            SymFunKind::QuotientRoot { .. } => Some(1.0),
            SymFunKind::LagrangianPhase => None,
        }
    }

    /// Raw value. Quotient roots require λ in the closed cone Γ̄_k.
    pub fn value(&self, lambda: &LambdaVector) -> Result<f64> {
        self.check_dim(lambda)?;
        match self.kind {
            SymFunKind::SigmaK { k } => sigma(k, lambda),
            SymFunKind::SNormK { k } => s_norm(k, lambda),
            SymFunKind::QuotientRoot { k, l } => quotient_root(k, l, lambda),
            SymFunKind::LagrangianPhase => Ok(lagrangian_phase(lambda)),
        }
    }

    fn check_dim(&self, lambda: &LambdaVector) -> Result<()> {
        if lambda.n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: lambda.n(),
            });
        }
        Ok(())
    }
}

const PASCAL_ROWS: usize = 17;

const fn pascal() -> [[f64; PASCAL_ROWS]; PASCAL_ROWS] {
    let mut t = [[0.0; PASCAL_ROWS]; PASCAL_ROWS];
    let mut n = 0;
    while n < PASCAL_ROWS {
        t[n][0] = 1.0;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
            k += 1;
        }
        n += 1;
    }
    t
}

static PASCAL: [[f64; PASCAL_ROWS]; PASCAL_ROWS] = pascal();

/// C(n, k) as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n < PASCAL_ROWS {
        return PASCAL[n][k];
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Writes e_0..e_n of λ into `out` (length n+1) via the coefficients of Π(1 + tλ_i).
pub(crate) fn elementary_into(lambda: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), lambda.len() + 1);
    out.fill(0.0);
    out[0] = 1.0;
    for (i, &l) in lambda.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            out[j] += l * out[j - 1];
        }
    }
}

/// All elementary symmetric polynomials e_0..e_n.
pub fn elementary_all(lambda: &LambdaVector) -> Vec<f64> {
    let mut e = vec![0.0; lambda.n() + 1];
    elementary_into(lambda.as_slice(), &mut e);
    e
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if (1..=n).contains(&k) {
        Ok(())
    } else {
        domain(format!("k = {k} outside 1..={n}"))
    }
}

/// σ_k(λ).
pub fn sigma(k: usize, lambda: &LambdaVector) -> Result<f64> {
    check_k(k, lambda.n())?;
    Ok(elementary_all(lambda)[k])
}

/// S_k(λ) = σ_k(λ) / C(n, k).
pub fn s_norm(k: usize, lambda: &LambdaVector) -> Result<f64> {
    check_k(k, lambda.n())?;
    Ok(elementary_all(lambda)[k] / binomial(lambda.n(), k))
}

/// True when σ_1..σ_m are all ≥ 0 (exact comparison).
pub(crate) fn in_closed_gamma(e: &[f64], m: usize) -> bool {
    e[1..=m].iter().all(|&v| v >= 0.0)
}

pub(crate) fn quotient_from_elementary(e: &[f64], n: usize, k: usize, l: usize) -> f64 {
    let sk = e[k] / binomial(n, k);
    let sl = e[l] / binomial(n, l);
    if sk <= 0.0 || sl <= 0.0 {
        return 0.0;
    }
    (sk / sl).powf(1.0 / (k - l) as f64)
}

/// (S_k / S_l)^{1/(k−l)} on Γ̄_k; zero on ∂Γ_k.
pub fn quotient_root(k: usize, l: usize, lambda: &LambdaVector) -> Result<f64> {
    let n = lambda.n();
    if !(1 <= l && l < k && k <= n) {
        return domain(format!(
            "quotient needs 1 <= l < k <= n, got k = {k}, l = {l}, n = {n}"
        ));
    }
    let e = elementary_all(lambda);
    if !in_closed_gamma(&e, k) {
        return domain("eigenvalues outside the closed cone of the quotient");
    }
    Ok(quotient_from_elementary(&e, n, k, l))
}

/// Σ arctan λ_i.
pub fn lagrangian_phase(lambda: &LambdaVector) -> f64 {
    phase_slice(lambda.as_slice())
}

pub(crate) fn phase_slice(lambda: &[f64]) -> f64 {
    lambda.iter().map(|v| v.atan()).sum()
}

fn elementary_without(lambda: &[f64], skip: usize) -> Vec<f64> {
    let rest: Vec<f64> = lambda
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &v)| v)
        .collect();
    let mut e = vec![0.0; rest.len() + 1];
    elementary_into(&rest, &mut e);
    e
}

/// Analytic gradient ∂f/∂λ_i.
///
/// σ_k and S_k are polynomials and accept any λ. Quotient roots require λ in
/// the open cone Γ_k.
pub fn grad(f: &SymFun, lambda: &LambdaVector) -> Result<Vec<f64>> {
    f.check_dim(lambda)?;
    let n = f.n;
    let l = lambda.as_slice();
    match f.kind {
        SymFunKind::SigmaK { k } => Ok((0..n).map(|i| elementary_without(l, i)[k - 1]).collect()),
        SymFunKind::SNormK { k } => {
            let c = binomial(n, k);
            Ok((0..n)
                .map(|i| elementary_without(l, i)[k - 1] / c)
                .collect())
        }
        SymFunKind::QuotientRoot { k, l: lo } => {
            let e = elementary_all(lambda);
            if !e[1..=k].iter().all(|&v| v > 0.0) {
                return domain("quotient gradient needs eigenvalues in the open cone");
            }
            let q = quotient_from_elementary(&e, n, k, lo);
            let m = (k - lo) as f64;
            Ok((0..n)
                .map(|i| {
                    let ei = elementary_without(l, i);
                    (q / m) * (ei[k - 1] / e[k] - ei[lo - 1] / e[lo])
                })
                .collect())
        }
        SymFunKind::LagrangianPhase => Ok(l.iter().map(|v| 1.0 / (1.0 + v * v)).collect()),
    }
}

/// f(λ) when λ ∈ Γ̄, else 0.
pub fn eval_extended(f: &SymFun, cone: &ConeSpec, lambda: &LambdaVector) -> Result<f64> {
    if f.kind == SymFunKind::LagrangianPhase {
        return domain("the phase operator is not zero-extended");
    }
    f.check_dim(lambda)?;
    if !cone.contains(lambda, true)? {
        return Ok(0.0);
    }
    // A user cone larger than the natural one still yields 0 where f has no meaning.
    match f.kind {
        SymFunKind::QuotientRoot { k, l } => {
            let e = elementary_all(lambda);
            if !in_closed_gamma(&e, k) {
                return Ok(0.0);
            }
            Ok(quotient_from_elementary(&e, f.n, k, l))
        }
        _ => f.value(lambda),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[f64]) -> LambdaVector {
        LambdaVector::from_slice(v).unwrap()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(2, &lv(&[1.0, 1.0, 1.0])).unwrap(), 3.0);
        assert_eq!(sigma(2, &lv(&[1.0, 2.0, 3.0])).unwrap(), 11.0);
        assert_eq!(sigma(1, &lv(&[1.5, -2.0, 4.0])).unwrap(), 3.5);
        assert!(sigma(0, &lv(&[1.0])).is_err());
        assert!(sigma(3, &lv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn s_norm_examples() {
        assert_eq!(s_norm(2, &lv(&[1.0, 1.0, 1.0])).unwrap(), 1.0);
        assert_eq!(s_norm(1, &lv(&[2.0, 4.0])).unwrap(), 3.0);
        assert_eq!(s_norm(2, &lv(&[1.0, 2.0])).unwrap(), 2.0);
    }

    #[test]
    fn quotient_examples() {
        assert_eq!(quotient_root(2, 1, &lv(&[1.0, 1.0])).unwrap(), 1.0);
        assert!((quotient_root(2, 1, &lv(&[2.5, 2.5])).unwrap() - 2.5).abs() < 1e-15);
        assert!((quotient_root(2, 1, &lv(&[1.0, 2.0])).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(quotient_root(2, 1, &lv(&[-1.0, -1.0])).is_err());
        assert_eq!(quotient_root(2, 1, &lv(&[0.0, 3.0])).unwrap(), 0.0);
        assert_eq!(quotient_root(2, 1, &lv(&[0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn phase_examples() {
        assert_eq!(lagrangian_phase(&lv(&[0.0, 0.0])), 0.0);
        assert!((lagrangian_phase(&lv(&[1.0, 1.0])) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let mut prev = f64::NEG_INFINITY;
        for t in [1.0, 10.0, 1e3, 1e6] {
            let v = lagrangian_phase(&lv(&[t, t, t]));
            assert!(v > prev && v < 1.5 * std::f64::consts::PI);
            prev = v;
        }
    }

    #[test]
    fn grad_examples() {
        let phase = SymFun::new(SymFunKind::LagrangianPhase, 2).unwrap();
        assert_eq!(grad(&phase, &lv(&[0.0, 0.0])).unwrap(), vec![1.0, 1.0]);
        let s1 = SymFun::new(SymFunKind::SigmaK { k: 1 }, 3).unwrap();
        assert_eq!(grad(&s1, &lv(&[-4.0, 0.5, 9.0])).unwrap(), vec![1.0; 3]);
        let q = SymFun::new(SymFunKind::QuotientRoot { k: 2, l: 1 }, 2).unwrap();
        let g = grad(&q, &lv(&[1.0, 1.0])).unwrap();
        let step = 1e-5;
        for i in 0..2 {
            let mut p = vec![1.0, 1.0];
            let mut m = vec![1.0, 1.0];
            p[i] += step;
            m[i] -= step;
            let fd = (q.value(&lv(&p)).unwrap() - q.value(&lv(&m)).unwrap()) / (2.0 * step);
            assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs());
        }
        assert!(grad(&q, &lv(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn extension_examples() {
        let q = SymFun::new(SymFunKind::QuotientRoot { k: 2, l: 1 }, 2).unwrap();
        let cone = q.natural_cone().unwrap();
        assert_eq!(eval_extended(&q, &cone, &lv(&[-1.0, -1.0])).unwrap(), 0.0);
        assert_eq!(
            eval_extended(&q, &cone, &lv(&[1.0, 2.0])).unwrap(),
            quotient_root(2, 1, &lv(&[1.0, 2.0])).unwrap()
        );
        assert_eq!(eval_extended(&q, &cone, &lv(&[0.0, 5.0])).unwrap(), 0.0);
    }

    #[test]
    fn sorted_view_keeps_storage() {
        let v = lv(&[1.0, 3.0, 2.0]);
        assert_eq!(v.sorted(), vec![3.0, 2.0, 1.0]);
        assert_eq!(v.as_slice(), &[1.0, 3.0, 2.0]);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(4, 4), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
    }
}

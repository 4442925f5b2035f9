//! Admissible cones: the Γ_m family, phase super-level cones and the positive orthant.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::symfun::{elementary_into, phase_slice, LambdaVector};

/// Bisection tolerance for [`distance_to_boundary`].
pub const DISTANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeKind {
    /// {σ_1 > 0, ..., σ_m > 0}.
    GammaM { m: usize },
    /// {Σ arctan λ_i > sigma}.
    PhaseCone { sigma: f64 },
    /// The positive orthant, equal to Γ_n.
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub kind: ConeKind,
    pub n: usize,
}

/// Least phase threshold whose superlevel set is a convex cone inside Γ_1:
/// (n−2)π/2, raised to 0 at n = 1 where −π/2 would admit the whole line.
pub fn critical_phase(n: usize) -> f64 {
    ((n as f64 - 2.0) * FRAC_PI_2).max(0.0)
}

impl ConeSpec {
    pub fn new(kind: ConeKind, n: usize) -> Result<Self> {
        if n == 0 {
            return domain("dimension must be positive");
        }
        match kind {
            ConeKind::GammaM { m } if !(1..=n).contains(&m) => {
                domain(format!("m = {m} outside 1..={n}"))
            }
            ConeKind::PhaseCone { sigma } => {
                let lo = critical_phase(n);
                let hi = n as f64 * FRAC_PI_2;
                // The lower end is admitted: the level set is still convex there.
                if !(sigma >= lo && sigma < hi) {
                    return domain(format!("phase threshold {sigma} outside [{lo}, {hi})"));
                }
                Ok(Self { kind, n })
            }
            _ => Ok(Self { kind, n }),
        }
    }

    pub fn gamma(m: usize, n: usize) -> Result<Self> {
        Self::new(ConeKind::GammaM { m }, n)
    }

    pub fn positive(n: usize) -> Result<Self> {
        Self::new(ConeKind::Positive, n)
    }

    pub fn phase(sigma: f64, n: usize) -> Result<Self> {
        Self::new(ConeKind::PhaseCone { sigma }, n)
    }

    /// Number of leading σ_j that must be positive, for the σ-based kinds.
    pub fn order(&self) -> Option<usize> {
        match self.kind {
            ConeKind::GammaM { m } => Some(m),
            ConeKind::Positive => Some(self.n),
            ConeKind::PhaseCone { .. } => None,
        }
    }

    /// Membership; `closure` selects Γ̄ (exact ≥) instead of Γ.
    pub fn contains(&self, lambda: &LambdaVector, closure: bool) -> Result<bool> {
        if lambda.n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: lambda.n(),
            });
        }
        Ok(self.contains_slice(lambda.as_slice(), closure))
    }

    pub(crate) fn contains_slice(&self, lambda: &[f64], closure: bool) -> bool {
        match self.kind {
            ConeKind::PhaseCone { sigma } => {
                let p = phase_slice(lambda);
                if closure {
                    p >= sigma
                } else {
                    p > sigma
                }
            }
            ConeKind::Positive => {
                if closure {
                    lambda.iter().all(|&v| v >= 0.0)
                } else {
                    lambda.iter().all(|&v| v > 0.0)
                }
            }
            ConeKind::GammaM { m } => {
                let mut buf = [0.0; 9];
                let mut heap;
                let e: &mut [f64] = if lambda.len() < buf.len() {
                    &mut buf[..=lambda.len()]
                } else {
                    heap = vec![0.0; lambda.len() + 1];
                    &mut heap
                };
                elementary_into(lambda, e);
                if closure {
                    e[1..=m].iter().all(|&v| v >= 0.0)
                } else {
                    e[1..=m].iter().all(|&v| v > 0.0)
                }
            }
        }
    }
}

fn shifted_contains(cone: &ConeSpec, lambda: &[f64], t: f64, scratch: &mut [f64]) -> bool {
    for (s, &l) in scratch.iter_mut().zip(lambda) {
        *s = l + t;
    }
    cone.contains_slice(scratch, false)
}

/// Signed shift t* along 𝟙 to the boundary: positive when λ ∈ Γ, negative when
/// λ ∉ Γ̄, zero on ∂Γ.
pub fn distance_to_boundary(cone: &ConeSpec, lambda: &LambdaVector) -> Result<f64> {
    if lambda.n() != cone.n {
        return Err(Error::Dimension {
            expected: cone.n,
            got: lambda.n(),
        });
    }
    distance_slice(cone, lambda.as_slice())
}

pub(crate) fn distance_slice(cone: &ConeSpec, lambda: &[f64]) -> Result<f64> {
    let inside = cone.contains_slice(lambda, false);
    if !inside && cone.contains_slice(lambda, true) {
        return Ok(0.0);
    }
    let bound = 10.0 * (1.0 + lambda.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    let mut scratch = lambda.to_vec();
    // Membership of λ + s𝟙 is monotone in s; bracket [lo, hi] with lo outside, hi inside.
    let (mut lo, mut hi) = if inside { (-bound, 0.0) } else { (0.0, bound) };
    if inside && shifted_contains(cone, lambda, lo, &mut scratch) {
        return Err(Error::Numeric(
            "no boundary crossing within the search bracket".into(),
        ));
    }
    if !inside && !shifted_contains(cone, lambda, hi, &mut scratch) {
        return Err(Error::Numeric(
            "no boundary crossing within the search bracket".into(),
        ));
    }
    while hi - lo > DISTANCE_TOL {
        let mid = 0.5 * (lo + hi);
        if shifted_contains(cone, lambda, mid, &mut scratch) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // The crossing sits at s* = -(signed distance).
    Ok(-0.5 * (lo + hi))
}

/// λ + t𝟙 with the least t ≥ 0 giving distance ≥ margin.
pub fn shift_into(cone: &ConeSpec, lambda: &LambdaVector, margin: f64) -> Result<LambdaVector> {
    if !(margin > 0.0) {
        return domain("margin must be positive");
    }
    let d = distance_to_boundary(cone, lambda)?;
    let t = (margin - d).max(0.0);
    Ok(lambda.shifted(t))
}

/// Spectral structure of a supercritical phase vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseStructure {
    /// λ_{n-1} > 0 on the non-increasing order.
    pub second_smallest_positive: bool,
    /// |λ_n| ≤ λ_{n-1}.
    pub smallest_dominated: bool,
    /// Σ λ_i ≥ 0.
    pub trace_nonnegative: bool,
    /// Σ 1/λ_i ≤ −tan δ when λ_n < 0; `None` when λ_n ≥ 0.
    pub reciprocal_bound: Option<bool>,
}

impl PhaseStructure {
    pub fn all_hold(&self) -> bool {
        self.second_smallest_positive
            && self.smallest_dominated
            && self.trace_nonnegative
            && self.reciprocal_bound.unwrap_or(true)
    }
}

/// Checks the sign structure forced by Σ arctan λ_i ≥ (n−2)π/2 + δ.
///
/// The reciprocal clause carries a relative rounding allowance of 1e-12.
pub fn phase_structure(lambda: &LambdaVector, delta: f64) -> Result<PhaseStructure> {
    let n = lambda.n();
    if n < 2 {
        return domain("structure clauses need n >= 2");
    }
    let s = lambda.sorted();
    let last = s[n - 1];
    let prev = s[n - 2];
    let reciprocal_bound = if last < 0.0 {
        let recip: f64 = s.iter().map(|v| 1.0 / v).sum();
        let scale: f64 = s.iter().map(|v| (1.0 / v).abs()).sum::<f64>() + delta.tan().abs();
        Some(recip <= -delta.tan() + 1e-12 * scale)
    } else {
        None
    };
    Ok(PhaseStructure {
        second_smallest_positive: prev > 0.0,
        smallest_dominated: last.abs() <= prev,
        trace_nonnegative: s.iter().sum::<f64>() >= 0.0,
        reciprocal_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[f64]) -> LambdaVector {
        LambdaVector::from_slice(v).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(ConeSpec::gamma(3, 3)
            .unwrap()
            .contains(&lv(&[1.0, 1.0, 1.0]), false)
            .unwrap());
        let l = lv(&[3.0, -1.0]);
        assert!(!ConeSpec::gamma(2, 2).unwrap().contains(&l, false).unwrap());
        assert!(ConeSpec::gamma(1, 2).unwrap().contains(&l, false).unwrap());
        assert!(ConeSpec::phase(0.0, 2)
            .unwrap()
            .contains(&lv(&[1.0, -0.5]), false)
            .unwrap());
        assert!(ConeSpec::gamma(1, 2)
            .unwrap()
            .contains(&lv(&[1.0]), false)
            .is_err());
    }

    #[test]
    fn closure_is_exact() {
        let c = ConeSpec::gamma(1, 2).unwrap();
        assert!(!c.contains(&lv(&[1.0, -1.0]), false).unwrap());
        assert!(c.contains(&lv(&[1.0, -1.0]), true).unwrap());
    }

    #[test]
    fn distance_examples() {
        let d = distance_to_boundary(&ConeSpec::positive(2).unwrap(), &lv(&[2.0, 3.0])).unwrap();
        assert!((d - 2.0).abs() <= 1e-10);
        let d = distance_to_boundary(&ConeSpec::gamma(1, 2).unwrap(), &lv(&[3.0, -1.0])).unwrap();
        assert!((d - 1.0).abs() <= 1e-10);
        let d = distance_to_boundary(&ConeSpec::gamma(2, 2).unwrap(), &lv(&[0.0, 4.0])).unwrap();
        assert_eq!(d, 0.0);
        let d = distance_to_boundary(&ConeSpec::positive(2).unwrap(), &lv(&[-2.0, 5.0])).unwrap();
        assert!((d + 2.0).abs() <= 1e-10);
    }

    #[test]
    fn shift_examples() {
        let pos = ConeSpec::positive(2).unwrap();
        assert_eq!(
            shift_into(&pos, &lv(&[3.0, 4.0]), 1.0).unwrap(),
            lv(&[3.0, 4.0])
        );
        assert_eq!(
            shift_into(&pos, &lv(&[0.0, 0.0]), 1.0).unwrap(),
            lv(&[1.0, 1.0])
        );
        let g1 = ConeSpec::gamma(1, 2).unwrap();
        assert_eq!(
            shift_into(&g1, &lv(&[3.0, -3.0]), 0.5).unwrap(),
            lv(&[3.5, -2.5])
        );
        assert!(shift_into(&g1, &lv(&[3.0, -3.0]), 0.0).is_err());
    }

    #[test]
    fn phase_threshold_range() {
        assert!(ConeSpec::phase(-0.1, 2).is_err());
        assert!(ConeSpec::phase(std::f64::consts::PI, 2).is_err());
        assert!(ConeSpec::phase(3.0, 3).is_ok());
    }

    #[test]
    fn structure_on_known_vector() {
        // arctan 3 + arctan(-0.5) ≈ 0.785 = δ for n = 2.
        let s = phase_structure(&lv(&[3.0, -0.5]), 0.7).unwrap();
        assert!(s.all_hold());
        assert_eq!(s.reciprocal_bound, Some(true));
    }
}

//! Dense complex matrices: Hermitian spectra, characteristic coefficients,
//! mixed discriminants and the normalization sets 𝔅(A, k).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::symfun::{binomial, s_norm, LambdaVector};

/// Largest off-diagonal Frobenius mass accepted, relative to ‖A‖_F.
pub const JACOBI_REL_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 30;
/// Minimum eigenvalue accepted by the PSD check.
pub const PSD_TOL: f64 = -1e-12;
const HERMITIAN_TOL: f64 = 1e-12;

/// General square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("matrix has non-finite entries");
        }
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Entries with independent standard normal real and imaginary parts.
    pub fn random_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let data = (0..n * n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: other.n,
            });
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))
                .expect("non-empty range");
            if a[pivot * n + col].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                if factor.norm() == 0.0 {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= factor * v;
                }
            }
        }
        det
    }

    /// e_0..e_n of the spectrum, i.e. det(A + t·Id) = Σ_k e_k t^{n−k},
    /// by the Faddeev–LeVerrier trace recurrence.
    pub fn char_coefficients(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[0] = Complex64::new(1.0, 0.0);
        // M_k = A·M_{k-1} + c_{k-1} I with c_k = −tr(A M_k)/k gives det(tI − A) = Σ c_k t^{n−k}.
        let mut m = Self::zeros(n);
        for k in 1..=n {
            let mut next = self.mul(&m).expect("same size");
            for i in 0..n {
                next.data[i * n + i] += c[k - 1];
            }
            let am = self.mul(&next).expect("same size");
            c[k] = -am.trace() / k as f64;
            m = next;
        }
        c.iter()
            .enumerate()
            .map(|(k, &v)| if k % 2 == 0 { v } else { -v })
            .collect()
    }
}

/// Complex S_k of a general matrix: C(n,k)^{-1} times the t^{n−k} coefficient of det(A + t·Id).
pub fn s_k_general(k: usize, a: &ComplexMatrix) -> Result<Complex64> {
    let n = a.n();
    if !(1..=n).contains(&k) {
        return domain(format!("k = {k} outside 1..={n}"));
    }
    Ok(a.char_coefficients()[k] / binomial(n, k))
}

/// Conjugate-symmetric complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Checks conjugate symmetry to 1e-12 and then symmetrizes exactly.
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        let m = ComplexMatrix::new(n, data)?;
        Self::from_matrix(&m)
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        let n = m.n();
        let mut data = m.as_slice().to_vec();
        for i in 0..n {
            for j in i..n {
                let a = data[i * n + j];
                let b = data[j * n + i].conj();
                if (a - b).norm() > HERMITIAN_TOL {
                    return domain(format!("entries ({i},{j}) and ({j},{i}) are not conjugate"));
                }
                let avg = if i == j {
                    Complex64::new(a.re, 0.0)
                } else {
                    0.5 * (a + b)
                };
                data[i * n + j] = avg;
                data[j * n + i] = avg.conj();
            }
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            data: ComplexMatrix::identity(n).data,
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = ComplexMatrix::zeros(n);
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, Complex64::new(v, 0.0));
        }
        Self { n, data: m.data }
    }

    /// Real symmetric matrix given row-major.
    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(n, data.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// X·X* for Gaussian X; positive semidefinite.
    pub fn random_psd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let x = ComplexMatrix::random_gaussian(n, rng);
        let p = x.mul(&x.adjoint()).expect("same size");
        Self::from_matrix(&p).expect("Gram matrices are Hermitian")
    }

    /// (X + X*)/2 for Gaussian X.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let x = ComplexMatrix::random_gaussian(n, rng);
        let adj = x.adjoint();
        let data = x
            .as_slice()
            .iter()
            .zip(adj.as_slice())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        Self::new(n, data).expect("symmetrized")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix {
            n: self.n,
            data: self.data.clone(),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * t).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// U·A·U* for a unitary (or any) U; re-symmetrized.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = u.mul(&self.to_matrix())?.mul(&u.adjoint())?;
        let n = self.n;
        let mut data = m.data;
        for i in 0..n {
            data[i * n + i].im = 0.0;
            for j in i + 1..n {
                let avg = 0.5 * (data[i * n + j] + data[j * n + i].conj());
                data[i * n + j] = avg;
                data[j * n + i] = avg.conj();
            }
        }
        Ok(Self { n, data })
    }

    pub fn square(&self) -> Self {
        let m = self.to_matrix();
        let sq = m.mul(&m).expect("same size");
        Self::from_matrix(&sq).expect("square of Hermitian is Hermitian")
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Spectrum in non-increasing order.
pub fn eigenvalues(a: &HermitianMatrix) -> Result<LambdaVector> {
    let mut out = vec![0.0; a.n];
    eigenvalues_into(a.n, a.as_slice(), &mut out)?;
    out.sort_by(|x, y| y.total_cmp(x));
    LambdaVector::new(out)
}

/// Unsorted spectrum of a Hermitian matrix stored row-major in `a`.
///
/// n = 1 and n = 2 use closed forms; larger sizes run cyclic Jacobi.
pub(crate) fn eigenvalues_into(n: usize, a: &[Complex64], out: &mut [f64]) -> Result<()> {
    match n {
        1 => {
            out[0] = a[0].re;
            Ok(())
        }
        2 => {
            let (p, q, b) = (a[0].re, a[3].re, a[1]);
            let mean = 0.5 * (p + q);
            let r = (0.25 * (p - q) * (p - q) + b.norm_sqr()).sqrt();
            out[0] = mean + r;
            out[1] = mean - r;
            Ok(())
        }
        _ => jacobi(n, a, out),
    }
}

fn jacobi(n: usize, a: &[Complex64], out: &mut [f64]) -> Result<()> {
    let mut m = a.to_vec();
    let total: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let off = |m: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let target = JACOBI_REL_TOL * total;
    let mut sweeps = 0;
    while off(&m) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let b = m[p * n + q];
                let mag = b.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = b / mag;
                let tau = (m[q * n + q].re - m[p * n + p].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A ← U* A U with U_pp = U_qq = c, U_pq = s·e, U_qp = −s·ē.
                for r in 0..n {
                    let ap = m[r * n + p];
                    let aq = m[r * n + q];
                    m[r * n + p] = ap * c - aq * phase.conj() * s;
                    m[r * n + q] = ap * phase * s + aq * c;
                }
                for col in 0..n {
                    let ap = m[p * n + col];
                    let aq = m[q * n + col];
                    m[p * n + col] = ap * c - aq * phase * s;
                    m[q * n + col] = ap * phase.conj() * s + aq * c;
                }
                m[p * n + q] = Complex64::new(0.0, 0.0);
                m[q * n + p] = Complex64::new(0.0, 0.0);
                m[p * n + p].im = 0.0;
                m[q * n + q].im = 0.0;
            }
        }
    }
    for (i, o) in out.iter_mut().enumerate().take(n) {
        *o = m[i * n + i].re;
    }
    Ok(())
}

/// S_k(A) through the spectrum.
pub fn s_k_matrix(k: usize, a: &HermitianMatrix) -> Result<f64> {
    s_norm(k, &eigenvalues(a)?)
}

/// Gap in S_k(AA*)·S_k(BB*) ≥ |S_k(AB*)|², together with the left-hand scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaGap {
    pub gap: f64,
    pub scale: f64,
}

impl LemmaGap {
    /// gap / scale, or the raw gap when the scale vanishes.
    pub fn normalized(&self) -> f64 {
        if self.scale > 0.0 {
            self.gap / self.scale
        } else {
            self.gap
        }
    }
}

/// k-subsets of 0..n in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Entries of the k-th compound matrix: every k×k minor det A[I, J].
pub fn compound_minors(a: &ComplexMatrix, k: usize) -> Vec<Complex64> {
    let sets = subsets(a.n, k);
    let mut sub = ComplexMatrix::zeros(k);
    let mut out = Vec::with_capacity(sets.len() * sets.len());
    for rows in &sets {
        for cols in &sets {
            for (r, &i) in rows.iter().enumerate() {
                for (c, &j) in cols.iter().enumerate() {
                    sub.data[r * k + c] = a.data[i * a.n + j];
                }
            }
            out.push(sub.determinant());
        }
    }
    out
}

/// S_k(AA*)·S_k(BB*) − |S_k(AB*)|².
///
/// By Cauchy–Binet e_k(AB*) = ⟨m(A), m(B)⟩ over the compound minors m, so the
/// three factors come from two minor vectors instead of characteristic
/// polynomials of the products, which lose accuracy near the equality case.
pub fn matrix_lemma_gap(k: usize, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<LemmaGap> {
    if a.n() != b.n() {
        return Err(Error::Dimension {
            expected: a.n(),
            got: b.n(),
        });
    }
    let n = a.n();
    if !(1..=n).contains(&k) {
        return domain(format!("k = {k} outside 1..={n}"));
    }
    let ma = compound_minors(a, k);
    let mb = compound_minors(b, k);
    let c = binomial(n, k);
    let saa = ma.iter().map(|z| z.norm_sqr()).sum::<f64>() / c;
    let sbb = mb.iter().map(|z| z.norm_sqr()).sum::<f64>() / c;
    let sab = ma
        .iter()
        .zip(&mb)
        .map(|(x, y)| x * y.conj())
        .sum::<Complex64>()
        / c;
    let scale = saa * sbb;
    Ok(LemmaGap {
        gap: scale - sab.norm_sqr(),
        scale,
    })
}

/// Raw polarization sum Σ_S (−1)^{n−|S|} det(Σ_{i∈S} A_i), equal to n!·D.
fn polarization(mats: &[&HermitianMatrix]) -> Complex64 {
    let n = mats[0].n;
    let mut total = Complex64::new(0.0, 0.0);
    let mut sum = ComplexMatrix::zeros(n);
    for mask in 1u32..(1u32 << n) {
        sum.data
            .iter_mut()
            .for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (i, m) in mats.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (s, v) in sum.data.iter_mut().zip(&m.data) {
                    *s += v;
                }
            }
        }
        let sign = if (n as u32 - mask.count_ones()).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        total += sum.determinant() * sign;
    }
    total
}

/// Mixed discriminant normalized so that D(Id, ..., Id) = 1.
///
/// Costs 2ⁿ determinants.
pub fn mixed_discriminant(mats: &[HermitianMatrix]) -> Result<f64> {
    let refs: Vec<&HermitianMatrix> = mats.iter().collect();
    mixed_discriminant_refs(&refs)
}

fn mixed_discriminant_refs(mats: &[&HermitianMatrix]) -> Result<f64> {
    let Some(first) = mats.first() else {
        return domain("mixed discriminant needs at least one matrix");
    };
    let n = first.n;
    if mats.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: mats.len(),
        });
    }
    if let Some(bad) = mats.iter().find(|m| m.n != n) {
        return Err(Error::Dimension {
            expected: n,
            got: bad.n,
        });
    }
    let id = HermitianMatrix::identity(n);
    let ids: Vec<&HermitianMatrix> = vec![&id; n];
    Ok((polarization(mats) / polarization(&ids)).re)
}

/// Ratio of top-degree forms against ωⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedFormRatio(pub f64);

impl MixedFormRatio {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Normalized mixed discriminant with `a` repeated p times and `b` repeated q times.
pub fn wedge_ratio(
    a: &HermitianMatrix,
    p: usize,
    b: &HermitianMatrix,
    q: usize,
) -> Result<MixedFormRatio> {
    if a.n != b.n {
        return Err(Error::Dimension {
            expected: a.n,
            got: b.n,
        });
    }
    if p + q != a.n {
        return domain(format!("split {p} + {q} does not equal n = {}", a.n));
    }
    let mut mats = vec![a; p];
    mats.extend(std::iter::repeat_n(b, q));
    Ok(MixedFormRatio(mixed_discriminant_refs(&mats)?))
}

pub fn is_psd(b: &HermitianMatrix) -> Result<bool> {
    let ev = eigenvalues(b)?;
    Ok(ev.as_slice().iter().all(|&v| v >= PSD_TOL))
}

/// Membership of `b` in 𝔅(a, k): |wedge_ratio(a, n−k, b, k) − 1| ≤ tol.
pub fn in_cal_b(b: &HermitianMatrix, a: &HermitianMatrix, k: usize, tol: f64) -> Result<bool> {
    if !is_psd(b)? {
        return domain("matrix is not positive semidefinite");
    }
    if k > b.n {
        return domain(format!("k = {k} exceeds n = {}", b.n));
    }
    let r = wedge_ratio(a, b.n - k, b, k)?;
    Ok((r.0 - 1.0).abs() <= tol)
}

/// Rescales a PSD matrix into 𝔅(a, k); `None` when the ratio is not positive.
pub fn normalize_into_cal_b(
    b: &HermitianMatrix,
    a: &HermitianMatrix,
    k: usize,
) -> Result<Option<HermitianMatrix>> {
    if k == 0 || k > b.n {
        return domain(format!("k = {k} outside 1..={}", b.n));
    }
    let r = wedge_ratio(a, b.n - k, b, k)?.0;
    if !(r > 0.0) {
        return Ok(None);
    }
    Ok(Some(b.scaled(r.powf(-1.0 / k as f64))))
}

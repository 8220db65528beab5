//! Clifford algebra `Cl(R^d)` with the relation `e_i e_j + e_j e_i = -2 delta_ij`,
//! its supertrace, exponentials, and the Lie-algebra map `D: so(d) -> Cl^2`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::curvature::CurvatureTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordError {
    DimMismatch,
    /// Supertrace needs even `d`.
    OddDimension,
    /// `d_map` input fails the skew-symmetry check.
    NotSkew,
    IndexRange,
    /// `cl_exp` did not converge within the term budget.
    NoConvergence,
}

impl core::fmt::Display for CliffordError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CliffordError::DimMismatch => write!(f, "operands live in different Clifford algebras"),
            CliffordError::OddDimension => write!(f, "supertrace requires even dimension"),
            CliffordError::NotSkew => write!(f, "matrix is not skew-symmetric"),
            CliffordError::IndexRange => write!(f, "basis index out of range"),
            CliffordError::NoConvergence => write!(f, "exponential series did not converge"),
        }
    }
}

impl core::error::Error for CliffordError {}

/// Element of `Cl(R^d)`: complex coefficients on the basis monomials
/// `e_{i_1}...e_{i_k}`, `i_1 < ... < i_k`, stored as bitmasks over `{1..d}`
/// (bit `i-1` set iff `e_i` occurs).
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordElement {
    d: u8,
    coeffs: BTreeMap<u32, Complex64>,
}

const EPS: f64 = 1e-14;

impl CliffordElement {
    pub fn zero(d: u8) -> Self {
        CliffordElement {
            d,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(d: u8) -> Self {
        let mut s = Self::zero(d);
        s.coeffs.insert(0, Complex64::new(1.0, 0.0));
        s
    }

    /// The generator `e_i`, `1 <= i <= d`.
    pub fn generator(d: u8, i: u8) -> Result<Self, CliffordError> {
        if i == 0 || i > d {
            return Err(CliffordError::IndexRange);
        }
        let mut s = Self::zero(d);
        s.coeffs.insert(1u32 << (i - 1), Complex64::new(1.0, 0.0));
        Ok(s)
    }

    pub fn dim(&self) -> u8 {
        self.d
    }

    pub fn coeff(&self, mask: u32) -> Complex64 {
        self.coeffs
            .get(&mask)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn add_term(&mut self, mask: u32, c: Complex64) {
        debug_assert!(mask < (1u32 << self.d));
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let slot = self.coeffs.entry(mask).or_insert(Complex64::new(0.0, 0.0));
        *slot += c;
        if slot.re == 0.0 && slot.im == 0.0 {
            self.coeffs.remove(&mask);
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.d);
        for (&m, &v) in &self.coeffs {
            out.add_term(m, c * v);
        }
        out
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self, CliffordError> {
        if self.d != other.d {
            return Err(CliffordError::DimMismatch);
        }
        let mut out = self.clone();
        for (&m, &v) in &other.coeffs {
            out.add_term(m, v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CliffordError> {
        self.add(&other.scale_re(-1.0))
    }

    /// Clifford product. Basis monomials multiply through symmetric
    /// difference of their index sets, with a transposition sign and a
    /// factor `-1` per contraction `e_i e_i = -1`.
    pub fn mul(&self, other: &Self) -> Result<Self, CliffordError> {
        if self.d != other.d {
            return Err(CliffordError::DimMismatch);
        }
        let mut out = Self::zero(self.d);
        for (&a, &ca) in &self.coeffs {
            for (&b, &cb) in &other.coeffs {
                let (mask, sign) = basis_mul(a, b);
                out.add_term(mask, ca * cb * sign);
            }
        }
        Ok(out)
    }

    /// Coefficient-wise 1-norm, used for series convergence estimates.
    pub fn norm1(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.re.abs() + c.im.abs())
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (&k, &c) in &self.coeffs {
            let dlt = c - other.coeff(k);
            m = m.max(dlt.re.abs().max(dlt.im.abs()));
        }
        for (&k, &c) in &other.coeffs {
            let dlt = c - self.coeff(k);
            m = m.max(dlt.re.abs().max(dlt.im.abs()));
        }
        m
    }

    /// Projection onto grade `k` (monomials with `k` generators).
    pub fn grade(&self, k: u32) -> Self {
        let mut out = Self::zero(self.d);
        for (&m, &c) in &self.coeffs {
            if m.count_ones() == k {
                out.add_term(m, c);
            }
        }
        out
    }

    pub fn max_grade(&self) -> u32 {
        self.coeffs.keys().map(|m| m.count_ones()).max().unwrap_or(0)
    }

    pub fn is_pure_grade(&self, k: u32) -> bool {
        self.coeffs.keys().all(|m| m.count_ones() == k)
    }
}

/// Product of two basis monomials: resulting mask and sign.
fn basis_mul(a: u32, b: u32) -> (u32, Complex64) {
    let mut acc = a;
    let mut negative = false;
    let mut rest = b;
    while rest != 0 {
        let bit = rest & rest.wrapping_neg(); // lowest set bit of b
        rest ^= bit;
        // transpositions past the generators of acc with larger index
        let greater = acc & !((bit << 1).wrapping_sub(1));
        if greater.count_ones() % 2 == 1 {
            negative = !negative;
        }
        if acc & bit != 0 {
            // contraction e_i e_i = -1
            negative = !negative;
        }
        acc ^= bit;
    }
    let sign = if negative { -1.0 } else { 1.0 };
    (acc, Complex64::new(sign, 0.0))
}

/// Supertrace `Str a = (2/i)^{d/2} a_{1...d}`; requires even `d`.
pub fn supertrace(a: &CliffordElement) -> Result<Complex64, CliffordError> {
    let d = a.dim();
    if d % 2 != 0 {
        return Err(CliffordError::OddDimension);
    }
    let top = a.coeff((1u32 << d) - 1);
    Ok(two_over_i_pow(d / 2) * top)
}

/// `(2/i)^k = (-2i)^k` as a principal power.
pub fn two_over_i_pow(k: u8) -> Complex64 {
    let mut out = Complex64::new(1.0, 0.0);
    for _ in 0..k {
        out *= Complex64::new(0.0, -2.0);
    }
    out
}

/// A `d x d` real skew-symmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    d: u8,
    data: Vec<f64>,
}

impl SkewMatrix {
    /// Validates `psi + psi^T = 0` to 1e-12.
    pub fn new(d: u8, data: Vec<f64>) -> Result<Self, CliffordError> {
        if data.len() != (d as usize) * (d as usize) {
            return Err(CliffordError::DimMismatch);
        }
        let n = d as usize;
        for i in 0..n {
            for j in 0..n {
                if (data[i * n + j] + data[j * n + i]).abs() > 1e-12 {
                    return Err(CliffordError::NotSkew);
                }
            }
        }
        Ok(SkewMatrix { d, data })
    }

    pub fn dim(&self) -> u8 {
        self.d
    }

    /// Entry `psi_{ij}` with 1-based indices: the `e_i` component of `psi(e_j)`.
    pub fn entry(&self, i: u8, j: u8) -> f64 {
        let n = self.d as usize;
        self.data[(i as usize - 1) * n + (j as usize - 1)]
    }

    /// Matrix commutator `[a, b]`.
    pub fn commutator(&self, other: &Self) -> Result<Self, CliffordError> {
        if self.d != other.d {
            return Err(CliffordError::DimMismatch);
        }
        let n = self.d as usize;
        let mut out = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.data[i * n + k] * other.data[k * n + j]
                        - other.data[i * n + k] * self.data[k * n + j];
                }
                out[i * n + j] = s;
            }
        }
        SkewMatrix::new(self.d, out)
    }
}

/// The map `D psi = 1/2 sum_{i<j} <psi(e_i), e_j> e_i e_j` into `Cl^2`.
pub fn d_map(psi: &SkewMatrix) -> CliffordElement {
    let d = psi.dim();
    let mut out = CliffordElement::zero(d);
    for i in 1..=d {
        for j in (i + 1)..=d {
            // <psi(e_i), e_j> = psi_{ji}
            let c = 0.5 * psi.entry(j, i);
            let mask = (1u32 << (i - 1)) | (1u32 << (j - 1));
            out.add_term(mask, Complex64::new(c, 0.0));
        }
    }
    out
}

/// `DR(e_i,e_j) = 1/2 sum_{k<l} R(e_i,e_j;e_k,e_l) e_k e_l`, the grade-2
/// Clifford element carrying the curvature commutator `[nabla_i, nabla_j]`.
pub fn dr_element(r: &CurvatureTensor, i: u8, j: u8) -> Result<CliffordElement, CliffordError> {
    let d = r.dim();
    if i == 0 || j == 0 || i > d || j > d || i == j {
        return Err(CliffordError::IndexRange);
    }
    let mut out = CliffordElement::zero(d);
    for k in 1..=d {
        for l in (k + 1)..=d {
            let c = 0.5 * r.get(i, j, k, l);
            let mask = (1u32 << (k - 1)) | (1u32 << (l - 1));
            out.add_term(mask, Complex64::new(c, 0.0));
        }
    }
    Ok(out)
}

/// Truncated exponential series under the Clifford product. Stops once the
/// term 1-norm falls below `1e-16 * (1 + partial-sum norm)`; errors out if
/// the tail estimate is still above 1e-14 after `max_terms` terms.
pub fn cl_exp(a: &CliffordElement, max_terms: usize) -> Result<CliffordElement, CliffordError> {
    let mut out = CliffordElement::one(a.dim());
    let mut term = CliffordElement::one(a.dim());
    for k in 1..=max_terms {
        term = term.mul(a)?.scale_re(1.0 / k as f64);
        let tail = term.norm1();
        if tail < 1e-16 * (1.0 + out.norm1()) {
            return Ok(out);
        }
        out = out.add(&term)?;
        if tail < EPS {
            return Ok(out);
        }
    }
    Err(CliffordError::NoConvergence)
}

//! Curvature tensors `R_{ijkl}` with the full Riemann symmetries.

use alloc::vec::Vec;

use rand_core::RngCore;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureError {
    /// A symmetry invariant fails beyond 1e-12.
    SymmetryViolation,
    BadDimension,
}

impl core::fmt::Display for CurvatureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CurvatureError::SymmetryViolation => write!(f, "Riemann symmetry invariant violated"),
            CurvatureError::BadDimension => write!(f, "curvature dimension must be at least 2"),
        }
    }
}

impl core::error::Error for CurvatureError {}

/// Dense `R_{ijkl}`, `i,j,k,l in {1..d}`, satisfying
/// `R_{ijkl} = -R_{jikl} = -R_{ijlk} = R_{klij}` and the first Bianchi
/// identity.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    d: u8,
    comp: Vec<f64>,
}

impl CurvatureTensor {
    pub fn dim(&self) -> u8 {
        self.d
    }

    /// `R_{ijkl}` with 1-based indices.
    pub fn get(&self, i: u8, j: u8, k: u8, l: u8) -> f64 {
        let n = self.d as usize;
        let (i, j, k, l) = (
            i as usize - 1,
            j as usize - 1,
            k as usize - 1,
            l as usize - 1,
        );
        self.comp[((i * n + j) * n + k) * n + l]
    }

    pub fn zero(d: u8) -> Self {
        let n = d as usize;
        CurvatureTensor {
            d,
            comp: alloc::vec![0.0; n * n * n * n],
        }
    }

    /// Space form: `R_{ijkl} = kappa (delta_ik delta_jl - delta_il delta_jk)`.
    pub fn constant_curvature(d: u8, kappa: f64) -> Self {
        let mut t = Self::zero(d);
        let n = d as usize;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = kappa
                            * ((i == k && j == l) as i32 - (i == l && j == k) as i32) as f64;
                        t.comp[((i * n + j) * n + k) * n + l] = v;
                    }
                }
            }
        }
        t
    }

    /// Product of two surfaces with curvatures `kappa1`, `kappa2`: the only
    /// independent nonzero components are `R_{1212} = kappa1` and
    /// `R_{3434} = kappa2`. Dimension is 4.
    pub fn product_of_surfaces(kappa1: f64, kappa2: f64) -> Self {
        let mut t = Self::zero(4);
        let n = 4usize;
        let mut set = |i: usize, j: usize, k: usize, l: usize, v: f64| {
            for (a, b, c, e, s) in [
                (i, j, k, l, 1.0),
                (j, i, k, l, -1.0),
                (i, j, l, k, -1.0),
                (j, i, l, k, 1.0),
            ] {
                t.comp[((a * n + b) * n + c) * n + e] = s * v;
                t.comp[((c * n + e) * n + a) * n + b] = s * v;
            }
        };
        set(0, 1, 0, 1, kappa1);
        set(2, 3, 2, 3, kappa2);
        t
    }

    /// Random tensor obtained by symmetrizing a uniform random array over the
    /// Riemann symmetry group (antisymmetry in both index pairs, pair
    /// exchange, first Bianchi).
    pub fn random_bianchi(d: u8, rng: &mut dyn RngCore) -> Self {
        let n = d as usize;
        let mut a = Vec::with_capacity(n * n * n * n);
        for _ in 0..n * n * n * n {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            a.push(2.0 * u - 1.0);
        }
        let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
        fn build(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Vec<f64> {
            let mut out = alloc::vec![0.0; n * n * n * n];
            let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            out[idx(i, j, k, l)] = f(i, j, k, l);
                        }
                    }
                }
            }
            out
        }
        let antisym_first =
            |t: &Vec<f64>| build(n, |i, j, k, l| t[idx(i, j, k, l)] - t[idx(j, i, k, l)]);
        let antisym_second =
            |t: &Vec<f64>| build(n, |i, j, k, l| t[idx(i, j, k, l)] - t[idx(i, j, l, k)]);
        let sym_pairs =
            |t: &Vec<f64>| build(n, |i, j, k, l| t[idx(i, j, k, l)] + t[idx(k, l, i, j)]);
        let mut t = antisym_first(&a);
        t = antisym_second(&t);
        t = sym_pairs(&t);
        // project onto the first Bianchi identity
        let t2 = build(n, |i, j, k, l| {
            t[idx(i, j, k, l)] - 0.5 * (t[idx(i, k, l, j)] + t[idx(i, l, j, k)])
        });
        let mut r = antisym_first(&t2);
        r = antisym_second(&r);
        r = sym_pairs(&r);
        for v in &mut r {
            *v /= 8.0;
        }
        let out = CurvatureTensor { d, comp: r };
        debug_assert!(out.validate(1e-12).is_ok());
        out
    }

    /// Uniform scaling `R -> lambda R`.
    pub fn scale(&self, lambda: f64) -> Self {
        CurvatureTensor {
            d: self.d,
            comp: self.comp.iter().map(|v| lambda * v).collect(),
        }
    }

    /// Conjugation by an orthogonal frame change `Q` (row-major `d x d`):
    /// `R'_{ijkl} = sum Q_{ia} Q_{jb} Q_{kc} Q_{le} R_{abce}`.
    pub fn rotate_frame(&self, q: &[f64]) -> Self {
        let n = self.d as usize;
        assert_eq!(q.len(), n * n);
        let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
        let mut out = alloc::vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for a in 0..n {
                            let qa = q[i * n + a];
                            if qa == 0.0 {
                                continue;
                            }
                            for b in 0..n {
                                let qb = qa * q[j * n + b];
                                if qb == 0.0 {
                                    continue;
                                }
                                for c in 0..n {
                                    let qc = qb * q[k * n + c];
                                    if qc == 0.0 {
                                        continue;
                                    }
                                    for e in 0..n {
                                        s += qc * q[l * n + e] * self.comp[idx(a, b, c, e)];
                                    }
                                }
                            }
                        }
                        out[idx(i, j, k, l)] = s;
                    }
                }
            }
        }
        CurvatureTensor { d: self.d, comp: out }
    }

    /// Checks all Riemann symmetries and the first Bianchi identity within
    /// `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), CurvatureError> {
        let d = self.d;
        for i in 1..=d {
            for j in 1..=d {
                for k in 1..=d {
                    for l in 1..=d {
                        let r = self.get(i, j, k, l);
                        if (r + self.get(j, i, k, l)).abs() > tol
                            || (r + self.get(i, j, l, k)).abs() > tol
                            || (r - self.get(k, l, i, j)).abs() > tol
                            || (r + self.get(i, k, l, j) + self.get(i, l, j, k)).abs() > tol
                        {
                            return Err(CurvatureError::SymmetryViolation);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

//! Matrix models for the generator `L = A_0 + 1/2 sum_i A_i^2` and the
//! cubature-style approximation of its semigroup.
//!
//! The approximant replaces `e^{tL}` by the expectation of
//! `exp(sum_{d(I) <= N} Lambda_I A_I)` over Brownian paths, where `A_I` is
//! the nested commutator of the model matrices along the word `I`. The
//! expectation is estimated by Monte Carlo with a deterministic reduction
//! order, so a fixed seed reproduces results byte for byte regardless of
//! thread count.

use chen_core::chen::ChenError;
use chen_core::tensor::{Cap, SignatureEngine};
use chen_core::ChenPlan;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::paths::{sample_brownian, PathError};

/// Samples per parallel chunk. The chunk partial sums are combined in chunk
/// order, which keeps the floating-point reduction independent of the rayon
/// schedule.
const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemigroupError {
    /// Need matrices `A_0..A_d` with `d >= 1`, all square of one size.
    BadModelShape,
    /// Truncation order must be at least 1.
    BadOrder,
    /// Sample count must be positive.
    NoSamples,
    Chen(ChenError),
    Path(PathError),
}

impl std::fmt::Display for SemigroupError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SemigroupError::BadModelShape => {
                write!(f, "model needs d+1 >= 2 square matrices of equal size")
            }
            SemigroupError::BadOrder => write!(f, "truncation order must be >= 1"),
            SemigroupError::NoSamples => write!(f, "sample count must be positive"),
            SemigroupError::Chen(e) => write!(f, "{e}"),
            SemigroupError::Path(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SemigroupError {}

impl From<ChenError> for SemigroupError {
    fn from(e: ChenError) -> Self {
        SemigroupError::Chen(e)
    }
}

impl From<PathError> for SemigroupError {
    fn from(e: PathError) -> Self {
        SemigroupError::Path(e)
    }
}

/// Matrices `A_0, A_1, ..., A_d` acting on a common finite-dimensional space.
#[derive(Clone, Debug)]
pub struct MatrixModel {
    d: u8,
    mats: Vec<DMatrix<f64>>,
}

impl MatrixModel {
    pub fn new(mats: Vec<DMatrix<f64>>) -> Result<Self, SemigroupError> {
        if mats.len() < 2 || mats.len() > u8::MAX as usize {
            return Err(SemigroupError::BadModelShape);
        }
        let n = mats[0].nrows();
        if n == 0 || mats.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(SemigroupError::BadModelShape);
        }
        Ok(MatrixModel {
            d: (mats.len() - 1) as u8,
            mats,
        })
    }

    /// Number of driving directions (the spatial letters `1..=d`).
    pub fn dim(&self) -> u8 {
        self.d
    }

    pub fn matrix_size(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn matrix(&self, letter: u8) -> &DMatrix<f64> {
        &self.mats[letter as usize]
    }

    /// The hypoelliptic generator `L = A_0 + 1/2 sum_{i=1}^d A_i^2`.
    pub fn generator(&self) -> DMatrix<f64> {
        let mut l = self.mats[0].clone();
        for a in &self.mats[1..] {
            l += a * a * 0.5;
        }
        l
    }

    /// `e^{tL}` by the matrix exponential.
    pub fn exact_semigroup(&self, t: f64) -> DMatrix<f64> {
        (self.generator() * t).exp()
    }

    /// Taylor polynomial of `e^{tL}` matching the approximant's accuracy:
    /// powers `k <= floor((order + 1)/2)`.
    pub fn taylor_reference(&self, t: f64, order: usize) -> DMatrix<f64> {
        let l = self.generator();
        let n = self.matrix_size();
        let mut out = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..=(order + 1) / 2 {
            term = &term * &l * (t / k as f64);
            out += &term;
        }
        out
    }

    /// Nested right commutator `[A_{i_1}, [A_{i_2}, ... A_{i_k}]]`.
    fn word_matrix(&self, letters: &[u8]) -> DMatrix<f64> {
        let mut acc = self.mats[letters[letters.len() - 1] as usize].clone();
        for &letter in letters[..letters.len() - 1].iter().rev() {
            let a = &self.mats[letter as usize];
            acc = a * &acc - &acc * a;
        }
        acc
    }
}

/// Monte Carlo settings for the semigroup approximant.
#[derive(Clone, Copy, Debug)]
pub struct McSettings {
    pub samples: usize,
    /// Dyadic grid level: paths use `2^level` segments.
    pub level: u32,
    pub seed: u64,
    /// Average each path with its spatial mirror image. This cancels all
    /// odd-degree terms of the sampling noise at no extra path cost.
    pub antithetic: bool,
}

/// Monte Carlo estimate of the approximate semigroup.
#[derive(Clone, Debug)]
pub struct ApproxResult {
    pub mean: DMatrix<f64>,
    /// Frobenius norm of the entrywise standard errors.
    pub stderr: f64,
}

/// Reusable tables for one `(model, order)` pair: word enumeration, the
/// Chen-Strichartz plan, and the commutator matrices, all built once.
pub struct ApproxPlan {
    engine: SignatureEngine,
    chen: ChenPlan,
    word_mats: Vec<DMatrix<f64>>,
    size: usize,
    d: u8,
}

impl ApproxPlan {
    pub fn new(model: &MatrixModel, order: usize) -> Result<Self, SemigroupError> {
        if order == 0 {
            return Err(SemigroupError::BadOrder);
        }
        let engine = SignatureEngine::new(model.dim(), Cap::ByDegree(order));
        let chen = ChenPlan::new(&engine)?;
        let word_mats = chen
            .words()
            .iter()
            .map(|w| model.word_matrix(w.letters()))
            .collect();
        Ok(ApproxPlan {
            engine,
            chen,
            word_mats,
            size: model.matrix_size(),
            d: model.dim(),
        })
    }

    /// `exp(sum_I Lambda_I(path) A_I)` for one sampled path.
    fn exponent(&self, increments: &[Vec<f64>]) -> DMatrix<f64> {
        let sig = self.engine.signature_coeffs(increments);
        let lams = self.chen.apply(&sig);
        let mut m = DMatrix::zeros(self.size, self.size);
        for (lam, a) in lams.iter().zip(&self.word_mats) {
            if *lam != 0.0 {
                m += a * *lam;
            }
        }
        m
    }

    fn one_sample(&self, t: f64, mc: &McSettings, index: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(index + 1);
        let path = sample_brownian(self.d, t, mc.level, &mut rng).expect("validated inputs");
        let value = self.exponent(&path.increments()).exp();
        if mc.antithetic {
            let mirrored = self.exponent(&path.negate_spatial().increments()).exp();
            (value + mirrored) * 0.5
        } else {
            value
        }
    }

    /// Monte Carlo expectation of the approximant at time `t`.
    pub fn estimate(&self, t: f64, mc: &McSettings) -> Result<ApproxResult, SemigroupError> {
        if mc.samples == 0 {
            return Err(SemigroupError::NoSamples);
        }
        if !(t > 0.0) {
            return Err(SemigroupError::Path(PathError::InvalidDimensions));
        }
        let n = self.size;
        let chunks = mc.samples.div_ceil(CHUNK);
        let partials: Vec<(DMatrix<f64>, DMatrix<f64>)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = ((c + 1) * CHUNK).min(mc.samples);
                let mut sum = DMatrix::zeros(n, n);
                let mut sumsq = DMatrix::zeros(n, n);
                for s in lo..hi {
                    let v = self.one_sample(t, mc, s as u64);
                    sum += &v;
                    sumsq += v.component_mul(&v);
                }
                (sum, sumsq)
            })
            .collect();
        let mut sum = DMatrix::zeros(n, n);
        let mut sumsq = DMatrix::zeros(n, n);
        for (s, sq) in partials {
            sum += s;
            sumsq += sq;
        }
        let count = mc.samples as f64;
        let mean = sum / count;
        let mut stderr_sq = 0.0;
        for (m, q) in mean.iter().zip(sumsq.iter()) {
            let var = (q / count - m * m).max(0.0);
            stderr_sq += var / count;
        }
        Ok(ApproxResult {
            mean,
            stderr: stderr_sq.sqrt(),
        })
    }
}

/// One-shot convenience wrapper around [`ApproxPlan`].
pub fn approx_semigroup(
    model: &MatrixModel,
    order: usize,
    t: f64,
    mc: &McSettings,
) -> Result<ApproxResult, SemigroupError> {
    ApproxPlan::new(model, order)?.estimate(t, mc)
}

/// One `(order, t)` cell of a convergence study.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub order: usize,
    pub t: f64,
    /// Spectral norm of `approximant - e^{tL}`.
    pub error_exact: f64,
    /// Spectral norm of `approximant - Taylor reference`.
    pub error_taylor: f64,
    pub stderr: f64,
    /// Set when the Monte Carlo noise is too large relative to the error for
    /// the cell to inform a rate fit.
    pub noise_limited: bool,
}

/// Fitted convergence rate for one truncation order.
#[derive(Clone, Copy, Debug)]
pub struct SlopeFit {
    pub order: usize,
    /// Least-squares slope of `log error` against `log t`, or `None` when
    /// fewer than two cells were usable.
    pub slope: Option<f64>,
    /// `(order + 1)/2`, the theoretical rate.
    pub expected: f64,
    pub points_used: usize,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub fits: Vec<SlopeFit>,
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

/// Runs the approximant over a grid of truncation orders and times and fits
/// the convergence rate per order.
pub fn convergence_study(
    model: &MatrixModel,
    orders: &[usize],
    times: &[f64],
    mc: &McSettings,
) -> Result<ConvergenceReport, SemigroupError> {
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &order in orders {
        let plan = ApproxPlan::new(model, order)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &t in times {
            let est = plan.estimate(t, mc)?;
            let exact = model.exact_semigroup(t);
            let taylor = model.taylor_reference(t, order);
            let error_exact = spectral_norm(&(&est.mean - exact));
            let error_taylor = spectral_norm(&(&est.mean - taylor));
            let noise_limited = est.stderr > 0.5 * error_exact;
            if !noise_limited && error_exact > 0.0 {
                xs.push(t.ln());
                ys.push(error_exact.ln());
            }
            rows.push(ConvergenceRow {
                order,
                t,
                error_exact,
                error_taylor,
                stderr: est.stderr,
                noise_limited,
            });
        }
        let slope = if xs.len() >= 2 {
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let sxy: f64 = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (x - mx) * (y - my))
                .sum();
            Some(sxy / sxx)
        } else {
            None
        };
        fits.push(SlopeFit {
            order,
            slope,
            expected: (order + 1) as f64 / 2.0,
            points_used: xs.len(),
        });
    }
    Ok(ConvergenceReport { rows, fits })
}

/// A random matrix model: `d + 1` generators of the given size with entries
/// uniform in `[-0.5, 0.5]`, drawn reproducibly from the seed.
pub fn random_model(d: u8, size: usize, seed: u64) -> Result<MatrixModel, SemigroupError> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats = (0..=d as usize)
        .map(|_| DMatrix::from_fn(size, size, |_, _| rng.random_range(-0.5..0.5)))
        .collect();
    MatrixModel::new(mats)
}

/// A small non-commuting test model on 3x3 matrices: a nilpotent drift plus
/// two rotation generators. Used by the CLI and the test suite.
pub fn heisenberg_model() -> MatrixModel {
    let a0 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let a1 = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let a2 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    MatrixModel::new(vec![a0, a1, a2]).expect("static shape")
}

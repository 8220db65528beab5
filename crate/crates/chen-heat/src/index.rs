//! Monte Carlo estimate of the local index density and its closed-form
//! cross-check.
//!
//! For an even dimension `d` and a curvature tensor `R`, the estimator
//! averages
//!
//! ```text
//! (4 pi)^{-d/2} / (d/2)!  *  Str( K(omega)^{d/2} ),
//! K(omega) = sum_{i<j} DR(e_i, e_j) * A_ij(omega)
//! ```
//!
//! over Brownian bridges `omega` on `[0, 1]`, where `A_ij` is the full Levy
//! area `int B^i dB^j - B^j dB^i` and `DR` is the Clifford image of the
//! curvature. The limit equals `(1/(2 i pi))^{d/2} [A-hat]_d`, the top
//! A-hat form coefficient, which is computed independently from the
//! curvature form series.

use chen_core::clifford::{dr_element, supertrace, CliffordElement, CliffordError};
use chen_core::forms::FormsError;
use chen_core::{a_genus_top, CurvatureTensor};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::paths::{sample_bridge, PathError};

/// Samples per parallel chunk; partial sums combine in chunk order so results
/// do not depend on thread count.
const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexError {
    /// The index density needs an even dimension `d >= 2`.
    OddDimension(u8),
    /// Sample count must be positive.
    NoSamples,
    Clifford(CliffordError),
    Forms(FormsError),
    Path(PathError),
}

impl std::fmt::Display for IndexError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IndexError::OddDimension(d) => {
                write!(f, "index density needs even dimension, got {d}")
            }
            IndexError::NoSamples => write!(f, "sample count must be positive"),
            IndexError::Clifford(e) => write!(f, "{e}"),
            IndexError::Forms(e) => write!(f, "{e}"),
            IndexError::Path(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for IndexError {}

impl From<CliffordError> for IndexError {
    fn from(e: CliffordError) -> Self {
        IndexError::Clifford(e)
    }
}

impl From<FormsError> for IndexError {
    fn from(e: FormsError) -> Self {
        IndexError::Forms(e)
    }
}

impl From<PathError> for IndexError {
    fn from(e: PathError) -> Self {
        IndexError::Path(e)
    }
}

/// Monte Carlo settings for the density estimator.
#[derive(Clone, Copy, Debug)]
pub struct IndexMcSettings {
    pub samples: usize,
    /// Dyadic grid level for the bridges.
    pub level: u32,
    pub seed: u64,
}

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct DensityEstimate {
    pub value: Complex64,
    /// Standard error of the complex mean: `sqrt(Var|c|/n)`.
    pub stderr: f64,
    pub samples: usize,
}

/// Outcome of the cross-check against the closed-form density.
#[derive(Clone, Copy, Debug)]
pub struct IndexCheck {
    pub estimate: DensityEstimate,
    /// `(1/(2 i pi))^{d/2} [A-hat]_d`.
    pub reference: Complex64,
    /// Absolute tolerance used: three standard errors plus 2% of the
    /// reference magnitude.
    pub tolerance: f64,
    pub pass: bool,
}

/// Reusable per-curvature tables: the Clifford images `DR(e_i, e_j)` in
/// lexicographic pair order.
pub struct DensityPlan {
    d: u8,
    dr: Vec<CliffordElement>,
}

impl DensityPlan {
    pub fn new(r: &CurvatureTensor) -> Result<Self, IndexError> {
        let d = r.dim();
        if d < 2 || d % 2 != 0 {
            return Err(IndexError::OddDimension(d));
        }
        let mut dr = Vec::with_capacity((d as usize) * (d as usize - 1) / 2);
        for i in 1..=d {
            for j in (i + 1)..=d {
                dr.push(dr_element(r, i, j)?);
            }
        }
        Ok(DensityPlan { d, dr })
    }

    /// `K(omega) = sum_{i<j} DR(e_i,e_j) A_ij` from the areas in
    /// lexicographic pair order.
    pub fn curvature_pairing(&self, areas: &[f64]) -> CliffordElement {
        let mut k = CliffordElement::zero(self.d);
        for (el, &a) in self.dr.iter().zip(areas) {
            if a != 0.0 {
                k = k.add(&el.scale_re(a)).expect("same dimension");
            }
        }
        k
    }

    /// The per-sample density contribution `pref * Str(K^{d/2})`.
    fn one_sample(&self, mc: &IndexMcSettings, index: u64, pref: f64) -> Complex64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(index + 1);
        let bridge = sample_bridge(self.d, 1.0, mc.level, &mut rng).expect("validated inputs");
        let k = self.curvature_pairing(&bridge.levy_areas());
        let mut pow = k.clone();
        for _ in 1..self.d / 2 {
            pow = pow.mul(&k).expect("same dimension");
        }
        supertrace(&pow).expect("full element") * pref
    }

    /// Monte Carlo mean of the density over Brownian bridges.
    pub fn estimate(&self, mc: &IndexMcSettings) -> Result<DensityEstimate, IndexError> {
        if mc.samples == 0 {
            return Err(IndexError::NoSamples);
        }
        let half = self.d as f64 / 2.0;
        let mut pref = (4.0 * core::f64::consts::PI).powf(-half);
        for k in 2..=(self.d / 2) as u64 {
            pref /= k as f64;
        }
        let chunks = mc.samples.div_ceil(CHUNK);
        let partials: Vec<(Complex64, f64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = ((c + 1) * CHUNK).min(mc.samples);
                let mut sum = Complex64::new(0.0, 0.0);
                let mut sumsq = 0.0;
                for s in lo..hi {
                    let v = self.one_sample(mc, s as u64, pref);
                    sum += v;
                    sumsq += v.norm_sqr();
                }
                (sum, sumsq)
            })
            .collect();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sumsq = 0.0;
        for (s, q) in partials {
            sum += s;
            sumsq += q;
        }
        let n = mc.samples as f64;
        let mean = sum / n;
        let var = (sumsq / n - mean.norm_sqr()).max(0.0);
        Ok(DensityEstimate {
            value: mean,
            stderr: (var / n).sqrt(),
            samples: mc.samples,
        })
    }
}

/// The closed-form density `(1/(2 i pi))^{d/2} [A-hat]_d`.
pub fn reference_density(r: &CurvatureTensor) -> Result<Complex64, IndexError> {
    let d = r.dim();
    if d < 2 || d % 2 != 0 {
        return Err(IndexError::OddDimension(d));
    }
    let top = a_genus_top(r)?;
    let z = Complex64::new(0.0, 2.0 * core::f64::consts::PI).powi(-(d as i32) / 2);
    Ok(z * top)
}

/// Estimates the density and compares it against [`reference_density`]
/// within three standard errors plus 2% of the reference magnitude.
pub fn verify_local_index(
    r: &CurvatureTensor,
    mc: &IndexMcSettings,
) -> Result<IndexCheck, IndexError> {
    let plan = DensityPlan::new(r)?;
    let estimate = plan.estimate(mc)?;
    let reference = reference_density(r)?;
    let tolerance = 3.0 * estimate.stderr + 0.02 * reference.norm();
    let pass = (estimate.value - reference).norm() <= tolerance;
    Ok(IndexCheck {
        estimate,
        reference,
        tolerance,
        pass,
    })
}

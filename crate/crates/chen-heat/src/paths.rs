//! Brownian paths and bridges on dyadic grids, their exact signatures, and
//! Levy areas.
//!
//! Time rides along as coordinate 0, so a path lives in `R^{d+1}` and the
//! signature of its piecewise-linear interpolation is the ordered product of
//! per-segment exponentials.

use chen_core::chen::{ChenCoefficients, ChenError};
use chen_core::tensor::{Cap, SignatureEngine, TensorSeries};
use chen_core::word::Word;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathError {
    /// `d >= 1` and `t > 0` required.
    InvalidDimensions,
    /// Levy areas need two distinct spatial indices in `1..=d`.
    BadAreaIndices,
    /// The requested word is not admitted by the signature cap.
    WordBeyondCap,
    Chen(ChenError),
}

impl std::fmt::Display for PathError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PathError::InvalidDimensions => write!(f, "need d >= 1, t > 0"),
            PathError::BadAreaIndices => {
                write!(f, "Levy area needs distinct spatial indices in 1..=d")
            }
            PathError::WordBeyondCap => write!(f, "word exceeds the signature cap"),
            PathError::Chen(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for PathError {}

impl From<ChenError> for PathError {
    fn from(e: ChenError) -> Self {
        PathError::Chen(e)
    }
}

/// A piecewise-linear path in `R^{d+1}` on the dyadic grid of level `L`:
/// `2^L` segments over `[0, t]`, coordinate 0 equal to elapsed time.
#[derive(Clone, Debug)]
pub struct PathSample {
    d: u8,
    horizon: f64,
    level: u32,
    /// `(2^L + 1) x (d+1)` grid values; row 0 is the zero vector.
    values: Vec<Vec<f64>>,
}

impl PathSample {
    pub fn dim(&self) -> u8 {
        self.d
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn segments(&self) -> usize {
        1usize << self.level
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Per-segment increments in `R^{d+1}`.
    pub fn increments(&self) -> Vec<Vec<f64>> {
        self.values
            .windows(2)
            .map(|w| {
                w[1].iter()
                    .zip(&w[0])
                    .map(|(b, a)| b - a)
                    .collect::<Vec<f64>>()
            })
            .collect()
    }

    /// Spatial mirror image: negates coordinates `1..=d`, used for
    /// antithetic variates.
    pub fn negate_spatial(&self) -> Self {
        let mut out = self.clone();
        for row in &mut out.values {
            for v in row.iter_mut().skip(1) {
                *v = -*v;
            }
        }
        out
    }

    /// Exact signature of the interpolation up to the engine's cap.
    pub fn signature(&self, engine: &SignatureEngine) -> TensorSeries {
        assert_eq!(engine.dim(), self.d, "engine dimension mismatch");
        engine.signature(&self.increments())
    }

    /// The iterated Stratonovich integral of the interpolation for `word`,
    /// read off the signature.
    pub fn iterated_integral(
        &self,
        engine: &SignatureEngine,
        word: &Word,
    ) -> Result<f64, PathError> {
        if engine.word_index(word).is_none() {
            return Err(PathError::WordBeyondCap);
        }
        Ok(self.signature(engine).coeff(word))
    }

    /// `int B^i dB^j - B^j dB^i` of the interpolation, by the trapezoid rule
    /// (exact for piecewise-linear integrands, consistent with Stratonovich).
    pub fn levy_area(&self, i: u8, j: u8) -> Result<f64, PathError> {
        if i == 0 || j == 0 || i > self.d || j > self.d || i == j {
            return Err(PathError::BadAreaIndices);
        }
        let (i, j) = (i as usize, j as usize);
        let mut acc = 0.0;
        for w in self.values.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let mid_i = 0.5 * (a[i] + b[i]);
            let mid_j = 0.5 * (a[j] + b[j]);
            acc += mid_i * (b[j] - a[j]) - mid_j * (b[i] - a[i]);
        }
        Ok(acc)
    }

    /// All Levy areas `(i,j)`, `1 <= i < j <= d`, in lexicographic pair
    /// order, in one pass over the grid.
    pub fn levy_areas(&self) -> Vec<f64> {
        let d = self.d as usize;
        let mut out = vec![0.0; d * (d - 1) / 2];
        for w in self.values.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let mut p = 0;
            for i in 1..=d {
                for j in (i + 1)..=d {
                    let mid_i = 0.5 * (a[i] + b[i]);
                    let mid_j = 0.5 * (a[j] + b[j]);
                    out[p] += mid_i * (b[j] - a[j]) - mid_j * (b[i] - a[i]);
                    p += 1;
                }
            }
        }
        out
    }

    /// Chen-Strichartz coefficients of the interpolation up to degree `n`.
    pub fn chen_strichartz(&self, n: usize) -> Result<ChenCoefficients, PathError> {
        let engine = SignatureEngine::new(self.d, Cap::ByDegree(n));
        let sig = engine.signature_coeffs(&self.increments());
        Ok(chen_core::chen_coefficients(&engine, &sig)?)
    }

    /// Builds a deterministic path from explicit spatial grid values (used by
    /// tests); time coordinate is filled in.
    pub fn from_spatial_values(d: u8, t: f64, spatial: Vec<Vec<f64>>) -> Self {
        let n = spatial.len() - 1;
        let level = n.trailing_zeros();
        assert_eq!(1usize << level, n, "grid must be dyadic");
        let values = spatial
            .into_iter()
            .enumerate()
            .map(|(m, row)| {
                assert_eq!(row.len(), d as usize);
                let mut full = Vec::with_capacity(d as usize + 1);
                full.push(t * m as f64 / n as f64);
                full.extend(row);
                full
            })
            .collect();
        PathSample {
            d,
            horizon: t,
            level,
            values,
        }
    }
}

/// Samples a standard Brownian path: spatial increments are independent
/// `N(0, t 2^{-L})`, the time coordinate is deterministic.
pub fn sample_brownian<R: Rng + ?Sized>(
    d: u8,
    t: f64,
    level: u32,
    rng: &mut R,
) -> Result<PathSample, PathError> {
    if d == 0 || !(t > 0.0) {
        return Err(PathError::InvalidDimensions);
    }
    let n = 1usize << level;
    let h = t / n as f64;
    let sd = h.sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(vec![0.0; d as usize + 1]);
    for m in 1..=n {
        let prev = &values[m - 1];
        let mut row = Vec::with_capacity(d as usize + 1);
        row.push(t * m as f64 / n as f64);
        for c in 1..=d as usize {
            let z: f64 = rng.sample(StandardNormal);
            row.push(prev[c] + sd * z);
        }
        values.push(row);
    }
    Ok(PathSample {
        d,
        horizon: t,
        level,
        values,
    })
}

/// Samples a Brownian bridge from 0 to 0 over `[0, t]` by subtracting the
/// linear drift `(s/t) B_t` from a Brownian sample.
pub fn sample_bridge<R: Rng + ?Sized>(
    d: u8,
    t: f64,
    level: u32,
    rng: &mut R,
) -> Result<PathSample, PathError> {
    let mut p = sample_brownian(d, t, level, rng)?;
    let n = p.segments();
    let end: Vec<f64> = p.values[n].clone();
    for (m, row) in p.values.iter_mut().enumerate() {
        let frac = m as f64 / n as f64;
        for c in 1..=d as usize {
            row[c] -= frac * end[c];
        }
    }
    // pin the endpoint exactly
    for c in 1..=d as usize {
        p.values[n][c] = 0.0;
    }
    Ok(p)
}

/// Empirical means and standard errors of the signature coefficients over
/// Brownian samples, aligned with `engine.words()`.
///
/// Sample `s` draws from ChaCha stream `s + 1` of the seed and partial sums
/// combine in fixed chunk order, so the result is byte-identical for a fixed
/// seed regardless of thread count.
pub struct MomentStats {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
}

/// When `extrapolate` is set, each sample combines the signatures of the
/// same path read at levels `level` and `level - 1` as `2 S_L - S_{L-1}`.
/// The expected interpolation error of a dyadic piecewise-linear signature
/// coefficient expands in powers of the step, so the difference cancels its
/// leading `O(2^-level)` term.
pub fn empirical_moments(
    engine: &SignatureEngine,
    t: f64,
    level: u32,
    samples: usize,
    seed: u64,
    extrapolate: bool,
) -> Result<MomentStats, PathError> {
    use rand::SeedableRng;
    use rayon::prelude::*;

    if samples == 0 || (extrapolate && level == 0) {
        return Err(PathError::InvalidDimensions);
    }
    const CHUNK: usize = 256;
    let d = engine.dim();
    let nw = engine.words().len();
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(samples);
            let mut sum = vec![0.0; nw];
            let mut sumsq = vec![0.0; nw];
            for s in lo..hi {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s as u64 + 1);
                let path = sample_brownian(d, t, level, &mut rng)?;
                let increments = path.increments();
                let mut sig = engine.signature_coeffs(&increments);
                if extrapolate {
                    let coarse: Vec<Vec<f64>> = increments
                        .chunks(2)
                        .map(|pair| {
                            pair[0]
                                .iter()
                                .zip(&pair[1])
                                .map(|(a, b)| a + b)
                                .collect()
                        })
                        .collect();
                    let sig_coarse = engine.signature_coeffs(&coarse);
                    for (f, c) in sig.iter_mut().zip(&sig_coarse) {
                        *f = 2.0 * *f - c;
                    }
                }
                for (k, v) in sig.iter().enumerate() {
                    sum[k] += v;
                    sumsq[k] += v * v;
                }
            }
            Ok((sum, sumsq))
        })
        .collect::<Result<_, PathError>>()?;
    let mut sum = vec![0.0; nw];
    let mut sumsq = vec![0.0; nw];
    for (s, q) in partials {
        for k in 0..nw {
            sum[k] += s[k];
            sumsq[k] += q[k];
        }
    }
    let n = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let stderr = mean
        .iter()
        .zip(&sumsq)
        .map(|(m, q)| ((q / n - m * m).max(0.0) / n).sqrt())
        .collect();
    Ok(MomentStats {
        mean,
        stderr,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn brownian_basic_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = sample_brownian(2, 0.5, 0, &mut rng).unwrap();
        assert_eq!(p.segments(), 1);
        assert_eq!(p.values()[0], vec![0.0, 0.0, 0.0]);
        assert_eq!(p.values()[1][0], 0.5);

        let p = sample_brownian(2, 0.5, 3, &mut rng).unwrap();
        assert!((p.values()[8][0] - 0.5).abs() < 1e-15);
        for (m, row) in p.values().iter().enumerate() {
            assert!((row[0] - 0.5 * m as f64 / 8.0).abs() < 1e-15);
        }
        assert!(sample_brownian(0, 1.0, 2, &mut rng).is_err());
        assert!(sample_brownian(2, 0.0, 2, &mut rng).is_err());
    }

    #[test]
    fn brownian_terminal_variance() {
        // empirical variance of B^1_t over many samples close to t
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = 0.7;
        let n = 20_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let p = sample_brownian(1, t, 4, &mut rng).unwrap();
            let b = p.values()[p.segments()][1];
            sum += b;
            sumsq += b * b;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // stderr of a variance estimate is roughly var * sqrt(2/n)
        let se = var * (2.0 / n as f64).sqrt();
        assert!((var - t).abs() < 3.0 * se, "var {var} vs t {t}");
    }

    #[test]
    fn bridge_endpoint_and_midpoint_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = 1.0;
        let n = 20_000;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let p = sample_bridge(2, t, 4, &mut rng).unwrap();
            let last = &p.values()[p.segments()];
            assert_eq!(last[1], 0.0);
            assert_eq!(last[2], 0.0);
            let mid = &p.values()[p.segments() / 2];
            sumsq += mid[1] * mid[1];
        }
        // bridge covariance s(t-s)/t at s = t/2 is t/4
        let var = sumsq / n as f64;
        let se = var * (2.0 / n as f64).sqrt();
        assert!((var - t / 4.0).abs() < 3.0 * se, "var {var}");
    }

    #[test]
    fn levy_area_guards() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = sample_brownian(1, 1.0, 3, &mut rng).unwrap();
        assert_eq!(p.levy_area(1, 1), Err(PathError::BadAreaIndices));
        assert_eq!(p.levy_area(1, 2), Err(PathError::BadAreaIndices));
        assert_eq!(p.levy_area(0, 1), Err(PathError::BadAreaIndices));
    }

    #[test]
    fn levy_area_straight_line_is_zero() {
        let spatial = (0..=4).map(|m| vec![0.3 * m as f64, -0.2 * m as f64]).collect();
        let p = PathSample::from_spatial_values(2, 1.0, spatial);
        assert!(p.levy_area(1, 2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn levy_area_unit_square_loop() {
        // polygonal loop around the unit square encloses area 1, so the
        // antisymmetric integral is 2 (Green's theorem).
        let spatial = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0],
        ];
        // pad to a dyadic grid of 8 segments by repeating corners at
        // half-steps
        let mut padded = Vec::new();
        for w in spatial.windows(2) {
            padded.push(w[0].clone());
            padded.push(
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect(),
            );
        }
        padded.push(spatial[4].clone());
        let p = PathSample::from_spatial_values(2, 1.0, padded);
        assert!((p.levy_area(1, 2).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn levy_area_matches_signature_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = sample_brownian(3, 1.0, 6, &mut rng).unwrap();
        let engine = SignatureEngine::new(3, Cap::ByDegree(2));
        let sig = p.signature(&engine);
        for (i, j) in [(1u8, 2u8), (1, 3), (2, 3)] {
            let s_ij = sig.coeff(&Word::from_letters(&[i, j]));
            let s_ji = sig.coeff(&Word::from_letters(&[j, i]));
            let area = p.levy_area(i, j).unwrap();
            assert!((area - (s_ij - s_ji)).abs() < 1e-12);
        }
        let all = p.levy_areas();
        assert!((all[0] - p.levy_area(1, 2).unwrap()).abs() < 1e-14);
        assert!((all[2] - p.levy_area(2, 3).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn signature_time_coefficient_and_chen_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = 0.8;
        let p = sample_brownian(2, t, 5, &mut rng).unwrap();
        let engine = SignatureEngine::new(2, Cap::ByDegree(3));
        let sig = p.signature(&engine);
        assert!((sig.coeff(&Word::from_letters(&[0])) - t).abs() < 1e-14);

        // Chen's relation: the signature of a concatenation is the product.
        let q = sample_brownian(2, t, 5, &mut rng).unwrap();
        let mut joined = p.increments();
        joined.extend(q.increments());
        let product = sig.mul(&q.signature(&engine)).unwrap();
        let direct = engine.signature(&joined);
        assert!(product.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn chen_strichartz_identity_fixed_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = sample_brownian(2, 1.0, 6, &mut rng).unwrap();
        let engine = SignatureEngine::new(2, Cap::ByDegree(4));
        let lam = p.chen_strichartz(4).unwrap();
        // Lambda_(i) = B^i_t
        let end = &p.values()[p.segments()];
        assert!((lam.get(&Word::from_letters(&[1])) - end[1]).abs() < 1e-12);
        assert!((lam.get(&Word::from_letters(&[2])) - end[2]).abs() < 1e-12);
        // the bracket-series exponential reproduces the signature
        let rebuilt = lam.lie_series().exp().unwrap();
        let sig = p.signature(&engine);
        assert!(rebuilt.max_abs_diff(&sig) < 1e-10);
    }

    #[test]
    fn scaling_of_signature_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = sample_brownian(2, 1.0, 4, &mut rng).unwrap();
        let engine = SignatureEngine::new(2, Cap::ByDegree(4));
        let sig = p.signature(&engine);
        let c = 1.5f64;

        // spatial-only scaling: coefficient of I scales by c^(|I| - n(I))
        let scaled_spatial: Vec<Vec<f64>> = p
            .values()
            .iter()
            .map(|row| row.iter().skip(1).map(|v| c * v).collect())
            .collect();
        let ps = PathSample::from_spatial_values(2, 1.0, scaled_spatial);
        let sig_s = ps.signature(&engine);
        for w in engine.words() {
            let pow = (w.len() - w.zeros()) as i32;
            let expected = sig.coeff(w) * c.powi(pow);
            assert!((sig_s.coeff(w) - expected).abs() < 1e-10, "word {w}");
        }

        // Brownian scaling: spatial by c AND time by c^2 scales by c^(d(I))
        let scaled_both: Vec<Vec<f64>> = p
            .values()
            .iter()
            .map(|row| row.iter().skip(1).map(|v| c * v).collect())
            .collect();
        let pb = PathSample::from_spatial_values(2, c * c, scaled_both);
        let sig_b = pb.signature(&engine);
        for w in engine.words() {
            let expected = sig.coeff(w) * c.powi(w.degree() as i32);
            assert!((sig_b.coeff(w) - expected).abs() < 1e-10, "word {w}");
        }
    }
}

//! Truncated free tensor algebra over `d+1` indeterminates `X_0,...,X_d`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::word::{enumerate_words, Word};

/// Truncation rule for a [`TensorSeries`]. Both rules cut along an ideal of
/// the concatenation algebra, so products, exponentials and logarithms stay
/// exact within the cap.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cap {
    /// Keep words with `d(I) <= n`, the time-weighted degree.
    ByDegree(usize),
    /// Keep words with `|I| <= n`, regardless of zeros.
    ByLength(usize),
}

impl Cap {
    pub fn admits(&self, w: &Word) -> bool {
        match *self {
            Cap::ByDegree(n) => w.degree() <= n,
            Cap::ByLength(n) => w.len() <= n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorError {
    /// Operands carry different truncation caps.
    CapMismatch,
    /// `exp` requires a vanishing constant term.
    NonzeroConstantTerm,
    /// `log` requires constant term 1.
    ConstantTermNotOne,
    /// `commutator_expand` rejects the empty word.
    EmptyWord,
}

impl core::fmt::Display for TensorError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TensorError::CapMismatch => write!(f, "tensor series have mismatched caps"),
            TensorError::NonzeroConstantTerm => {
                write!(f, "exponential requires zero constant term")
            }
            TensorError::ConstantTermNotOne => write!(f, "logarithm requires constant term 1"),
            TensorError::EmptyWord => write!(f, "empty word has no commutator expansion"),
        }
    }
}

impl core::error::Error for TensorError {}

/// Element of the truncated tensor algebra: a sparse map word -> coefficient.
/// Only words admitted by `cap` are stored; products discard the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorSeries {
    cap: Cap,
    coeffs: BTreeMap<Word, f64>,
}

impl TensorSeries {
    pub fn zero(cap: Cap) -> Self {
        TensorSeries {
            cap,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn unit(cap: Cap) -> Self {
        let mut s = Self::zero(cap);
        s.coeffs.insert(Word::empty(), 1.0);
        s
    }

    /// The single indeterminate `X_letter`.
    pub fn generator(letter: u8, cap: Cap) -> Self {
        let mut s = Self::zero(cap);
        s.add_term(Word::from_letters(&[letter]), 1.0);
        s
    }

    pub fn cap(&self) -> Cap {
        self.cap
    }

    pub fn coeff(&self, w: &Word) -> f64 {
        self.coeffs.get(w).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.coeffs.iter().map(|(w, &c)| (w, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `c` to the coefficient of `w`; silently drops words beyond the cap.
    pub fn add_term(&mut self, w: Word, c: f64) {
        if c == 0.0 || !self.cap.admits(&w) {
            return;
        }
        let slot = self.coeffs.entry(w.clone()).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.coeffs.remove(&w);
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero(self.cap);
        for (w, v) in &self.coeffs {
            out.add_term(w.clone(), c * v);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        if self.cap != other.cap {
            return Err(TensorError::CapMismatch);
        }
        let mut out = self.clone();
        for (w, v) in &other.coeffs {
            out.add_term(w.clone(), *v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.add(&other.scale(-1.0))
    }

    /// Concatenation product. The coefficient of `w` in the result is the sum
    /// over splittings `w = uv` of `a(u) b(v)`; words beyond the cap are
    /// discarded.
    pub fn mul(&self, other: &Self) -> Result<Self, TensorError> {
        if self.cap != other.cap {
            return Err(TensorError::CapMismatch);
        }
        let mut out = Self::zero(self.cap);
        for (u, a) in &self.coeffs {
            for (v, b) in &other.coeffs {
                let w = u.concat(v);
                out.add_term(w, a * b);
            }
        }
        Ok(out)
    }

    /// Largest admissible nilpotency order: any product of more than this
    /// many constant-free factors vanishes under the cap.
    fn nilpotency_order(&self) -> usize {
        match self.cap {
            Cap::ByDegree(n) | Cap::ByLength(n) => n,
        }
    }

    /// Truncated exponential `sum a^k / k!`. Requires zero constant term, so
    /// the sum terminates at the cap.
    pub fn exp(&self) -> Result<Self, TensorError> {
        if self.coeff(&Word::empty()) != 0.0 {
            return Err(TensorError::NonzeroConstantTerm);
        }
        let mut out = Self::unit(self.cap);
        let mut term = Self::unit(self.cap);
        for k in 1..=self.nilpotency_order() {
            term = term.mul(self)?.scale(1.0 / k as f64);
            if term.is_zero() {
                break;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Truncated logarithm `sum (-1)^(k+1) (a-1)^k / k`. Requires constant
    /// term 1.
    pub fn log(&self) -> Result<Self, TensorError> {
        if (self.coeff(&Word::empty()) - 1.0).abs() > 1e-12 {
            return Err(TensorError::ConstantTermNotOne);
        }
        let mut x = self.clone();
        x.coeffs.remove(&Word::empty());
        let mut out = Self::zero(self.cap);
        let mut power = Self::unit(self.cap);
        for k in 1..=self.nilpotency_order() {
            power = power.mul(&x)?;
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            out = out.add(&power.scale(sign / k as f64))?;
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (w, c) in &self.coeffs {
            m = m.max((c - other.coeff(w)).abs());
        }
        for (w, c) in &other.coeffs {
            m = m.max((c - self.coeff(w)).abs());
        }
        m
    }
}

/// Expands the right-nested commutator
/// `X_I = [X_{i_1},[X_{i_2},...,[X_{i_{k-1}}, X_{i_k}]...]` into a signed sum
/// of words of length `|I|`.
pub fn commutator_expand(word: &Word, cap: Cap) -> Result<TensorSeries, TensorError> {
    let letters = word.letters();
    if letters.is_empty() {
        return Err(TensorError::EmptyWord);
    }
    let mut acc = TensorSeries::generator(letters[letters.len() - 1], cap);
    for &letter in letters[..letters.len() - 1].iter().rev() {
        let x = TensorSeries::generator(letter, cap);
        acc = x.mul(&acc)?.sub(&acc.mul(&x)?)?;
    }
    Ok(acc)
}

/// Precompiled plan for signatures of piecewise-linear paths.
///
/// The signature of a piecewise-linear path is the ordered product over
/// segments of `exp(increment . X)` (Chen's multiplicative identity). The
/// plan enumerates the admitted words once and tabulates, per word, its
/// splittings `w = uv` together with the letters of `v`, so the per-segment
/// update is a flat sequence of multiply-adds.
pub struct SignatureEngine {
    d: u8,
    cap: Cap,
    words: Vec<Word>,
    index: BTreeMap<Word, usize>,
    // per word: (index of its length-minus-one prefix, last letter); drives
    // the recursive build of the per-segment exponential coefficients
    // seg[w] = (prod of letters' increments) / |w|!
    prefix: Vec<(Option<usize>, u8)>,
    // per word: splits w = uv with v nonempty, as (index of u, index of v);
    // the v = empty split contributes the previous coefficient unchanged
    splits: Vec<Vec<(Option<usize>, usize)>>,
}

impl SignatureEngine {
    pub fn new(d: u8, cap: Cap) -> Self {
        let words = enumerate_words(d, cap);
        let mut index = BTreeMap::new();
        for (i, w) in words.iter().enumerate() {
            index.insert(w.clone(), i);
        }
        let mut prefix = Vec::with_capacity(words.len());
        let mut splits = Vec::with_capacity(words.len());
        for w in &words {
            let letters = w.letters();
            let head = &letters[..letters.len() - 1];
            let parent = if head.is_empty() {
                None
            } else {
                Some(index[&Word::from_letters(head)])
            };
            prefix.push((parent, letters[letters.len() - 1]));
            let mut list = Vec::new();
            for cut in 0..letters.len() {
                let (u, v) = letters.split_at(cut);
                let u_idx = if u.is_empty() {
                    None
                } else {
                    Some(index[&Word::from_letters(u)])
                };
                // suffixes of admitted words are admitted under either cap
                list.push((u_idx, index[&Word::from_letters(v)]));
            }
            splits.push(list);
        }
        SignatureEngine {
            d,
            cap,
            words,
            index,
            prefix,
            splits,
        }
    }

    pub fn dim(&self) -> u8 {
        self.d
    }

    pub fn cap(&self) -> Cap {
        self.cap
    }

    /// Deterministic word order backing [`Self::signature_coeffs`].
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word_index(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Signature coefficients of the piecewise-linear path with the given
    /// per-segment increments (each of length `d+1`, coordinate 0 the time
    /// increment). Returns one coefficient per word of [`Self::words`];
    /// the empty-word coefficient 1 is implicit.
    pub fn signature_coeffs(&self, increments: &[Vec<f64>]) -> Vec<f64> {
        let nw = self.words.len();
        let mut sig = alloc::vec![0.0; nw];
        let mut seg = alloc::vec![0.0; nw];
        let mut next = alloc::vec![0.0; nw];
        for delta in increments {
            debug_assert_eq!(delta.len(), self.d as usize + 1);
            // seg[w] = (prod of increments along w) / |w|!, built from the
            // length-minus-one prefix
            for (wi, &(parent, letter)) in self.prefix.iter().enumerate() {
                let base = match parent {
                    None => 1.0,
                    Some(p) => seg[p] / self.words[wi].len() as f64,
                };
                seg[wi] = base * delta[letter as usize];
            }
            for (wi, list) in self.splits.iter().enumerate() {
                let mut acc = sig[wi];
                for &(u_idx, v_idx) in list {
                    let base = match u_idx {
                        None => 1.0,
                        Some(ui) => sig[ui],
                    };
                    acc += base * seg[v_idx];
                }
                next[wi] = acc;
            }
            core::mem::swap(&mut sig, &mut next);
        }
        sig
    }

    /// Same as [`Self::signature_coeffs`] but packaged as a [`TensorSeries`]
    /// with the unit term included.
    pub fn signature(&self, increments: &[Vec<f64>]) -> TensorSeries {
        let coeffs = self.signature_coeffs(increments);
        let mut s = TensorSeries::unit(self.cap);
        for (w, c) in self.words.iter().zip(coeffs) {
            s.add_term(w.clone(), c);
        }
        s
    }
}

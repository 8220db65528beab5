//! Chen-Strichartz coefficients of a signature.
//!
//! For a word `I` of length `k`, the coefficient is the permutation sum
//!
//! ```text
//! Lambda_I = sum_{sigma in S_k} (-1)^e(sigma) / (k^2 binom(k-1, e(sigma)))
//!            * <signature, sigma^{-1}(I)>
//! ```
//!
//! where `e(sigma)` counts descents `sigma(j) > sigma(j+1)`, `j = 1..k-1`.
//! Permutations run over `{1,...,k}`; the low-order specializations
//! `Lambda_(i) = B^i_t` and the Levy-area form of the length-2 coefficients
//! pin this convention (see tests in the companion crate).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::tensor::{commutator_expand, Cap, SignatureEngine, TensorSeries};
use crate::word::Word;

/// The exhaustive permutation sum is rejected beyond this word length.
pub const MAX_WORD_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChenError {
    /// A word longer than [`MAX_WORD_LEN`] was requested.
    WordTooLong(usize),
}

impl core::fmt::Display for ChenError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ChenError::WordTooLong(k) => write!(
                f,
                "word length {k} exceeds the permutation-sum limit {MAX_WORD_LEN}"
            ),
        }
    }
}

impl core::error::Error for ChenError {}

/// The coefficients `Lambda_I` for all nonempty admitted words.
#[derive(Clone, Debug)]
pub struct ChenCoefficients {
    cap: Cap,
    values: BTreeMap<Word, f64>,
}

impl ChenCoefficients {
    pub fn cap(&self) -> Cap {
        self.cap
    }

    pub fn get(&self, w: &Word) -> f64 {
        self.values.get(w).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.values.iter().map(|(w, &c)| (w, c))
    }

    /// The Lie series `sum_I Lambda_I X_I` with each `X_I` expanded into
    /// tensor words.
    pub fn lie_series(&self) -> TensorSeries {
        let mut out = TensorSeries::zero(self.cap);
        for (w, lam) in &self.values {
            if *lam == 0.0 {
                continue;
            }
            let bracket = commutator_expand(w, self.cap).expect("nonempty word");
            out = out.add(&bracket.scale(*lam)).expect("same cap");
        }
        out
    }
}

/// Per-length permutation table: pairs of (permutation of 0..k, weight).
struct PermTable {
    entries: Vec<(Vec<usize>, f64)>,
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

fn descents(p: &[usize]) -> usize {
    p.windows(2).filter(|w| w[0] > w[1]).count()
}

fn perm_table(k: usize) -> PermTable {
    let mut entries = Vec::new();
    if k == 0 {
        return PermTable { entries };
    }
    let mut p: Vec<usize> = (0..k).collect();
    // Heap's algorithm
    let mut c = alloc::vec![0usize; k];
    let push = |p: &[usize], entries: &mut Vec<(Vec<usize>, f64)>| {
        let e = descents(p);
        let sign = if e % 2 == 0 { 1.0 } else { -1.0 };
        let weight = sign / ((k * k) as f64 * binomial(k - 1, e));
        entries.push((p.to_vec(), weight));
    };
    push(&p, &mut entries);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            push(&p, &mut entries);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    PermTable { entries }
}

/// Precompiled permutation sums: for each word of the engine, the signature
/// indices of its permuted words together with their weights. Build once,
/// apply per sample.
pub struct ChenPlan {
    cap: Cap,
    words: Vec<Word>,
    // per word: (signature index of sigma^{-1}(I), weight)
    terms: Vec<Vec<(usize, f64)>>,
}

impl ChenPlan {
    pub fn cap(&self) -> Cap {
        self.cap
    }

    pub fn new(engine: &SignatureEngine) -> Result<Self, ChenError> {
        let words = engine.words();
        let max_len = words.iter().map(|w| w.len()).max().unwrap_or(0);
        if max_len > MAX_WORD_LEN {
            return Err(ChenError::WordTooLong(max_len));
        }
        let tables: Vec<PermTable> = (0..=max_len).map(perm_table).collect();
        let mut terms = Vec::with_capacity(words.len());
        for word in words {
            let k = word.len();
            let letters = word.letters();
            let mut list: Vec<(usize, f64)> = Vec::with_capacity(tables[k].entries.len());
            for (p, weight) in &tables[k].entries {
                // sigma^{-1}(I): position sigma(m) receives letter i_m
                let mut permuted = alloc::vec![0u8; k];
                for (m, &pm) in p.iter().enumerate() {
                    permuted[pm] = letters[m];
                }
                let idx = engine
                    .word_index(&Word(permuted))
                    .expect("permutation preserves the degree");
                match list.iter_mut().find(|(i, _)| *i == idx) {
                    Some((_, w)) => *w += weight,
                    None => list.push((idx, *weight)),
                }
            }
            terms.push(list);
        }
        Ok(ChenPlan {
            cap: engine.cap(),
            words: words.to_vec(),
            terms,
        })
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// `Lambda` values aligned with [`Self::words`], from signature
    /// coefficients aligned with the engine's word table.
    pub fn apply(&self, sig: &[f64]) -> Vec<f64> {
        self.terms
            .iter()
            .map(|list| list.iter().map(|&(idx, w)| w * sig[idx]).sum())
            .collect()
    }
}

/// Computes all `Lambda_I` from the signature coefficients produced by
/// `engine.signature_coeffs`.
pub fn chen_coefficients(
    engine: &SignatureEngine,
    sig: &[f64],
) -> Result<ChenCoefficients, ChenError> {
    assert_eq!(engine.words().len(), sig.len(), "signature/word table mismatch");
    let plan = ChenPlan::new(engine)?;
    let lams = plan.apply(sig);
    let mut values = BTreeMap::new();
    for (word, lam) in plan.words.iter().zip(lams) {
        values.insert(word.clone(), lam);
    }
    Ok(ChenCoefficients {
        cap: engine.cap(),
        values,
    })
}

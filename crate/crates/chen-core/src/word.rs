//! Words over the alphabet `{0,...,d}`.
//!
//! Letter 0 is the time letter and counts doubly in the degree: a word
//! `I = (i_1,...,i_k)` has degree `d(I) = |I| + n(I)` where `n(I)` is the
//! number of zeros in `I`.

use alloc::vec::Vec;

/// A finite sequence of letters in `{0,...,d}`. The empty word denotes the
/// unit coefficient slot of the tensor algebra.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        Word(letters.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of zero letters, `n(I)`.
    pub fn zeros(&self) -> usize {
        self.0.iter().filter(|&&c| c == 0).count()
    }

    /// Degree `d(I) = |I| + n(I)`, weighting the time letter doubly.
    pub fn degree(&self) -> usize {
        self.0.len() + self.zeros()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    /// Concatenation `IJ`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl core::fmt::Debug for Word {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl core::fmt::Display for Word {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        core::fmt::Debug::fmt(self, f)
    }
}

/// All nonempty words over `{0,...,d}` admitted by `cap`, ordered by length
/// then lexicographically. The ordering is deterministic; index tables built
/// from it are reproducible across runs.
pub fn enumerate_words(d: u8, cap: crate::tensor::Cap) -> Vec<Word> {
    let mut out = Vec::new();
    let mut current: Vec<Word> = alloc::vec![Word::empty()];
    loop {
        let mut next = Vec::new();
        for w in &current {
            for letter in 0..=d {
                let mut v = w.0.clone();
                v.push(letter);
                let nw = Word(v);
                if cap.admits(&nw) {
                    next.push(nw);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        out.extend(next.iter().cloned());
        current = next;
    }
    out
}

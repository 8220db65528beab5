//! Closed-form expectations of iterated Stratonovich integrals.
//!
//! A word has nonzero expectation exactly when it factors as a concatenation
//! of the blocks `(0)` and `(i,i)`, `1 <= i <= d`. For such a word of length
//! `n` with `n(I)` zeros,
//!
//! ```text
//! E[int dB^I] = t^((n+n(I))/2) / (2^((n-n(I))/2) * ((n+n(I))/2)!)
//! ```

use crate::word::Word;

/// True iff `I` factors as a concatenation of blocks `(0)` or `(i,i)`.
/// The block alphabet is prefix-unambiguous, so a greedy left-to-right scan
/// decides membership.
pub fn in_concat_set(word: &Word) -> bool {
    let letters = word.letters();
    let mut pos = 0;
    while pos < letters.len() {
        if letters[pos] == 0 {
            pos += 1;
        } else if pos + 1 < letters.len() && letters[pos + 1] == letters[pos] {
            pos += 2;
        } else {
            return false;
        }
    }
    true
}

/// The expectation of the iterated Stratonovich integral of `I` over `[0,t]`:
/// the closed form above when `I` is in the concatenation set, 0 otherwise.
pub fn stratonovich_moment(word: &Word, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if !in_concat_set(word) {
        return 0.0;
    }
    let n = word.len();
    let zeros = word.zeros();
    debug_assert!(
        (n + zeros) % 2 == 0,
        "n and n(I) must share parity on the concatenation set"
    );
    let half_deg = (n + zeros) / 2;
    let half_diff = (n - zeros) / 2;
    let mut value = 1.0;
    for _ in 0..half_deg {
        value *= t;
    }
    for _ in 0..half_diff {
        value /= 2.0;
    }
    for k in 1..=half_deg {
        value /= k as f64;
    }
    value
}

//! Fragment layout written into a segment after its words are computed.

use crate::symbolic::Symbol;

use super::alphabet::{BLANK, SEP1, SEP2};

/// Number of trailing zero bits of `j >= 1`.
fn ruler(j: usize) -> usize {
    j.trailing_zeros() as usize
}

/// Index (0-based) of the word assigned to fragment `j` (1-based) when `k`
/// words are available: one fragment in two gets the first word, one in four
/// the second, and so on, with the last word taking every leftover slot.
pub fn fragment_word(j: usize, k: usize) -> usize {
    (ruler(j) + 1).min(k) - 1
}

/// `floor(sqrt(n))`.
pub fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Main-layer content of a segment of length `n` holding `words`, or `None`
/// when there are no words (the segment keeps its content).
///
/// There are `f = floor(sqrt(n))` fragments of width `f`; each ends with the
/// fragment separator and its interior holds as many whole copies of its word
/// as fit, copies separated by the copy separator. Leftover cells are blank.
pub fn fragment_layout(n: usize, words: &[Vec<Symbol>]) -> Option<Vec<Symbol>> {
    if words.is_empty() {
        return None;
    }
    let f = isqrt(n);
    let mut out = vec![BLANK; n];
    for j in 1..=f {
        let start = (j - 1) * f;
        let interior = f - 1;
        let word = &words[fragment_word(j, words.len())];
        if !word.is_empty() {
            let mut pos = 0;
            while pos + word.len() <= interior {
                out[start + pos..start + pos + word.len()].copy_from_slice(word);
                pos += word.len();
                if pos + 1 + word.len() <= interior {
                    out[start + pos] = SEP2;
                    pos += 1;
                } else {
                    break;
                }
            }
        }
        out[start + interior] = SEP1;
    }
    Some(out)
}

//! Surface-form normalization and Ratcliff/Obershelp similarity.

use std::fmt;

/// Similarity in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for SimilarityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Case-fold, trim, and collapse internal whitespace runs to one space.
pub fn normalize_form(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Ratcliff/Obershelp similarity over Unicode scalar values.
pub fn ro_similarity(a: &str, b: &str) -> SimilarityScore {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    ro_similarity_chars(&a, &b)
}

pub fn ro_similarity_chars(a: &[char], b: &[char]) -> SimilarityScore {
    let total = a.len() + b.len();
    if total == 0 {
        return SimilarityScore(1.0);
    }
    let matched = matching_chars(a, b);
    SimilarityScore(2.0 * matched as f64 / total as f64)
}

/// Total matched characters: take the longest common substring, then repeat
/// on the unmatched regions to its left and right.
///
/// Ties between equally long substrings go to the earliest start in `a`,
/// then the earliest start in `b`.
pub fn matching_chars(a: &[char], b: &[char]) -> usize {
    let mut scratch = vec![0usize; b.len() + 1];
    let mut stack = vec![(0, a.len(), 0, b.len())];
    let mut matched = 0;
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        let (i, j, k) = longest_common_substring(a, b, alo, ahi, blo, bhi, &mut scratch);
        if k == 0 {
            continue;
        }
        matched += k;
        if alo < i && blo < j {
            stack.push((alo, i, blo, j));
        }
        if i + k < ahi && j + k < bhi {
            stack.push((i + k, ahi, j + k, bhi));
        }
    }
    matched
}

/// Longest common substring of `a[alo..ahi]` and `b[blo..bhi]` as
/// `(start_a, start_b, len)`. Rolling-row dynamic program over end positions.
fn longest_common_substring(
    a: &[char],
    b: &[char],
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
    row: &mut [usize],
) -> (usize, usize, usize) {
    let (mut best_i, mut best_j, mut best_k) = (alo, blo, 0);
    let width = bhi - blo;
    row[..=width].fill(0);
    for i in alo..ahi {
        // row[c + 1] holds the run length ending at (i - 1, blo + c); walk
        // backwards so each cell still sees the previous row's diagonal.
        for c in (0..width).rev() {
            let j = blo + c;
            if a[i] == b[j] {
                let k = row[c] + 1;
                row[c + 1] = k;
                // Strictly longer only: scanning ends in increasing (i, j)
                // order means equal-length runs keep the earliest starts.
                let (si, sj) = (i + 1 - k, j + 1 - k);
                if k > best_k || (k == best_k && (si, sj) < (best_i, best_j)) {
                    best_i = si;
                    best_j = sj;
                    best_k = k;
                }
            } else {
                row[c + 1] = 0;
            }
        }
    }
    (best_i, best_j, best_k)
}

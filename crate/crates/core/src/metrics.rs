//! String similarity and translation-quality metrics.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("improvement ratio is undefined for a zero baseline")]
    NotComputable,
}

/// Levenshtein distance over Unicode scalar values with unit costs.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_slices(&a, &b)
}

fn levenshtein_slices<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    // Keep the shorter sequence in the inner loop.
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(x != y);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

/// Normalized edit similarity `1 - lev(a, b) / max(|a|, |b|)`, in `[0, 1]`.
/// Two empty strings are identical (similarity 1).
pub fn edit_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_slices(&a, &b) as f64 / longest as f64
}

const BLEU_ORDER: usize = 4;

/// Sentence-level BLEU-4 over whitespace tokens.
///
/// Modified n-gram precisions are smoothed by adding one to both numerator
/// and denominator; an order with no candidate n-grams counts as `0/1`
/// before smoothing. Returns 0 when either side is empty.
pub fn bleu(candidate: &str, reference: &str) -> f64 {
    let cand: Vec<&str> = candidate.split_whitespace().collect();
    let refr: Vec<&str> = reference.split_whitespace().collect();
    if cand.is_empty() || refr.is_empty() {
        return 0.0;
    }

    let mut log_sum = 0.0;
    for n in 1..=BLEU_ORDER {
        let (matches, total) = clipped_matches(&cand, &refr, n);
        let p = (matches + 1) as f64 / (total.max(1) + 1) as f64;
        log_sum += p.ln();
    }
    let geo_mean = (log_sum / BLEU_ORDER as f64).exp();

    let c = cand.len() as f64;
    let r = refr.len() as f64;
    let brevity = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    (brevity * geo_mean).clamp(0.0, 1.0)
}

fn ngram_counts<'t, 'a>(tokens: &'t [&'a str], n: usize) -> HashMap<&'t [&'a str], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// (clipped matches, candidate n-gram total) for order `n`.
fn clipped_matches(cand: &[&str], refr: &[&str], n: usize) -> (usize, usize) {
    let cand_counts = ngram_counts(cand, n);
    let ref_counts = ngram_counts(refr, n);
    let total = cand.len().saturating_sub(n - 1);
    let matches = cand_counts
        .iter()
        .map(|(gram, &count)| count.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    (matches, total)
}

/// Relative gain `(after - before) / before`.
pub fn improvement_ratio(before: f64, after: f64) -> Result<f64, MetricError> {
    if before == 0.0 || !before.is_finite() {
        return Err(MetricError::NotComputable);
    }
    Ok((after - before) / before)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kitten_sitting() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_abs_diff_eq!(edit_similarity("kitten", "sitting"), 1.0 - 3.0 / 7.0);
    }

    #[test]
    fn similarity_edges() {
        assert_eq!(edit_similarity("", ""), 1.0);
        assert_eq!(edit_similarity("abc", ""), 0.0);
        assert_eq!(edit_similarity("same", "same"), 1.0);
        assert_eq!(edit_similarity("aaaa", "bbbb"), 0.0);
        // Scalar values, not bytes.
        assert_eq!(levenshtein("héllo", "hello"), 1);
    }

    #[test]
    fn bleu_perfect_match() {
        assert_abs_diff_eq!(bleu("a b c d e", "a b c d e"), 1.0);
    }

    #[test]
    fn bleu_zero_overlap_is_smoothing_floor() {
        // p_n = 1/5, 1/4, 1/3, 1/2.
        let expected = (1.0f64 / 120.0).powf(0.25);
        assert_abs_diff_eq!(bleu("w x y z", "a b c d"), expected, epsilon = 1e-12);
    }

    #[test]
    fn bleu_half_length_prefix() {
        // Every smoothed precision is 1; only the brevity penalty remains.
        let value = bleu("a b c d", "a b c d e f g h");
        assert_abs_diff_eq!(value, (1.0f64 - 2.0).exp(), epsilon = 1e-12);
    }

    #[test]
    fn bleu_empty_sides() {
        assert_eq!(bleu("", "a b"), 0.0);
        assert_eq!(bleu("a b", "   "), 0.0);
    }

    #[test]
    fn improvement() {
        assert_abs_diff_eq!(improvement_ratio(0.5, 0.7).unwrap(), 0.4, epsilon = 1e-12);
        assert_eq!(improvement_ratio(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(improvement_ratio(0.0, 0.3), Err(MetricError::NotComputable));
    }
}

//! Outlier selection over one seed's completion outputs.
//!
//! All outputs are compared pairwise with normalized edit similarity. An
//! output is an outlier when its similarity to at least `T` of its peers is
//! strictly below the median pair similarity of the group.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::edit_similarity;
use crate::mutate::SchemeId;

/// Fewer completed outputs than this and a median is meaningless; the seed
/// is reported as untestable.
pub const MIN_GROUP_SIZE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("group of {k} outputs is below the minimum of {min}")]
    GroupTooSmall { k: usize, min: usize },
    #[error("threshold {t} outside 1..={max}")]
    InvalidThreshold { t: usize, max: usize },
    #[error("score matrix is not a symmetric {k}x{k} matrix with unit diagonal")]
    MalformedMatrix { k: usize },
}

/// Symmetric `k x k` similarity matrix with a unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    k: usize,
    scores: Vec<f64>,
}

impl SimilarityMatrix {
    /// Wrap precomputed row-major scores after checking the invariants.
    pub fn from_scores(k: usize, scores: Vec<f64>) -> Result<Self, OracleError> {
        let malformed = || OracleError::MalformedMatrix { k };
        if scores.len() != k * k {
            return Err(malformed());
        }
        for i in 0..k {
            if scores[i * k + i] != 1.0 {
                return Err(malformed());
            }
            for j in 0..k {
                let s = scores[i * k + j];
                if s != scores[j * k + i] || !(0.0..=1.0).contains(&s) {
                    return Err(malformed());
                }
            }
        }
        Ok(Self { k, scores })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i * self.k..(i + 1) * self.k]
    }

    /// Pair scores `i < j`, row by row.
    pub fn upper_triangle(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.k).flat_map(move |i| (i + 1..self.k).map(move |j| self.get(i, j)))
    }

    /// Median of the strict upper triangle (the diagonal is excluded).
    pub fn median(&self) -> f64 {
        let mut pairs: Vec<f64> = self.upper_triangle().collect();
        median(&mut pairs)
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// Pairwise edit-similarity matrix over `outputs`.
pub fn build_matrix<S: AsRef<str>>(outputs: &[S]) -> Result<SimilarityMatrix, OracleError> {
    build_matrix_with(outputs, edit_similarity)
}

/// Upper triangle from `sim`, mirrored; the diagonal is fixed at 1. `sim`
/// must already be normalized to `[0, 1]`, so no rescaling is applied.
pub fn build_matrix_with<S: AsRef<str>>(
    outputs: &[S],
    sim: impl Fn(&str, &str) -> f64,
) -> Result<SimilarityMatrix, OracleError> {
    let k = outputs.len();
    if k < MIN_GROUP_SIZE {
        return Err(OracleError::GroupTooSmall {
            k,
            min: MIN_GROUP_SIZE,
        });
    }
    let mut scores = vec![0.0; k * k];
    for i in 0..k {
        scores[i * k + i] = 1.0;
        for j in i + 1..k {
            let s = sim(outputs[i].as_ref(), outputs[j].as_ref());
            scores[i * k + j] = s;
            scores[j * k + i] = s;
        }
    }
    Ok(SimilarityMatrix { k, scores })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedIndex {
    pub index: usize,
    pub below_median_count: usize,
}

/// Outlier selection over a bare matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierSelection {
    pub median: f64,
    pub threshold: usize,
    /// In index order.
    pub flagged: Vec<FlaggedIndex>,
}

impl OutlierSelection {
    pub fn is_flagged(&self, index: usize) -> bool {
        self.flagged.iter().any(|f| f.index == index)
    }
}

/// For each output, how many peers it is strictly less similar to than the
/// group median.
pub fn below_median_counts(matrix: &SimilarityMatrix) -> Vec<usize> {
    let median = matrix.median();
    (0..matrix.k)
        .map(|i| {
            matrix
                .row(i)
                .iter()
                .enumerate()
                .filter(|&(j, &s)| j != i && s < median)
                .count()
        })
        .collect()
}

/// Flag output `i` iff `|{j != i : s[i][j] < median}| >= threshold`.
pub fn select_outliers(
    matrix: &SimilarityMatrix,
    threshold: usize,
) -> Result<OutlierSelection, OracleError> {
    let max = matrix.k.saturating_sub(1);
    if threshold == 0 || threshold > max {
        return Err(OracleError::InvalidThreshold { t: threshold, max });
    }
    let flagged = below_median_counts(matrix)
        .into_iter()
        .enumerate()
        .filter(|&(_, below)| below >= threshold)
        .map(|(index, below_median_count)| FlaggedIndex {
            index,
            below_median_count,
        })
        .collect();
    Ok(OutlierSelection {
        median: matrix.median(),
        threshold,
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedOutput {
    pub scheme: SchemeId,
    pub below_median_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierVerdict {
    pub seed_id: String,
    pub flagged: Vec<FlaggedOutput>,
    pub median: f64,
    pub threshold: usize,
}

impl OutlierVerdict {
    pub fn from_selection(seed_id: &str, schemes: &[SchemeId], sel: &OutlierSelection) -> Self {
        Self {
            seed_id: seed_id.to_string(),
            flagged: sel
                .flagged
                .iter()
                .map(|f| FlaggedOutput {
                    scheme: schemes[f.index],
                    below_median_count: f.below_median_count,
                })
                .collect(),
            median: sel.median,
            threshold: sel.threshold,
        }
    }

    pub fn is_flagged(&self, scheme: SchemeId) -> bool {
        self.flagged.iter().any(|f| f.scheme == scheme)
    }
}

/// Build the matrix over `(scheme, output)` pairs and select outliers.
pub fn judge(
    seed_id: &str,
    outputs: &[(SchemeId, String)],
    threshold: usize,
) -> Result<OutlierVerdict, OracleError> {
    let texts: Vec<&str> = outputs.iter().map(|(_, o)| o.as_str()).collect();
    let schemes: Vec<SchemeId> = outputs.iter().map(|(s, _)| *s).collect();
    let matrix = build_matrix(&texts)?;
    let sel = select_outliers(&matrix, threshold)?;
    Ok(OutlierVerdict::from_selection(seed_id, &schemes, &sel))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flagged(sel: &OutlierSelection) -> Vec<usize> {
        sel.flagged.iter().map(|f| f.index).collect()
    }

    #[test]
    fn identical_outputs_all_ones() {
        let m = build_matrix(&["s", "s", "s", "s"]).unwrap();
        assert!(m.scores.iter().all(|&s| s == 1.0));
        for t in 1..=3 {
            assert!(select_outliers(&m, t).unwrap().flagged.is_empty());
        }
    }

    #[test]
    fn disjoint_strings() {
        let m = build_matrix(&["aaaa", "aaaa", "bbbb", "aaaa"]).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.get(2, 1), 0.0);
        // Three 1.0 pairs and three 0.0 pairs.
        assert_eq!(m.median(), 0.5);
    }

    #[test]
    fn single_deviant_of_nine() {
        let mut outs = vec!["def f(): return 1"; 8];
        outs.push("zzzzzzzzzzzzzzzzz");
        let m = build_matrix(&outs).unwrap();
        assert_eq!(m.median(), 1.0);
        for t in 1..=8 {
            let sel = select_outliers(&m, t).unwrap();
            if t == 1 {
                assert_eq!(flagged(&sel), (0..9).collect::<Vec<_>>());
            } else {
                assert_eq!(flagged(&sel), [8]);
            }
            let deviant = sel.flagged.iter().find(|f| f.index == 8).unwrap();
            assert_eq!(deviant.below_median_count, 8);
        }
    }

    #[test]
    fn group_and_threshold_guards() {
        assert_eq!(
            build_matrix(&["a", "b", "c"]),
            Err(OracleError::GroupTooSmall { k: 3, min: 4 })
        );
        let m = build_matrix(&["a", "b", "c", "d"]).unwrap();
        assert!(matches!(
            select_outliers(&m, 0),
            Err(OracleError::InvalidThreshold { .. })
        ));
        assert!(matches!(
            select_outliers(&m, 4),
            Err(OracleError::InvalidThreshold { t: 4, max: 3 })
        ));
    }

    #[test]
    fn even_pair_count_median_averages() {
        // k = 4 gives six pairs.
        let m = SimilarityMatrix::from_scores(
            4,
            vec![
                1.0, 0.1, 0.2, 0.3, //
                0.1, 1.0, 0.4, 0.5, //
                0.2, 0.4, 1.0, 0.6, //
                0.3, 0.5, 0.6, 1.0,
            ],
        )
        .unwrap();
        assert!((m.median() - 0.35).abs() < 1e-12);
    }

    #[test]
    fn from_scores_rejects_asymmetry() {
        assert!(SimilarityMatrix::from_scores(2, vec![1.0, 0.2, 0.3, 1.0]).is_err());
        assert!(SimilarityMatrix::from_scores(2, vec![0.9, 0.2, 0.2, 1.0]).is_err());
    }

    #[test]
    fn verdict_carries_schemes() {
        let outputs: Vec<(SchemeId, String)> = SchemeId::ALL[..5]
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, if i == 3 { "xyz".into() } else { "abc".into() }))
            .collect();
        let v = judge("s", &outputs, 4).unwrap();
        assert_eq!(v.flagged.len(), 1);
        assert_eq!(v.flagged[0].scheme, SchemeId::RelR);
        assert!(v.is_flagged(SchemeId::RelR));
    }
}

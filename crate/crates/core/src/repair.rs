//! Output repair: pick, among the non-outlier outputs, the one that looks
//! most like the group average. The selected text is always one of the
//! inputs verbatim; nothing is synthesized.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::edit_similarity;
use crate::mutate::SchemeId;
use crate::oracle::OutlierVerdict;

/// Distances closer than this count as a tie.
const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairResult {
    pub seed_id: String,
    pub selected_scheme: SchemeId,
    pub selected_output: String,
    /// Mean similarity over all unordered pairs of non-outliers.
    pub group_mean: f64,
    pub per_output_means: Vec<(SchemeId, f64)>,
    /// Only one non-outlier survived; it is returned as-is.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepairError {
    #[error("no non-outlier output left to select from")]
    RepairUnavailable,
}

pub fn repair(
    outputs: &[(SchemeId, String)],
    verdict: &OutlierVerdict,
) -> Result<RepairResult, RepairError> {
    let kept: Vec<&(SchemeId, String)> = outputs
        .iter()
        .filter(|(scheme, _)| !verdict.is_flagged(*scheme))
        .collect();
    select_representative(&verdict.seed_id, &kept)
}

/// Core of [`repair`] over an already-filtered group.
pub fn select_representative(
    seed_id: &str,
    kept: &[&(SchemeId, String)],
) -> Result<RepairResult, RepairError> {
    match kept {
        [] => Err(RepairError::RepairUnavailable),
        [(scheme, text)] => Ok(RepairResult {
            seed_id: seed_id.to_string(),
            selected_scheme: *scheme,
            selected_output: text.clone(),
            group_mean: 1.0,
            per_output_means: vec![(*scheme, 1.0)],
            degenerate: true,
        }),
        _ => {
            let n = kept.len();
            let mut sims = vec![0.0; n * n];
            let mut pair_sum = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let s = edit_similarity(&kept[i].1, &kept[j].1);
                    sims[i * n + j] = s;
                    sims[j * n + i] = s;
                    pair_sum += s;
                }
            }
            let group_mean = pair_sum / (n * (n - 1) / 2) as f64;
            let means: Vec<f64> = (0..n)
                .map(|i| {
                    let row: f64 = (0..n).filter(|&j| j != i).map(|j| sims[i * n + j]).sum();
                    row / (n - 1) as f64
                })
                .collect();

            let mut best = 0;
            for i in 1..n {
                let d = (means[i] - group_mean).abs();
                let best_d = (means[best] - group_mean).abs();
                let better = d < best_d - TIE_EPSILON
                    || ((d - best_d).abs() <= TIE_EPSILON && kept[i].0 < kept[best].0);
                if better {
                    best = i;
                }
            }
            Ok(RepairResult {
                seed_id: seed_id.to_string(),
                selected_scheme: kept[best].0,
                selected_output: kept[best].1.clone(),
                group_mean,
                per_output_means: kept.iter().map(|(s, _)| *s).zip(means).collect(),
                degenerate: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{judge, FlaggedOutput};
    use approx::assert_abs_diff_eq;

    fn outputs(texts: &[&str]) -> Vec<(SchemeId, String)> {
        SchemeId::ALL
            .iter()
            .zip(texts)
            .map(|(s, t)| (*s, t.to_string()))
            .collect()
    }

    fn no_outliers() -> OutlierVerdict {
        OutlierVerdict {
            seed_id: "s".into(),
            flagged: vec![],
            median: 1.0,
            threshold: 9,
        }
    }

    #[test]
    fn identical_outputs_prefer_original() {
        // Listed out of canonical order on purpose.
        let outs = vec![
            (SchemeId::Ini, "x = 1".to_string()),
            (SchemeId::Original, "x = 1".to_string()),
            (SchemeId::RepR, "x = 1".to_string()),
        ];
        let r = repair(&outs, &no_outliers()).unwrap();
        assert_eq!(r.selected_scheme, SchemeId::Original);
        assert_eq!(r.group_mean, 1.0);
        assert!(r.per_output_means.iter().all(|(_, m)| *m == 1.0));
    }

    #[test]
    fn closest_to_group_mean() {
        let outs = outputs(&["aaaa", "aaab", "bbbb"]);
        let r = repair(&outs, &no_outliers()).unwrap();
        assert_abs_diff_eq!(r.group_mean, 1.0 / 3.0, epsilon = 1e-12);
        let means: Vec<f64> = r.per_output_means.iter().map(|(_, m)| *m).collect();
        assert_abs_diff_eq!(means[0], 0.375, epsilon = 1e-12);
        assert_abs_diff_eq!(means[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(means[2], 0.125, epsilon = 1e-12);
        assert_eq!(r.selected_output, "aaaa");
    }

    #[test]
    fn excluding_the_outlier_changes_the_selection() {
        let outs = outputs(&["baab", "baba", "abab", "babb", "zzzz"]);
        let verdict = judge("s", &outs, 3).unwrap();
        assert_eq!(verdict.median, 0.5);
        assert_eq!(
            verdict.flagged,
            [FlaggedOutput {
                scheme: SchemeId::RelC,
                below_median_count: 4
            }]
        );

        let with = repair(&outs, &verdict).unwrap();
        assert_abs_diff_eq!(with.group_mean, 7.0 / 12.0, epsilon = 1e-12);
        assert_eq!(with.selected_output, "baab");

        let without = repair(&outs, &no_outliers()).unwrap();
        assert_abs_diff_eq!(without.group_mean, 0.35, epsilon = 1e-12);
        assert_eq!(without.selected_output, "abab");
    }

    #[test]
    fn degenerate_and_unavailable() {
        let outs = outputs(&["a", "b"]);
        let verdict = OutlierVerdict {
            flagged: vec![FlaggedOutput {
                scheme: SchemeId::Original,
                below_median_count: 1,
            }],
            ..no_outliers()
        };
        let r = repair(&outs, &verdict).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.selected_output, "b");

        let all = OutlierVerdict {
            flagged: outs
                .iter()
                .map(|(s, _)| FlaggedOutput {
                    scheme: *s,
                    below_median_count: 1,
                })
                .collect(),
            ..no_outliers()
        };
        assert_eq!(repair(&outs, &all), Err(RepairError::RepairUnavailable));
    }
}

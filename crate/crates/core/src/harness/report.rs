//! Report records, aggregates and their on-disk forms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::{CompletionStatus, NoResultReason};
use crate::metrics::improvement_ratio;
use crate::mutate::SchemeId;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SUMMARY_TEXT_FILE: &str = "summary.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    Completed,
    Timeout,
    Empty,
    HttpError,
    Malformed,
}

impl OutcomeStatus {
    pub fn of(status: &CompletionStatus) -> (Self, Option<u16>) {
        match status {
            CompletionStatus::Completed { .. } => (Self::Completed, None),
            CompletionStatus::NoResult { reason } => match reason {
                NoResultReason::Timeout => (Self::Timeout, None),
                NoResultReason::Empty => (Self::Empty, None),
                NoResultReason::HttpError { code } => (Self::HttpError, Some(*code)),
                NoResultReason::Malformed => (Self::Malformed, None),
            },
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::Timeout => "timeout",
            Self::Empty => "empty",
            Self::HttpError => "http_error",
            Self::Malformed => "malformed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub scheme: SchemeId,
    pub prompt_sha: String,
    pub status: OutcomeStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub http_code: Option<u16>,
    pub flagged: bool,
    /// Absent when the output took no part in the oracle.
    pub below_median_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairRecord {
    pub selected_scheme: SchemeId,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub bleu: f64,
    pub edit_sim: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub original: Option<Score>,
    /// Score of the repaired output, or of ORIGINAL's output when no repair
    /// could run.
    pub repaired: Option<Score>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedStatus {
    Tested,
    /// Fewer completed outputs than the oracle needs.
    Untestable,
    Unsplittable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectRecord {
    pub scheme: SchemeId,
    pub reason: String,
}

/// One line of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed_id: String,
    pub variants: Vec<VariantRecord>,
    pub median: Option<f64>,
    #[serde(rename = "T")]
    pub threshold: usize,
    pub repair: Option<RepairRecord>,
    pub metrics: SeedMetrics,
    pub status: SeedStatus,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub defects: Vec<DefectRecord>,
}

impl SeedRecord {
    pub fn completed(&self) -> usize {
        self.variants
            .iter()
            .filter(|v| v.status == OutcomeStatus::Completed)
            .count()
    }

    pub fn no_result(&self) -> usize {
        self.variants.len() - self.completed()
    }

    pub fn flagged(&self) -> usize {
        self.variants.iter().filter(|v| v.flagged).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierShare {
    pub variants: usize,
    pub flagged: usize,
    /// `flagged / variants`; `None` (N/A) for a scheme with no variants.
    pub rate: Option<f64>,
    /// `flagged / total outliers`; `None` when nothing was flagged.
    pub share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalShare {
    pub variants: usize,
    pub selected: usize,
    /// `selected / repaired seeds`; `None` (N/A) for a scheme with no
    /// variants or when nothing was repaired.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeAttribution {
    pub outliers: BTreeMap<SchemeId, OutlierShare>,
    pub optimal: BTreeMap<SchemeId, OptimalShare>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricImprovement {
    pub original_mean: Option<f64>,
    pub repaired_mean: Option<f64>,
    /// `(repaired - original) / original` over the means; `None` when the
    /// baseline is zero or no seed was scored.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub seeds_scored: usize,
    pub bleu: MetricImprovement,
    pub edit_sim: MetricImprovement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub seeds: usize,
    pub seeds_tested: usize,
    pub seeds_untestable: usize,
    pub seeds_unsplittable: usize,
    #[serde(rename = "T")]
    pub threshold: usize,
    pub dispatched: usize,
    pub completed: usize,
    pub no_result: usize,
    pub no_result_by_reason: BTreeMap<OutcomeStatus, usize>,
    pub mutation_defects: usize,
    pub outliers: usize,
    pub seeds_with_outliers: usize,
    pub repairs: usize,
    pub degenerate_repairs: usize,
    pub attribution: SchemeAttribution,
    pub improvement: Improvement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub records: Vec<SeedRecord>,
    pub summary: CampaignSummary,
}

impl CampaignReport {
    pub fn from_records(records: Vec<SeedRecord>, threshold: usize) -> Self {
        let summary = summarize(&records, threshold);
        Self { records, summary }
    }

    /// Records as JSON Lines, in seed order.
    pub fn records_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes") + "\n"
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(RECORDS_FILE), self.records_jsonl())?;
        fs::write(dir.join(SUMMARY_FILE), self.summary_json())?;
        fs::write(dir.join(SUMMARY_TEXT_FILE), render_summary(&self.summary))?;
        Ok(())
    }
}

pub fn read_records(path: &Path) -> io::Result<Vec<SeedRecord>> {
    let file = fs::File::open(path)?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{}:{}: {e}", path.display(), i + 1),
            )
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn attribute_schemes(records: &[SeedRecord]) -> SchemeAttribution {
    let mut variants: BTreeMap<SchemeId, usize> = BTreeMap::new();
    let mut flagged: BTreeMap<SchemeId, usize> = BTreeMap::new();
    let mut selected: BTreeMap<SchemeId, usize> = BTreeMap::new();
    for r in records {
        for v in &r.variants {
            *variants.entry(v.scheme).or_default() += 1;
            if v.flagged {
                *flagged.entry(v.scheme).or_default() += 1;
            }
        }
        if let Some(repair) = &r.repair {
            *selected.entry(repair.selected_scheme).or_default() += 1;
        }
    }
    let total_flagged: usize = flagged.values().sum();
    let repairs: usize = selected.values().sum();
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);

    let mut outliers = BTreeMap::new();
    let mut optimal = BTreeMap::new();
    for scheme in SchemeId::ALL {
        let n = variants.get(&scheme).copied().unwrap_or(0);
        let f = flagged.get(&scheme).copied().unwrap_or(0);
        let s = selected.get(&scheme).copied().unwrap_or(0);
        outliers.insert(
            scheme,
            OutlierShare {
                variants: n,
                flagged: f,
                rate: ratio(f, n),
                share: ratio(f, total_flagged),
            },
        );
        optimal.insert(
            scheme,
            OptimalShare {
                variants: n,
                selected: s,
                rate: if n == 0 { None } else { ratio(s, repairs) },
            },
        );
    }
    SchemeAttribution { outliers, optimal }
}

fn improvement(records: &[SeedRecord]) -> Improvement {
    let scored: Vec<(Score, Score)> = records
        .iter()
        .filter_map(|r| Some((r.metrics.original?, r.metrics.repaired?)))
        .collect();
    let n = scored.len();
    let mean = |f: &dyn Fn(&(Score, Score)) -> f64| {
        (n > 0).then(|| scored.iter().map(f).sum::<f64>() / n as f64)
    };
    let metric = |before: Option<f64>, after: Option<f64>| MetricImprovement {
        original_mean: before,
        repaired_mean: after,
        ratio: before
            .zip(after)
            .and_then(|(b, a)| improvement_ratio(b, a).ok()),
    };
    Improvement {
        seeds_scored: n,
        bleu: metric(mean(&|p| p.0.bleu), mean(&|p| p.1.bleu)),
        edit_sim: metric(mean(&|p| p.0.edit_sim), mean(&|p| p.1.edit_sim)),
    }
}

pub fn summarize(records: &[SeedRecord], threshold: usize) -> CampaignSummary {
    let count = |status| records.iter().filter(|r| r.status == status).count();
    let mut no_result_by_reason = BTreeMap::new();
    for v in records.iter().flat_map(|r| &r.variants) {
        if v.status != OutcomeStatus::Completed {
            *no_result_by_reason.entry(v.status).or_default() += 1;
        }
    }
    let repairs: Vec<&RepairRecord> = records.iter().filter_map(|r| r.repair.as_ref()).collect();
    CampaignSummary {
        seeds: records.len(),
        seeds_tested: count(SeedStatus::Tested),
        seeds_untestable: count(SeedStatus::Untestable),
        seeds_unsplittable: count(SeedStatus::Unsplittable),
        threshold,
        dispatched: records.iter().map(|r| r.variants.len()).sum(),
        completed: records.iter().map(SeedRecord::completed).sum(),
        no_result: records.iter().map(SeedRecord::no_result).sum(),
        no_result_by_reason,
        mutation_defects: records.iter().map(|r| r.defects.len()).sum(),
        outliers: records.iter().map(SeedRecord::flagged).sum(),
        seeds_with_outliers: records.iter().filter(|r| r.flagged() > 0).count(),
        repairs: repairs.len(),
        degenerate_repairs: repairs.iter().filter(|r| r.degenerate).count(),
        attribution: attribute_schemes(records),
        improvement: improvement(records),
    }
}

fn pct(x: Option<f64>) -> String {
    x.map_or("N/A".to_string(), |v| format!("{:.2}%", v * 100.0))
}

fn num(x: Option<f64>) -> String {
    x.map_or("N/A".to_string(), |v| format!("{v:.4}"))
}

/// Plain-text rendering for terminals and `summary.txt`.
pub fn render_summary(s: &CampaignSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seeds            {} (tested {}, untestable {}, unsplittable {})",
        s.seeds, s.seeds_tested, s.seeds_untestable, s.seeds_unsplittable);
    let _ = writeln!(out, "threshold T      {}", s.threshold);
    let _ = writeln!(out, "dispatched       {} (completed {}, no result {})", s.dispatched, s.completed, s.no_result);
    for (reason, n) in &s.no_result_by_reason {
        let _ = writeln!(out, "  {:<15}{n}", reason.as_str());
    }
    let _ = writeln!(out, "mutation defects {}", s.mutation_defects);
    let _ = writeln!(out, "outliers         {} in {} seed(s)", s.outliers, s.seeds_with_outliers);
    let _ = writeln!(out, "repairs          {} ({} degenerate)", s.repairs, s.degenerate_repairs);
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<10}{:>9}{:>9}{:>10}{:>10}{:>10}{:>10}", "scheme", "variants", "flagged", "rate", "share", "selected", "optimal");
    for scheme in SchemeId::ALL {
        let o = &s.attribution.outliers[&scheme];
        let p = &s.attribution.optimal[&scheme];
        let _ = writeln!(out, "{:<10}{:>9}{:>9}{:>10}{:>10}{:>10}{:>10}",
            scheme.as_str(), o.variants, o.flagged, pct(o.rate), pct(o.share), p.selected, pct(p.rate));
    }
    let _ = writeln!(out);
    let i = &s.improvement;
    let _ = writeln!(out, "improvement over {} seed(s)", i.seeds_scored);
    for (name, m) in [("bleu", &i.bleu), ("edit_sim", &i.edit_sim)] {
        let _ = writeln!(out, "  {name:<9} original {}  repaired {}  ratio {}",
            num(m.original_mean), num(m.repaired_mean), pct(m.ratio));
    }
    out
}

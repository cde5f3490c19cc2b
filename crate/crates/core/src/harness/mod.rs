//! Campaign orchestration: load, split, mutate, complete, judge, repair,
//! score and report.

mod config;
mod report;

use std::collections::BTreeMap;
use std::io;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::{
    dispatch, CachedBackend, CompletionBackend, CompletionOutcome, CompletionRequest, CaseRef,
    HttpBackend, StubBackend,
};
use crate::corpus::{load_corpus, split_prompt, CorpusError, PromptSplit, SeedProgram, SkipRecord};
use crate::metrics::{bleu, edit_similarity};
use crate::mutate::{generate_variants_with, MutationConfig, MutationDefect, PromptCase, SchemeId};
use crate::oracle::{below_median_counts, build_matrix, MIN_GROUP_SIZE};
use crate::repair::{repair, RepairResult};
use crate::oracle::{FlaggedOutput, OutlierVerdict};

pub use config::{
    check_threshold, BackendSpec, CampaignConfig, ConfigError, DEFAULT_CONCURRENCY,
    DEFAULT_MAX_NEW_TOKENS, DEFAULT_THRESHOLD, MAX_THRESHOLD,
};
pub use report::{
    attribute_schemes, read_records, render_summary, summarize, write_jsonl, CampaignReport,
    CampaignSummary, DefectRecord, Improvement, MetricImprovement, OptimalShare, OutcomeStatus,
    OutlierShare, RepairRecord, SchemeAttribution, Score, SeedMetrics, SeedRecord, SeedStatus,
    VariantRecord, RECORDS_FILE, SUMMARY_FILE, SUMMARY_TEXT_FILE,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("no usable seeds in {path} ({skipped} skipped)")]
    NoUsableSeeds { path: PathBuf, skipped: usize },
    #[error("cannot build backend: {0}")]
    Backend(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Variants of one seed, before completion.
#[derive(Debug, Clone)]
pub struct SeedVariants {
    pub seed_id: String,
    pub split: Result<PromptSplit, String>,
    pub cases: Vec<PromptCase>,
    pub defects: Vec<MutationDefect>,
}

/// Variants of one seed together with their completion outcomes.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub variants: SeedVariants,
    /// Parallel to `variants.cases`.
    pub outcomes: Vec<CompletionOutcome>,
}

impl SeedRun {
    /// Completed outputs in scheme order.
    pub fn completed_outputs(&self) -> Vec<(SchemeId, String)> {
        self.variants
            .cases
            .iter()
            .zip(&self.outcomes)
            .filter_map(|(c, o)| o.completed_text().map(|t| (c.scheme, t.to_string())))
            .collect()
    }
}

pub fn prompt_sha(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

pub fn mutation_config(config: &CampaignConfig) -> MutationConfig {
    MutationConfig {
        schemes: config.schemes.clone(),
        max_distance: config.max_distance,
    }
}

pub fn generate_all(seeds: &[SeedProgram], config: &MutationConfig) -> Vec<SeedVariants> {
    seeds
        .par_iter()
        .map(|seed| match split_prompt(seed) {
            Ok(split) => {
                let v = generate_variants_with(seed, &split, config);
                SeedVariants {
                    seed_id: seed.id.clone(),
                    split: Ok(split),
                    cases: v.cases,
                    defects: v.defects,
                }
            }
            Err(e) => SeedVariants {
                seed_id: seed.id.clone(),
                split: Err(e.to_string()),
                cases: vec![],
                defects: vec![],
            },
        })
        .collect()
}

/// Send every variant of every seed through `backend`.
pub fn complete_all<B: CompletionBackend + ?Sized>(
    variants: Vec<SeedVariants>,
    backend: &B,
    max_new_tokens: u32,
    concurrency: usize,
) -> Vec<SeedRun> {
    let requests: Vec<CompletionRequest> = variants
        .iter()
        .flat_map(|v| &v.cases)
        .map(|c| CompletionRequest {
            prompt: c.prompt.clone(),
            max_new_tokens,
            case_ref: CaseRef {
                seed_id: c.seed_id.clone(),
                scheme: c.scheme,
            },
        })
        .collect();
    let mut outcomes = dispatch(backend, &requests, concurrency).into_iter();
    variants
        .into_iter()
        .map(|v| {
            let outcomes: Vec<_> = outcomes.by_ref().take(v.cases.len()).collect();
            debug_assert!(v
                .cases
                .iter()
                .zip(&outcomes)
                .all(|(c, o)| o.case_ref.seed_id == c.seed_id && o.case_ref.scheme == c.scheme));
            SeedRun {
                variants: v,
                outcomes,
            }
        })
        .collect()
}

fn score(output: &str, ground_truth: &str) -> Score {
    Score {
        bleu: bleu(output, ground_truth),
        edit_sim: edit_similarity(output, ground_truth),
    }
}

/// Judge, repair and score one seed at threshold `t`.
pub fn evaluate_seed(run: &SeedRun, t: usize) -> SeedRecord {
    let v = &run.variants;
    let defects = v
        .defects
        .iter()
        .map(|d| DefectRecord {
            scheme: d.scheme,
            reason: d.reason.clone(),
        })
        .collect();
    let Ok(split) = &v.split else {
        return SeedRecord {
            seed_id: v.seed_id.clone(),
            variants: vec![],
            median: None,
            threshold: t,
            repair: None,
            metrics: SeedMetrics::default(),
            status: SeedStatus::Unsplittable,
            defects,
        };
    };

    let outputs = run.completed_outputs();
    let mut below: BTreeMap<SchemeId, usize> = BTreeMap::new();
    let mut median = None;
    let mut repaired: Option<RepairResult> = None;
    let mut flagged = Vec::new();
    if let Ok(matrix) = build_matrix(&outputs.iter().map(|(_, o)| o.as_str()).collect::<Vec<_>>()) {
        let counts = below_median_counts(&matrix);
        for ((scheme, _), &n) in outputs.iter().zip(&counts) {
            below.insert(*scheme, n);
            if n >= t {
                flagged.push(FlaggedOutput {
                    scheme: *scheme,
                    below_median_count: n,
                });
            }
        }
        let verdict = OutlierVerdict {
            seed_id: v.seed_id.clone(),
            flagged,
            median: matrix.median(),
            threshold: t,
        };
        median = Some(verdict.median);
        repaired = repair(&outputs, &verdict).ok();
        flagged = verdict.flagged;
    }

    let variants = v
        .cases
        .iter()
        .zip(&run.outcomes)
        .map(|(c, o)| {
            let (status, http_code) = OutcomeStatus::of(&o.status);
            VariantRecord {
                scheme: c.scheme,
                prompt_sha: prompt_sha(&c.prompt),
                status,
                http_code,
                flagged: flagged.iter().any(|f| f.scheme == c.scheme),
                below_median_count: below.get(&c.scheme).copied(),
            }
        })
        .collect();

    let original = outputs
        .iter()
        .find(|(s, _)| *s == SchemeId::Original)
        .map(|(_, o)| o.as_str());
    let repaired_text = repaired
        .as_ref()
        .map(|r| r.selected_output.as_str())
        .or(original);
    SeedRecord {
        seed_id: v.seed_id.clone(),
        variants,
        median,
        threshold: t,
        repair: repaired.as_ref().map(|r| RepairRecord {
            selected_scheme: r.selected_scheme,
            degenerate: r.degenerate,
        }),
        metrics: SeedMetrics {
            original: original.map(|o| score(o, &split.ground_truth)),
            repaired: repaired_text.map(|o| score(o, &split.ground_truth)),
        },
        status: if outputs.len() >= MIN_GROUP_SIZE {
            SeedStatus::Tested
        } else {
            SeedStatus::Untestable
        },
        defects,
    }
}

pub fn evaluate(runs: &[SeedRun], t: usize) -> CampaignReport {
    let records = runs.par_iter().map(|r| evaluate_seed(r, t)).collect();
    CampaignReport::from_records(records, t)
}

/// Full pipeline over already-loaded seeds.
pub fn run_campaign_on<B: CompletionBackend + ?Sized>(
    seeds: &[SeedProgram],
    backend: &B,
    config: &CampaignConfig,
) -> Result<CampaignReport, ConfigError> {
    config.validate()?;
    let runs = collect_runs(seeds, backend, config);
    Ok(evaluate(&runs, config.threshold))
}

pub fn collect_runs<B: CompletionBackend + ?Sized>(
    seeds: &[SeedProgram],
    backend: &B,
    config: &CampaignConfig,
) -> Vec<SeedRun> {
    let variants = generate_all(seeds, &mutation_config(config));
    complete_all(variants, backend, config.max_new_tokens, config.concurrency)
}

/// Outlier counts per threshold over fixed outcomes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ThresholdSweep {
    /// Ascending, deduplicated thresholds with their total outlier counts.
    pub rows: Vec<(usize, usize)>,
}

impl ThresholdSweep {
    pub fn count(&self, t: usize) -> Option<usize> {
        self.rows.iter().find(|(x, _)| *x == t).map(|(_, n)| *n)
    }

    pub fn render(&self) -> String {
        let mut out = String::from("T\toutliers\n");
        for (t, n) in &self.rows {
            out.push_str(&format!("{t}\t{n}\n"));
        }
        out
    }
}

/// One oracle pass per threshold over the same similarity matrices.
pub fn sweep_thresholds(runs: &[SeedRun], thresholds: &[usize]) -> Result<ThresholdSweep, ConfigError> {
    let mut ts = thresholds.to_vec();
    ts.sort_unstable();
    ts.dedup();
    for &t in &ts {
        check_threshold(t)?;
    }
    let counts: Vec<Vec<usize>> = runs
        .par_iter()
        .filter_map(|run| {
            let outputs = run.completed_outputs();
            let texts: Vec<&str> = outputs.iter().map(|(_, o)| o.as_str()).collect();
            build_matrix(&texts).ok().map(|m| below_median_counts(&m))
        })
        .collect();
    let rows = ts
        .into_iter()
        .map(|t| {
            let n = counts.iter().flatten().filter(|&&c| c >= t).count();
            (t, n)
        })
        .collect();
    Ok(ThresholdSweep { rows })
}

/// Backend described by `spec`, behind the on-disk cache when `cache_dir`
/// is set.
pub fn build_backend(
    spec: &BackendSpec,
    cache_dir: Option<&std::path::Path>,
) -> Result<Box<dyn CompletionBackend>, HarnessError> {
    let inner: Box<dyn CompletionBackend> = match spec {
        BackendSpec::Stub(config) => Box::new(StubBackend::new(config.clone())),
        BackendSpec::Http(config) => Box::new(
            HttpBackend::new(config.clone()).map_err(|e| HarnessError::Backend(e.to_string()))?,
        ),
    };
    Ok(match cache_dir {
        Some(dir) => Box::new(CachedBackend::new(inner, dir)?),
        None => inner,
    })
}

/// Seeds named by the configuration, after `seed_limit`.
pub fn load_seeds(config: &CampaignConfig) -> Result<(Vec<SeedProgram>, Vec<SkipRecord>), HarnessError> {
    let corpus = load_corpus(&config.seeds)?;
    let mut seeds = corpus.seeds;
    if let Some(limit) = config.seed_limit {
        seeds.truncate(limit);
    }
    if seeds.is_empty() {
        return Err(HarnessError::NoUsableSeeds {
            path: config.seeds.clone(),
            skipped: corpus.skipped.len(),
        });
    }
    Ok((seeds, corpus.skipped))
}

/// Load, run and, when `out_dir` is set, write the report.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport, HarnessError> {
    config.validate()?;
    let (seeds, skipped) = load_seeds(config)?;
    let backend = build_backend(&config.backend, config.cache_dir.as_deref())?;
    let report = run_campaign_on(&seeds, backend.as_ref(), config)?;
    if let Some(dir) = &config.out_dir {
        report.write(dir)?;
        write_jsonl(&dir.join("skipped.jsonl"), &skipped)?;
    }
    Ok(report)
}

/// Threshold sweep over a freshly collected (or cached) campaign.
pub fn sweep_campaign(
    config: &CampaignConfig,
    thresholds: &[usize],
) -> Result<ThresholdSweep, HarnessError> {
    config.validate()?;
    let (seeds, _) = load_seeds(config)?;
    let backend = build_backend(&config.backend, config.cache_dir.as_deref())?;
    let runs = collect_runs(&seeds, backend.as_ref(), config);
    Ok(sweep_thresholds(&runs, thresholds)?)
}

/// Answers that make the stub return each seed's ground truth for every
/// structure-consistent variant of its prompt.
pub fn ground_truth_answers(seeds: &[SeedProgram]) -> BTreeMap<String, String> {
    seeds
        .iter()
        .filter_map(|seed| {
            let split = split_prompt(seed).ok()?;
            Some((StubBackend::prompt_key(&split.prompt), split.ground_truth))
        })
        .collect()
}

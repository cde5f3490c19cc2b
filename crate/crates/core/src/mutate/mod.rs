//! Structure-consistent prompt mutation.
//!
//! Each scheme produces at most one variant per seed. Where a scheme has a
//! choice to make (which parameter, which local, which `if`), it takes the
//! first candidate in document order, so campaigns replay exactly.

mod scheme;
mod transform;

use std::collections::BTreeSet;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use scheme::{SchemeId, UnknownScheme};

use crate::corpus::{PromptSplit, SeedProgram};
use crate::syntax::{self, parse, structural_distance, AnalysisError, ParseError};
use transform::{rewrite, Analysis};

/// Default upper bound on the structural distance of any emitted variant.
pub const DEFAULT_MAX_DISTANCE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptCase {
    pub seed_id: String,
    pub scheme: SchemeId,
    pub prompt: String,
    pub ground_truth: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MutateError {
    #[error("scheme {0} is not applicable to this function")]
    SchemeNotApplicable(SchemeId),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("mutant does not parse: {0}")]
    InvalidMutant(ParseError),
    #[error("structural distance {distance:.4} exceeds bound {bound}")]
    TooDistant { distance: f64, bound: f64 },
}

/// A variant dropped by validation. This points at the mutation engine,
/// not at the completion system under test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutationDefect {
    pub seed_id: String,
    pub scheme: SchemeId,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct MutationConfig {
    pub schemes: BTreeSet<SchemeId>,
    pub max_distance: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self {
            schemes: SchemeId::ALL.into_iter().collect(),
            max_distance: DEFAULT_MAX_DISTANCE,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Variants {
    /// `ORIGINAL` first, then canonical scheme order.
    pub cases: Vec<PromptCase>,
    pub defects: Vec<MutationDefect>,
}

/// Schemes applicable to a seed's whole function.
pub fn applicable_schemes(seed: &SeedProgram) -> BTreeSet<SchemeId> {
    applicable_to(&seed.source).unwrap_or_else(|_| [SchemeId::Original].into_iter().collect())
}

/// Schemes applicable to the single function in `source`.
pub fn applicable_to(source: &str) -> Result<BTreeSet<SchemeId>, MutateError> {
    let tree = parse(source)?;
    Ok(Analysis::new(&tree)?.applicable())
}

/// Apply `scheme` to a whole function. Fresh names avoid every identifier in
/// `source` and in `reserved`.
pub fn mutate_source(
    source: &str,
    scheme: SchemeId,
    reserved: &BTreeSet<String>,
) -> Result<String, MutateError> {
    let tree = parse(source)?;
    let analysis = Analysis::new(&tree)?;
    if !analysis.applicable().contains(&scheme) {
        return Err(MutateError::SchemeNotApplicable(scheme));
    }
    let mut taken = analysis.scope.all_names.clone();
    taken.extend(reserved.iter().cloned());
    rewrite(&analysis, scheme, &taken)
}

/// Mutate the prompt half of `split`; the ground truth is carried over
/// untouched.
pub fn apply_scheme(
    seed: &SeedProgram,
    split: &PromptSplit,
    scheme: SchemeId,
) -> Result<PromptCase, MutateError> {
    let reserved = seed_names(seed);
    let prompt = mutate_source(&split.prompt, scheme, &reserved)?;
    Ok(PromptCase {
        seed_id: seed.id.clone(),
        scheme,
        prompt,
        ground_truth: split.ground_truth.clone(),
    })
}

fn seed_names(seed: &SeedProgram) -> BTreeSet<String> {
    parse(&seed.source)
        .ok()
        .map(|tree| {
            tree.preorder()
                .filter(|&id| tree.kind(id) == "identifier")
                .map(|id| tree.text(id).to_string())
                .collect()
        })
        .unwrap_or_default()
}

/// All variants with the default configuration.
pub fn generate_variants(seed: &SeedProgram, split: &PromptSplit) -> Variants {
    generate_variants_with(seed, split, &MutationConfig::default())
}

/// One validated variant per enabled, applicable scheme.
pub fn generate_variants_with(
    seed: &SeedProgram,
    split: &PromptSplit,
    config: &MutationConfig,
) -> Variants {
    let mut out = Variants::default();
    let defect = |scheme, reason: String| MutationDefect {
        seed_id: seed.id.clone(),
        scheme,
        reason,
    };

    let seed_tree = match parse(&split.prompt) {
        Ok(t) => t,
        Err(e) => {
            out.defects
                .push(defect(SchemeId::Original, format!("prompt does not parse: {e}")));
            return out;
        }
    };
    let analysis = match Analysis::new(&seed_tree) {
        Ok(a) => a,
        Err(e) => {
            out.defects.push(defect(SchemeId::Original, e.to_string()));
            return out;
        }
    };
    let applicable = analysis.applicable();
    let mut taken = analysis.scope.all_names.clone();
    taken.extend(seed_names(seed));

    for scheme in SchemeId::ALL {
        if !config.schemes.contains(&scheme) || !applicable.contains(&scheme) {
            continue;
        }
        let result = rewrite(&analysis, scheme, &taken)
            .and_then(|prompt| validate_variant(&seed_tree, prompt, scheme, config.max_distance));
        match result {
            Ok(prompt) => out.cases.push(PromptCase {
                seed_id: seed.id.clone(),
                scheme,
                prompt,
                ground_truth: split.ground_truth.clone(),
            }),
            Err(e) => {
                warn!("dropping {scheme} variant of {}: {e}", seed.id);
                out.defects.push(defect(scheme, e.to_string()));
            }
        }
    }
    out
}

fn validate_variant(
    seed_tree: &syntax::SyntaxTree,
    prompt: String,
    scheme: SchemeId,
    bound: f64,
) -> Result<String, MutateError> {
    let tree = parse(&prompt).map_err(MutateError::InvalidMutant)?;
    let distance = structural_distance(seed_tree, &tree);
    let limit = if scheme.is_identifier_level() { 0.0 } else { bound };
    if distance > limit {
        return Err(MutateError::TooDistant {
            distance,
            bound: limit,
        });
    }
    Ok(prompt)
}

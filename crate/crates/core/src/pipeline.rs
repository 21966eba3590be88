//! End-to-end augmentation: sample, delexicalize, compose, realize.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bank::{build_bank, BankError, LinkSemantics, TemplateBank};
use crate::composer::{extract_dialogue_templates, grow_tree, ComposeError, DialogueTemplate, GrowthLimits, TemplateTree};
use crate::corpus::{sample_shots, Corpus, CorpusError, Eligibility};
use crate::delex::{classify_slots, harvest_values, CategoricalPolicy, ClassifyConfig, SlotValueDict};
use crate::realizer::{generate, Generation, RealizationBudget, RealizeError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub domain: String,
    pub shots: usize,
    pub eligibility: Eligibility,
    pub link_semantics: LinkSemantics,
    pub limits: GrowthLimits,
    pub classify: ClassifyConfig,
    pub budget: RealizationBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Sample,
    Bank,
    Compose,
    Realize,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Sample => "sample",
            Stage::Bank => "bank",
            Stage::Compose => "compose",
            Stage::Realize => "realize",
        })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[sample] {0}")]
    Sample(#[from] CorpusError),
    #[error("[bank] {0}")]
    Bank(#[from] BankError),
    #[error("[compose] {0}")]
    Compose(#[from] ComposeError),
    #[error("[realize] {0}")]
    Realize(#[from] RealizeError),
}

impl PipelineError {
    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::Sample(_) => Stage::Sample,
            PipelineError::Bank(_) => Stage::Bank,
            PipelineError::Compose(_) => Stage::Compose,
            PipelineError::Realize(_) => Stage::Realize,
        }
    }
}

/// Counts reported after each stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageSummary {
    pub seed_dialogues: usize,
    pub seed_pairs: usize,
    pub categorical_labels: usize,
    pub dictionary_labels: usize,
    pub templates_built: usize,
    pub templates_rejected: usize,
    pub tree_nodes: usize,
    pub tree_truncated: bool,
    pub dialogue_templates: usize,
    pub requested: usize,
    pub emitted: usize,
    pub space_exhausted: bool,
}

#[derive(Debug, Clone)]
pub struct Augmentation {
    pub seed: Corpus,
    pub policy: CategoricalPolicy,
    pub dict: SlotValueDict,
    pub bank: TemplateBank,
    pub tree: TemplateTree,
    pub dialogue_templates: Vec<DialogueTemplate>,
    pub generation: Generation,
}

impl Augmentation {
    pub fn summary(&self) -> StageSummary {
        StageSummary {
            seed_dialogues: self.seed.len(),
            seed_pairs: self.seed.pair_count(),
            categorical_labels: self.policy.labels.len(),
            dictionary_labels: self.dict.len(),
            templates_built: self.bank.len(),
            templates_rejected: self.bank.rejected.len(),
            tree_nodes: self.tree.len(),
            tree_truncated: self.tree.truncated.is_some(),
            dialogue_templates: self.dialogue_templates.len(),
            requested: self.generation.requested,
            emitted: self.generation.dialogues.len(),
            space_exhausted: self.generation.exhausted,
        }
    }
}

/// Runs every stage on the seed sample drawn from `corpus`.
pub fn augment(corpus: &Corpus, config: &AugmentConfig) -> Result<Augmentation, PipelineError> {
    let seed = sample_shots(
        corpus,
        config.shots,
        &config.domain,
        config.budget.seed,
        config.eligibility,
    )?;
    augment_seed(seed, config)
}

/// Runs the stages after sampling on an already chosen seed set.
pub fn augment_seed(seed: Corpus, config: &AugmentConfig) -> Result<Augmentation, PipelineError> {
    config.budget.check()?;
    config.limits.check()?;
    let policy = classify_slots(&seed, &config.classify);
    let dict = harvest_values(&seed, &policy);
    let bank = build_bank(&seed, &policy)?;
    let tree = grow_tree(&bank, &config.limits, config.link_semantics)?;
    let dialogue_templates = extract_dialogue_templates(&tree, &bank)?;
    let generation = generate(&seed, &bank, &dialogue_templates, &dict, &config.budget, &policy)?;
    Ok(Augmentation {
        seed,
        policy,
        dict,
        bank,
        tree,
        dialogue_templates,
        generation,
    })
}

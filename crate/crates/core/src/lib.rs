//! Few-shot augmentation of task-oriented dialogue corpora.
//!
//! Seed dialogues are cut into delexicalized turn-pair templates, each tagged
//! with the slot-label sets of its previous, current and next pair. Templates
//! whose functions line up are chained breadth first into dialogue templates,
//! which are then filled with slot values harvested from the seeds.
//!
//! ```text
//! corpus -> sample_shots -> classify_slots / harvest_values -> build_bank
//!        -> grow_tree -> extract_dialogue_templates -> generate
//! ```

pub mod bank;
pub mod composer;
pub mod corpus;
pub mod delex;
pub mod multiwoz;
pub mod pipeline;
pub mod realizer;
pub mod stats;
pub mod text;

pub use bank::{build_bank, check_link, make_templates, FunctionKey, LinkSemantics, TemplateBank, TemplateId, TurnPairTemplate};
pub use composer::{extract_dialogue_templates, grow_tree, DialogueTemplate, GrowthLimits, TemplateTree, Truncation};
pub use corpus::{
    load_corpus, pair_turns, sample_shots, validate_dialogue, BeliefState, Corpus, CorpusError, Dialogue, Eligibility,
    InputSchema, SlotLabel, SlotValue, TurnPair, ValidationReport,
};
pub use delex::{
    classify_slots, delexicalize_pair, detect_collision, harvest_values, CategoricalPolicy, ClassifyConfig, Rejection,
    SlotValueDict, Substitution,
};
pub use pipeline::{augment, augment_seed, AugmentConfig, Augmentation, PipelineError, StageSummary};
pub use realizer::{
    enumerate_assignments, generate, realize, Assignment, Generation, RealizationBudget, RealizationMode, SyntheticDialogue,
};

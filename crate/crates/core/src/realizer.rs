//! Surface realization: filling dialogue templates with harvested slot values.
//!
//! Every label that a dialogue template delexicalizes gets one value for the
//! whole dialogue. Categorical labels, and labels whose values along the path
//! are all reserved, keep the values of their source templates; the earliest
//! template wins when sources disagree. Belief states are rebuilt
//! cumulatively, so a label stays in the state once mentioned.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bank::{TemplateBank, TemplateId};
use crate::composer::DialogueTemplate;
use crate::corpus::{BeliefState, Corpus, Dialogue, SlotLabel, SlotValue, TurnPair};
use crate::delex::{CategoricalPolicy, SlotValueDict};
use crate::text;

/// One value per assignable label of a dialogue template.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub BTreeMap<SlotLabel, SlotValue>);

impl Assignment {
    pub fn get(&self, label: &SlotLabel) -> Option<&SlotValue> {
        self.0.get(label)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Two distinct labels share a value text.
    pub fn has_collision(&self) -> bool {
        let mut seen = HashSet::new();
        self.0.values().any(|v| !seen.insert(v.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizationMode {
    #[default]
    Exhaustive,
    Sampled,
}

impl std::str::FromStr for RealizationMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(RealizationMode::Exhaustive),
            "sampled" => Ok(RealizationMode::Sampled),
            other => Err(format!("unknown realization mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizationBudget {
    pub mode: RealizationMode,
    /// Assignments per dialogue template in sampled mode.
    pub cap: usize,
    /// Synthetic dialogues per seed dialogue.
    pub ratio: f64,
    pub seed: u64,
}

impl Default for RealizationBudget {
    fn default() -> Self {
        RealizationBudget {
            mode: RealizationMode::Exhaustive,
            cap: 100,
            ratio: 10.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("no dictionary values for slot {0}")]
    UncoverableLabel(SlotLabel),
    #[error("template {template} keeps placeholder [{label}] that the assignment does not cover")]
    ResidualPlaceholder { template: TemplateId, label: SlotLabel },
    #[error("invalid realization budget: {0}")]
    BadBudget(&'static str),
}

impl RealizationBudget {
    pub fn check(&self) -> Result<(), RealizeError> {
        if self.cap == 0 {
            return Err(RealizeError::BadBudget("cap must be at least 1"));
        }
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return Err(RealizeError::BadBudget("ratio must be a positive number"));
        }
        Ok(())
    }

    /// round(ratio × seed count)
    pub fn target(&self, seed_count: usize) -> usize {
        (self.ratio * seed_count as f64).round() as usize
    }
}

/// Labels of `dt` that receive a value from the dictionary: non-categorical
/// labels taking at least one non-reserved value somewhere on the path.
pub fn assignable_labels(dt: &DialogueTemplate, bank: &TemplateBank, policy: &CategoricalPolicy) -> BTreeSet<SlotLabel> {
    dt.templates
        .iter()
        .flat_map(|&id| bank.get(id).cur_belief.iter())
        .filter(|(l, v)| policy.is_delexicalized(l, v))
        .map(|(l, _)| l.clone())
        .collect()
}

/// Cartesian product of dictionary values over a template's assignable labels,
/// addressed by index. The last label varies fastest.
#[derive(Debug, Clone)]
pub struct AssignmentSpace {
    labels: Vec<SlotLabel>,
    values: Vec<Vec<SlotValue>>,
    size: u128,
}

impl AssignmentSpace {
    pub fn new(
        dt: &DialogueTemplate,
        bank: &TemplateBank,
        dict: &SlotValueDict,
        policy: &CategoricalPolicy,
    ) -> Result<Self, RealizeError> {
        let labels: Vec<SlotLabel> = assignable_labels(dt, bank, policy).into_iter().collect();
        let mut values = Vec::with_capacity(labels.len());
        let mut size: u128 = 1;
        for label in &labels {
            let vs = dict.get(label);
            if vs.is_empty() {
                return Err(RealizeError::UncoverableLabel(label.clone()));
            }
            size = size.saturating_mul(vs.len() as u128);
            values.push(vs.to_vec());
        }
        Ok(AssignmentSpace { labels, values, size })
    }

    pub fn labels(&self) -> &[SlotLabel] {
        &self.labels
    }

    /// Number of assignments, collisions included.
    pub fn size(&self) -> u128 {
        self.size
    }

    fn digits(&self, mut index: u128) -> Vec<usize> {
        let mut digits = vec![0; self.values.len()];
        for (slot, vs) in self.values.iter().enumerate().rev() {
            let radix = vs.len() as u128;
            digits[slot] = (index % radix) as usize;
            index /= radix;
        }
        digits
    }

    pub fn unrank(&self, index: u128) -> Assignment {
        let digits = self.digits(index);
        Assignment(
            self.labels
                .iter()
                .zip(&self.values)
                .zip(digits)
                .map(|((l, vs), d)| (l.clone(), vs[d].clone()))
                .collect(),
        )
    }

    pub fn collides(&self, index: u128) -> bool {
        let digits = self.digits(index);
        let mut seen = HashSet::new();
        self.values
            .iter()
            .zip(digits)
            .any(|(vs, d)| !seen.insert(vs[d].as_str()))
    }
}

/// Spaces up to this size are shuffled in full when sampling.
const DENSE_SAMPLING_LIMIT: u128 = 1 << 16;

fn sample_indices(space: &AssignmentSpace, cap: usize, rng: &mut ChaCha8Rng) -> Vec<u128> {
    if space.size <= DENSE_SAMPLING_LIMIT || space.size <= 4 * cap as u128 {
        let mut valid: Vec<u128> = (0..space.size).filter(|&i| !space.collides(i)).collect();
        let take = cap.min(valid.len());
        let (picked, _) = valid.partial_shuffle(rng, take);
        return picked.to_vec();
    }
    let mut seen = HashSet::new();
    let mut picked = Vec::with_capacity(cap);
    let mut attempts = 0usize;
    let max_attempts = cap.saturating_mul(64);
    while picked.len() < cap && attempts < max_attempts {
        attempts += 1;
        let i = rng.gen_range(0..space.size);
        if seen.insert(i) && !space.collides(i) {
            picked.push(i);
        }
    }
    picked
}

fn template_rng(seed: u64, dt: &DialogueTemplate) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for id in &dt.templates {
        hasher.update((id.0 as u64).to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Lazily yields the assignments of one dialogue template.
pub struct AssignmentStream {
    space: AssignmentSpace,
    order: StreamOrder,
}

enum StreamOrder {
    Ranked { next: u128 },
    Sampled { indices: Vec<u128>, pos: usize },
}

impl AssignmentStream {
    pub fn new(space: AssignmentSpace, dt: &DialogueTemplate, budget: &RealizationBudget) -> Self {
        let order = match budget.mode {
            RealizationMode::Exhaustive => StreamOrder::Ranked { next: 0 },
            RealizationMode::Sampled => {
                let mut rng = template_rng(budget.seed, dt);
                StreamOrder::Sampled {
                    indices: sample_indices(&space, budget.cap, &mut rng),
                    pos: 0,
                }
            }
        };
        AssignmentStream { space, order }
    }
}

impl Iterator for AssignmentStream {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        match &mut self.order {
            StreamOrder::Ranked { next } => {
                while *next < self.space.size {
                    let i = *next;
                    *next += 1;
                    if !self.space.collides(i) {
                        return Some(self.space.unrank(i));
                    }
                }
                None
            }
            StreamOrder::Sampled { indices, pos } => {
                let i = *indices.get(*pos)?;
                *pos += 1;
                Some(self.space.unrank(i))
            }
        }
    }
}

/// Assignments for one dialogue template with colliding ones removed.
///
/// Exhaustive mode lists the whole product in index order; sampled mode draws
/// up to `cap` distinct assignments with a seeded generator.
pub fn enumerate_assignments(
    dt: &DialogueTemplate,
    bank: &TemplateBank,
    dict: &SlotValueDict,
    budget: &RealizationBudget,
    policy: &CategoricalPolicy,
) -> Result<Vec<Assignment>, RealizeError> {
    budget.check()?;
    let space = AssignmentSpace::new(dt, bank, dict, policy)?;
    Ok(AssignmentStream::new(space, dt, budget).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub template_path: Vec<TemplateId>,
    pub source_dialogue_ids: BTreeSet<String>,
    pub assignment: Assignment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticDialogue {
    pub dialogue: Dialogue,
    pub provenance: Provenance,
}

fn synthetic_id(path: &[TemplateId], assignment: &Assignment) -> String {
    let mut hasher = Sha256::new();
    for id in path {
        hasher.update((id.0 as u64).to_le_bytes());
    }
    for (label, value) in &assignment.0 {
        hasher.update(label.as_str().as_bytes());
        hasher.update([0]);
        hasher.update(value.as_str().as_bytes());
        hasher.update([0]);
    }
    let digest = hasher.finalize();
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    format!("syn-{hex}")
}

/// Fills every template of `dt` with `assignment` and rebuilds belief states.
pub fn realize(
    dt: &DialogueTemplate,
    assignment: &Assignment,
    bank: &TemplateBank,
) -> Result<SyntheticDialogue, RealizeError> {
    let mut state = BeliefState::new();
    let mut pairs = Vec::with_capacity(dt.templates.len());
    for (index, &id) in dt.templates.iter().enumerate() {
        let t = bank.get(id);
        let fill = |s: &str| {
            text::fill_placeholders(s, |l| assignment.get(l).map(SlotValue::as_str))
                .map_err(|label| RealizeError::ResidualPlaceholder { template: id, label })
        };
        let system_utterance = fill(&t.delex_system)?;
        let user_utterance = fill(&t.delex_user)?;
        for (label, original) in t.cur_belief.iter() {
            match assignment.get(label) {
                Some(v) => {
                    state.insert(label.clone(), v.clone());
                }
                None => {
                    state.0.entry(label.clone()).or_insert_with(|| original.clone());
                }
            }
        }
        pairs.push(TurnPair {
            index,
            system_utterance,
            user_utterance,
            belief: state.clone(),
        });
    }
    let domains = state.0.keys().map(|l| l.domain().to_string()).collect();
    Ok(SyntheticDialogue {
        dialogue: Dialogue {
            id: synthetic_id(&dt.templates, assignment),
            domains,
            pairs,
        },
        provenance: Provenance {
            template_path: dt.templates.clone(),
            source_dialogue_ids: dt.provenance.clone(),
            assignment: assignment.clone(),
        },
    })
}

/// Text and annotations of a dialogue, ignoring its id and domain list.
pub fn content_key(d: &Dialogue) -> String {
    serde_json::to_string(&d.pairs).expect("pairs serialize")
}

#[derive(Debug, Clone)]
pub struct Generation {
    pub dialogues: Vec<SyntheticDialogue>,
    pub requested: usize,
    /// Fewer distinct dialogues exist than requested.
    pub exhausted: bool,
}

/// Produces round(ratio × |seed|) distinct synthetic dialogues.
///
/// Dialogue templates are visited round-robin in a seeded order, one
/// assignment per template per round. Dialogues identical to a seed dialogue
/// or to an earlier output are skipped and do not count.
pub fn generate(
    seed_corpus: &Corpus,
    bank: &TemplateBank,
    dts: &[DialogueTemplate],
    dict: &SlotValueDict,
    budget: &RealizationBudget,
    policy: &CategoricalPolicy,
) -> Result<Generation, RealizeError> {
    budget.check()?;
    let requested = budget.target(seed_corpus.len());
    let mut seen: HashSet<String> = seed_corpus.dialogues.iter().map(content_key).collect();
    let mut order: Vec<usize> = (0..dts.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(budget.seed));
    let mut streams: Vec<(usize, AssignmentStream)> = order
        .into_iter()
        .map(|i| {
            let space = AssignmentSpace::new(&dts[i], bank, dict, policy)?;
            Ok((i, AssignmentStream::new(space, &dts[i], budget)))
        })
        .collect::<Result<_, RealizeError>>()?;

    let mut dialogues = Vec::with_capacity(requested);
    while dialogues.len() < requested && !streams.is_empty() {
        let mut round: Vec<(usize, Assignment)> = Vec::with_capacity(streams.len());
        streams.retain_mut(|(i, stream)| match stream.next() {
            Some(a) => {
                round.push((*i, a));
                true
            }
            None => false,
        });
        let realized: Vec<Result<SyntheticDialogue, RealizeError>> = round
            .par_iter()
            .map(|(i, a)| realize(&dts[*i], a, bank))
            .collect();
        for r in realized {
            let synthetic = r?;
            if seen.insert(content_key(&synthetic.dialogue)) {
                dialogues.push(synthetic);
                if dialogues.len() == requested {
                    break;
                }
            }
        }
    }
    let exhausted = dialogues.len() < requested;
    Ok(Generation {
        dialogues,
        requested,
        exhausted,
    })
}

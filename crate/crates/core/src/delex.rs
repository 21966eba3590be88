//! Delexicalization of turn pairs and slot-value harvesting.
//!
//! For every non-categorical slot of a pair's belief state, occurrences of its
//! value in the system or user utterance are replaced by a `[domain-name]`
//! placeholder. Values only match between non-alphanumeric boundaries and the
//! longest value claims a span first. Pairs where two labels share a value, or
//! where values of two labels cross each other in the text, are rejected.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{BeliefState, Corpus, SlotLabel, SlotValue, TurnPair, RESERVED_VALUES};
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Substitution {
    pub label: SlotLabel,
    pub value: SlotValue,
    /// Replacements made across both utterances. Zero for categorical and
    /// reserved values and for labels carried over without a re-mention.
    pub occurrences: usize,
}

/// Slots whose values stay lexicalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalPolicy {
    pub labels: BTreeSet<SlotLabel>,
    pub reserved_values: BTreeSet<String>,
}

impl Default for CategoricalPolicy {
    fn default() -> Self {
        CategoricalPolicy {
            labels: BTreeSet::new(),
            reserved_values: RESERVED_VALUES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl CategoricalPolicy {
    pub fn with_labels(labels: impl IntoIterator<Item = SlotLabel>) -> Self {
        CategoricalPolicy {
            labels: labels.into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn is_categorical(&self, label: &SlotLabel) -> bool {
        self.labels.contains(label)
    }

    pub fn is_reserved(&self, value: &SlotValue) -> bool {
        value.is_special() || self.reserved_values.contains(&value.as_str().to_lowercase())
    }

    /// True when `value` of `label` gets replaced by a placeholder in text.
    pub fn is_delexicalized(&self, label: &SlotLabel, value: &SlotValue) -> bool {
        !self.is_categorical(label) && !self.is_reserved(value)
    }
}

/// Labels grouped by the value text they share.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollisionReport {
    pub groups: Vec<BTreeSet<SlotLabel>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    #[error("labels share a value: {}", fmt_groups(.groups))]
    ValueCollision { groups: Vec<BTreeSet<SlotLabel>> },
    #[error("values of {first} and {second} overlap in the text")]
    OverlapAmbiguity { first: SlotLabel, second: SlotLabel },
}

fn fmt_groups(groups: &[BTreeSet<SlotLabel>]) -> String {
    groups
        .iter()
        .map(|g| {
            g.iter()
                .map(SlotLabel::as_str)
                .collect::<Vec<_>>()
                .join("=")
        })
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelexicalizedPair {
    pub system: String,
    pub user: String,
    /// One entry per belief label, in label order.
    pub subs: Vec<Substitution>,
}

pub fn detect_collision(belief: &BeliefState, policy: &CategoricalPolicy) -> Option<CollisionReport> {
    let mut by_value: BTreeMap<String, BTreeSet<SlotLabel>> = BTreeMap::new();
    for (label, value) in belief.iter() {
        if policy.is_delexicalized(label, value) {
            by_value
                .entry(text::normalize(value.as_str()))
                .or_default()
                .insert(label.clone());
        }
    }
    let groups: Vec<_> = by_value.into_values().filter(|g| g.len() > 1).collect();
    (!groups.is_empty()).then_some(CollisionReport { groups })
}

struct Span {
    start: usize,
    end: usize,
    candidate: usize,
}

fn crossing(a: &Span, b: &Span) -> bool {
    (a.start < b.start && b.start < a.end && a.end < b.end)
        || (b.start < a.start && a.start < b.end && b.end < a.end)
}

/// Replaces candidate values in `utterance`, counting accepted spans per
/// candidate. `candidates` must already be in priority order.
fn replace_values(
    utterance: &str,
    candidates: &[(&SlotLabel, &SlotValue)],
    counts: &mut [usize],
) -> Result<String, Rejection> {
    let mut spans = Vec::new();
    for (i, (_, value)) in candidates.iter().enumerate() {
        for (start, end) in text::boundary_matches(utterance, value.as_str()) {
            spans.push(Span {
                start,
                end,
                candidate: i,
            });
        }
    }
    for (i, a) in spans.iter().enumerate() {
        for b in &spans[i + 1..] {
            if a.candidate != b.candidate && crossing(a, b) {
                let (x, y) = (candidates[a.candidate].0, candidates[b.candidate].0);
                let (first, second) = if x <= y { (x, y) } else { (y, x) };
                return Err(Rejection::OverlapAmbiguity {
                    first: first.clone(),
                    second: second.clone(),
                });
            }
        }
    }
    // spans are grouped by candidate in priority order, so the first claim wins
    let mut accepted: Vec<&Span> = Vec::new();
    for span in &spans {
        if accepted
            .iter()
            .all(|a| span.end <= a.start || a.end <= span.start)
        {
            accepted.push(span);
        }
    }
    accepted.sort_by_key(|s| s.start);
    let mut out = String::with_capacity(utterance.len());
    let mut cursor = 0;
    for span in accepted {
        out.push_str(&utterance[cursor..span.start]);
        out.push_str(&text::placeholder(candidates[span.candidate].0));
        counts[span.candidate] += 1;
        cursor = span.end;
    }
    out.push_str(&utterance[cursor..]);
    Ok(out)
}

pub fn delexicalize_pair(pair: &TurnPair, policy: &CategoricalPolicy) -> Result<DelexicalizedPair, Rejection> {
    if let Some(report) = detect_collision(&pair.belief, policy) {
        return Err(Rejection::ValueCollision {
            groups: report.groups,
        });
    }
    let mut candidates: Vec<(&SlotLabel, &SlotValue)> = pair
        .belief
        .iter()
        .filter(|(l, v)| policy.is_delexicalized(l, v))
        .collect();
    candidates.sort_by(|a, b| {
        b.1.as_str()
            .len()
            .cmp(&a.1.as_str().len())
            .then_with(|| a.0.cmp(b.0))
    });
    let mut counts = vec![0; candidates.len()];
    let system = replace_values(&pair.system_utterance, &candidates, &mut counts)?;
    let user = replace_values(&pair.user_utterance, &candidates, &mut counts)?;
    let replaced: BTreeMap<&SlotLabel, usize> = candidates
        .iter()
        .map(|(l, _)| *l)
        .zip(counts)
        .collect();
    let subs = pair
        .belief
        .iter()
        .map(|(label, value)| Substitution {
            label: label.clone(),
            value: value.clone(),
            occurrences: replaced.get(label).copied().unwrap_or(0),
        })
        .collect();
    Ok(DelexicalizedPair { system, user, subs })
}

/// Puts recorded values back into a delexicalized utterance.
pub fn relexicalize(delex: &str, subs: &[Substitution]) -> Result<String, SlotLabel> {
    text::fill_placeholders(delex, |label| {
        subs.iter()
            .find(|s| &s.label == label)
            .map(|s| s.value.as_str())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Always treated as categorical.
    pub categorical: BTreeSet<SlotLabel>,
    /// Findability fraction below which a label is categorical.
    pub tau: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            categorical: BTreeSet::new(),
            tau: 0.5,
        }
    }
}

/// Per-label findability counts behind [`classify_slots`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Findability {
    pub found: usize,
    pub total: usize,
}

/// Counts, per label, how often a newly introduced value shows up verbatim in
/// the pair that introduces it. Reserved values are not counted.
pub fn findability(corpus: &Corpus, reserved: &CategoricalPolicy) -> BTreeMap<SlotLabel, Findability> {
    let mut stats: BTreeMap<SlotLabel, Findability> = BTreeMap::new();
    for dialogue in corpus.sorted_by_id() {
        let mut previous = BeliefState::new();
        for pair in &dialogue.pairs {
            for (label, value) in pair.belief.iter() {
                let entry = stats.entry(label.clone()).or_default();
                if reserved.is_reserved(value) || previous.get(label) == Some(value) {
                    continue;
                }
                entry.total += 1;
                if text::contains_at_boundary(&pair.user_utterance, value.as_str())
                    || text::contains_at_boundary(&pair.system_utterance, value.as_str())
                {
                    entry.found += 1;
                }
            }
            previous = pair.belief.clone();
        }
    }
    stats
}

/// A label is categorical when listed in the overrides, when it never takes a
/// non-reserved value, or when fewer than `tau` of its value introductions can
/// be found in the introducing pair's text.
pub fn classify_slots(corpus: &Corpus, config: &ClassifyConfig) -> CategoricalPolicy {
    let mut policy = CategoricalPolicy::with_labels(config.categorical.iter().cloned());
    for (label, f) in findability(corpus, &policy.clone()) {
        let below = f.total == 0 || (f.found as f64) < config.tau * f.total as f64;
        if below {
            policy.labels.insert(label);
        }
    }
    policy
}

/// Harvested slot label to values dictionary. Values keep first-observation order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlotValueDict {
    pub entries: BTreeMap<SlotLabel, Vec<SlotValue>>,
}

impl SlotValueDict {
    pub fn get(&self, label: &SlotLabel) -> &[SlotValue] {
        self.entries.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Adds `value` unless already present. Returns whether it was new.
    pub fn insert(&mut self, label: SlotLabel, value: SlotValue) -> bool {
        let values = self.entries.entry(label).or_default();
        if values.contains(&value) {
            false
        } else {
            values.push(value);
            true
        }
    }

    pub fn contains(&self, label: &SlotLabel, value: &SlotValue) -> bool {
        self.get(label).contains(value)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

pub fn harvest_values(corpus: &Corpus, policy: &CategoricalPolicy) -> SlotValueDict {
    let mut dict = SlotValueDict::default();
    for dialogue in corpus.sorted_by_id() {
        for pair in &dialogue.pairs {
            for (label, value) in pair.belief.iter() {
                if policy.is_delexicalized(label, value) {
                    dict.insert(label.clone(), value.clone());
                }
            }
        }
    }
    dict
}

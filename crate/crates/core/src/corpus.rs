//! Dialogue data model, corpus ingestion, validation and n-shot sampling.
//!
//! A corpus file is a JSON list of dialogues. Each dialogue is a list of
//! alternating user/system turns starting with the user; user turns carry the
//! belief state holding after that turn. Turns are grouped into
//! `(system, user)` pairs so that one pair maps onto exactly one belief state.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::text;

/// Values that are function words in dialogue text rather than fillers.
pub const RESERVED_VALUES: [&str; 4] = ["dontcare", "none", "yes", "no"];

/// A `domain-name` slot label such as `train-destination`.
///
/// Ordering follows the canonical string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotLabel(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid slot label {0:?}: expected lowercase \"domain-name\" without whitespace or brackets")]
pub struct BadSlotLabel(pub String);

impl SlotLabel {
    pub fn new(domain: &str, name: &str) -> Result<Self, BadSlotLabel> {
        Self::parse(&format!("{domain}-{name}"))
    }

    /// Parses a canonical `domain-name` string. The domain ends at the first `-`.
    pub fn parse(s: &str) -> Result<Self, BadSlotLabel> {
        let bad = || BadSlotLabel(s.to_string());
        let (domain, name) = s.split_once('-').ok_or_else(bad)?;
        let token_ok = |t: &str| {
            !t.is_empty()
                && t.chars()
                    .all(|c| !c.is_whitespace() && !c.is_uppercase() && c != '[' && c != ']')
        };
        if !token_ok(domain) || !token_ok(name) {
            return Err(bad());
        }
        Ok(SlotLabel(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn domain(&self) -> &str {
        self.0.split_once('-').map(|(d, _)| d).unwrap_or(&self.0)
    }

    pub fn name(&self) -> &str {
        self.0.split_once('-').map(|(_, n)| n).unwrap_or("")
    }
}

impl fmt::Display for SlotLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for SlotLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for SlotLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        SlotLabel::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Textual,
    Special,
}

/// A non-empty slot value. Values from the reserved set are `Special`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct SlotValue(String);

impl SlotValue {
    pub fn new(text: impl Into<String>) -> Option<Self> {
        let text = text.into();
        (!text.is_empty()).then_some(SlotValue(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn kind(&self) -> ValueKind {
        let lowered = self.0.to_lowercase();
        if RESERVED_VALUES.contains(&lowered.as_str()) {
            ValueKind::Special
        } else {
            ValueKind::Textual
        }
    }

    pub fn is_special(&self) -> bool {
        self.kind() == ValueKind::Special
    }
}

impl fmt::Display for SlotValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for SlotValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        SlotValue::new(s).ok_or_else(|| serde::de::Error::custom("empty slot value"))
    }
}

/// Slot label to value mapping holding after a user turn.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BeliefState(pub BTreeMap<SlotLabel, SlotValue>);

impl BeliefState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn labels(&self) -> BTreeSet<SlotLabel> {
        self.0.keys().cloned().collect()
    }

    pub fn get(&self, label: &SlotLabel) -> Option<&SlotValue> {
        self.0.get(label)
    }

    pub fn insert(&mut self, label: SlotLabel, value: SlotValue) -> Option<SlotValue> {
        self.0.insert(label, value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SlotLabel, &SlotValue)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(SlotLabel, SlotValue)> for BeliefState {
    fn from_iter<I: IntoIterator<Item = (SlotLabel, SlotValue)>>(iter: I) -> Self {
        BeliefState(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TurnPair {
    pub index: usize,
    /// Empty for the opening pair.
    pub system_utterance: String,
    pub user_utterance: String,
    /// State after the user utterance.
    pub belief: BeliefState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub domains: BTreeSet<String>,
    pub pairs: Vec<TurnPair>,
}

impl Dialogue {
    /// Domains mentioned by any belief state.
    pub fn belief_domains(&self) -> BTreeSet<String> {
        self.pairs
            .iter()
            .flat_map(|p| p.belief.0.keys().map(|l| l.domain().to_string()))
            .collect()
    }

    pub fn mentions_domain(&self, domain: &str) -> bool {
        self.pairs
            .iter()
            .any(|p| p.belief.0.keys().any(|l| l.domain() == domain))
    }

    /// Raw turn count: one user turn per pair plus the system turns between them.
    pub fn turn_count(&self) -> usize {
        (2 * self.pairs.len()).saturating_sub(1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub dialogues: Vec<Dialogue>,
    pub source: String,
}

impl Corpus {
    pub fn new(dialogues: Vec<Dialogue>, source: impl Into<String>) -> Self {
        Corpus {
            dialogues,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.dialogues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dialogues.is_empty()
    }

    pub fn pair_count(&self) -> usize {
        self.dialogues.iter().map(|d| d.pairs.len()).sum()
    }

    /// Dialogues sorted by id.
    pub fn sorted_by_id(&self) -> Vec<&Dialogue> {
        let mut v: Vec<&Dialogue> = self.dialogues.iter().collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }
}

// ---------------------------------------------------------------------------
// Raw file schema

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    System,
}

/// Belief object as written in the file. Keeps every key so duplicates can be
/// reported instead of silently collapsed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawBelief(pub Vec<(String, String)>);

impl Serialize for RawBelief {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for RawBelief {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;
        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = RawBelief;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object of slot label to string value")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, String>()? {
                    entries.push((k, v));
                }
                Ok(RawBelief(entries))
            }
        }
        deserializer.deserialize_map(EntriesVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTurn {
    pub speaker: Speaker,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief: Option<RawBelief>,
}

impl RawTurn {
    pub fn user(text: &str, belief: &[(&str, &str)]) -> Self {
        RawTurn {
            speaker: Speaker::User,
            text: text.to_string(),
            belief: Some(RawBelief(
                belief
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect(),
            )),
        }
    }

    pub fn system(text: &str) -> Self {
        RawTurn {
            speaker: Speaker::System,
            text: text.to_string(),
            belief: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDialogue {
    pub id: String,
    pub domains: Vec<String>,
    pub turns: Vec<RawTurn>,
}

// ---------------------------------------------------------------------------
// Errors

fn at_pair(pair_index: &Option<usize>) -> String {
    pair_index.map(|i| format!(", pair {i}")).unwrap_or_default()
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: malformed corpus: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("dialogue {dialogue_id}{}: {message}", at_pair(.pair_index))]
    Schema {
        dialogue_id: String,
        pair_index: Option<usize>,
        message: String,
    },
    #[error("dialogue {dialogue_id}{}: {message}", at_pair(.pair_index))]
    Invariant {
        dialogue_id: String,
        pair_index: Option<usize>,
        message: String,
    },
    #[error("dialogue {dialogue_id}, pair {pair_index}: turn {turn_index} breaks user/system alternation")]
    Alternation {
        dialogue_id: String,
        pair_index: usize,
        turn_index: usize,
    },
    #[error("need {requested} dialogues in domain {domain:?} but only {available} are eligible")]
    InsufficientData {
        domain: String,
        requested: usize,
        available: usize,
    },
}

/// Failure while pairing a raw turn list, before a dialogue id is attached.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TurnError {
    #[error("turn {turn_index} repeats the previous speaker")]
    Alternation { pair_index: usize, turn_index: usize },
    #[error("dialogue must open with a user turn")]
    OpensWithSystem,
    #[error("dialogue has no user turns")]
    NoUserTurn,
    #[error("pair {pair_index}: user turn has no belief annotation")]
    MissingBelief { pair_index: usize },
    #[error("pair {pair_index}: {message}")]
    BadBelief { pair_index: usize, message: String },
    #[error("pair {pair_index}: empty user utterance")]
    EmptyUserUtterance { pair_index: usize },
}

impl TurnError {
    fn into_corpus_error(self, dialogue_id: &str) -> CorpusError {
        let dialogue_id = dialogue_id.to_string();
        match self {
            TurnError::Alternation {
                pair_index,
                turn_index,
            } => CorpusError::Alternation {
                dialogue_id,
                pair_index,
                turn_index,
            },
            TurnError::OpensWithSystem => CorpusError::Alternation {
                dialogue_id,
                pair_index: 0,
                turn_index: 0,
            },
            TurnError::NoUserTurn => CorpusError::Schema {
                dialogue_id,
                pair_index: None,
                message: self.to_string(),
            },
            TurnError::MissingBelief { pair_index } => CorpusError::Schema {
                dialogue_id,
                pair_index: Some(pair_index),
                message: "user turn has no belief annotation".into(),
            },
            TurnError::BadBelief {
                pair_index,
                message,
            } => CorpusError::Invariant {
                dialogue_id,
                pair_index: Some(pair_index),
                message,
            },
            TurnError::EmptyUserUtterance { pair_index } => CorpusError::Invariant {
                dialogue_id,
                pair_index: Some(pair_index),
                message: "empty user utterance".into(),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Ingestion

fn normalize_belief(raw: &RawBelief, pair_index: usize) -> Result<BeliefState, TurnError> {
    let mut belief = BeliefState::new();
    for (k, v) in &raw.0 {
        let label = SlotLabel::parse(&text::normalize(k)).map_err(|e| TurnError::BadBelief {
            pair_index,
            message: e.to_string(),
        })?;
        let value = SlotValue::new(text::normalize(v)).ok_or_else(|| TurnError::BadBelief {
            pair_index,
            message: format!("empty value for {label}"),
        })?;
        if belief.insert(label.clone(), value).is_some() {
            return Err(TurnError::BadBelief {
                pair_index,
                message: format!("duplicate slot label {label}"),
            });
        }
    }
    Ok(belief)
}

/// Groups an alternating `user, system, user, ...` turn list into pairs.
/// Pair k holds the system turn preceding user turn k; a trailing system
/// turn has no user turn after it and is dropped.
pub fn pair_turns(turns: &[RawTurn]) -> Result<Vec<TurnPair>, TurnError> {
    match turns.first() {
        None => return Err(TurnError::NoUserTurn),
        Some(t) if t.speaker == Speaker::System => return Err(TurnError::OpensWithSystem),
        _ => {}
    }
    let mut pairs = Vec::with_capacity(turns.len().div_ceil(2));
    let mut pending_system = String::new();
    let mut previous: Option<Speaker> = None;
    for (turn_index, turn) in turns.iter().enumerate() {
        if previous == Some(turn.speaker) {
            return Err(TurnError::Alternation {
                pair_index: pairs.len(),
                turn_index,
            });
        }
        previous = Some(turn.speaker);
        match turn.speaker {
            Speaker::System => pending_system = text::normalize(&turn.text),
            Speaker::User => {
                let pair_index = pairs.len();
                let raw = turn
                    .belief
                    .as_ref()
                    .ok_or(TurnError::MissingBelief { pair_index })?;
                let belief = normalize_belief(raw, pair_index)?;
                let user_utterance = text::normalize(&turn.text);
                if user_utterance.is_empty() {
                    return Err(TurnError::EmptyUserUtterance { pair_index });
                }
                pairs.push(TurnPair {
                    index: pair_index,
                    system_utterance: std::mem::take(&mut pending_system),
                    user_utterance,
                    belief,
                });
            }
        }
    }
    Ok(pairs)
}

/// Which file layout a corpus is stored in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputSchema {
    /// Native list layout, or MultiWOZ when the top level is an object.
    #[default]
    Auto,
    Native,
    MultiWoz,
}

impl std::str::FromStr for InputSchema {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(InputSchema::Auto),
            "native" => Ok(InputSchema::Native),
            "multiwoz" => Ok(InputSchema::MultiWoz),
            other => Err(format!("unknown schema {other:?} (expected auto, native or multiwoz)")),
        }
    }
}

pub(crate) fn parse_error(origin: &str, err: serde_json::Error) -> CorpusError {
    CorpusError::Parse {
        origin: origin.to_string(),
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

/// Builds a validated dialogue from its raw record.
pub fn dialogue_from_raw(raw: &RawDialogue) -> Result<Dialogue, CorpusError> {
    let pairs = pair_turns(&raw.turns).map_err(|e| e.into_corpus_error(&raw.id))?;
    let domains: BTreeSet<String> = raw.domains.iter().map(|d| text::normalize(d)).collect();
    for pair in &pairs {
        if let Some(label) = pair.belief.0.keys().find(|l| !domains.contains(l.domain())) {
            return Err(CorpusError::Invariant {
                dialogue_id: raw.id.clone(),
                pair_index: Some(pair.index),
                message: format!("slot {label} belongs to a domain not listed in `domains`"),
            });
        }
    }
    Ok(Dialogue {
        id: raw.id.clone(),
        domains,
        pairs,
    })
}

pub fn corpus_from_raw(raw: &[RawDialogue], source: &str) -> Result<Corpus, CorpusError> {
    let mut seen = BTreeSet::new();
    let mut dialogues = Vec::with_capacity(raw.len());
    for r in raw {
        if !seen.insert(r.id.as_str()) {
            return Err(CorpusError::Invariant {
                dialogue_id: r.id.clone(),
                pair_index: None,
                message: "duplicate dialogue id".into(),
            });
        }
        dialogues.push(dialogue_from_raw(r)?);
    }
    Ok(Corpus::new(dialogues, source))
}

/// Parses corpus JSON held in memory. `origin` names the source in diagnostics.
pub fn parse_corpus(json: &str, schema: InputSchema, origin: &str) -> Result<Corpus, CorpusError> {
    let schema = match schema {
        InputSchema::Auto => {
            if json.trim_start().starts_with('{') {
                InputSchema::MultiWoz
            } else {
                InputSchema::Native
            }
        }
        s => s,
    };
    match schema {
        InputSchema::MultiWoz => crate::multiwoz::parse(json, origin, &BTreeSet::new()),
        _ => {
            let raw: Vec<RawDialogue> =
                serde_json::from_str(json).map_err(|e| parse_error(origin, e))?;
            corpus_from_raw(&raw, origin)
        }
    }
}

pub fn load_corpus(path: &Path, schema: InputSchema) -> Result<Corpus, CorpusError> {
    let json = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus(&json, schema, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// Serialization

pub fn dialogue_to_raw(d: &Dialogue) -> RawDialogue {
    let mut turns = Vec::with_capacity(d.turn_count());
    for pair in &d.pairs {
        if pair.index > 0 {
            turns.push(RawTurn {
                speaker: Speaker::System,
                text: pair.system_utterance.clone(),
                belief: None,
            });
        }
        turns.push(RawTurn {
            speaker: Speaker::User,
            text: pair.user_utterance.clone(),
            belief: Some(RawBelief(
                pair.belief
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect(),
            )),
        });
    }
    RawDialogue {
        id: d.id.clone(),
        domains: d.domains.iter().cloned().collect(),
        turns,
    }
}

/// Canonical JSON text of a list of dialogues (pretty-printed, trailing newline).
pub fn to_json<'a>(dialogues: impl IntoIterator<Item = &'a Dialogue>) -> String {
    let raw: Vec<RawDialogue> = dialogues.into_iter().map(dialogue_to_raw).collect();
    let mut s = serde_json::to_string_pretty(&raw).expect("corpus records always serialize");
    s.push('\n');
    s
}

pub fn write_corpus<'a, W: Write>(
    mut w: W,
    dialogues: impl IntoIterator<Item = &'a Dialogue>,
) -> std::io::Result<()> {
    w.write_all(to_json(dialogues).as_bytes())
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IssueKind {
    /// Labels present at the previous pair are missing here.
    NonCumulative { dropped: Vec<SlotLabel> },
    EmptyUserUtterance,
    UnknownDomain { label: SlotLabel },
    OpeningSystemUtterance,
    IndexGap { expected: usize, found: usize },
    ResidualPlaceholder { label: SlotLabel },
    NoPairs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub pair_index: Option<usize>,
    #[serde(flatten)]
    pub kind: IssueKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub dialogue_id: String,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }
}

/// Checks a dialogue against the data-model invariants. With `strict`,
/// labels dropped between consecutive pairs are errors instead of warnings.
pub fn validate_dialogue(d: &Dialogue, strict: bool) -> ValidationReport {
    let mut issues = Vec::new();
    let mut push = |severity, pair_index, kind| {
        issues.push(Issue {
            severity,
            pair_index,
            kind,
        })
    };
    if d.pairs.is_empty() {
        push(Severity::Error, None, IssueKind::NoPairs);
    }
    let mut previous: Option<&BeliefState> = None;
    for (expected, pair) in d.pairs.iter().enumerate() {
        let at = Some(pair.index);
        if pair.index != expected {
            push(
                Severity::Error,
                at,
                IssueKind::IndexGap {
                    expected,
                    found: pair.index,
                },
            );
        }
        if expected == 0 && !pair.system_utterance.is_empty() {
            push(Severity::Error, at, IssueKind::OpeningSystemUtterance);
        }
        if pair.user_utterance.trim().is_empty() {
            push(Severity::Error, at, IssueKind::EmptyUserUtterance);
        }
        for label in pair.belief.0.keys() {
            if !d.domains.contains(label.domain()) {
                push(
                    Severity::Error,
                    at,
                    IssueKind::UnknownDomain {
                        label: label.clone(),
                    },
                );
            }
        }
        let mut residual: BTreeSet<SlotLabel> = BTreeSet::new();
        residual.extend(text::placeholder_labels(&pair.system_utterance));
        residual.extend(text::placeholder_labels(&pair.user_utterance));
        for label in residual {
            push(Severity::Error, at, IssueKind::ResidualPlaceholder { label });
        }
        if let Some(prev) = previous {
            let dropped: Vec<SlotLabel> = prev
                .0
                .keys()
                .filter(|l| !pair.belief.0.contains_key(*l))
                .cloned()
                .collect();
            if !dropped.is_empty() {
                let severity = if strict {
                    Severity::Error
                } else {
                    Severity::Warning
                };
                push(severity, at, IssueKind::NonCumulative { dropped });
            }
        }
        previous = Some(&pair.belief);
    }
    ValidationReport {
        dialogue_id: d.id.clone(),
        issues,
    }
}

// ---------------------------------------------------------------------------
// Sampling

/// Which dialogues count as belonging to the target domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Eligibility {
    /// Any belief state mentions a slot of the domain.
    #[default]
    Touching,
    /// Belief states mention the domain and no other.
    SingleDomain,
}

impl Eligibility {
    pub fn admits(&self, d: &Dialogue, domain: &str) -> bool {
        match self {
            Eligibility::Touching => d.mentions_domain(domain),
            Eligibility::SingleDomain => {
                let domains = d.belief_domains();
                domains.len() == 1 && domains.contains(domain)
            }
        }
    }
}

/// Draws `n` dialogues of `domain` uniformly without replacement.
///
/// Candidates are ordered by id before the seeded draw, so the result does
/// not depend on file order. The sample is returned in id order.
pub fn sample_shots(
    corpus: &Corpus,
    n: usize,
    domain: &str,
    seed: u64,
    eligibility: Eligibility,
) -> Result<Corpus, CorpusError> {
    let eligible: Vec<&Dialogue> = corpus
        .sorted_by_id()
        .into_iter()
        .filter(|d| eligibility.admits(d, domain))
        .collect();
    if n == 0 || eligible.len() < n {
        return Err(CorpusError::InsufficientData {
            domain: domain.to_string(),
            requested: n,
            available: eligible.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, eligible.len(), n).into_vec();
    picked.sort_unstable();
    let dialogues = picked.into_iter().map(|i| eligible[i].clone()).collect();
    Ok(Corpus::new(
        dialogues,
        format!("{} [{n}-shot {domain}, seed {seed}]", corpus.source),
    ))
}

//! Turn-pair templates keyed by dialogue function, and the bank that indexes them.
//!
//! A template's function is the triple of slot-label sets of the previous,
//! current and next pair of its source dialogue. The opening pair has no
//! previous state and the closing pair has no next state; both are `None`,
//! which is distinct from an empty label set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{BeliefState, Corpus, Dialogue, SlotLabel};
use crate::delex::{delexicalize_pair, CategoricalPolicy, Rejection, Substitution};

/// Marker written for an absent boundary state in dumps.
pub const NULL_MARKER: &str = "__null__";

pub type LabelSet = BTreeSet<SlotLabel>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TemplateId(pub usize);

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionKey {
    pub prev: Option<LabelSet>,
    pub cur: LabelSet,
    pub next: Option<LabelSet>,
}

fn serialize_slot_set<S: Serializer>(set: &Option<LabelSet>, s: S) -> Result<S::Ok, S::Error> {
    match set {
        None => s.serialize_str(NULL_MARKER),
        Some(labels) => labels.serialize(s),
    }
}

impl Serialize for FunctionKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            #[serde(serialize_with = "serialize_slot_set")]
            prev: &'a Option<LabelSet>,
            cur: &'a LabelSet,
            #[serde(serialize_with = "serialize_slot_set")]
            next: &'a Option<LabelSet>,
        }
        Repr {
            prev: &self.prev,
            cur: &self.cur,
            next: &self.next,
        }
        .serialize(serializer)
    }
}

/// How the two link conditions compare label sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkSemantics {
    /// successor.cur = predecessor.next and successor.prev = predecessor.cur
    #[default]
    Equality,
    /// successor.cur ⊇ predecessor.next and successor.prev ⊇ predecessor.cur
    Superset,
}

impl LinkSemantics {
    pub fn relates(&self, successor_side: &LabelSet, predecessor_side: &LabelSet) -> bool {
        match self {
            LinkSemantics::Equality => successor_side == predecessor_side,
            LinkSemantics::Superset => successor_side.is_superset(predecessor_side),
        }
    }
}

impl std::str::FromStr for LinkSemantics {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equality" => Ok(LinkSemantics::Equality),
            "superset" => Ok(LinkSemantics::Superset),
            other => Err(format!("unknown link semantics {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateSource {
    pub dialogue_id: String,
    pub pair_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnPairTemplate {
    pub id: TemplateId,
    pub source: TemplateSource,
    pub delex_system: String,
    pub delex_user: String,
    pub subs: Vec<Substitution>,
    pub function: FunctionKey,
    pub prev_belief: Option<BeliefState>,
    pub cur_belief: BeliefState,
    pub next_belief: Option<BeliefState>,
}

impl TurnPairTemplate {
    pub fn is_root(&self) -> bool {
        self.function.prev.is_none()
    }

    pub fn is_terminal(&self) -> bool {
        self.function.next.is_none()
    }
}

/// A pair the delexicalizer turned down.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedPair {
    pub dialogue_id: String,
    pub pair_index: usize,
    pub rejection: Rejection,
}

#[derive(Debug, Clone, Default)]
pub struct DialogueTemplates {
    /// Ids are local to the dialogue, numbered from zero.
    pub templates: Vec<TurnPairTemplate>,
    pub rejected: Vec<RejectedPair>,
}

/// Builds one template per accepted pair of `dialogue`. Neighbor states always
/// come from the original dialogue, even when the neighbor pair was rejected.
pub fn make_templates(dialogue: &Dialogue, policy: &CategoricalPolicy) -> DialogueTemplates {
    let mut out = DialogueTemplates::default();
    let pairs = &dialogue.pairs;
    for (i, pair) in pairs.iter().enumerate() {
        match delexicalize_pair(pair, policy) {
            Err(rejection) => out.rejected.push(RejectedPair {
                dialogue_id: dialogue.id.clone(),
                pair_index: pair.index,
                rejection,
            }),
            Ok(delex) => {
                let prev_belief = i.checked_sub(1).map(|j| pairs[j].belief.clone());
                let next_belief = pairs.get(i + 1).map(|p| p.belief.clone());
                let function = FunctionKey {
                    prev: prev_belief.as_ref().map(BeliefState::labels),
                    cur: pair.belief.labels(),
                    next: next_belief.as_ref().map(BeliefState::labels),
                };
                out.templates.push(TurnPairTemplate {
                    id: TemplateId(out.templates.len()),
                    source: TemplateSource {
                        dialogue_id: dialogue.id.clone(),
                        pair_index: pair.index,
                    },
                    delex_system: delex.system,
                    delex_user: delex.user,
                    subs: delex.subs,
                    function,
                    prev_belief,
                    cur_belief: pair.belief.clone(),
                    next_belief,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BankError {
    #[error("no turn pair survived delexicalization ({rejected} rejected); the seed set is unusable")]
    EmptyBank { rejected: usize },
}

#[derive(Debug, Clone)]
pub struct TemplateBank {
    pub templates: Vec<TurnPairTemplate>,
    /// Keyed by previous label set; `None` holds the roots.
    pub by_prev: BTreeMap<Option<LabelSet>, Vec<TemplateId>>,
    pub roots: Vec<TemplateId>,
    pub terminals: Vec<TemplateId>,
    pub rejected: Vec<RejectedPair>,
}

impl TemplateBank {
    pub fn get(&self, id: TemplateId) -> &TurnPairTemplate {
        &self.templates[id.0]
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Indexes already-numbered templates. Ids must equal positions.
    pub fn from_templates(templates: Vec<TurnPairTemplate>, rejected: Vec<RejectedPair>) -> Result<Self, BankError> {
        if templates.is_empty() {
            return Err(BankError::EmptyBank {
                rejected: rejected.len(),
            });
        }
        let mut by_prev: BTreeMap<Option<LabelSet>, Vec<TemplateId>> = BTreeMap::new();
        let mut roots = Vec::new();
        let mut terminals = Vec::new();
        for (pos, t) in templates.iter().enumerate() {
            assert_eq!(t.id.0, pos, "template ids must match their position");
            by_prev.entry(t.function.prev.clone()).or_default().push(t.id);
            if t.is_root() {
                roots.push(t.id);
            }
            if t.is_terminal() {
                terminals.push(t.id);
            }
        }
        Ok(TemplateBank {
            templates,
            by_prev,
            roots,
            terminals,
            rejected,
        })
    }

    /// Templates that may follow `t`, in id order. Terminals have none.
    pub fn successors(&self, t: &TurnPairTemplate, semantics: LinkSemantics) -> Vec<TemplateId> {
        let Some(next) = &t.function.next else {
            return Vec::new();
        };
        match semantics {
            LinkSemantics::Equality => self
                .by_prev
                .get(&Some(t.function.cur.clone()))
                .map(|ids| {
                    ids.iter()
                        .copied()
                        .filter(|id| &self.get(*id).function.cur == next)
                        .collect()
                })
                .unwrap_or_default(),
            LinkSemantics::Superset => self
                .templates
                .iter()
                .filter(|a| check_link(t, a, semantics))
                .map(|a| a.id)
                .collect(),
        }
    }

    /// JSON dump: one object per template with `__null__` boundary markers.
    pub fn dump_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry<'a> {
            id: TemplateId,
            source: &'a TemplateSource,
            delex_system: &'a str,
            delex_user: &'a str,
            function: &'a FunctionKey,
        }
        let entries: Vec<Entry> = self
            .templates
            .iter()
            .map(|t| Entry {
                id: t.id,
                source: &t.source,
                delex_system: &t.delex_system,
                delex_user: &t.delex_user,
                function: &t.function,
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&entries).expect("bank entries serialize");
        s.push('\n');
        s
    }
}

/// Whether template `a` may be appended after template `b`.
///
/// Condition (1): `a.cur` relates to `b.next`; condition (2): `a.prev` relates
/// to `b.cur`. A terminal `b` has no successors, and a root `a` cannot follow
/// anything, so both yield false.
pub fn check_link(b: &TurnPairTemplate, a: &TurnPairTemplate, semantics: LinkSemantics) -> bool {
    let (Some(b_next), Some(a_prev)) = (&b.function.next, &a.function.prev) else {
        return false;
    };
    semantics.relates(&a.function.cur, b_next) && semantics.relates(a_prev, &b.function.cur)
}

/// Builds templates for every dialogue (in id order) and indexes them.
pub fn build_bank(corpus: &Corpus, policy: &CategoricalPolicy) -> Result<TemplateBank, BankError> {
    let dialogues = corpus.sorted_by_id();
    let per_dialogue: Vec<DialogueTemplates> = dialogues
        .par_iter()
        .map(|d| make_templates(d, policy))
        .collect();
    let mut templates = Vec::new();
    let mut rejected = Vec::new();
    for part in per_dialogue {
        for mut t in part.templates {
            t.id = TemplateId(templates.len());
            templates.push(t);
        }
        rejected.extend(part.rejected);
    }
    TemplateBank::from_templates(templates, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{dialogue_from_raw, RawDialogue, RawTurn};

    fn dialogue(id: &str, turns: Vec<RawTurn>) -> Dialogue {
        dialogue_from_raw(&RawDialogue {
            id: id.into(),
            domains: vec!["train".into()],
            turns,
        })
        .unwrap()
    }

    #[test]
    fn single_pair_dialogue_is_root_and_terminal() {
        let d = dialogue("a", vec![RawTurn::user("to ely", &[("train-destination", "ely")])]);
        let made = make_templates(&d, &CategoricalPolicy::default());
        assert_eq!(made.templates.len(), 1);
        assert!(made.templates[0].is_root());
        assert!(made.templates[0].is_terminal());
    }

    #[test]
    fn rejected_middle_pair_keeps_original_neighbors() {
        let d = dialogue(
            "a",
            vec![
                RawTurn::user("to ely", &[("train-destination", "ely")]),
                RawTurn::system("from where ?"),
                RawTurn::user("ely too", &[("train-destination", "ely"), ("train-departure", "ely")]),
                RawTurn::system("sorry ?"),
                RawTurn::user("from london", &[("train-destination", "ely"), ("train-departure", "london")]),
            ],
        );
        let made = make_templates(&d, &CategoricalPolicy::default());
        assert_eq!(made.templates.len(), 2);
        assert_eq!(made.rejected.len(), 1);
        assert_eq!(made.rejected[0].pair_index, 1);
        let both: LabelSet = [
            SlotLabel::parse("train-departure").unwrap(),
            SlotLabel::parse("train-destination").unwrap(),
        ]
        .into();
        assert_eq!(made.templates[0].function.next, Some(both.clone()));
        assert_eq!(made.templates[1].function.prev, Some(both));
        assert_eq!(
            made.templates[1]
                .prev_belief
                .as_ref()
                .unwrap()
                .get(&SlotLabel::parse("train-departure").unwrap())
                .unwrap()
                .as_str(),
            "ely"
        );
    }

    #[test]
    fn all_rejected_is_empty_bank() {
        let d = dialogue(
            "a",
            vec![RawTurn::user("ely", &[("train-destination", "ely"), ("train-departure", "ely")])],
        );
        let corpus = Corpus::new(vec![d], "mem");
        assert_eq!(
            build_bank(&corpus, &CategoricalPolicy::default()).unwrap_err(),
            BankError::EmptyBank { rejected: 1 }
        );
    }

    #[test]
    fn null_is_not_empty_set_in_dump() {
        let d = dialogue(
            "a",
            vec![
                RawTurn::user("hello", &[]),
                RawTurn::system("hi"),
                RawTurn::user("bye", &[]),
            ],
        );
        let bank = build_bank(&Corpus::new(vec![d], "mem"), &CategoricalPolicy::default()).unwrap();
        let dump: serde_json::Value = serde_json::from_str(&bank.dump_json()).unwrap();
        assert_eq!(dump[0]["function"]["prev"], NULL_MARKER);
        assert_eq!(dump[0]["function"]["next"], serde_json::json!([]));
        assert_eq!(dump[1]["function"]["next"], NULL_MARKER);
    }
}

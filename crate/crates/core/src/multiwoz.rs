//! Adapter for the native MultiWOZ 2.x `data.json` layout.
//!
//! Conversion rules:
//! - the dialogue id is the top-level key (e.g. `PMUL1234.json`);
//! - `log` entries alternate user (even positions) and system (odd positions);
//! - the belief of user turn k is read from the `metadata` of the system turn
//!   that follows it; if that turn is missing the previous belief is carried;
//! - `semi` slots keep their name, `book` slots get a `book_` prefix, names are
//!   lowercased with spaces replaced by `_` (`arriveBy` -> `arriveby`,
//!   `book people` -> `book_people`); the `booked` list is ignored;
//! - empty, `not mentioned` and `none` values mean the slot is unset;
//! - `domains` is the union of the domains with a non-empty goal and the
//!   domains mentioned by any belief state.

use std::collections::BTreeSet;

use serde_json::{Map, Value};

use crate::corpus::{corpus_from_raw, parse_error, Corpus, CorpusError, RawBelief, RawDialogue, RawTurn, Speaker};

const UNSET: [&str; 3] = ["", "not mentioned", "none"];
const GOAL_META_KEYS: [&str; 2] = ["message", "topic"];

fn slot_name(section: &str, slot: &str) -> String {
    let slot = slot.trim().to_lowercase().replace(' ', "_");
    if section == "book" {
        format!("book_{slot}")
    } else {
        slot
    }
}

fn belief_from_metadata(metadata: &Map<String, Value>) -> RawBelief {
    let mut entries = Vec::new();
    let mut domains: Vec<&String> = metadata.keys().collect();
    domains.sort();
    for domain in domains {
        let Some(sections) = metadata[domain].as_object() else {
            continue;
        };
        for section in ["semi", "book"] {
            let Some(slots) = sections.get(section).and_then(Value::as_object) else {
                continue;
            };
            let mut names: Vec<&String> = slots.keys().collect();
            names.sort();
            for slot in names {
                if slot == "booked" {
                    continue;
                }
                let Some(value) = slots[slot].as_str() else {
                    continue;
                };
                if UNSET.contains(&value.trim().to_lowercase().as_str()) {
                    continue;
                }
                let label = format!("{}-{}", domain.to_lowercase(), slot_name(section, slot));
                entries.push((label, value.to_string()));
            }
        }
    }
    RawBelief(entries)
}

fn goal_domains(goal: Option<&Value>) -> BTreeSet<String> {
    let Some(goal) = goal.and_then(Value::as_object) else {
        return BTreeSet::new();
    };
    goal.iter()
        .filter(|(k, v)| {
            !GOAL_META_KEYS.contains(&k.as_str()) && v.as_object().is_some_and(|o| !o.is_empty())
        })
        .map(|(k, _)| k.to_lowercase())
        .collect()
}

fn convert(id: &str, record: &Value) -> Result<RawDialogue, CorpusError> {
    let schema_err = |message: &str| CorpusError::Schema {
        dialogue_id: id.to_string(),
        pair_index: None,
        message: message.to_string(),
    };
    let log = record
        .get("log")
        .and_then(Value::as_array)
        .ok_or_else(|| schema_err("missing `log` list"))?;
    let mut turns = Vec::with_capacity(log.len());
    let mut carried = RawBelief::default();
    let mut domains = goal_domains(record.get("goal"));
    for (i, entry) in log.iter().enumerate() {
        let text = entry
            .get("text")
            .and_then(Value::as_str)
            .ok_or_else(|| CorpusError::Schema {
                dialogue_id: id.to_string(),
                pair_index: Some(i / 2),
                message: format!("log entry {i} has no `text`"),
            })?;
        if i % 2 == 0 {
            let belief = match log
                .get(i + 1)
                .and_then(|next| next.get("metadata"))
                .and_then(Value::as_object)
            {
                Some(meta) if !meta.is_empty() => belief_from_metadata(meta),
                _ => carried.clone(),
            };
            for (label, _) in &belief.0 {
                if let Some((domain, _)) = label.split_once('-') {
                    domains.insert(domain.to_string());
                }
            }
            carried = belief.clone();
            turns.push(RawTurn {
                speaker: Speaker::User,
                text: text.to_string(),
                belief: Some(belief),
            });
        } else {
            turns.push(RawTurn {
                speaker: Speaker::System,
                text: text.to_string(),
                belief: None,
            });
        }
    }
    Ok(RawDialogue {
        id: id.to_string(),
        domains: domains.into_iter().collect(),
        turns,
    })
}

/// Converts MultiWOZ records to the native raw layout, skipping ids in `exclude`.
pub fn to_raw(json: &str, origin: &str, exclude: &BTreeSet<String>) -> Result<Vec<RawDialogue>, CorpusError> {
    let root: Map<String, Value> = serde_json::from_str(json).map_err(|e| parse_error(origin, e))?;
    let mut ids: Vec<&String> = root.keys().filter(|k| !exclude.contains(*k)).collect();
    ids.sort();
    ids.into_iter().map(|id| convert(id, &root[id])).collect()
}

pub fn parse(json: &str, origin: &str, exclude: &BTreeSet<String>) -> Result<Corpus, CorpusError> {
    let raw = to_raw(json, origin, exclude)?;
    corpus_from_raw(&raw, origin)
}

/// Reads a MultiWOZ split list (one dialogue id per line, as in
/// `valListFile.json` / `testListFile.json`).
pub fn read_id_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

//! Per-domain corpus statistics.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::corpus::{Corpus, SlotLabel};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DomainStats {
    pub dialogues: usize,
    /// Mean of two turns per pair (the closing system turn included).
    pub turns_per_dialogue: f64,
    /// Mean count of distinct values per slot of this domain.
    pub values_per_slot: f64,
    pub slots: BTreeSet<SlotLabel>,
    /// Dialogues whose belief states mention each slot.
    pub slot_fill: BTreeMap<SlotLabel, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub dialogues: usize,
    pub pairs: usize,
    pub domains: BTreeMap<String, DomainStats>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut turns: BTreeMap<&str, usize> = BTreeMap::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut values: BTreeMap<SlotLabel, BTreeSet<&str>> = BTreeMap::new();
    let mut fill: BTreeMap<SlotLabel, usize> = BTreeMap::new();
    for d in &corpus.dialogues {
        for domain in &d.domains {
            *counts.entry(domain).or_default() += 1;
            *turns.entry(domain).or_default() += 2 * d.pairs.len();
        }
        let mut mentioned = BTreeSet::new();
        for pair in &d.pairs {
            for (label, value) in pair.belief.iter() {
                values.entry(label.clone()).or_default().insert(value.as_str());
                mentioned.insert(label.clone());
            }
        }
        for label in mentioned {
            *fill.entry(label).or_default() += 1;
        }
    }
    let mut domains: BTreeMap<String, DomainStats> = counts
        .iter()
        .map(|(domain, &n)| {
            let stats = DomainStats {
                dialogues: n,
                turns_per_dialogue: turns[domain] as f64 / n as f64,
                ..Default::default()
            };
            (domain.to_string(), stats)
        })
        .collect();
    for (label, vs) in &values {
        let entry = domains.entry(label.domain().to_string()).or_default();
        entry.slots.insert(label.clone());
        entry.values_per_slot += vs.len() as f64;
        entry.slot_fill.insert(label.clone(), fill[label]);
    }
    for stats in domains.values_mut() {
        if !stats.slots.is_empty() {
            stats.values_per_slot /= stats.slots.len() as f64;
        }
    }
    CorpusStats {
        dialogues: corpus.len(),
        pairs: corpus.pair_count(),
        domains,
    }
}

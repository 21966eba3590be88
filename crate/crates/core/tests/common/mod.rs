//! Test support shared by the core integration tests and the acceptance suite:
//! fixture loading, corpus generators, and brute-force oracles that work from
//! stored belief states instead of the bank indexes or the tree.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use dialaug_core::corpus::{corpus_from_raw, RawDialogue, RawTurn};
use dialaug_core::{CategoricalPolicy, Corpus, Dialogue, SlotValueDict, TurnPairTemplate};
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> Corpus {
    dialaug_core::load_corpus(&fixture(name), Default::default()).expect("fixture loads")
}

// ---------------------------------------------------------------------------
// Oracles

type Labels = BTreeSet<String>;

fn labels_of(b: &dialaug_core::BeliefState) -> Labels {
    b.iter().map(|(l, _)| l.as_str().to_string()).collect()
}

/// (prev, cur, next) label sets re-derived from the stored belief states.
pub fn derived_function(t: &TurnPairTemplate) -> (Option<Labels>, Labels, Option<Labels>) {
    (
        t.prev_belief.as_ref().map(labels_of),
        labels_of(&t.cur_belief),
        t.next_belief.as_ref().map(labels_of),
    )
}

/// Equality reading of both link conditions for appending `a` after `b`.
pub fn oracle_link(b: &TurnPairTemplate, a: &TurnPairTemplate) -> bool {
    let (_, b_cur, b_next) = derived_function(b);
    let (a_prev, a_cur, _) = derived_function(a);
    match (b_next, a_prev) {
        (Some(b_next), Some(a_prev)) => a_cur == b_next && a_prev == b_cur,
        _ => false,
    }
}

/// Exhaustive search over template sequences by position in `templates`.
#[derive(Debug, Default)]
pub struct PathOracle {
    /// Every legal sequence starting at an opening template (tree nodes).
    pub prefixes: usize,
    /// Legal sequences ending at a closing template, as template positions.
    pub complete: BTreeSet<Vec<usize>>,
}

pub fn enumerate_paths(templates: &[TurnPairTemplate], max_depth: usize, reuse: usize) -> PathOracle {
    fn extend(
        templates: &[TurnPairTemplate],
        path: &mut Vec<usize>,
        max_depth: usize,
        reuse: usize,
        out: &mut PathOracle,
    ) {
        out.prefixes += 1;
        let last = &templates[*path.last().unwrap()];
        let mut has_successor = false;
        if path.len() < max_depth {
            for (i, cand) in templates.iter().enumerate() {
                let used = path.iter().filter(|&&p| p == i).count();
                if used < reuse && oracle_link(last, cand) {
                    has_successor = true;
                    path.push(i);
                    extend(templates, path, max_depth, reuse, out);
                    path.pop();
                }
            }
        }
        if !has_successor && derived_function(last).2.is_none() {
            out.complete.insert(path.clone());
        }
    }
    let mut out = PathOracle::default();
    for (i, t) in templates.iter().enumerate() {
        if derived_function(t).0.is_none() {
            let mut path = vec![i];
            extend(templates, &mut path, max_depth, reuse, &mut out);
        }
    }
    out
}

/// Realized content: per pair (system, user, belief entries).
pub type Content = Vec<(String, String, Vec<(String, String)>)>;

pub fn dialogue_content(d: &Dialogue) -> Content {
    d.pairs
        .iter()
        .map(|p| {
            (
                p.system_utterance.clone(),
                p.user_utterance.clone(),
                p.belief
                    .iter()
                    .map(|(l, v)| (l.as_str().to_string(), v.as_str().to_string()))
                    .collect(),
            )
        })
        .collect()
}

/// Fills a template path by plain string replacement.
pub fn naive_realize(path: &[&TurnPairTemplate], values: &BTreeMap<String, String>) -> Content {
    let fill = |s: &str| {
        let mut s = s.to_string();
        for (l, v) in values {
            s = s.replace(&format!("[{l}]"), v);
        }
        s
    };
    let mut state: BTreeMap<String, String> = BTreeMap::new();
    let mut out = Vec::new();
    for t in path {
        for (l, v) in t.cur_belief.iter() {
            let l = l.as_str().to_string();
            match values.get(&l) {
                Some(assigned) => {
                    state.insert(l, assigned.clone());
                }
                None => {
                    state.entry(l).or_insert_with(|| v.as_str().to_string());
                }
            }
        }
        out.push((
            fill(&t.delex_system),
            fill(&t.delex_user),
            state.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        ));
    }
    out
}

/// Non-colliding value combinations for the given labels, by brute force.
pub fn product(labels: &[String], dict: &SlotValueDict) -> Vec<BTreeMap<String, String>> {
    let mut combos: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
    for l in labels {
        let label = dialaug_core::SlotLabel::parse(l).unwrap();
        let mut next = Vec::new();
        for c in &combos {
            for v in dict.get(&label) {
                let mut c = c.clone();
                c.insert(l.clone(), v.as_str().to_string());
                next.push(c);
            }
        }
        combos = next;
    }
    combos
        .into_iter()
        .filter(|c| {
            let vals: BTreeSet<&String> = c.values().collect();
            vals.len() == c.len()
        })
        .collect()
}

/// Labels of a path that take dictionary values.
pub fn oracle_assignable(path: &[&TurnPairTemplate], policy: &CategoricalPolicy) -> Vec<String> {
    let reserved = ["dontcare", "none", "yes", "no"];
    let set: BTreeSet<String> = path
        .iter()
        .flat_map(|t| t.cur_belief.iter())
        .filter(|(l, v)| !policy.labels.contains(*l) && !reserved.contains(&v.as_str()))
        .map(|(l, _)| l.as_str().to_string())
        .collect();
    set.into_iter().collect()
}

/// Every distinct dialogue the realizer can emit for these paths, minus the seeds.
pub fn distinct_space(
    templates: &[TurnPairTemplate],
    paths: &BTreeSet<Vec<usize>>,
    dict: &SlotValueDict,
    policy: &CategoricalPolicy,
    seeds: &Corpus,
) -> BTreeSet<Content> {
    let seed_content: BTreeSet<Content> = seeds.dialogues.iter().map(dialogue_content).collect();
    let mut space = BTreeSet::new();
    for p in paths {
        let path: Vec<&TurnPairTemplate> = p.iter().map(|&i| &templates[i]).collect();
        let labels = oracle_assignable(&path, policy);
        for values in product(&labels, dict) {
            let content = naive_realize(&path, &values);
            if !seed_content.contains(&content) {
                space.insert(content);
            }
        }
    }
    space
}

// ---------------------------------------------------------------------------
// Generators

const FILLERS: [&str; 14] = [
    "i", "need", "a", "ticket", "please", "thanks", "what", "about", "the", "to", "on", "ok", "great", "sure",
];

/// (label, candidate values). Vocabularies are disjoint across labels.
const CLEAN_SLOTS: [(&str, &[&str]); 5] = [
    ("train-destination", &["ely", "york", "bath", "hull"]),
    ("train-departure", &["leeds", "derby", "wells", "ripon"]),
    ("train-day", &["monday", "friday", "sunday"]),
    ("train-leaveat", &["09:00", "10:30", "18:15"]),
    ("hotel-area", &["north", "south", "centre"]),
];

fn words(rng_words: &[usize]) -> String {
    rng_words
        .iter()
        .map(|&i| FILLERS[i % FILLERS.len()])
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone)]
struct PairPlan {
    introduce: Vec<usize>,
    user_words: Vec<usize>,
    system_words: Vec<usize>,
    remention: Option<usize>,
}

fn pair_plan() -> impl Strategy<Value = PairPlan> {
    (
        prop::collection::vec(0..CLEAN_SLOTS.len(), 0..3),
        prop::collection::vec(0..FILLERS.len(), 1..4),
        prop::collection::vec(0..FILLERS.len(), 1..4),
        prop::option::of(0..CLEAN_SLOTS.len()),
    )
        .prop_map(|(introduce, user_words, system_words, remention)| PairPlan {
            introduce,
            user_words,
            system_words,
            remention,
        })
}

fn clean_dialogue(id: String) -> impl Strategy<Value = RawDialogue> {
    (
        prop::collection::vec(pair_plan(), 1..5),
        prop::collection::vec(0..4usize, CLEAN_SLOTS.len()),
        any::<bool>(),
    )
        .prop_map(move |(plans, picks, internet)| {
            let values: Vec<&str> = CLEAN_SLOTS
                .iter()
                .zip(&picks)
                .map(|((_, vs), &p)| vs[p % vs.len()])
                .collect();
            let mut belief: BTreeMap<String, String> = BTreeMap::new();
            let mut turns = Vec::new();
            for (k, plan) in plans.iter().enumerate() {
                let mut user = words(&plan.user_words);
                for &s in &plan.introduce {
                    let label = CLEAN_SLOTS[s].0;
                    if !belief.contains_key(label) {
                        belief.insert(label.to_string(), values[s].to_string());
                        user = format!("{user} {}", values[s]);
                    }
                }
                if internet && k == 0 {
                    belief.insert("hotel-internet".into(), "yes".into());
                }
                if k > 0 {
                    let mut system = words(&plan.system_words);
                    if let Some(r) = plan.remention {
                        if belief.contains_key(CLEAN_SLOTS[r].0) {
                            system = format!("{system} {} ?", values[r]);
                        }
                    }
                    turns.push(RawTurn::system(&system));
                }
                let entries: Vec<(&str, &str)> = belief.iter().map(|(l, v)| (l.as_str(), v.as_str())).collect();
                turns.push(RawTurn::user(&user, &entries));
            }
            RawDialogue {
                id: id.clone(),
                domains: vec!["hotel".into(), "train".into()],
                turns,
            }
        })
}

/// Corpora whose dialogues are cumulative, keep one value per slot, and never
/// share values across slots, so every pair survives delexicalization.
pub fn clean_corpus() -> impl Strategy<Value = Corpus> {
    (1..5usize)
        .prop_flat_map(|n| {
            (0..n)
                .map(|i| clean_dialogue(format!("g{i}")))
                .collect::<Vec<_>>()
        })
        .prop_map(|raw| corpus_from_raw(&raw, "generated").expect("generated corpus is valid"))
}

const MESSY_VALUES: [&str; 6] = ["ely", "york", "monday", "north", "ely station", "2"];
const MESSY_LABELS: [&str; 4] = ["train-destination", "train-departure", "train-day", "hotel-area"];

/// Arbitrary small corpora: shared values, value changes, dropped labels.
pub fn messy_corpus() -> impl Strategy<Value = Corpus> {
    let pair = (
        prop::collection::btree_map(0..MESSY_LABELS.len(), 0..MESSY_VALUES.len(), 0..4),
        prop::collection::vec(0..FILLERS.len(), 1..3),
        prop::collection::vec(0..MESSY_VALUES.len(), 0..3),
    );
    let dialogue = prop::collection::vec(pair, 1..5);
    prop::collection::vec(dialogue, 1..4).prop_map(|dialogues| {
        let raw: Vec<RawDialogue> = dialogues
            .into_iter()
            .enumerate()
            .map(|(i, pairs)| {
                let mut turns = Vec::new();
                for (k, (belief, fill, mentions)) in pairs.into_iter().enumerate() {
                    if k > 0 {
                        turns.push(RawTurn::system(&words(&fill)));
                    }
                    let mut user = words(&fill);
                    for m in mentions {
                        user = format!("{user} {}", MESSY_VALUES[m]);
                    }
                    let entries: Vec<(&str, &str)> = belief
                        .iter()
                        .map(|(&l, &v)| (MESSY_LABELS[l], MESSY_VALUES[v]))
                        .collect();
                    turns.push(RawTurn::user(&user, &entries));
                }
                RawDialogue {
                    id: format!("m{i}"),
                    domains: vec!["hotel".into(), "train".into()],
                    turns,
                }
            })
            .collect();
        corpus_from_raw(&raw, "messy").expect("messy corpus is structurally valid")
    })
}

//! Worked examples on the two-dialogue train fixture.

mod common;

use std::collections::BTreeSet;

use common::*;
use dialaug_core::bank::{LabelSet, TemplateId};
use dialaug_core::composer::Truncation;
use dialaug_core::*;

fn label(s: &str) -> SlotLabel {
    SlotLabel::parse(s).unwrap()
}

fn set(labels: &[&str]) -> LabelSet {
    labels.iter().map(|l| label(l)).collect()
}

fn t2_bank() -> (Corpus, CategoricalPolicy, TemplateBank) {
    let corpus = load_fixture("t2.json");
    let policy = classify_slots(&corpus, &ClassifyConfig::default());
    let bank = build_bank(&corpus, &policy).unwrap();
    (corpus, policy, bank)
}

#[test]
fn loads_two_dialogues_six_pairs() {
    let corpus = load_fixture("t2.json");
    assert_eq!(corpus.len(), 2);
    assert_eq!(corpus.pair_count(), 6);
}

#[test]
fn fixture_is_cumulative() {
    let corpus = load_fixture("t2.json");
    for d in &corpus.dialogues {
        assert!(validate_dialogue(d, true).is_empty(), "{:?}", validate_dialogue(d, true));
    }
}

#[test]
fn sampling_whole_population() {
    let corpus = load_fixture("t2.json");
    for seed in [0, 1, 99] {
        let s = sample_shots(&corpus, 2, "train", seed, Eligibility::Touching).unwrap();
        let ids: Vec<_> = s.dialogues.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["d1", "d2"]);
    }
    assert!(matches!(
        sample_shots(&corpus, 3, "train", 0, Eligibility::Touching),
        Err(CorpusError::InsufficientData { .. })
    ));
}

#[test]
fn no_categorical_labels_and_harvest() {
    let (corpus, policy, _) = t2_bank();
    assert!(policy.labels.is_empty());
    let dict = harvest_values(&corpus, &policy);
    let values = |l: &str| dict.get(&label(l)).iter().map(|v| v.as_str().to_string()).collect::<Vec<_>>();
    assert_eq!(dict.len(), 2);
    assert_eq!(values("train-destination"), ["cambridge", "london"]);
    assert_eq!(values("train-day"), ["monday", "friday"]);
}

#[test]
fn only_categorical_slots_harvest_nothing() {
    let corpus = load_fixture("t2.json");
    let policy = CategoricalPolicy::with_labels([label("train-destination"), label("train-day")]);
    assert!(harvest_values(&corpus, &policy).is_empty());
}

#[test]
fn d1_template_functions() {
    let (_, _, bank) = t2_bank();
    let d1: Vec<_> = bank.templates.iter().filter(|t| t.source.dialogue_id == "d1").collect();
    assert_eq!(d1.len(), 3);
    let dest = set(&["train-destination"]);
    let both = set(&["train-destination", "train-day"]);
    assert_eq!(
        (d1[0].function.prev.clone(), d1[0].function.cur.clone(), d1[0].function.next.clone()),
        (None, dest.clone(), Some(both.clone()))
    );
    assert_eq!(
        (d1[1].function.prev.clone(), d1[1].function.cur.clone(), d1[1].function.next.clone()),
        (Some(dest), both.clone(), Some(both.clone()))
    );
    assert_eq!(
        (d1[2].function.prev.clone(), d1[2].function.cur.clone(), d1[2].function.next.clone()),
        (Some(both.clone()), both, None)
    );
    assert_eq!(d1[0].delex_user, "i need a train to [train-destination]");
    assert_eq!(d1[1].delex_user, "[train-day] please");
}

#[test]
fn bank_counts() {
    let (_, _, bank) = t2_bank();
    assert_eq!(bank.len(), 6);
    assert_eq!(bank.roots.len(), 2);
    assert_eq!(bank.terminals.len(), 2);
    let bucketed: usize = bank.by_prev.values().map(Vec::len).sum();
    assert_eq!(bucketed, 6);
}

#[test]
fn successors_and_links() {
    let (_, _, bank) = t2_bank();
    // ids in dialogue-then-pair order: d1 = t0..t2, d2 = t3..t5
    let t = |i| bank.get(TemplateId(i));
    assert_eq!(bank.successors(t(0), LinkSemantics::Equality), vec![TemplateId(1), TemplateId(4)]);
    assert_eq!(bank.successors(t(1), LinkSemantics::Equality), vec![TemplateId(2), TemplateId(5)]);
    assert!(bank.successors(t(2), LinkSemantics::Equality).is_empty());
    assert!(check_link(t(0), t(4), LinkSemantics::Equality));
    assert!(!check_link(t(0), t(2), LinkSemantics::Equality));
    for b in &bank.templates {
        let bucket: BTreeSet<_> = bank
            .by_prev
            .get(&Some(b.function.cur.clone()))
            .cloned()
            .unwrap_or_default()
            .into_iter()
            .collect();
        for s in bank.successors(b, LinkSemantics::Equality) {
            assert!(bucket.contains(&s));
        }
    }
}

#[test]
fn tree_and_dialogue_templates() {
    let (_, _, bank) = t2_bank();
    let tree = grow_tree(&bank, &GrowthLimits::default(), LinkSemantics::Equality).unwrap();
    assert_eq!(tree.len(), 14);
    assert_eq!(tree.truncated, None);
    let per_depth: Vec<usize> = (1..=3).map(|d| tree.nodes.iter().filter(|n| n.depth == d).count()).collect();
    assert_eq!(per_depth, [2, 4, 8]);
    let dts = extract_dialogue_templates(&tree, &bank).unwrap();
    assert_eq!(dts.len(), 8);
    let mut sorted = dts.clone();
    sorted.sort_by(|a, b| a.templates.cmp(&b.templates));
    assert_eq!(sorted, dts);
}

#[test]
fn depth_two_truncates_and_closes_nothing() {
    let (_, _, bank) = t2_bank();
    let limits = GrowthLimits {
        max_depth: 2,
        ..Default::default()
    };
    let tree = grow_tree(&bank, &limits, LinkSemantics::Equality).unwrap();
    assert_eq!(tree.len(), 6);
    assert_eq!(tree.truncated, Some(Truncation::DepthLimit));
    assert_eq!(
        extract_dialogue_templates(&tree, &bank).unwrap_err(),
        dialaug_core::composer::ComposeError::NoCompleteDialogue
    );
}

#[test]
fn node_budget_truncates_deterministically() {
    let (_, _, bank) = t2_bank();
    let limits = GrowthLimits {
        max_nodes: 10,
        ..Default::default()
    };
    let a = grow_tree(&bank, &limits, LinkSemantics::Equality).unwrap();
    let b = grow_tree(&bank, &limits, LinkSemantics::Equality).unwrap();
    assert_eq!(a.len(), 10);
    assert_eq!(a.truncated, Some(Truncation::NodeBudget));
    assert_eq!(a.nodes, b.nodes);
    // the four kept leaves at depth 3 are the children of the first two middles
    let dts = extract_dialogue_templates(&a, &bank).unwrap();
    assert_eq!(dts.len(), 4);
}

#[test]
fn four_assignments_per_template() {
    let (corpus, policy, bank) = t2_bank();
    let dict = harvest_values(&corpus, &policy);
    let tree = grow_tree(&bank, &GrowthLimits::default(), LinkSemantics::Equality).unwrap();
    let dts = extract_dialogue_templates(&tree, &bank).unwrap();
    for dt in &dts {
        let all = enumerate_assignments(dt, &bank, &dict, &RealizationBudget::default(), &policy).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), 4);
    }
}

#[test]
fn realize_mixed_path() {
    let (corpus, policy, bank) = t2_bank();
    let _ = (corpus, policy);
    let dt = composer::DialogueTemplate::from_path(&bank, vec![TemplateId(0), TemplateId(4), TemplateId(2)]);
    let a = Assignment(
        [
            (label("train-destination"), SlotValue::new("london").unwrap()),
            (label("train-day"), SlotValue::new("monday").unwrap()),
        ]
        .into(),
    );
    let synthetic = realize(&dt, &a, &bank).unwrap();
    let d = &synthetic.dialogue;
    assert_eq!(d.pairs.len(), 3);
    assert_eq!(d.pairs[0].user_utterance, "i need a train to london");
    assert_eq!(d.pairs[1].system_utterance, "which day would you like to leave ?");
    assert_eq!(d.pairs[1].user_utterance, "on monday");
    let last = &d.pairs[2].belief;
    assert_eq!(last.len(), 2);
    assert_eq!(last.get(&label("train-destination")).unwrap().as_str(), "london");
    assert_eq!(last.get(&label("train-day")).unwrap().as_str(), "monday");
    assert!(synthetic.dialogue.id.starts_with("syn-"));
    assert_eq!(synthetic.provenance.source_dialogue_ids, BTreeSet::from(["d1".into(), "d2".into()]));
}

#[test]
fn realize_reports_uncovered_placeholder() {
    let (_, _, bank) = t2_bank();
    let dt = composer::DialogueTemplate::from_path(&bank, vec![TemplateId(0), TemplateId(1), TemplateId(2)]);
    let a = Assignment([(label("train-destination"), SlotValue::new("london").unwrap())].into());
    assert!(matches!(
        realize(&dt, &a, &bank),
        Err(realizer::RealizeError::ResidualPlaceholder { .. })
    ));
}

#[test]
fn own_path_round_trips() {
    let (corpus, _, bank) = t2_bank();
    for (d, path) in corpus.dialogues.iter().zip([[0, 1, 2], [3, 4, 5]]) {
        let dt = composer::DialogueTemplate::from_path(&bank, path.iter().map(|&i| TemplateId(i)).collect());
        let last = &d.pairs.last().unwrap().belief;
        let a = Assignment(last.iter().map(|(l, v)| (l.clone(), v.clone())).collect());
        let r = realize(&dt, &a, &bank).unwrap();
        assert_eq!(r.dialogue.pairs, d.pairs);
    }
}

#[test]
fn ratio_ten_emits_twenty_distinct() {
    let (corpus, policy, bank) = t2_bank();
    let dict = harvest_values(&corpus, &policy);
    let tree = grow_tree(&bank, &GrowthLimits::default(), LinkSemantics::Equality).unwrap();
    let dts = extract_dialogue_templates(&tree, &bank).unwrap();
    let budget = RealizationBudget {
        ratio: 10.0,
        seed: 3,
        ..Default::default()
    };
    let out = generate(&corpus, &bank, &dts, &dict, &budget, &policy).unwrap();
    assert_eq!(out.requested, 20);
    assert_eq!(out.dialogues.len(), 20);
    assert!(!out.exhausted);
    let keys: BTreeSet<_> = out.dialogues.iter().map(|s| realizer::content_key(&s.dialogue)).collect();
    assert_eq!(keys.len(), 20);
    for s in &corpus.dialogues {
        assert!(!keys.contains(&realizer::content_key(s)));
    }
}

#[test]
fn sampled_mode_respects_cap() {
    let (corpus, policy, bank) = t2_bank();
    let dict = harvest_values(&corpus, &policy);
    let dt = composer::DialogueTemplate::from_path(&bank, vec![TemplateId(0), TemplateId(1), TemplateId(2)]);
    let budget = RealizationBudget {
        mode: RealizationMode::Sampled,
        cap: 3,
        ..Default::default()
    };
    let a = enumerate_assignments(&dt, &bank, &dict, &budget, &policy).unwrap();
    let b = enumerate_assignments(&dt, &bank, &dict, &budget, &policy).unwrap();
    assert_eq!(a.len(), 3);
    assert_eq!(a, b);
    let big = RealizationBudget { cap: 50, ..budget };
    assert_eq!(enumerate_assignments(&dt, &bank, &dict, &big, &policy).unwrap().len(), 4);
}

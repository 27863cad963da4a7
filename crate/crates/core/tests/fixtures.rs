//! Integration checks over the shipped fixture corpus: replica test-set
//! membership, planted detector recovery through the public pipeline, and
//! dataset round-tripping at fixture scale.

use std::path::{Path, PathBuf};

use botwatch_core::corpus::{
    build_test_set, load_dataset, load_manifest, save_dataset, test_set_from_manifest,
    LabeledDataset,
};
use botwatch_core::disttest::{calibrate_threshold, tamper_test, ScoreKind};
use botwatch_core::graphdetect::{
    build_graph, extract_features, fastgreedy, label_clusters, LabelingMode,
};
use botwatch_core::Verdict;

fn fixture_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(rel: &str, name: &str) -> LabeledDataset {
    load_dataset(&fixture_root().join(rel), name, None)
        .unwrap_or_else(|e| panic!("fixture {rel}: {e}"))
}

#[test]
fn replica_test_set_1_has_1982_balanced_members() {
    let genuine = load("datasets/genuine_accounts", "genuine_accounts");
    let bots = load("datasets/social_spambots_1", "social_spambots_1");
    let ids = load_manifest(&fixture_root().join("manifests/test_set_1.txt")).unwrap();
    let test_set = test_set_from_manifest("test_set_1", &[&genuine, &bots], &ids).unwrap();
    assert_eq!(test_set.members.len(), 1982);
    assert_eq!(test_set.positives(), 991);
    assert_eq!(test_set.negatives(), 991);
}

#[test]
fn replica_test_set_2_has_928_balanced_members() {
    let genuine = load("datasets/genuine_accounts", "genuine_accounts");
    let bots = load("datasets/social_spambots_3", "social_spambots_3");
    let ids = load_manifest(&fixture_root().join("manifests/test_set_2.txt")).unwrap();
    let test_set = test_set_from_manifest("test_set_2", &[&genuine, &bots], &ids).unwrap();
    assert_eq!(test_set.members.len(), 928);
    assert_eq!(test_set.positives(), 464);
    assert_eq!(test_set.negatives(), 464);
}

#[test]
fn seeded_mix_of_fixture_datasets_is_balanced_and_reproducible() {
    let genuine = load("datasets/genuine_accounts", "genuine_accounts");
    let bots = load("datasets/social_spambots_3", "social_spambots_3");
    let a = build_test_set(&genuine, &bots, 7).unwrap();
    let b = build_test_set(&genuine, &bots, 7).unwrap();
    assert_eq!(a.members.len(), 2 * bots.account_count());
    assert_eq!(a.positives(), a.negatives());
    let ids_a: Vec<_> = a.ids().collect();
    let ids_b: Vec<_> = b.ids().collect();
    assert_eq!(ids_a, ids_b);
}

#[test]
fn planted_graph_fixture_recovered_by_heuristic_labeling() {
    let dataset = load("planted/graph_planted", "graph_planted");
    let timelines = dataset.timelines();
    let vectors: Vec<_> = dataset
        .accounts()
        .iter()
        .map(|account| extract_features(account, &timelines[&account.id]))
        .collect();
    let graph = build_graph(&vectors).unwrap();
    let partition = fastgreedy(&graph);
    let labels = label_clusters(&graph, &partition, LabelingMode::Heuristic);
    assert!(!labels.degenerate_partition);
    for account in dataset.accounts() {
        let expected = if account.id.as_str().starts_with("graph_bot_") {
            Verdict::Spambot
        } else {
            Verdict::Genuine
        };
        assert_eq!(labels.verdicts[&account.id], expected, "account {}", account.id);
    }
}

#[test]
fn narrow_join_window_group_flags_as_tampered_against_genuine() {
    let genuine = load("datasets/genuine_accounts", "genuine_accounts");
    let bots = load("datasets/social_spambots_1", "social_spambots_1");
    let threshold =
        calibrate_threshold(genuine.accounts(), ScoreKind::JoinDate, 16, 200, 42).unwrap();
    let verdict =
        tamper_test(bots.accounts(), genuine.accounts(), ScoreKind::JoinDate, 16, threshold)
            .unwrap();
    assert!(verdict.tampered, "kl {} vs threshold {}", verdict.kl_value, verdict.threshold);
}

#[test]
fn fixture_dataset_round_trips_through_save() {
    let original = load("datasets/social_spambots_3", "social_spambots_3");
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&original, dir.path()).unwrap();
    let reloaded = load_dataset(dir.path(), "social_spambots_3", None).unwrap();
    assert_eq!(original.accounts(), reloaded.accounts());
    assert_eq!(original.tweets(), reloaded.tweets());
}

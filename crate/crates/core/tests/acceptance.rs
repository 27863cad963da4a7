//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Expected values come from the bundled reference tables. A handful of
//! reference cells are arithmetically inconsistent with their own printed
//! counts (no uniform rounding rule can produce them); those cells are
//! asserted against the count-derived values instead and are called out
//! inline where they occur.
//!
//! The oracles here (substring enumeration, exhaustive partition search)
//! are deliberately re-implemented in test code, independent of the library
//! paths they check.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use botwatch_core::corpus::{load_dataset, LabeledDataset};
use botwatch_core::disttest::{kl_divergence, ScoreDistribution, ScoreKind};
use botwatch_core::dna::{
    classify_group, encode_account, find_split, lcs_curve, DnaAlphabet, DnaSequence,
};
use botwatch_core::evalkit::{
    audit_scores, chi_square_effect, fleiss_kappa, survivability, ConfusionMatrix, Outcome,
    PrintedScores, Stars, SurvivabilityRow,
};
use botwatch_core::graphdetect::{
    fastgreedy, label_clusters, modularity, LabelingMode, SimilarityGraph,
};
use botwatch_core::corpus::AccountId;
use botwatch_core::Verdict;

fn fixture_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load_fixture_dataset(rel: &str, name: &str) -> LabeledDataset {
    load_dataset(&fixture_root().join(rel), name, None)
        .unwrap_or_else(|e| panic!("fixture {rel}: {e}"))
}

const DATASET_DIRS: [(&str, &str); 7] = [
    ("datasets/genuine_accounts", "genuine_accounts"),
    ("datasets/social_spambots_1", "social_spambots_1"),
    ("datasets/social_spambots_2", "social_spambots_2"),
    ("datasets/social_spambots_3", "social_spambots_3"),
    ("datasets/traditional_spambots_1", "traditional_spambots_1"),
    ("datasets/traditional_spambots_2", "traditional_spambots_2"),
    ("datasets/fake_followers", "fake_followers"),
];

fn load_probe_datasets() -> Vec<LabeledDataset> {
    DATASET_DIRS.iter().map(|(rel, name)| load_fixture_dataset(rel, name)).collect()
}

// ---------------------------------------------------------------------------
// criterion 1: survivability table replica
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_survivability_table_replica() {
    let started = Instant::now();
    let datasets = load_probe_datasets();
    let refs: Vec<&LabeledDataset> = datasets.iter().collect();
    let report = survivability(&refs).expect("survivability");

    // (name, total, alive, alive%, deleted, deleted%, suspended, suspended%)
    // Three percentage cells differ from the published table, which prints
    // 0.1 / 0.1 / 3.8 where its own counts give 0.17 / 0.03 / 3.88; the
    // count-derived values are asserted for those cells.
    type Row = (
        &'static str,
        u64,
        u64,
        &'static str,
        u64,
        &'static str,
        u64,
        &'static str,
    );
    let expected: [Row; 7] = [
        ("genuine_accounts", 3474, 3353, "96.5", 115, "3.3", 6, "0.2"),
        ("social_spambots_1", 994, 946, "95.2", 2, "0.2", 46, "4.6"),
        ("social_spambots_2", 3457, 3322, "96.1", 1, "0.0", 134, "3.9"),
        ("social_spambots_3", 467, 465, "99.6", 2, "0.4", 0, "0.0"),
        ("traditional_spambots_1", 1000, 889, "88.9", 25, "2.5", 86, "8.6"),
        ("traditional_spambots_2", 100, 1, "1.0", 0, "0.0", 99, "99.0"),
        ("fake_followers", 3351, 851, "25.4", 38, "1.1", 2462, "73.5"),
    ];

    assert_eq!(report.rows.len(), expected.len());
    for (row, exp) in report.rows.iter().zip(&expected) {
        let (name, total, alive, alive_pct, deleted, deleted_pct, suspended, suspended_pct) = *exp;
        assert_eq!(row.dataset, name);
        assert_eq!(row.total, total, "{name} total");
        assert_eq!(row.alive, alive, "{name} alive");
        assert_eq!(row.deleted, deleted, "{name} deleted");
        assert_eq!(row.suspended, suspended, "{name} suspended");
        assert_eq!(row.alive + row.deleted + row.suspended, row.total, "{name} sums");
        assert_eq!(row.percent_str(Outcome::Alive), alive_pct, "{name} alive%");
        assert_eq!(row.percent_str(Outcome::Deleted), deleted_pct, "{name} deleted%");
        assert_eq!(row.percent_str(Outcome::Suspended), suspended_pct, "{name} suspended%");
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "survivability replica took {elapsed:?}");
    println!(
        "ACCEPTANCE criterion 1 (survivability table replica): PASS ({} rows, {elapsed:?})",
        report.rows.len()
    );
}

// ---------------------------------------------------------------------------
// criterion 2: effect sizes and significance stars
// ---------------------------------------------------------------------------

/// Frozen cross-check values from an independent implementation (scipy
/// chi2_contingency with continuity correction): (dataset, outcome,
/// chi-square statistic, p-value).
const FROZEN_CHI2: [(&str, Outcome, f64, f64); 18] = [
    ("social_spambots_1", Outcome::Alive, 3.486194260177834, 0.06188269478408202),
    ("social_spambots_1", Outcome::Deleted, 28.09045834107339, 1.1577525840057738e-7),
    ("social_spambots_1", Outcome::Suspended, 129.50822060244167, 5.249858420951816e-30),
    ("social_spambots_2", Outcome::Alive, 0.7532955176220643, 0.38543485198994065),
    ("social_spambots_2", Outcome::Deleted, 111.38887067323608, 4.863155753867705e-26),
    ("social_spambots_2", Outcome::Suspended, 118.21961043823161, 1.552151355645683e-27),
    ("social_spambots_3", Outcome::Alive, 11.714472484145048, 0.0006201588864772736),
    ("social_spambots_3", Outcome::Deleted, 10.890560786518833, 0.0009665556042860482),
    ("social_spambots_3", Outcome::Suspended, 0.07113580658943292, 0.7896901695096896),
    ("traditional_spambots_1", Outcome::Alive, 90.08636028935422, 2.279880455594307e-21),
    ("traditional_spambots_1", Outcome::Deleted, 1.4252288767555847, 0.23254466929629872),
    ("traditional_spambots_1", Outcome::Suspended, 269.6366757341597, 1.361740600828023e-60),
    ("traditional_spambots_2", Outcome::Alive, 1518.6913525685968, 0.0),
    ("traditional_spambots_2", Outcome::Deleted, 2.439962261127499, 0.11827907126789372),
    ("traditional_spambots_2", Outcome::Suspended, 3294.6686250401012, 0.0),
    ("fake_followers", Outcome::Alive, 3644.3650778838874, 0.0),
    ("fake_followers", Outcome::Deleted, 35.87766859079963, 2.1010306571739947e-9),
    ("fake_followers", Outcome::Suspended, 3966.5208327969394, 0.0),
];

#[test]
fn criterion_2_effect_sizes_and_star_pattern() {
    let started = Instant::now();
    let datasets = load_probe_datasets();
    let refs: Vec<&LabeledDataset> = datasets.iter().collect();
    let report = survivability(&refs).expect("survivability");
    let baseline = &report.rows[0];

    // Published effect values per (dataset, alive/deleted/suspended). Cells
    // marked with a corrected value are inconsistent with the published
    // counts: the suspended column was printed from a rounded 0.1% baseline
    // (true baseline ratio 0.17%), and the traditional_spambots_1 suspended
    // cell (+8.7) violates its own row's zero-sum, so the count-derived
    // effects are asserted there.
    struct Cell {
        expected_pp: f64,
        corrected: bool,
        stars: Stars,
    }
    let cell = |expected_pp: f64, corrected: bool, stars: Stars| Cell {
        expected_pp,
        corrected,
        stars,
    };
    let expected: [(&str, [Cell; 3]); 6] = [
        (
            "social_spambots_1",
            [
                cell(-1.3, false, Stars::One),
                cell(-3.1, false, Stars::Three),
                cell(4.5, false, Stars::Three),
            ],
        ),
        (
            "social_spambots_2",
            [
                cell(-0.4, false, Stars::None),
                cell(-3.281378, true, Stars::Three), // published -3.2
                cell(3.7, false, Stars::Three),
            ],
        ),
        (
            "social_spambots_3",
            [
                cell(3.1, false, Stars::Three),
                cell(-2.9, false, Stars::Three),
                cell(-0.172712, true, Stars::None), // published -0.1
            ],
        ),
        (
            "traditional_spambots_1",
            [
                cell(-7.6, false, Stars::Three),
                cell(-0.8, false, Stars::None),
                cell(8.427288, true, Stars::Three), // published +8.7
            ],
        ),
        (
            "traditional_spambots_2",
            [
                cell(-95.5, false, Stars::Three),
                cell(-3.3, false, Stars::None),
                cell(98.827288, true, Stars::Three), // published +98.9
            ],
        ),
        (
            "fake_followers",
            [
                cell(-71.1, false, Stars::Three),
                cell(-2.2, false, Stars::Three),
                cell(73.297903, true, Stars::Three), // published +73.4
            ],
        ),
    ];

    let mut frozen: HashMap<(&str, &str), (f64, f64)> = HashMap::new();
    for (name, outcome, chi2, p) in FROZEN_CHI2 {
        frozen.insert((name, outcome.as_str()), (chi2, p));
    }

    for (name, cells) in &expected {
        let target = report.row(name).unwrap_or_else(|| panic!("row {name}"));
        for (outcome, cell) in Outcome::ALL.iter().zip(cells) {
            let result = chi_square_effect(target, baseline, *outcome);
            let tolerance = if cell.corrected { 1e-4 } else { 0.05 };
            assert!(
                (result.effect_pp - cell.expected_pp).abs() <= tolerance,
                "{name}/{}: effect {:.4} vs expected {:.4}",
                outcome.as_str(),
                result.effect_pp,
                cell.expected_pp
            );
            assert_eq!(
                result.stars,
                cell.stars,
                "{name}/{}: stars `{}` (p={}) vs published `{}`",
                outcome.as_str(),
                result.stars,
                result.p_value,
                cell.stars
            );

            let (chi2, p) = frozen[&(*name, outcome.as_str())];
            assert!(
                (result.chi_square - chi2).abs() <= 1e-6 * chi2.max(1.0),
                "{name}/{}: chi2 {} vs frozen {chi2}",
                outcome.as_str(),
                result.chi_square
            );
            assert!(
                (result.p_value - p).abs() <= 1e-9,
                "{name}/{}: p {} vs frozen {p}",
                outcome.as_str(),
                result.p_value
            );
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "effect-size replica took {elapsed:?}");
    println!("ACCEPTANCE criterion 2 (effect sizes + star pattern, 18 cells): PASS ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// criterion 3: annotation-campaign accuracies from outcome counts
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_annotation_accuracies() {
    // (tp, tn, fp, fn, published accuracy to 4 decimals)
    let rows = [
        (1385u64, 0u64, 0u64, 131u64, 0.9136),
        (328, 0, 0, 1065, 0.2355),
        (0, 1267, 110, 0, 0.9201),
    ];
    for (tp, tn, fp, fn_, published) in rows {
        let cm = ConfusionMatrix::new(tp, tn, fp, fn_);
        let accuracy = cm.metrics().expect("metrics").accuracy;
        assert!(
            (accuracy - published).abs() < 0.00005,
            "accuracy {accuracy:.6} vs published {published}"
        );
    }
    // The published agreement values are not recomputable without the raw
    // per-answer data; the agreement kernel itself is covered by
    // criterion 6.
    println!("ACCEPTANCE criterion 3 (annotation accuracies to 4 decimals): PASS");
}

// ---------------------------------------------------------------------------
// criterion 4: detector score table consistency audit
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_score_table_consistency() {
    let path = fixture_root().join("reference/detector_scores.csv");
    let mut reader = csv::Reader::from_path(&path).expect("reference scores fixture");
    let mut audited = 0usize;
    let mut inconsistent = Vec::new();
    for record in reader.records() {
        let record = record.expect("record");
        let positives: u64 = record[1].parse().unwrap();
        let row = PrintedScores {
            test_set: record[0].to_owned(),
            technique: record[2].to_owned(),
            kind: record[3].to_owned(),
            precision: record[4].parse().unwrap(),
            recall: record[5].parse().unwrap(),
            specificity: record[6].parse().unwrap(),
            accuracy: record[7].parse().unwrap(),
            f_measure: record[8].parse().unwrap(),
            mcc: record[9].parse().unwrap(),
        };
        let audit = audit_scores(&row, positives);
        assert!(
            audit.f_consistent(0.001),
            "{}/{}: F delta {}",
            row.test_set,
            row.technique,
            audit.f_delta
        );
        if !audit.accuracy_consistent(0.005) {
            inconsistent.push((row.test_set.clone(), row.technique.clone(), audit));
        }
        audited += 1;
    }
    assert_eq!(audited, 14);

    // Exactly one published row is internally contradictory: its precision,
    // recall, and specificity jointly imply an accuracy near 0.980 for any
    // population, against a printed 0.922. The audit must catch it, and
    // nothing else.
    assert_eq!(inconsistent.len(), 1, "unexpected inconsistent rows: {:?}",
        inconsistent.iter().map(|(t, n, _)| format!("{t}/{n}")).collect::<Vec<_>>());
    let (test_set, technique, audit) = &inconsistent[0];
    assert_eq!((test_set.as_str(), technique.as_str()), ("test_set_2", "botornot"));
    assert!((audit.accuracy_recomputed.unwrap() - 0.980).abs() < 0.001);
    assert!((audit.accuracy_delta.unwrap() - 0.058).abs() < 0.001);

    println!(
        "ACCEPTANCE criterion 4 (score-table consistency audit): PASS \
         (14 rows F-consistent at ±0.001; 13 rows accuracy-consistent at ±0.005; \
         the one contradictory row flagged)"
    );
}

// ---------------------------------------------------------------------------
// criterion 5: behavioral-sequence detector property suite
// ---------------------------------------------------------------------------

/// Independent oracle: enumerate every substring of every sequence and keep,
/// per distinct-sequence count, the longest length observed.
fn oracle_curve(seqs: &[String]) -> Vec<usize> {
    let n = seqs.len();
    let mut masks: HashMap<&str, u64> = HashMap::new();
    for (idx, seq) in seqs.iter().enumerate() {
        for start in 0..seq.len() {
            for end in start + 1..=seq.len() {
                *masks.entry(&seq[start..end]).or_default() |= 1 << idx;
            }
        }
    }
    let mut best = vec![0usize; n + 1];
    for (substring, mask) in masks {
        let count = mask.count_ones() as usize;
        if count >= 2 && substring.len() > best[count] {
            best[count] = substring.len();
        }
    }
    for k in (2..n).rev() {
        best[k] = best[k].max(best[k + 1]);
    }
    (2..=n).map(|k| best[k]).collect()
}

#[test]
fn criterion_5_dna_detector_suite() {
    let started = Instant::now();

    // 200 random instances against the substring-enumeration oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(0x0D7A_5EED);
    for instance in 0..200 {
        let n = rng.random_range(2..=8);
        let seqs: Vec<String> = (0..n)
            .map(|_| {
                let len = rng.random_range(1..=32);
                (0..len).map(|_| ['A', 'C', 'T'][rng.random_range(0..3)]).collect()
            })
            .collect();
        let dna: Vec<DnaSequence> = seqs
            .iter()
            .enumerate()
            .map(|(i, s)| DnaSequence { account_id: AccountId(format!("a{i}")), symbols: s.clone() })
            .collect();
        let curve = lcs_curve(&dna).expect("curve");
        let got: Vec<usize> = curve.points().iter().map(|p| p.lcs).collect();
        let expected = oracle_curve(&seqs);
        assert_eq!(got, expected, "instance {instance} sequences {seqs:?}");
        for pair in curve.points().windows(2) {
            assert!(pair[0].lcs >= pair[1].lcs, "instance {instance} not monotone");
        }
    }

    // Planted fixture: 10 bots sharing a 200-symbol block among 20 accounts.
    let dataset = load_fixture_dataset("planted/dna_planted", "dna_planted");
    let alphabet = DnaAlphabet::standard();
    let timelines = dataset.timelines();
    let sequences: Vec<DnaSequence> = dataset
        .accounts()
        .iter()
        .map(|a| encode_account(a, &timelines[&a.id], &alphabet).expect("encode"))
        .collect();
    let curve = lcs_curve(&sequences).expect("curve");
    let k_star = find_split(&curve).expect("split");
    assert_eq!(k_star, Some(10), "expected the split at the planted group size");
    assert_eq!(curve.lcs_at(10), Some(200), "expected the planted block length");
    let split = classify_group(&sequences, &curve, k_star).expect("classify");

    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for account in dataset.accounts() {
        let is_bot = account.id.as_str().starts_with("dna_bot_");
        let flagged = split.verdicts[&account.id] == Verdict::Spambot;
        match (is_bot, flagged) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    assert_eq!((tp, fp, fn_), (10, 0, 0), "planted recovery must be exact");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "dna suite took {elapsed:?}");
    println!(
        "ACCEPTANCE criterion 5 (dna detector: 200 oracle instances + planted recovery \
         precision=recall=1.0): PASS ({elapsed:?})"
    );
}

// ---------------------------------------------------------------------------
// criterion 6: statistical kernels
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_statistical_kernels() {
    // KL(p, p) = 0 exactly.
    let dist = |probs: Vec<f64>| ScoreDistribution {
        kind: ScoreKind::FollowersCount,
        edges: (0..=probs.len()).map(|i| i as f64).collect(),
        probabilities: probs,
        sample_count: 100,
    };
    let p = dist(vec![0.5, 0.5]);
    assert!(kl_divergence(&p, &p).unwrap().abs() <= 1e-12);

    // Direct two-term summation oracle:
    //   0.5·ln(0.5/0.9) + 0.5·ln(0.5/0.1) = 0.5108256237659907
    // (the reverse direction gives 0.3680642071684971, documenting the
    // asymmetry of the distance).
    let q = dist(vec![0.9, 0.1]);
    let forward = kl_divergence(&p, &q).unwrap();
    let backward = kl_divergence(&q, &p).unwrap();
    assert!((forward - 0.5108256237659907).abs() <= 1e-12, "forward {forward}");
    assert!((backward - 0.3680642071684971).abs() <= 1e-12, "backward {backward}");

    // Agreement kernel: hand evaluation of the counts matrix
    // [[3,0],[0,3],[2,1],[1,2]] gives item agreements (1, 1, 1/3, 1/3),
    // mean 2/3, chance agreement 1/2, kappa (2/3 − 1/2)/(1/2) = 1/3.
    let mixed = fleiss_kappa(&[vec![3, 0], vec![0, 3], vec![2, 1], vec![1, 2]]).unwrap();
    assert!((mixed.kappa - 1.0 / 3.0).abs() <= 1e-6, "kappa {}", mixed.kappa);

    // Unanimous multi-category data agrees perfectly.
    let unanimous = fleiss_kappa(&[vec![4, 0, 0], vec![0, 4, 0], vec![0, 0, 4]]).unwrap();
    assert!((unanimous.kappa - 1.0).abs() <= 1e-12);

    // Chi-square of identical groups: statistic 0, p exactly 1.
    let row = SurvivabilityRow {
        dataset: "g".into(),
        total: 3474,
        alive: 3353,
        deleted: 115,
        suspended: 6,
    };
    for outcome in Outcome::ALL {
        let result = chi_square_effect(&row, &row, outcome);
        assert_eq!(result.p_value, 1.0);
        assert_eq!(result.effect_pp, 0.0);
    }

    println!("ACCEPTANCE criterion 6 (statistical kernels): PASS");
}

// ---------------------------------------------------------------------------
// criterion 7: graph detector against exhaustive modularity search
// ---------------------------------------------------------------------------

/// Independent oracle: maximum modularity over every partition, by
/// exhaustive assignment enumeration.
fn exhaustive_best_modularity(graph: &SimilarityGraph) -> f64 {
    fn recurse(
        graph: &SimilarityGraph,
        assignment: &mut Vec<usize>,
        node: usize,
        used: usize,
        best: &mut f64,
    ) {
        if node == graph.node_count() {
            *best = best.max(modularity(graph, assignment));
            return;
        }
        for community in 0..=used {
            assignment.push(community);
            recurse(graph, assignment, node + 1, used.max(community + 1), best);
            assignment.pop();
        }
    }
    let mut best = f64::NEG_INFINITY;
    recurse(graph, &mut Vec::new(), 0, 0, &mut best);
    best
}

fn indexed_graph(n: usize, edges: &[(usize, usize, f64)]) -> SimilarityGraph {
    let nodes: Vec<AccountId> = (0..n).map(|i| AccountId(format!("n{i}"))).collect();
    SimilarityGraph::from_edges(nodes, edges).expect("graph")
}

#[test]
fn criterion_7_graph_detector_oracle() {
    // 100 random weighted graphs with at most 8 nodes.
    let mut rng = ChaCha8Rng::seed_from_u64(0x6AF0);
    for round in 0..100 {
        let n = rng.random_range(2..=8);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_range(0.0..1.0) < 0.65 {
                    edges.push((i, j, rng.random_range(0.05..=1.0)));
                }
            }
        }
        let graph = indexed_graph(n, &edges);
        let greedy = fastgreedy(&graph);
        let best = exhaustive_best_modularity(&graph);
        assert!(
            greedy.modularity() >= best - 0.05,
            "round {round}: greedy {} vs exhaustive {best}",
            greedy.modularity()
        );
    }

    // Two planted 5-cliques joined by one unit edge: exact recovery, and the
    // clique split is also the exhaustive optimum.
    let mut edges = Vec::new();
    for base in [0usize, 5] {
        for i in 0..5 {
            for j in i + 1..5 {
                edges.push((base + i, base + j, 1.0));
            }
        }
    }
    edges.push((0, 5, 1.0));
    let cliques = indexed_graph(10, &edges);
    let partition = fastgreedy(&cliques);
    assert_eq!(
        partition.communities(),
        &[vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]],
        "clique recovery"
    );
    let best = exhaustive_best_modularity(&cliques);
    assert!((partition.modularity() - best).abs() < 1e-9);

    // Degenerate single-community outcome raises the documented warning.
    let pair = indexed_graph(2, &[(0, 1, 1.0)]);
    let merged = fastgreedy(&pair);
    assert_eq!(merged.communities().len(), 1);
    let labels = label_clusters(&pair, &merged, LabelingMode::Heuristic);
    assert!(labels.degenerate_partition, "degenerate warning must fire");

    println!(
        "ACCEPTANCE criterion 7 (graph detector: 100 oracle graphs within 0.05, \
         planted cliques exact, degenerate warning): PASS"
    );
}

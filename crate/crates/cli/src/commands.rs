//! Subcommand implementations. Each command is a pure function of
//! (config, fixtures, seed) and writes its reports under the out directory.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use botwatch_core::corpus::{
    load_dataset, load_manifest, Account, AccountId, Label, LabeledDataset,
};
use botwatch_core::disttest::{
    calibrate_threshold, kl_divergence, ScoreBinning, ScoreDistribution, ScoreKind,
};
use botwatch_core::dna::{classify_group, encode_account, find_split, lcs_curve, DnaAlphabet};
use botwatch_core::evalkit::{
    audit_scores, chi_square_effect, fleiss_kappa, survivability, AnnotationSet, Answer,
    AnswerClass, ConfusionMatrix, GoldOutcome, MetricsReport, Outcome, PrintedScores,
    SurvivabilityReport, VoteOutcome,
};
use botwatch_core::graphdetect::{
    build_graph, extract_features, fastgreedy, label_clusters, LabelingMode,
};
use botwatch_core::Verdict;

use crate::config::Resolved;
use crate::report::{fmt_metric, write_file, Report};
use crate::{Failure, TableKind};

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

fn load_ds(resolved: &Resolved, rel: &Path, name: &str) -> Result<LabeledDataset, Failure> {
    let path = resolved.path(rel);
    load_dataset(&path, name, resolved.config.snapshot_date)
        .map_err(|e| Failure::Load(format!("dataset {name} at {}: {e}", path.display())))
}

/// The analyzed group: all accounts, or the manifest subset when one is
/// configured.
fn select_group<'a>(
    resolved: &Resolved,
    dataset: &'a LabeledDataset,
    manifest: Option<&Path>,
) -> Result<Vec<&'a Account>, Failure> {
    match manifest {
        None => Ok(dataset.accounts().iter().collect()),
        Some(rel) => {
            let path = resolved.path(rel);
            let ids = load_manifest(&path)
                .map_err(|e| Failure::Load(format!("manifest {}: {e}", path.display())))?;
            let mut selected = Vec::with_capacity(ids.len());
            let mut missing = Vec::new();
            for id in &ids {
                match dataset.account(id) {
                    Some(account) => selected.push(account),
                    None => missing.push(id.clone()),
                }
            }
            if !missing.is_empty() {
                return Err(Failure::Load(format!(
                    "manifest {}: {} ids not in dataset {} (first: {})",
                    path.display(),
                    missing.len(),
                    dataset.name(),
                    missing[0]
                )));
            }
            Ok(selected)
        }
    }
}

/// Scores predictions against account labels; accounts labeled `unknown`
/// cannot be scored and are counted separately.
fn score_against_labels(
    accounts: &[&Account],
    predicted: &BTreeMap<AccountId, Verdict>,
) -> (ConfusionMatrix, usize) {
    let mut pairs = Vec::new();
    let mut unlabeled = 0usize;
    for account in accounts {
        let truth = match account.label {
            Label::Spambot => Verdict::Spambot,
            Label::Genuine => Verdict::Genuine,
            Label::Unknown => {
                unlabeled += 1;
                continue;
            }
        };
        if let Some(&prediction) = predicted.get(&account.id) {
            pairs.push((truth, prediction));
        }
    }
    (ConfusionMatrix::from_verdicts(pairs), unlabeled)
}

fn csv_bytes(rows: &[Vec<String>]) -> Result<Vec<u8>, Failure> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .write_record(row)
            .map_err(|e| Failure::Other(format!("csv write: {e}")))?;
    }
    writer
        .into_inner()
        .map_err(|e| Failure::Other(format!("csv flush: {e}")))
}

fn write_csv(path: &Path, rows: &[Vec<String>]) -> Result<(), Failure> {
    write_file(path, &csv_bytes(rows)?)
}

fn confusion_rows(cm: &ConfusionMatrix) -> Vec<Vec<String>> {
    vec![
        vec!["tp".to_owned(), "tn".to_owned(), "fp".to_owned(), "fn".to_owned()],
        vec![
            cm.true_positives.to_string(),
            cm.true_negatives.to_string(),
            cm.false_positives.to_string(),
            cm.false_negatives.to_string(),
        ],
    ]
}

fn metrics_rows(metrics: &MetricsReport) -> Vec<Vec<String>> {
    vec![
        MetricsReport::COLUMNS.iter().map(|c| c.to_string()).collect(),
        vec![
            fmt_metric(metrics.precision),
            fmt_metric(metrics.recall),
            fmt_metric(metrics.specificity),
            fmt_metric(metrics.accuracy),
            fmt_metric(metrics.f_measure),
            fmt_metric(metrics.mcc),
        ],
    ]
}

fn report_metrics(report: &mut Report, cm: &ConfusionMatrix, metrics: &MetricsReport) {
    report.line(format!(
        "confusion: tp={} tn={} fp={} fn={}",
        cm.true_positives, cm.true_negatives, cm.false_positives, cm.false_negatives
    ));
    report.line(format!(
        "precision={} recall={} specificity={} accuracy={} f_measure={} mcc={}",
        fmt_metric(metrics.precision),
        fmt_metric(metrics.recall),
        fmt_metric(metrics.specificity),
        fmt_metric(metrics.accuracy),
        fmt_metric(metrics.f_measure),
        fmt_metric(metrics.mcc),
    ));
}

fn read_csv_records(path: &Path, expected_header: &[&str]) -> Result<Vec<Vec<String>>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Failure::Load(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Failure::Load(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != expected_header {
        return Err(Failure::Load(format!(
            "{}: unexpected header {:?}, expected {:?}",
            path.display(),
            header.join(","),
            expected_header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Failure::Load(format!("{}: {e}", path.display())))?;
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

pub fn ingest(resolved: &Resolved) -> Result<(), Failure> {
    resolved.require_datasets()?;
    let mut report = Report::new("ingest", resolved, &[]);
    let mut rows = vec![vec![
        "dataset".to_owned(),
        "accounts".to_owned(),
        "tweets".to_owned(),
    ]];
    for entry in &resolved.config.datasets {
        let dataset = load_ds(resolved, &entry.path, &entry.name)?;
        report.line(format!(
            "{}: {} accounts, {} tweets ({})",
            entry.name,
            dataset.account_count(),
            dataset.tweet_count(),
            resolved.path(&entry.path).display()
        ));
        rows.push(vec![
            entry.name.clone(),
            dataset.account_count().to_string(),
            dataset.tweet_count().to_string(),
        ]);
    }
    report.write(&resolved.out_dir.join("ingest.txt"))?;
    write_csv(&resolved.out_dir.join("ingest.csv"), &rows)?;
    println!("ingest: {} datasets validated", resolved.config.datasets.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// detect-dna
// ---------------------------------------------------------------------------

pub fn detect_dna(resolved: &Resolved) -> Result<(), Failure> {
    let cfg = resolved
        .config
        .dna
        .as_ref()
        .ok_or_else(|| Failure::Config("config has no [dna] section".into()))?;
    let dataset = load_ds(resolved, &cfg.dataset, "dna-group")?;
    let group = select_group(resolved, &dataset, cfg.manifest.as_deref())?;

    let alphabet = DnaAlphabet::standard();
    let timelines = dataset.timelines();
    let sequences: Result<Vec<_>, _> = group
        .iter()
        .map(|account| encode_account(account, &timelines[&account.id], &alphabet))
        .collect();
    let sequences = sequences.map_err(|e| Failure::Other(format!("encoding: {e}")))?;

    let curve = lcs_curve(&sequences).map_err(|e| Failure::Other(format!("similarity: {e}")))?;
    let k_star = find_split(&curve).map_err(|e| Failure::Other(format!("split: {e}")))?;
    let split = classify_group(&sequences, &curve, k_star)
        .map_err(|e| Failure::Other(format!("classification: {e}")))?;

    let out = resolved.out_dir.join("dna");
    let mut curve_text = String::from("k\tlcs\n");
    for point in curve.points() {
        curve_text.push_str(&format!("{}\t{}\n", point.k, point.lcs));
    }
    write_file(&out.join("curve.txt"), curve_text.as_bytes())?;

    let mut verdict_rows = vec![vec!["account_id".to_owned(), "verdict".to_owned()]];
    for (id, verdict) in &split.verdicts {
        verdict_rows.push(vec![id.to_string(), verdict.to_string()]);
    }
    write_csv(&out.join("verdicts.csv"), &verdict_rows)?;

    let (cm, unlabeled) = score_against_labels(&group, &split.verdicts);
    let metrics = cm.metrics().map_err(|e| Failure::Other(e.to_string()))?;
    write_csv(&out.join("metrics.csv"), &metrics_rows(&metrics))?;
    write_csv(&out.join("confusion.csv"), &confusion_rows(&cm))?;

    let mut report = Report::new(
        "detect-dna",
        resolved,
        &[
            ("dataset", cfg.dataset.display().to_string()),
            (
                "manifest",
                cfg.manifest.as_ref().map_or("none".into(), |m| m.display().to_string()),
            ),
        ],
    );
    report.line(format!("group size: {}", group.len()));
    report.line(format!(
        "non-empty sequences: {}",
        sequences.iter().filter(|s| !s.is_empty()).count()
    ));
    match k_star {
        Some(k) => {
            report.line(format!("split at k = {k}, shared length {}", curve.lcs_at(k).unwrap()));
            report.line(format!(
                "witness length: {}",
                split.witness.as_ref().map_or(0, String::len)
            ));
        }
        None => report.line("no split: similarity curve is flat"),
    }
    report.line(format!("spambot verdicts: {}", split.spambots().count()));
    if unlabeled > 0 {
        report.line(format!("accounts without ground truth, unscored: {unlabeled}"));
    }
    report_metrics(&mut report, &cm, &metrics);
    report.write(&out.join("report.txt"))?;
    println!("detect-dna: {} accounts, split {:?}", group.len(), k_star);
    Ok(())
}

// ---------------------------------------------------------------------------
// detect-graph
// ---------------------------------------------------------------------------

fn load_calibration(path: &Path) -> Result<BTreeMap<AccountId, Label>, Failure> {
    let rows = read_csv_records(path, &["account_id", "label"])?;
    let mut map = BTreeMap::new();
    for row in rows {
        let label = match row[1].as_str() {
            "spambot" => Label::Spambot,
            "genuine" => Label::Genuine,
            other => {
                return Err(Failure::Load(format!(
                    "{}: unknown calibration label `{other}`",
                    path.display()
                )))
            }
        };
        map.insert(AccountId(row[0].clone()), label);
    }
    Ok(map)
}

pub fn detect_graph(resolved: &Resolved) -> Result<(), Failure> {
    let cfg = resolved
        .config
        .graph
        .as_ref()
        .ok_or_else(|| Failure::Config("config has no [graph] section".into()))?;
    let dataset = load_ds(resolved, &cfg.dataset, "graph-group")?;
    let group = select_group(resolved, &dataset, cfg.manifest.as_deref())?;

    let timelines = dataset.timelines();
    let vectors: Vec<_> = group
        .iter()
        .map(|account| extract_features(account, &timelines[&account.id]))
        .collect();
    let graph = build_graph(&vectors).map_err(|e| Failure::Other(format!("graph: {e}")))?;
    let partition = fastgreedy(&graph);

    let calibration = match cfg.labeling.as_str() {
        "calibrated" => Some(load_calibration(&resolved.path(
            cfg.calibration.as_ref().expect("validated at config load"),
        ))?),
        _ => None,
    };
    let labels = match &calibration {
        Some(map) => label_clusters(&graph, &partition, LabelingMode::Calibrated(map)),
        None => label_clusters(&graph, &partition, LabelingMode::Heuristic),
    };

    let out = resolved.out_dir.join("graph");
    let mut edge_rows = vec![vec!["id_a".to_owned(), "id_b".to_owned(), "weight".to_owned()]];
    for (a, b, w) in graph.edges() {
        edge_rows.push(vec![
            graph.nodes()[a].to_string(),
            graph.nodes()[b].to_string(),
            fmt_metric(w),
        ]);
    }
    write_csv(&out.join("edges.csv"), &edge_rows)?;

    let assignment = partition.assignment(graph.node_count());
    let mut partition_rows = vec![vec![
        "account_id".to_owned(),
        "community_id".to_owned(),
        "verdict".to_owned(),
    ]];
    for (node, id) in graph.nodes().iter().enumerate() {
        partition_rows.push(vec![
            id.to_string(),
            assignment[node].to_string(),
            labels.verdicts[id].to_string(),
        ]);
    }
    write_csv(&out.join("partition.csv"), &partition_rows)?;

    let (cm, unlabeled) = score_against_labels(&group, &labels.verdicts);
    let metrics = cm.metrics().map_err(|e| Failure::Other(e.to_string()))?;
    write_csv(&out.join("metrics.csv"), &metrics_rows(&metrics))?;
    write_csv(&out.join("confusion.csv"), &confusion_rows(&cm))?;

    let mut report = Report::new(
        "detect-graph",
        resolved,
        &[
            ("dataset", cfg.dataset.display().to_string()),
            ("labeling", cfg.labeling.clone()),
        ],
    );
    report.line(format!("group size: {}", group.len()));
    report.line(format!(
        "partition: {} communities, modularity {}",
        partition.communities().len(),
        fmt_metric(partition.modularity())
    ));
    for (idx, community) in partition.communities().iter().enumerate() {
        report.line(format!("community {idx}: {} accounts", community.len()));
    }
    if labels.degenerate_partition {
        report.line(
            "warning: degenerate partition, all accounts fell into a single community; \
             the detector could not separate the groups",
        );
    }
    if !labels.heuristic_fallbacks.is_empty() {
        report.line(format!(
            "warning: communities without calibrated members, labeled by heuristic: {:?}",
            labels.heuristic_fallbacks
        ));
    }
    if unlabeled > 0 {
        report.line(format!("accounts without ground truth, unscored: {unlabeled}"));
    }
    report_metrics(&mut report, &cm, &metrics);
    report.write(&out.join("report.txt"))?;
    println!(
        "detect-graph: {} accounts, {} communities, modularity {:.4}",
        group.len(),
        partition.communities().len(),
        partition.modularity()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// detect-dist
// ---------------------------------------------------------------------------

fn distribution_rows(dist: &ScoreDistribution) -> Vec<Vec<String>> {
    let mut rows = vec![vec!["bin_lo".to_owned(), "bin_hi".to_owned(), "mass".to_owned()]];
    for (lo, hi, mass) in dist.rows() {
        rows.push(vec![format!("{lo:.6}"), format!("{hi:.6}"), format!("{mass:.9}")]);
    }
    rows
}

pub fn detect_dist(resolved: &Resolved) -> Result<(), Failure> {
    let cfg = resolved
        .config
        .dist
        .as_ref()
        .ok_or_else(|| Failure::Config("config has no [dist] section".into()))?;
    let kind = ScoreKind::from_str(&cfg.score).map_err(Failure::Config)?;
    let suspect = load_ds(resolved, &cfg.suspect, "suspect")?;
    let reference = load_ds(resolved, &cfg.reference, "reference")?;

    let threshold = match &cfg.threshold {
        toml::Value::Float(f) => *f,
        toml::Value::Integer(i) => *i as f64,
        _ => calibrate_threshold(
            reference.accounts(),
            kind,
            cfg.bins,
            cfg.calibration_splits,
            resolved.seed,
        )
        .map_err(|e| Failure::Other(format!("threshold calibration: {e}")))?,
    };

    let binning = ScoreBinning::fit(reference.accounts(), kind, cfg.bins)
        .map_err(|e| Failure::Other(format!("binning: {e}")))?;
    let reference_hist = binning
        .histogram(reference.accounts())
        .map_err(|e| Failure::Other(e.to_string()))?;
    let suspect_hist = binning
        .histogram(suspect.accounts())
        .map_err(|e| Failure::Other(e.to_string()))?;
    let kl_value =
        kl_divergence(&suspect_hist, &reference_hist).map_err(|e| Failure::Other(e.to_string()))?;
    let tampered = kl_value > threshold;

    let out = resolved.out_dir.join("dist");
    write_csv(&out.join("suspect_distribution.csv"), &distribution_rows(&suspect_hist))?;
    write_csv(&out.join("reference_distribution.csv"), &distribution_rows(&reference_hist))?;

    let mut report = Report::new(
        "detect-dist",
        resolved,
        &[
            ("suspect", cfg.suspect.display().to_string()),
            ("reference", cfg.reference.display().to_string()),
            ("score", cfg.score.clone()),
            ("bins", binning.bin_count().to_string()),
        ],
    );
    report.line(format!(
        "kl_value={} threshold={} tampered={}",
        fmt_metric(kl_value),
        fmt_metric(threshold),
        tampered
    ));
    report.line(format!(
        "suspect: {} accounts; reference: {} accounts",
        suspect.account_count(),
        reference.account_count()
    ));
    report.line("the verdict is group-level; it does not attribute individual accounts");
    report.write(&out.join("verdict.txt"))?;
    println!("detect-dist: kl={kl_value:.4} threshold={threshold:.4} tampered={tampered}");
    Ok(())
}

// ---------------------------------------------------------------------------
// score-external
// ---------------------------------------------------------------------------

pub fn score_external(resolved: &Resolved) -> Result<(), Failure> {
    let cfg = resolved
        .config
        .external
        .as_ref()
        .ok_or_else(|| Failure::Config("config has no [external] section".into()))?;
    let dataset = load_ds(resolved, &cfg.test_set, "external-test-set")?;
    let group = select_group(resolved, &dataset, cfg.manifest.as_deref())?;

    // Verdict files are run artifacts from other classifiers, not fixtures;
    // the path is taken as given.
    let verdict_path = cfg.verdicts.clone();
    let rows = read_csv_records(&verdict_path, &["account_id", "verdict"])?;
    let mut predicted: BTreeMap<AccountId, Verdict> = BTreeMap::new();
    for row in rows {
        let verdict = Verdict::from_str(&row[1])
            .map_err(|e| Failure::Load(format!("{}: {e}", verdict_path.display())))?;
        predicted.insert(AccountId(row[0].clone()), verdict);
    }

    let uncovered: Vec<&AccountId> = group
        .iter()
        .map(|a| &a.id)
        .filter(|id| !predicted.contains_key(*id))
        .collect();
    if !uncovered.is_empty() {
        let shown: Vec<String> = uncovered.iter().take(8).map(|id| id.to_string()).collect();
        return Err(Failure::Other(format!(
            "verdict file misses {} test-set accounts: {}{}",
            uncovered.len(),
            shown.join(", "),
            if uncovered.len() > 8 { ", …" } else { "" }
        )));
    }

    let (cm, unlabeled) = score_against_labels(&group, &predicted);
    let metrics = cm.metrics().map_err(|e| Failure::Other(e.to_string()))?;
    let out = resolved.out_dir.join("external");
    write_csv(&out.join("metrics.csv"), &metrics_rows(&metrics))?;
    write_csv(&out.join("confusion.csv"), &confusion_rows(&cm))?;

    let mut report = Report::new(
        "score-external",
        resolved,
        &[
            ("test_set", cfg.test_set.display().to_string()),
            ("verdicts", cfg.verdicts.display().to_string()),
        ],
    );
    report.line(format!("scored accounts: {}", group.len() - unlabeled));
    if unlabeled > 0 {
        report.line(format!("accounts without ground truth, unscored: {unlabeled}"));
    }
    report_metrics(&mut report, &cm, &metrics);
    report.write(&out.join("report.txt"))?;
    println!("score-external: {} accounts scored", group.len() - unlabeled);
    Ok(())
}

// ---------------------------------------------------------------------------
// survivability + tables
// ---------------------------------------------------------------------------

fn load_all_datasets(resolved: &Resolved) -> Result<Vec<LabeledDataset>, Failure> {
    resolved.require_datasets()?;
    resolved
        .config
        .datasets
        .iter()
        .map(|entry| load_ds(resolved, &entry.path, &entry.name))
        .collect()
}

fn survivability_report(datasets: &[LabeledDataset]) -> Result<SurvivabilityReport, Failure> {
    let refs: Vec<&LabeledDataset> = datasets.iter().collect();
    survivability(&refs).map_err(|e| Failure::Other(e.to_string()))
}

/// 3353 → "3,353".
fn thousands(value: u64) -> String {
    let digits = value.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (idx, ch) in digits.chars().enumerate() {
        if idx > 0 && (digits.len() - idx).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

fn survivability_rows(report: &SurvivabilityReport) -> (Vec<String>, Vec<Vec<String>>) {
    let mut text = Vec::new();
    text.push(format!(
        "{:<24} {:>7} {:>16} {:>16} {:>16}",
        "dataset", "total", "alive", "deleted", "suspended"
    ));
    let mut rows = vec![vec![
        "dataset".to_owned(),
        "total".to_owned(),
        "alive".to_owned(),
        "alive_pct".to_owned(),
        "deleted".to_owned(),
        "deleted_pct".to_owned(),
        "suspended".to_owned(),
        "suspended_pct".to_owned(),
    ]];
    for row in &report.rows {
        let cell = |o: Outcome| format!("{} ({}%)", thousands(row.count(o)), row.percent_str(o));
        text.push(format!(
            "{:<24} {:>7} {:>16} {:>16} {:>16}",
            row.dataset,
            thousands(row.total),
            cell(Outcome::Alive),
            cell(Outcome::Deleted),
            cell(Outcome::Suspended),
        ));
        rows.push(vec![
            row.dataset.clone(),
            row.total.to_string(),
            row.alive.to_string(),
            row.percent_str(Outcome::Alive),
            row.deleted.to_string(),
            row.percent_str(Outcome::Deleted),
            row.suspended.to_string(),
            row.percent_str(Outcome::Suspended),
        ]);
    }
    (text, rows)
}

pub fn survivability_cmd(resolved: &Resolved) -> Result<(), Failure> {
    let datasets = load_all_datasets(resolved)?;
    let surv = survivability_report(&datasets)?;
    let (text, rows) = survivability_rows(&surv);
    let mut report = Report::new("survivability", resolved, &[]);
    for line in text {
        report.line(line);
    }
    report.write(&resolved.out_dir.join("survivability.txt"))?;
    write_csv(&resolved.out_dir.join("survivability.csv"), &rows)?;
    println!("survivability: {} datasets", surv.rows.len());
    Ok(())
}

pub fn table_cmd(resolved: &Resolved, which: TableKind) -> Result<(), Failure> {
    match which {
        TableKind::Table2 => table2(resolved),
        TableKind::Table3 => table3(resolved),
        TableKind::Table4 => table4(resolved),
        TableKind::Table7Consistency => table7_consistency(resolved),
    }
}

fn table2(resolved: &Resolved) -> Result<(), Failure> {
    let datasets = load_all_datasets(resolved)?;
    let surv = survivability_report(&datasets)?;
    let (text, rows) = survivability_rows(&surv);
    let mut report = Report::new("table table2", resolved, &[]);
    report.line("liveness of the account groups at probe time");
    report.blank();
    for line in text {
        report.line(line);
    }
    let out = resolved.out_dir.join("tables");
    report.write(&out.join("table2.txt"))?;
    write_csv(&out.join("table2.csv"), &rows)?;
    println!("table2 written");
    Ok(())
}

fn table3(resolved: &Resolved) -> Result<(), Failure> {
    let datasets = load_all_datasets(resolved)?;
    let surv = survivability_report(&datasets)?;
    if surv.rows.len() < 2 {
        return Err(Failure::Config(
            "table3 needs a baseline dataset plus at least one target".into(),
        ));
    }
    let baseline = &surv.rows[0];
    let mut report = Report::new("table table3", resolved, &[]);
    report.line(format!(
        "effect size and significance vs {} (2x2 chi-square, Yates-corrected)",
        baseline.dataset
    ));
    report.line("stars: *** p < 0.01, ** p < 0.05, * p < 0.1");
    report.blank();
    report.line(format!(
        "{:<24} {:>14} {:>14} {:>14}",
        "dataset", "alive", "deleted", "suspended"
    ));
    let mut rows = vec![vec![
        "dataset".to_owned(),
        "outcome".to_owned(),
        "effect_pp".to_owned(),
        "chi_square".to_owned(),
        "p_value".to_owned(),
        "stars".to_owned(),
        "warning".to_owned(),
    ]];
    for target in &surv.rows[1..] {
        let mut cells = Vec::new();
        for outcome in Outcome::ALL {
            let result = chi_square_effect(target, baseline, outcome);
            cells.push(format!("{:+.1}%{}", result.effect_pp, result.stars));
            rows.push(vec![
                target.dataset.clone(),
                outcome.as_str().to_owned(),
                format!("{:+.4}", result.effect_pp),
                format!("{:.6}", result.chi_square),
                format!("{:.6e}", result.p_value),
                result.stars.as_str().to_owned(),
                result.warning.to_string(),
            ]);
        }
        report.line(format!(
            "{:<24} {:>14} {:>14} {:>14}",
            target.dataset, cells[0], cells[1], cells[2]
        ));
    }
    let out = resolved.out_dir.join("tables");
    report.write(&out.join("table3.txt"))?;
    write_csv(&out.join("table3.csv"), &rows)?;
    println!("table3 written");
    Ok(())
}

fn table4(resolved: &Resolved) -> Result<(), Failure> {
    let reference = resolved
        .config
        .reference
        .as_ref()
        .and_then(|r| r.annotation_outcomes.as_ref())
        .ok_or_else(|| Failure::Config("config has no reference.annotation_outcomes".into()))?;
    let path = resolved.path(reference);
    let rows = read_csv_records(
        &path,
        &["type", "accounts", "tp", "tn", "fp", "fn", "accuracy", "kappa"],
    )?;

    let mut report = Report::new("table table4", resolved, &[]);
    report.line("annotation-campaign outcomes; accuracy recomputed from the outcome counts");
    report.line(
        "kappa column: as published; not recomputable without the raw per-answer data",
    );
    report.blank();
    report.line(format!(
        "{:<24} {:>8} {:>6} {:>6} {:>6} {:>6} {:>10} {:>10} {:>7}",
        "type", "accounts", "tp", "tn", "fp", "fn", "accuracy", "published", "kappa"
    ));
    let mut out_rows = vec![vec![
        "type".to_owned(),
        "accounts".to_owned(),
        "tp".to_owned(),
        "tn".to_owned(),
        "fp".to_owned(),
        "fn".to_owned(),
        "accuracy_recomputed".to_owned(),
        "accuracy_published".to_owned(),
        "kappa_published".to_owned(),
    ]];
    for row in rows {
        let parse = |i: usize| -> Result<u64, Failure> {
            row[i]
                .parse()
                .map_err(|_| Failure::Load(format!("{}: bad count `{}`", path.display(), row[i])))
        };
        let cm = ConfusionMatrix::new(parse(2)?, parse(3)?, parse(4)?, parse(5)?);
        let metrics = cm.metrics().map_err(|e| Failure::Other(e.to_string()))?;
        let accuracy = format!("{:.4}", metrics.accuracy);
        report.line(format!(
            "{:<24} {:>8} {:>6} {:>6} {:>6} {:>6} {:>10} {:>10} {:>7}",
            row[0], row[1], row[2], row[3], row[4], row[5], accuracy, row[6], row[7]
        ));
        out_rows.push(vec![
            row[0].clone(),
            row[1].clone(),
            row[2].clone(),
            row[3].clone(),
            row[4].clone(),
            row[5].clone(),
            accuracy,
            row[6].clone(),
            row[7].clone(),
        ]);
    }
    let out = resolved.out_dir.join("tables");
    report.write(&out.join("table4.txt"))?;
    write_csv(&out.join("table4.csv"), &out_rows)?;
    println!("table4 written");
    Ok(())
}

fn table7_consistency(resolved: &Resolved) -> Result<(), Failure> {
    let reference = resolved
        .config
        .reference
        .as_ref()
        .and_then(|r| r.detector_scores.as_ref())
        .ok_or_else(|| Failure::Config("config has no reference.detector_scores".into()))?;
    let path = resolved.path(reference);
    let rows = read_csv_records(
        &path,
        &[
            "test_set",
            "positives",
            "technique",
            "kind",
            "precision",
            "recall",
            "specificity",
            "accuracy",
            "f_measure",
            "mcc",
        ],
    )?;

    let mut report = Report::new("table table7-consistency", resolved, &[]);
    report.line("internal-consistency audit of the bundled detector score table:");
    report.line("F recomputed from precision and recall; accuracy recomputed from an");
    report.line("integer confusion matrix fitted to the printed rates");
    report.blank();
    report.line(format!(
        "{:<12} {:<24} {:>9} {:>9} {:>6} {:>9} {:>9} {:>6}",
        "test_set", "technique", "F_recomp", "dF", "F_ok", "acc_recomp", "dAcc", "ok"
    ));
    let mut out_rows = vec![vec![
        "test_set".to_owned(),
        "technique".to_owned(),
        "f_printed".to_owned(),
        "f_recomputed".to_owned(),
        "f_delta".to_owned(),
        "f_consistent".to_owned(),
        "accuracy_printed".to_owned(),
        "accuracy_recomputed".to_owned(),
        "accuracy_delta".to_owned(),
        "accuracy_consistent".to_owned(),
        "fit_mode".to_owned(),
    ]];
    let mut max_f_delta = 0.0f64;
    let mut inconsistent = Vec::new();
    for row in rows {
        let parse = |i: usize| -> Result<f64, Failure> {
            row[i]
                .parse()
                .map_err(|_| Failure::Load(format!("{}: bad value `{}`", path.display(), row[i])))
        };
        let positives: u64 = row[1]
            .parse()
            .map_err(|_| Failure::Load(format!("{}: bad positives `{}`", path.display(), row[1])))?;
        let printed = PrintedScores {
            test_set: row[0].clone(),
            technique: row[2].clone(),
            kind: row[3].clone(),
            precision: parse(4)?,
            recall: parse(5)?,
            specificity: parse(6)?,
            accuracy: parse(7)?,
            f_measure: parse(8)?,
            mcc: parse(9)?,
        };
        let audit = audit_scores(&printed, positives);
        max_f_delta = max_f_delta.max(audit.f_delta);
        let f_ok = audit.f_consistent(0.001);
        let acc_ok = audit.accuracy_consistent(0.005);
        if !f_ok || !acc_ok {
            inconsistent.push(format!("{}/{}", printed.test_set, printed.technique));
        }
        let acc_recomp = audit.accuracy_recomputed.map_or("n/a".into(), fmt_metric);
        let acc_delta = audit.accuracy_delta.map_or("n/a".into(), fmt_metric);
        report.line(format!(
            "{:<12} {:<24} {:>9} {:>9} {:>6} {:>9} {:>9} {:>6}",
            printed.test_set,
            printed.technique,
            format!("{:.4}", audit.f_recomputed),
            format!("{:.4}", audit.f_delta),
            if f_ok { "yes" } else { "NO" },
            audit.accuracy_recomputed.map_or("n/a".into(), |a| format!("{a:.4}")),
            audit.accuracy_delta.map_or("n/a".into(), |d| format!("{d:.4}")),
            if acc_ok { "yes" } else { "NO" },
        ));
        out_rows.push(vec![
            printed.test_set.clone(),
            printed.technique.clone(),
            fmt_metric(printed.f_measure),
            fmt_metric(audit.f_recomputed),
            fmt_metric(audit.f_delta),
            f_ok.to_string(),
            fmt_metric(printed.accuracy),
            acc_recomp,
            acc_delta,
            acc_ok.to_string(),
            audit.fit.map_or("none".into(), |f| format!("{:?}", f.mode)),
        ]);
    }
    report.blank();
    report.line(format!("max F delta across rows: {}", fmt_metric(max_f_delta)));
    if inconsistent.is_empty() {
        report.line("all rows internally consistent");
    } else {
        report.line(format!(
            "rows with internally inconsistent printed values: {}",
            inconsistent.join(", ")
        ));
    }
    let out = resolved.out_dir.join("tables");
    report.write(&out.join("table7_consistency.txt"))?;
    write_csv(&out.join("table7_consistency.csv"), &out_rows)?;
    println!("table7-consistency written");
    Ok(())
}

// ---------------------------------------------------------------------------
// annotations
// ---------------------------------------------------------------------------

pub fn annotations_cmd(resolved: &Resolved) -> Result<(), Failure> {
    let cfg = resolved
        .config
        .annotations
        .as_ref()
        .ok_or_else(|| Failure::Config("config has no [annotations] section".into()))?;

    let answers_path = resolved.path(&cfg.answers);
    let answer_rows =
        read_csv_records(&answers_path, &["contributor", "account_id", "class", "order"])?;
    let mut set = AnnotationSet::default();
    for row in answer_rows {
        let class = AnswerClass::from_str(&row[2])
            .map_err(|e| Failure::Load(format!("{}: {e}", answers_path.display())))?;
        let order: u64 = row[3]
            .parse()
            .map_err(|_| Failure::Load(format!("{}: bad order `{}`", answers_path.display(), row[3])))?;
        set.answers.push(Answer {
            contributor: row[0].clone(),
            account: AccountId(row[1].clone()),
            class,
            order,
        });
    }
    let gold_path = resolved.path(&cfg.gold);
    let gold_rows = read_csv_records(&gold_path, &["contributor", "question", "correct"])?;
    for row in gold_rows {
        let correct: bool = row[2]
            .parse()
            .map_err(|_| Failure::Load(format!("{}: bad bool `{}`", gold_path.display(), row[2])))?;
        set.gold.push(GoldOutcome { contributor: row[0].clone(), correct });
    }

    let trusted = set
        .trusted_contributors(cfg.min_accuracy)
        .map_err(|e| Failure::Other(e.to_string()))?;
    let votes = set.vote_all(&trusted);
    let matrix = set.rating_matrix(&trusted, 3);
    let agreement = fleiss_kappa(&matrix);

    let out = resolved.out_dir.join("annotations");
    let mut vote_rows = vec![vec!["account_id".to_owned(), "vote".to_owned()]];
    for (account, vote) in &votes {
        let vote_str = match vote {
            VoteOutcome::Class(class) => class.as_str().to_owned(),
            VoteOutcome::Unresolved => "unresolved".to_owned(),
        };
        vote_rows.push(vec![account.to_string(), vote_str]);
    }
    write_csv(&out.join("votes.csv"), &vote_rows)?;

    let mut report = Report::new(
        "annotations",
        resolved,
        &[("min_accuracy", format!("{:.2}", cfg.min_accuracy))],
    );
    let all_contributors: std::collections::BTreeSet<&str> =
        set.gold.iter().map(|g| g.contributor.as_str()).collect();
    report.line(format!(
        "contributors: {} total, {} trusted (gold accuracy strictly > {:.0}%)",
        all_contributors.len(),
        trusted.len(),
        cfg.min_accuracy * 100.0
    ));
    report.line(format!("accounts with >= 3 trusted answers: {}", votes.len()));
    let unresolved = votes.values().filter(|v| matches!(v, VoteOutcome::Unresolved)).count();
    report.line(format!("unresolved votes (no strict majority): {unresolved}"));
    match &agreement {
        Ok(a) => report.line(format!(
            "fleiss kappa: {:.4} over {} items, {} raters per item, {} categories",
            a.kappa, a.items, a.raters_per_item, a.categories
        )),
        Err(e) => report.line(format!("fleiss kappa: undefined ({e})")),
    }

    // Score votes against ground truth when provided.
    if let Some(truth_rel) = &cfg.truth {
        let truth_path = resolved.path(truth_rel);
        let truth_rows = read_csv_records(&truth_path, &["account_id", "label"])?;
        let mut pairs = Vec::new();
        let mut unresolved_or_unable = 0usize;
        for row in truth_rows {
            let truth = match row[1].as_str() {
                "spambot" => Verdict::Spambot,
                "genuine" => Verdict::Genuine,
                other => {
                    return Err(Failure::Load(format!(
                        "{}: unknown label `{other}`",
                        truth_path.display()
                    )))
                }
            };
            match votes.get(&AccountId(row[0].clone())) {
                Some(VoteOutcome::Class(AnswerClass::Spambot)) => {
                    pairs.push((truth, Verdict::Spambot))
                }
                Some(VoteOutcome::Class(AnswerClass::Genuine)) => {
                    pairs.push((truth, Verdict::Genuine))
                }
                _ => unresolved_or_unable += 1,
            }
        }
        let cm = ConfusionMatrix::from_verdicts(pairs);
        let metrics = cm.metrics().map_err(|e| Failure::Other(e.to_string()))?;
        write_csv(&out.join("metrics.csv"), &metrics_rows(&metrics))?;
        report.blank();
        report.line(format!(
            "votes scored against ground truth ({} accounts voted unable/unresolved/unvoted)",
            unresolved_or_unable
        ));
        report_metrics(&mut report, &cm, &metrics);
    }
    report.write(&out.join("report.txt"))?;
    println!(
        "annotations: {} trusted contributors, {} voted accounts",
        trusted.len(),
        votes.len()
    );
    Ok(())
}

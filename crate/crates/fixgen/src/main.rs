//! Deterministic fixture generator for the botwatch corpus.
//!
//! Regenerates the `fixtures/` tree from fixed seeds: the seven probe
//! datasets with their reference liveness counts, the replica test-set
//! manifests, the planted detector fixtures, a synthetic annotation
//! campaign, and the bundled reference score tables. Running it twice
//! produces byte-identical output.
//!
//! Usage: botwatch-fixgen [--out DIR]   (default DIR: fixtures)

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use botwatch_core::corpus::{
    save_dataset, Account, AccountId, AccountStatus, Label, LabeledDataset, Tweet, TweetKind,
};
use chrono::{TimeZone, Utc};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reference liveness counts per dataset plus profile-generation knobs.
struct DatasetSpec {
    name: &'static str,
    alive: u64,
    deleted: u64,
    suspended: u64,
    window_start: (i32, u32, u32),
    window_days: u32,
    label: Label,
    followers_log_center: f64,
    followers_log_spread: f64,
    id_prefix: &'static str,
}

const DATASETS: [DatasetSpec; 7] = [
    DatasetSpec {
        name: "genuine_accounts",
        alive: 3353,
        deleted: 115,
        suspended: 6,
        window_start: (2009, 7, 1),
        window_days: 1096,
        label: Label::Genuine,
        followers_log_center: 2.3,
        followers_log_spread: 0.8,
        id_prefix: "gen",
    },
    DatasetSpec {
        name: "social_spambots_1",
        alive: 946,
        deleted: 2,
        suspended: 46,
        window_start: (2012, 2, 1),
        window_days: 40,
        label: Label::Spambot,
        followers_log_center: 3.3,
        followers_log_spread: 0.25,
        id_prefix: "ss1",
    },
    DatasetSpec {
        name: "social_spambots_2",
        alive: 3322,
        deleted: 1,
        suspended: 134,
        window_start: (2014, 3, 1),
        window_days: 75,
        label: Label::Spambot,
        followers_log_center: 2.8,
        followers_log_spread: 0.4,
        id_prefix: "ss2",
    },
    DatasetSpec {
        name: "social_spambots_3",
        alive: 465,
        deleted: 2,
        suspended: 0,
        window_start: (2011, 8, 15),
        window_days: 60,
        label: Label::Spambot,
        followers_log_center: 2.5,
        followers_log_spread: 0.4,
        id_prefix: "ss3",
    },
    DatasetSpec {
        name: "traditional_spambots_1",
        alive: 889,
        deleted: 25,
        suspended: 86,
        window_start: (2009, 1, 1),
        window_days: 330,
        label: Label::Spambot,
        followers_log_center: 1.5,
        followers_log_spread: 0.6,
        id_prefix: "ts1",
    },
    DatasetSpec {
        name: "traditional_spambots_2",
        alive: 1,
        deleted: 0,
        suspended: 99,
        window_start: (2014, 5, 1),
        window_days: 90,
        label: Label::Spambot,
        followers_log_center: 1.2,
        followers_log_spread: 0.5,
        id_prefix: "ts2",
    },
    DatasetSpec {
        name: "fake_followers",
        alive: 851,
        deleted: 38,
        suspended: 2462,
        window_start: (2012, 4, 1),
        window_days: 180,
        label: Label::Spambot,
        followers_log_center: 0.8,
        followers_log_spread: 0.7,
        id_prefix: "ff",
    },
];

fn main() {
    let mut out = PathBuf::from("fixtures");
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        match arg.as_str() {
            "--out" => {
                out = PathBuf::from(iter.next().expect("--out needs a directory"));
            }
            other => {
                eprintln!("unknown argument `{other}`");
                eprintln!("usage: botwatch-fixgen [--out DIR]");
                std::process::exit(2);
            }
        }
    }

    let datasets_dir = out.join("datasets");
    let mut loaded = Vec::new();
    for (idx, spec) in DATASETS.iter().enumerate() {
        let dataset = probe_dataset(spec, 0x0B07_0000 + idx as u64);
        save_dataset(&dataset, &datasets_dir.join(spec.name)).expect("write dataset");
        println!(
            "{}: {} accounts ({} alive / {} deleted / {} suspended)",
            spec.name,
            dataset.account_count(),
            spec.alive,
            spec.deleted,
            spec.suspended
        );
        loaded.push(dataset);
    }

    write_manifests(&out.join("manifests"), &loaded);
    write_dna_planted(&out.join("planted").join("dna_planted"));
    write_graph_planted(&out.join("planted").join("graph_planted"));
    write_annotations(&out.join("annotations"));
    write_reference_tables(&out.join("reference"));
    println!("fixtures written to {}", out.display());
}

/// Standard normal via Box-Muller; deterministic given the rng stream.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn log10_sample(rng: &mut ChaCha8Rng, center: f64, spread: f64, max: u64) -> u64 {
    let value = 10f64.powf(center + spread * normal(rng));
    (value.round() as u64).min(max)
}

fn probe_dataset(spec: &DatasetSpec, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = spec.alive + spec.deleted + spec.suspended;

    let mut probe_codes: Vec<Option<u16>> = Vec::with_capacity(total as usize);
    probe_codes.extend(std::iter::repeat_n(None, spec.alive as usize));
    probe_codes.extend(std::iter::repeat_n(Some(50), spec.deleted as usize));
    probe_codes.extend(std::iter::repeat_n(Some(63), spec.suspended as usize));
    probe_codes.shuffle(&mut rng);

    let (y, m, d) = spec.window_start;
    let window_start = Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap().timestamp();
    let window_seconds = spec.window_days as i64 * 86_400;

    let accounts = probe_codes
        .into_iter()
        .enumerate()
        .map(|(i, code)| {
            let created =
                Utc.timestamp_opt(window_start + rng.random_range(0..window_seconds), 0).unwrap();
            Account {
                id: AccountId(format!("{}_{:05}", spec.id_prefix, i + 1)),
                screen_name: format!("{}_user_{:05}", spec.id_prefix, i + 1),
                created_at: created,
                followers_count: log10_sample(
                    &mut rng,
                    spec.followers_log_center,
                    spec.followers_log_spread,
                    5_000_000,
                ),
                friends_count: log10_sample(&mut rng, 2.0, 0.6, 100_000),
                status: AccountStatus::from_probe_code(code).unwrap(),
                label: spec.label,
                dataset_tag: spec.name.to_owned(),
            }
        })
        .collect();
    LabeledDataset::new(spec.name, accounts, Vec::new(), None).expect("valid dataset")
}

/// Replica test-set membership: the certified bot subsets (991 of the 994
/// first-wave retweeter bots, 464 of the 467 product spammers) mixed with
/// equal-size seeded samples of genuine accounts.
fn write_manifests(dir: &Path, datasets: &[LabeledDataset]) {
    fs::create_dir_all(dir).expect("create manifests dir");
    let genuine = &datasets[0];
    let ss1 = &datasets[1];
    let ss3 = &datasets[3];

    let mut rng = ChaCha8Rng::seed_from_u64(0x0B07_1111);
    let pick = |dataset: &LabeledDataset, n: usize, rng: &mut ChaCha8Rng| -> Vec<AccountId> {
        let mut indices: Vec<usize> =
            rand::seq::index::sample(rng, dataset.account_count(), n).into_vec();
        indices.sort_unstable();
        indices.into_iter().map(|i| dataset.accounts()[i].id.clone()).collect()
    };
    let first = |dataset: &LabeledDataset, n: usize| -> Vec<AccountId> {
        let mut ids: Vec<AccountId> = dataset.accounts().iter().map(|a| a.id.clone()).collect();
        ids.sort();
        ids.truncate(n);
        ids
    };

    for (file, bots, bot_count) in
        [("test_set_1.txt", ss1, 991usize), ("test_set_2.txt", ss3, 464usize)]
    {
        let mut lines = String::new();
        let _ = writeln!(lines, "# {}: balanced mix of genuine accounts and {}", file, bots.name());
        for id in pick(genuine, bot_count, &mut rng) {
            let _ = writeln!(lines, "{id}");
        }
        for id in first(bots, bot_count) {
            let _ = writeln!(lines, "{id}");
        }
        fs::write(dir.join(file), lines).expect("write manifest");
        println!("{file}: {} members", bot_count * 2);
    }
}

fn symbol_kind(symbol: u8) -> TweetKind {
    match symbol {
        b'A' => TweetKind::Plain,
        b'C' => TweetKind::Reply,
        _ => TweetKind::Retweet,
    }
}

fn random_symbols(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| *b"ACT".choose(rng).unwrap()).collect()
}

/// 20 accounts, 400 tweets each: the 10 bots carry a shared 200-symbol
/// behavioral block in the middle of otherwise random timelines.
fn write_dna_planted(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0B07_2222);
    let block = random_symbols(&mut rng, 200);

    let mut accounts = Vec::new();
    let mut tweets = Vec::new();
    let base_time = Utc.with_ymd_and_hms(2014, 6, 1, 0, 0, 0).unwrap().timestamp();
    let mut add_account = |id: &str, label: Label, symbols: &[u8], rng: &mut ChaCha8Rng| {
        accounts.push(Account {
            id: AccountId(id.to_owned()),
            screen_name: format!("{id}_sn"),
            created_at: Utc
                .timestamp_opt(base_time - rng.random_range(0..86_400 * 365), 0)
                .unwrap(),
            followers_count: rng.random_range(50..5_000),
            friends_count: rng.random_range(50..2_000),
            status: AccountStatus::alive(),
            label,
            dataset_tag: "dna_planted".to_owned(),
        });
        for (i, &symbol) in symbols.iter().enumerate() {
            tweets.push(Tweet {
                id: format!("{id}_t{i:04}"),
                account_id: AccountId(id.to_owned()),
                timestamp: Utc.timestamp_opt(base_time + (i as i64) * 3600, 0).unwrap(),
                kind: symbol_kind(symbol),
                urls: vec![],
                hashtags: vec![],
                mentions: vec![],
            });
        }
    };

    for bot in 0..10 {
        let mut symbols = random_symbols(&mut rng, 100);
        symbols.extend_from_slice(&block);
        symbols.extend(random_symbols(&mut rng, 100));
        let id = format!("dna_bot_{:02}", bot + 1);
        add_account(&id, Label::Spambot, &symbols, &mut rng);
    }
    for gen in 0..10 {
        let symbols = random_symbols(&mut rng, 400);
        let id = format!("dna_gen_{:02}", gen + 1);
        add_account(&id, Label::Genuine, &symbols, &mut rng);
    }

    let dataset = LabeledDataset::new("dna_planted", accounts, tweets, None).expect("valid");
    save_dataset(&dataset, dir).expect("write dna_planted");
    println!("dna_planted: 20 accounts, {} tweets", dataset.tweet_count());
}

/// 20 accounts: 10 bots with near-identical entity statistics (same spammed
/// url, same hashtags, same retweet source) and 10 genuine accounts with
/// scattered per-account habits.
fn write_graph_planted(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0B07_3333);
    let mut accounts = Vec::new();
    let mut tweets = Vec::new();
    let base_time = Utc.with_ymd_and_hms(2014, 9, 1, 0, 0, 0).unwrap().timestamp();

    let mut add_account = |id: &str, label: Label, rng: &mut ChaCha8Rng| {
        accounts.push(Account {
            id: AccountId(id.to_owned()),
            screen_name: format!("{id}_sn"),
            created_at: Utc
                .timestamp_opt(base_time - rng.random_range(0..86_400 * 700), 0)
                .unwrap(),
            followers_count: rng.random_range(100..10_000),
            friends_count: rng.random_range(100..5_000),
            status: AccountStatus::alive(),
            label,
            dataset_tag: "graph_planted".to_owned(),
        });
    };

    for bot in 0..10 {
        let id = format!("graph_bot_{:02}", bot + 1);
        add_account(&id, Label::Spambot, &mut rng);
        let count = 200 + rng.random_range(0..4);
        for i in 0..count {
            let retweet = i % 5 == 0; // fixed 20% retweet cadence
            tweets.push(Tweet {
                id: format!("{id}_t{i:04}"),
                account_id: AccountId(id.clone()),
                timestamp: Utc.timestamp_opt(base_time + (i as i64) * 1800, 0).unwrap(),
                kind: if retweet { TweetKind::Retweet } else { TweetKind::Plain },
                urls: vec!["http://promo.example/app".to_owned()],
                hashtags: vec!["#app".to_owned(), "#win".to_owned()],
                mentions: if retweet { vec![AccountId("brand_hq".to_owned())] } else { vec![] },
            });
        }
    }

    for gen in 0..10 {
        let id = format!("graph_gen_{:02}", gen + 1);
        add_account(&id, Label::Genuine, &mut rng);
        let count = rng.random_range(120..260);
        let url_pool: Vec<String> = (0..rng.random_range(8..40))
            .map(|u| format!("http://site{gen:02}.example/page{u}"))
            .collect();
        let tag_pool: Vec<String> =
            (0..rng.random_range(5..25)).map(|t| format!("#topic{gen:02}_{t}")).collect();
        let friend_pool: Vec<String> =
            (0..rng.random_range(6..30)).map(|f| format!("friend_{gen:02}_{f}")).collect();
        let url_rate = rng.random_range(0.05..0.5);
        let tag_rate = rng.random_range(0.1..0.7);
        let mention_rate = rng.random_range(0.1..0.6);
        let retweet_rate = rng.random_range(0.02..0.3);
        let reply_rate = rng.random_range(0.05..0.4);
        for i in 0..count {
            let roll: f64 = rng.random_range(0.0..1.0);
            let kind = if roll < retweet_rate {
                TweetKind::Retweet
            } else if roll < retweet_rate + reply_rate {
                TweetKind::Reply
            } else {
                TweetKind::Plain
            };
            let mut urls = vec![];
            if rng.random_range(0.0..1.0) < url_rate {
                urls.push(url_pool.choose(&mut rng).unwrap().clone());
            }
            let mut hashtags = vec![];
            if rng.random_range(0.0..1.0) < tag_rate {
                hashtags.push(tag_pool.choose(&mut rng).unwrap().clone());
            }
            let mut mentions = vec![];
            if kind == TweetKind::Retweet || rng.random_range(0.0..1.0) < mention_rate {
                mentions.push(AccountId(friend_pool.choose(&mut rng).unwrap().clone()));
            }
            tweets.push(Tweet {
                id: format!("{id}_t{i:04}"),
                account_id: AccountId(id.clone()),
                timestamp: Utc.timestamp_opt(base_time + (i as i64) * 2400, 0).unwrap(),
                kind,
                urls,
                hashtags,
                mentions,
            });
        }
    }

    let dataset = LabeledDataset::new("graph_planted", accounts, tweets, None).expect("valid");
    save_dataset(&dataset, dir).expect("write graph_planted");

    // Calibration subset: three known bots and two known genuine accounts.
    let calibration = "account_id,label\n\
                       graph_bot_01,spambot\n\
                       graph_bot_02,spambot\n\
                       graph_bot_03,spambot\n\
                       graph_gen_01,genuine\n\
                       graph_gen_02,genuine\n";
    fs::write(dir.join("calibration.csv"), calibration).expect("write calibration");
    println!("graph_planted: 20 accounts, {} tweets", dataset.tweet_count());
}

/// Synthetic annotation campaign: 16 contributors (12 pass the >70% gold
/// gate), 30 accounts with at least 3 trusted answers each. Social-style
/// bots are mostly misread as genuine, mirroring how such campaigns go.
fn write_annotations(dir: &Path) {
    fs::create_dir_all(dir).expect("create annotations dir");
    let mut rng = ChaCha8Rng::seed_from_u64(0x0B07_4444);

    // Gold outcomes: contributor c13 lands exactly on the 70% boundary and
    // must be excluded by the strict gate.
    let gold_correct = [10, 9, 9, 8, 8, 8, 9, 10, 8, 9, 8, 8, 7, 6, 5, 3];
    let mut gold = String::from("contributor,question,correct\n");
    for (idx, &correct) in gold_correct.iter().enumerate() {
        for q in 0..10 {
            let _ = writeln!(
                gold,
                "c{:02},q{:02},{}",
                idx + 1,
                q + 1,
                if q < correct { "true" } else { "false" }
            );
        }
    }
    fs::write(dir.join("gold.csv"), gold).expect("write gold");

    // Truth: 10 traditional-style bots, 10 social-style bots, 10 genuine.
    let mut truth = String::from("account_id,label\n");
    let mut answers = String::from("contributor,account_id,class,order\n");
    let mut order = 0u64;
    for acc in 0..30 {
        let id = format!("ann_{:03}", acc + 1);
        let (label, style) = match acc {
            0..=9 => ("spambot", "traditional"),
            10..=19 => ("spambot", "social"),
            _ => ("genuine", "genuine"),
        };
        let _ = writeln!(truth, "{id},{label}");

        // 3 to 5 answers from distinct trusted contributors, sometimes one
        // from an untrusted straggler (ignored after gating).
        let answer_count = 3 + (acc % 3);
        let mut contributors: Vec<usize> = (0..12).collect();
        contributors.shuffle(&mut rng);
        for &contributor in contributors.iter().take(answer_count) {
            let class = match style {
                // Traditional bots are easy to spot.
                "traditional" => {
                    if rng.random_range(0.0..1.0) < 0.85 {
                        "spambot"
                    } else {
                        "genuine"
                    }
                }
                // Social bots mostly pass as genuine.
                "social" => {
                    let roll: f64 = rng.random_range(0.0..1.0);
                    if roll < 0.2 {
                        "spambot"
                    } else if roll < 0.9 {
                        "genuine"
                    } else {
                        "unable_to_classify"
                    }
                }
                _ => {
                    if rng.random_range(0.0..1.0) < 0.9 {
                        "genuine"
                    } else {
                        "spambot"
                    }
                }
            };
            let _ = writeln!(answers, "c{:02},{id},{class},{order}", contributor + 1);
            order += 1;
        }
        if acc % 4 == 0 {
            let _ = writeln!(answers, "c14,{id},unable_to_classify,{order}");
            order += 1;
        }
    }
    fs::write(dir.join("truth.csv"), truth).expect("write truth");
    fs::write(dir.join("answers.csv"), answers).expect("write answers");
    println!("annotations: 30 accounts, {order} answers");
}

/// Bundled reference tables: the published detector score suite and the
/// published annotation-campaign outcome counts.
fn write_reference_tables(dir: &Path) {
    fs::create_dir_all(dir).expect("create reference dir");

    let detector_scores = "\
test_set,positives,technique,kind,precision,recall,specificity,accuracy,f_measure,mcc
test_set_1,991,twitter_countermeasures,mixed,1.000,0.094,1.000,0.691,0.171,0.252
test_set_1,991,human_annotators,manual,0.267,0.080,0.921,0.698,0.123,0.001
test_set_1,991,botornot,supervised,0.471,0.208,0.918,0.734,0.288,0.174
test_set_1,991,yang,supervised,0.563,0.170,0.860,0.506,0.261,0.043
test_set_1,991,miller,unsupervised,0.555,0.358,0.698,0.526,0.435,0.059
test_set_1,991,ahmed_fastgreedy,unsupervised,0.945,0.944,0.945,0.943,0.944,0.886
test_set_1,991,dna_lcs,unsupervised,0.982,0.972,0.981,0.976,0.977,0.952
test_set_2,464,twitter_countermeasures,mixed,1.000,0.004,1.000,0.502,0.008,0.046
test_set_2,464,human_annotators,manual,0.647,0.509,0.921,0.829,0.570,0.470
test_set_2,464,botornot,supervised,0.635,0.950,0.981,0.922,0.761,0.738
test_set_2,464,yang,supervised,0.727,0.409,0.848,0.629,0.524,0.287
test_set_2,464,miller,unsupervised,0.467,0.306,0.654,0.481,0.370,-0.043
test_set_2,464,ahmed_fastgreedy,unsupervised,0.913,0.935,0.912,0.923,0.923,0.847
test_set_2,464,dna_lcs,unsupervised,1.000,0.858,1.000,0.929,0.923,0.867
";
    fs::write(dir.join("detector_scores.csv"), detector_scores).expect("write scores");

    let annotation_outcomes = "\
type,accounts,tp,tn,fp,fn,accuracy,kappa
traditional_spambots,1516,1385,0,0,131,0.9136,0.007
social_spambots,1393,328,0,0,1065,0.2355,0.186
genuine_accounts,1377,0,1267,110,0,0.9201,0.410
";
    fs::write(dir.join("annotation_outcomes.csv"), annotation_outcomes).expect("write outcomes");
    println!("reference tables written");
}

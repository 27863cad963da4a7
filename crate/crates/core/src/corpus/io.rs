//! Dataset file format: one accounts file and one tweets file per dataset.
//!
//! Both are comma-separated with a header row. List-valued tweet columns
//! (urls, hashtags, mentions) are `;`-joined within their cell. Timestamps
//! are ISO-8601 UTC; rows with unparseable timestamps are rejected with the
//! offending file and line rather than silently dropped.

use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};

use super::{
    Account, AccountId, AccountStatus, CorpusError, Label, LabeledDataset, Tweet, TweetKind,
};

/// Header of the accounts file, in column order.
pub const ACCOUNT_COLUMNS: [&str; 8] = [
    "id",
    "screen_name",
    "created_at",
    "followers_count",
    "friends_count",
    "probe_code",
    "label",
    "dataset_tag",
];

/// Header of the tweets file, in column order.
pub const TWEET_COLUMNS: [&str; 7] =
    ["id", "account_id", "timestamp", "kind", "urls", "hashtags", "mentions"];

const ACCOUNTS_FILE: &str = "accounts.csv";
const TWEETS_FILE: &str = "tweets.csv";

/// Loads and validates a dataset from a directory containing `accounts.csv`
/// and `tweets.csv`. The snapshot date, when given, bounds `created_at`.
pub fn load_dataset(
    path: &Path,
    name: &str,
    snapshot_date: Option<NaiveDate>,
) -> Result<LabeledDataset, CorpusError> {
    let accounts = read_accounts(&path.join(ACCOUNTS_FILE))?;
    let tweets = read_tweets(&path.join(TWEETS_FILE))?;
    LabeledDataset::new(name, accounts, tweets, snapshot_date)
}

/// Writes a dataset back out in the same two-file format. A dataset written
/// by this function and reloaded compares field-by-field equal.
pub fn save_dataset(dataset: &LabeledDataset, path: &Path) -> Result<(), CorpusError> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))?;
    write_accounts(dataset.accounts(), &path.join(ACCOUNTS_FILE))?;
    write_tweets(dataset.tweets(), &path.join(TWEETS_FILE))?;
    Ok(())
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io { path: path.display().to_string(), source }
}

fn malformed(file: &Path, line: u64, message: impl Into<String>) -> CorpusError {
    CorpusError::MalformedRow {
        file: file.display().to_string(),
        line,
        message: message.into(),
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>, CorpusError> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                if let csv::ErrorKind::Io(io) = e.into_kind() {
                    io_err(path, io)
                } else {
                    unreachable!()
                }
            }
            _ => malformed(path, 1, e.to_string()),
        })
}

fn check_header(path: &Path, reader: &mut csv::Reader<std::fs::File>, expected: &[&str]) -> Result<(), CorpusError> {
    let headers = reader.headers().map_err(|e| malformed(path, 1, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(malformed(
            path,
            1,
            format!("unexpected header {:?}, expected {:?}", got.join(","), expected.join(",")),
        ));
    }
    Ok(())
}

fn parse_timestamp(path: &Path, line: u64, field: &str, value: &str) -> Result<DateTime<Utc>, CorpusError> {
    DateTime::parse_from_rfc3339(value)
        .map(|dt| dt.with_timezone(&Utc))
        .map_err(|e| malformed(path, line, format!("{field} `{value}`: {e}")))
}

fn parse_count(path: &Path, line: u64, field: &str, value: &str) -> Result<u64, CorpusError> {
    value
        .parse::<u64>()
        .map_err(|_| malformed(path, line, format!("{field} `{value}` is not a nonnegative integer")))
}

fn read_accounts(path: &Path) -> Result<Vec<Account>, CorpusError> {
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &ACCOUNT_COLUMNS)?;
    let mut accounts = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| malformed(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != ACCOUNT_COLUMNS.len() {
            return Err(malformed(path, line, format!("expected {} fields, got {}", ACCOUNT_COLUMNS.len(), record.len())));
        }
        let probe_code = match record[5].trim() {
            "" => None,
            raw => Some(
                raw.parse::<u16>()
                    .map_err(|_| malformed(path, line, format!("probe_code `{raw}` is not an integer")))?,
            ),
        };
        let status = AccountStatus::from_probe_code(probe_code)
            .map_err(|e| malformed(path, line, e.to_string()))?;
        let label = match &record[6] {
            "genuine" => Label::Genuine,
            "spambot" => Label::Spambot,
            "unknown" => Label::Unknown,
            other => return Err(malformed(path, line, format!("unknown label `{other}`"))),
        };
        accounts.push(Account {
            id: AccountId(record[0].to_owned()),
            screen_name: record[1].to_owned(),
            created_at: parse_timestamp(path, line, "created_at", &record[2])?,
            followers_count: parse_count(path, line, "followers_count", &record[3])?,
            friends_count: parse_count(path, line, "friends_count", &record[4])?,
            status,
            label,
            dataset_tag: record[7].to_owned(),
        });
    }
    Ok(accounts)
}

fn split_list(cell: &str) -> Vec<String> {
    if cell.is_empty() {
        Vec::new()
    } else {
        cell.split(';').map(str::to_owned).collect()
    }
}

fn read_tweets(path: &Path) -> Result<Vec<Tweet>, CorpusError> {
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &TWEET_COLUMNS)?;
    let mut tweets = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| malformed(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != TWEET_COLUMNS.len() {
            return Err(malformed(path, line, format!("expected {} fields, got {}", TWEET_COLUMNS.len(), record.len())));
        }
        let kind: TweetKind =
            record[3].parse().map_err(|e: String| malformed(path, line, e))?;
        tweets.push(Tweet {
            id: record[0].to_owned(),
            account_id: AccountId(record[1].to_owned()),
            timestamp: parse_timestamp(path, line, "timestamp", &record[2])?,
            kind,
            urls: split_list(&record[4]),
            hashtags: split_list(&record[5]),
            mentions: split_list(&record[6]).into_iter().map(AccountId).collect(),
        });
    }
    Ok(tweets)
}

fn write_accounts(accounts: &[Account], path: &Path) -> Result<(), CorpusError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| malformed(path, 0, e.to_string()))?;
    writer.write_record(ACCOUNT_COLUMNS).map_err(|e| malformed(path, 0, e.to_string()))?;
    for account in accounts {
        let probe = account.status.probe_code.map_or(String::new(), |c| c.to_string());
        writer
            .write_record([
                account.id.as_str(),
                &account.screen_name,
                &account.created_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                &account.followers_count.to_string(),
                &account.friends_count.to_string(),
                &probe,
                account.label.as_str(),
                &account.dataset_tag,
            ])
            .map_err(|e| malformed(path, 0, e.to_string()))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

fn write_tweets(tweets: &[Tweet], path: &Path) -> Result<(), CorpusError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| malformed(path, 0, e.to_string()))?;
    writer.write_record(TWEET_COLUMNS).map_err(|e| malformed(path, 0, e.to_string()))?;
    for tweet in tweets {
        let mentions: Vec<&str> = tweet.mentions.iter().map(|m| m.as_str()).collect();
        writer
            .write_record([
                tweet.id.as_str(),
                tweet.account_id.as_str(),
                &tweet.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                tweet.kind.as_str(),
                &tweet.urls.join(";"),
                &tweet.hashtags.join(";"),
                &mentions.join(";"),
            ])
            .map_err(|e| malformed(path, 0, e.to_string()))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

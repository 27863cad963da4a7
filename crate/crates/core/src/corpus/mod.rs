//! Labeled account/tweet datasets: loading, validation, and test-set mixing.
//!
//! Datasets arrive as two delimiter-separated files with header rows, one for
//! accounts and one for tweets (see [`load_dataset`]). A loaded
//! [`LabeledDataset`] is immutable and safe to share across detector modules.

mod io;
mod testset;

pub use io::{load_dataset, save_dataset, ACCOUNT_COLUMNS, TWEET_COLUMNS};
pub use testset::{build_test_set, load_manifest, test_set_from_manifest};

use std::collections::HashMap;
use std::fmt;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque account identifier, unique within a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AccountId(pub String);

impl AccountId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AccountId {
    fn from(s: &str) -> Self {
        AccountId(s.to_owned())
    }
}

/// Ground-truth class of an account.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Genuine,
    Spambot,
    Unknown,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Genuine => "genuine",
            Label::Spambot => "spambot",
            Label::Unknown => "unknown",
        }
    }
}

/// Platform-side liveness of an account at probe time.
///
/// Probe codes map bijectively onto the removed states: 63 means suspended by
/// the platform, 50 means deleted by the owner, and an absent code means the
/// account answered normally (alive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LivenessState {
    Alive,
    Deleted,
    Suspended,
    Protected,
}

impl LivenessState {
    pub fn as_str(&self) -> &'static str {
        match self {
            LivenessState::Alive => "alive",
            LivenessState::Deleted => "deleted",
            LivenessState::Suspended => "suspended",
            LivenessState::Protected => "protected",
        }
    }
}

/// Probe code for a suspended account.
pub const PROBE_CODE_SUSPENDED: u16 = 63;
/// Probe code for a deleted account.
pub const PROBE_CODE_DELETED: u16 = 50;

/// Liveness plus the raw probe code it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountStatus {
    pub state: LivenessState,
    pub probe_code: Option<u16>,
}

impl AccountStatus {
    pub fn alive() -> Self {
        AccountStatus { state: LivenessState::Alive, probe_code: None }
    }

    /// Maps a probe code onto a status: 63 ⇔ suspended, 50 ⇔ deleted,
    /// absent ⇔ alive. Any other code is rejected.
    pub fn from_probe_code(code: Option<u16>) -> Result<Self, CorpusError> {
        match code {
            None => Ok(AccountStatus::alive()),
            Some(PROBE_CODE_DELETED) => Ok(AccountStatus {
                state: LivenessState::Deleted,
                probe_code: Some(PROBE_CODE_DELETED),
            }),
            Some(PROBE_CODE_SUSPENDED) => Ok(AccountStatus {
                state: LivenessState::Suspended,
                probe_code: Some(PROBE_CODE_SUSPENDED),
            }),
            Some(other) => Err(CorpusError::UnknownProbeCode(other)),
        }
    }
}

/// Profile metadata, liveness, and ground-truth label for one account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Account {
    pub id: AccountId,
    pub screen_name: String,
    pub created_at: DateTime<Utc>,
    pub followers_count: u64,
    pub friends_count: u64,
    pub status: AccountStatus,
    pub label: Label,
    pub dataset_tag: String,
}

/// The three timeline entry types the behavioral alphabet distinguishes.
///
/// A retweet is never also a reply; every tweet is exactly one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetKind {
    Plain,
    Reply,
    Retweet,
}

impl TweetKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TweetKind::Plain => "plain",
            TweetKind::Reply => "reply",
            TweetKind::Retweet => "retweet",
        }
    }
}

impl std::str::FromStr for TweetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(TweetKind::Plain),
            "reply" => Ok(TweetKind::Reply),
            "retweet" => Ok(TweetKind::Retweet),
            other => Err(format!("unknown tweet kind `{other}`")),
        }
    }
}

/// One timeline entry with the entities the detectors consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub account_id: AccountId,
    pub timestamp: DateTime<Utc>,
    pub kind: TweetKind,
    pub urls: Vec<String>,
    pub hashtags: Vec<String>,
    pub mentions: Vec<AccountId>,
}

/// A validated, immutable dataset of accounts and their tweets.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    name: String,
    snapshot_date: Option<NaiveDate>,
    accounts: Vec<Account>,
    tweets: Vec<Tweet>,
    by_id: HashMap<AccountId, usize>,
}

impl LabeledDataset {
    /// Validates and assembles a dataset. Rejects duplicate account ids,
    /// tweets whose `account_id` does not resolve, and (when a snapshot date
    /// is given) accounts created after the snapshot.
    pub fn new(
        name: impl Into<String>,
        accounts: Vec<Account>,
        tweets: Vec<Tweet>,
        snapshot_date: Option<NaiveDate>,
    ) -> Result<Self, CorpusError> {
        let name = name.into();
        let mut by_id = HashMap::with_capacity(accounts.len());
        for (idx, account) in accounts.iter().enumerate() {
            if by_id.insert(account.id.clone(), idx).is_some() {
                return Err(CorpusError::DuplicateAccountId { dataset: name, id: account.id.clone() });
            }
            if let Some(snapshot) = snapshot_date {
                if account.created_at.date_naive() > snapshot {
                    return Err(CorpusError::CreatedAfterSnapshot {
                        id: account.id.clone(),
                        created_at: account.created_at,
                        snapshot,
                    });
                }
            }
        }
        let dangling: Vec<AccountId> = tweets
            .iter()
            .filter(|t| !by_id.contains_key(&t.account_id))
            .map(|t| t.account_id.clone())
            .collect();
        if !dangling.is_empty() {
            let mut ids = dangling;
            ids.sort();
            ids.dedup();
            return Err(CorpusError::DanglingTweetAccounts { dataset: name, ids });
        }
        Ok(LabeledDataset { name, snapshot_date, accounts, tweets, by_id })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn snapshot_date(&self) -> Option<NaiveDate> {
        self.snapshot_date
    }

    pub fn accounts(&self) -> &[Account] {
        &self.accounts
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn account_count(&self) -> usize {
        self.accounts.len()
    }

    pub fn tweet_count(&self) -> usize {
        self.tweets.len()
    }

    pub fn account(&self, id: &AccountId) -> Option<&Account> {
        self.by_id.get(id).map(|&idx| &self.accounts[idx])
    }

    /// All tweets of one account in chronological order (ties broken by
    /// tweet id so the order is total).
    pub fn timeline(&self, id: &AccountId) -> Vec<&Tweet> {
        let mut timeline: Vec<&Tweet> =
            self.tweets.iter().filter(|t| &t.account_id == id).collect();
        timeline.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
        timeline
    }

    /// Chronological timelines for every account, keyed by account id.
    /// Accounts without tweets map to an empty timeline.
    pub fn timelines(&self) -> HashMap<&AccountId, Vec<&Tweet>> {
        let mut map: HashMap<&AccountId, Vec<&Tweet>> = HashMap::with_capacity(self.accounts.len());
        for account in &self.accounts {
            map.insert(&account.id, Vec::new());
        }
        for tweet in &self.tweets {
            map.get_mut(&tweet.account_id).expect("validated account id").push(tweet);
        }
        for timeline in map.values_mut() {
            timeline.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
        }
        map
    }
}

/// One test-set member with its binary ground truth (positive = spambot).
#[derive(Debug, Clone)]
pub struct TestMember {
    pub account: Account,
    pub is_spambot: bool,
}

/// A balanced mix of genuine and spambot accounts used to score detectors.
#[derive(Debug, Clone)]
pub struct TestSet {
    pub name: String,
    pub members: Vec<TestMember>,
}

impl TestSet {
    pub fn positives(&self) -> usize {
        self.members.iter().filter(|m| m.is_spambot).count()
    }

    pub fn negatives(&self) -> usize {
        self.members.len() - self.positives()
    }

    pub fn ids(&self) -> impl Iterator<Item = &AccountId> {
        self.members.iter().map(|m| &m.account.id)
    }
}

/// Errors raised while loading, validating, or mixing datasets.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: malformed row: {message}")]
    MalformedRow { file: String, line: u64, message: String },
    #[error("unknown probe code {0} (expected empty, 50, or 63)")]
    UnknownProbeCode(u16),
    #[error("dataset {dataset}: duplicate account id {id}")]
    DuplicateAccountId { dataset: String, id: AccountId },
    #[error("dataset {dataset}: tweets reference unknown account ids: {}", format_ids(ids))]
    DanglingTweetAccounts { dataset: String, ids: Vec<AccountId> },
    #[error("account {id} created at {created_at} after dataset snapshot {snapshot}")]
    CreatedAfterSnapshot { id: AccountId, created_at: DateTime<Utc>, snapshot: NaiveDate },
    #[error("{0} dataset is empty")]
    EmptyDataset(String),
    #[error("manifest {manifest}: ids not present in any source dataset: {}", format_ids(ids))]
    ManifestUnknownIds { manifest: String, ids: Vec<AccountId> },
    #[error("manifest {manifest}: account {id} has label `unknown`, cannot assign a test-set class")]
    ManifestUnlabeledAccount { manifest: String, id: AccountId },
}

fn format_ids(ids: &[AccountId]) -> String {
    const SHOWN: usize = 8;
    let mut out: Vec<&str> = ids.iter().take(SHOWN).map(|id| id.as_str()).collect();
    if ids.len() > SHOWN {
        return format!("{} … ({} total)", out.join(", "), ids.len());
    }
    out.sort();
    out.join(", ")
}

//! Group-level social spambot detection toolkit.
//!
//! Coordinated spambots are hard to spot one account at a time, but a group
//! of them leaves traces of automation: near-identical timelines, tightly
//! clustered profile features, and reputation scores drawn from a narrow
//! band. This crate packages three group-level detectors plus the evaluation
//! machinery used to score them:
//!
//! - [`corpus`]: loading, validating, and mixing labeled account/tweet
//!   datasets; balanced test-set construction.
//! - [`dna`]: behavioral ("digital DNA") sequence encoding and longest
//!   common substring similarity curves over groups of accounts.
//! - [`graphdetect`]: entity-statistics feature vectors, weighted account
//!   similarity graphs, and greedy modularity community detection.
//! - [`disttest`]: reputation-score histograms and Kullback-Leibler
//!   divergence tamper tests.
//! - [`evalkit`]: confusion-matrix metrics, survivability and significance
//!   tables, crowdsourcing agreement analytics, and score-consistency
//!   audits.

pub mod corpus;
pub mod disttest;
pub mod dna;
pub mod evalkit;
pub mod graphdetect;

use serde::{Deserialize, Serialize};

/// Binary detector output for a single account.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Spambot,
    Genuine,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Spambot => "spambot",
            Verdict::Genuine => "genuine",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spambot" => Ok(Verdict::Spambot),
            "genuine" => Ok(Verdict::Genuine),
            other => Err(format!("unknown verdict `{other}` (expected spambot|genuine)")),
        }
    }
}

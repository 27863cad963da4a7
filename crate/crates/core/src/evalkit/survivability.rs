//! Survivability accounting (alive / deleted / suspended per dataset) and
//! per-outcome effect sizes against a baseline group with a 2×2 chi-square
//! significance test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::EvalError;
use crate::corpus::{LabeledDataset, LivenessState};

/// Per-dataset liveness counts. The three outcomes always sum to `total`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivabilityRow {
    pub dataset: String,
    pub total: u64,
    pub alive: u64,
    pub deleted: u64,
    pub suspended: u64,
}

impl SurvivabilityRow {
    pub fn count(&self, outcome: Outcome) -> u64 {
        match outcome {
            Outcome::Alive => self.alive,
            Outcome::Deleted => self.deleted,
            Outcome::Suspended => self.suspended,
        }
    }

    pub fn ratio(&self, outcome: Outcome) -> f64 {
        self.count(outcome) as f64 / self.total as f64
    }

    /// Percentage with one decimal, e.g. `96.5`.
    pub fn percent_str(&self, outcome: Outcome) -> String {
        format!("{:.1}", self.ratio(outcome) * 100.0)
    }
}

/// One row per dataset, in input order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurvivabilityReport {
    pub rows: Vec<SurvivabilityRow>,
}

impl SurvivabilityReport {
    pub fn row(&self, dataset: &str) -> Option<&SurvivabilityRow> {
        self.rows.iter().find(|r| r.dataset == dataset)
    }
}

/// Counts alive, deleted, and suspended accounts per dataset from the
/// replayed probe codes. Accounts in a `protected` state are rejected: the
/// probe populations only contain the three countable outcomes.
pub fn survivability(datasets: &[&LabeledDataset]) -> Result<SurvivabilityReport, EvalError> {
    let mut rows = Vec::with_capacity(datasets.len());
    for dataset in datasets {
        let mut row = SurvivabilityRow {
            dataset: dataset.name().to_owned(),
            total: dataset.account_count() as u64,
            alive: 0,
            deleted: 0,
            suspended: 0,
        };
        for account in dataset.accounts() {
            match account.status.state {
                LivenessState::Alive => row.alive += 1,
                LivenessState::Deleted => row.deleted += 1,
                LivenessState::Suspended => row.suspended += 1,
                LivenessState::Protected => {
                    return Err(EvalError::ProtectedAccount(account.id.clone()))
                }
            }
        }
        rows.push(row);
    }
    Ok(SurvivabilityReport { rows })
}

/// One liveness outcome column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Alive,
    Deleted,
    Suspended,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Alive, Outcome::Deleted, Outcome::Suspended];

    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Alive => "alive",
            Outcome::Deleted => "deleted",
            Outcome::Suspended => "suspended",
        }
    }
}

/// Significance stars: `***` p < 0.01, `**` p < 0.05, `*` p < 0.1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stars {
    None,
    One,
    Two,
    Three,
}

impl Stars {
    pub fn from_p_value(p: f64) -> Stars {
        if p < 0.01 {
            Stars::Three
        } else if p < 0.05 {
            Stars::Two
        } else if p < 0.1 {
            Stars::One
        } else {
            Stars::None
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::One => "*",
            Stars::Two => "**",
            Stars::Three => "***",
        }
    }
}

impl std::fmt::Display for Stars {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Effect size and significance of one outcome's ratio difference between a
/// target group and the baseline group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    /// Signed percentage-point difference, target minus baseline.
    pub effect_pp: f64,
    pub chi_square: f64,
    pub p_value: f64,
    pub stars: Stars,
    /// Set when an expected cell count is zero and the statistic was
    /// reported by convention rather than computed.
    pub warning: bool,
}

/// Compares a target group against a baseline on one outcome via a 2×2
/// chi-square test (outcome vs not-outcome, target vs baseline), 1 degree of
/// freedom, with Yates continuity correction.
///
/// The correction is what reproduces the borderline significance calls of
/// the bundled reference table; identical groups still yield a statistic of
/// exactly 0 and p = 1. When an outcome is absent from both groups the
/// expected cell counts vanish, the statistic is reported as 0 with p = 1,
/// and the result is flagged with `warning`.
pub fn chi_square_effect(
    target: &SurvivabilityRow,
    baseline: &SurvivabilityRow,
    outcome: Outcome,
) -> SignificanceResult {
    let a = target.count(outcome) as f64;
    let b = (target.total - target.count(outcome)) as f64;
    let c = baseline.count(outcome) as f64;
    let d = (baseline.total - baseline.count(outcome)) as f64;
    let effect_pp = (target.ratio(outcome) - baseline.ratio(outcome)) * 100.0;

    let n = a + b + c + d;
    let row1 = a + b;
    let row2 = c + d;
    let col1 = a + c;
    let col2 = b + d;
    if row1 == 0.0 || row2 == 0.0 || col1 == 0.0 || col2 == 0.0 {
        return SignificanceResult {
            effect_pp,
            chi_square: 0.0,
            p_value: 1.0,
            stars: Stars::None,
            warning: true,
        };
    }

    let corrected = (a * d - b * c).abs() - n / 2.0;
    let corrected = corrected.max(0.0);
    let chi_square = n * corrected * corrected / (row1 * row2 * col1 * col2);
    let p_value = if chi_square == 0.0 {
        1.0
    } else {
        let dist = ChiSquared::new(1.0).expect("df = 1 is valid");
        1.0 - dist.cdf(chi_square)
    };
    SignificanceResult {
        effect_pp,
        chi_square,
        p_value,
        stars: Stars::from_p_value(p_value),
        warning: false,
    }
}

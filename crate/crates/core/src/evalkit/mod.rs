//! Evaluation analytics: confusion-matrix metrics, survivability tables with
//! effect sizes and significance, crowdsourcing agreement, and printed-score
//! consistency audits.

mod annotations;
mod audit;
mod survivability;

pub use annotations::{
    fleiss_kappa, gate_contributors, majority_vote, AgreementReport, AnnotationSet, Answer,
    AnswerClass, GoldOutcome, VoteOutcome,
};
pub use audit::{audit_scores, fit_confusion, FitMode, FittedMatrix, PrintedScores, ScoreAudit};
pub use survivability::{
    chi_square_effect, survivability, Outcome, SignificanceResult, Stars, SurvivabilityReport,
    SurvivabilityRow,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Verdict;

/// Binary detection outcome counts; positive class is spambot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: u64,
    pub true_negatives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionMatrix {
            true_positives: tp,
            true_negatives: tn,
            false_positives: fp,
            false_negatives: fn_,
        }
    }

    /// Tallies (truth, predicted) verdict pairs.
    pub fn from_verdicts<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Verdict, Verdict)>,
    {
        let mut cm = ConfusionMatrix::default();
        for (truth, predicted) in pairs {
            match (truth, predicted) {
                (Verdict::Spambot, Verdict::Spambot) => cm.true_positives += 1,
                (Verdict::Genuine, Verdict::Genuine) => cm.true_negatives += 1,
                (Verdict::Genuine, Verdict::Spambot) => cm.false_positives += 1,
                (Verdict::Spambot, Verdict::Genuine) => cm.false_negatives += 1,
            }
        }
        cm
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.true_negatives + self.false_positives + self.false_negatives
    }

    /// Derives the standard metric suite. Any metric whose denominator is
    /// zero is reported as 0 so reports stay total; an all-zero matrix is an
    /// error instead.
    pub fn metrics(&self) -> Result<MetricsReport, EvalError> {
        if self.total() == 0 {
            return Err(EvalError::EmptyConfusionMatrix);
        }
        let tp = self.true_positives as f64;
        let tn = self.true_negatives as f64;
        let fp = self.false_positives as f64;
        let fn_ = self.false_negatives as f64;

        let precision = ratio_or_zero(tp, tp + fp);
        let recall = ratio_or_zero(tp, tp + fn_);
        let specificity = ratio_or_zero(tn, tn + fp);
        let accuracy = (tp + tn) / self.total() as f64;
        let f_measure = ratio_or_zero(2.0 * precision * recall, precision + recall);
        let mcc_denom = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
        let mcc = ratio_or_zero(tp * tn - fp * fn_, mcc_denom);

        Ok(MetricsReport { precision, recall, specificity, accuracy, f_measure, mcc })
    }
}

fn ratio_or_zero(numerator: f64, denominator: f64) -> f64 {
    if denominator == 0.0 {
        0.0
    } else {
        numerator / denominator
    }
}

/// The detector score suite, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub accuracy: f64,
    pub f_measure: f64,
    pub mcc: f64,
}

impl MetricsReport {
    /// Column names matching the serialized field order.
    pub const COLUMNS: [&'static str; 6] =
        ["precision", "recall", "specificity", "accuracy", "f_measure", "mcc"];
}

/// Errors raised by evaluation operations.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("confusion matrix is all zeros, no metrics to derive")]
    EmptyConfusionMatrix,
    #[error("account {0} has a `protected` status, not part of survivability populations")]
    ProtectedAccount(crate::corpus::AccountId),
    #[error("{0} group is empty")]
    EmptyGroup(String),
    #[error("contributors without any gold-question outcome: {0:?}")]
    MissingGoldOutcomes(Vec<String>),
    #[error("majority vote needs at least 3 answers, got {0}")]
    TooFewAnswers(usize),
    #[error("rating matrix is empty")]
    EmptyRatingMatrix,
    #[error("rating matrix rows must all sum to the same rater count; row {row} sums to {got}, expected {expected}")]
    UnevenRaterCounts { row: usize, got: u64, expected: u64 },
    #[error("rater count per item must be at least 2, got {0}")]
    TooFewRaters(u64),
    #[error("all ratings fall in a single category; chance agreement is 1 and kappa is undefined")]
    DegenerateAgreement,
}

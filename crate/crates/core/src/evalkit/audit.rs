//! Consistency audit for printed detector score tables.
//!
//! Full detector-score reproduction needs the original full-scale timelines,
//! which are not shippable, so the bundled reference scores are instead
//! audited for internal consistency: the F-measure must follow from the
//! printed precision and recall, and the printed accuracy must follow from
//! an integer confusion matrix fitted to the printed rates.

use serde::{Deserialize, Serialize};

use super::ConfusionMatrix;

/// One printed score row: the six metrics as published.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrintedScores {
    pub test_set: String,
    pub technique: String,
    pub kind: String,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub accuracy: f64,
    pub f_measure: f64,
    pub mcc: f64,
}

/// How the integer confusion matrix was pinned down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitMode {
    /// Precision, recall, and specificity jointly determine the
    /// negatives-per-positive ratio; accuracy is then a genuine prediction.
    FromRates,
    /// Precision and specificity are both 1 (no false positives), which
    /// leaves the class ratio unconstrained; it is solved from the printed
    /// accuracy instead, so the accuracy check is consistency-only.
    AccuracySolved,
}

/// An integer confusion matrix consistent with a printed row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedMatrix {
    pub matrix: ConfusionMatrix,
    /// Implied negatives-per-positive population ratio.
    pub class_ratio: f64,
    pub mode: FitMode,
}

/// Fits an integer confusion matrix to a printed row, scaling the positive
/// class to `positives` accounts.
///
/// With rates p = tp/(tp+fp), r = tp/pos, s = tn/neg, the implied ratio is
/// neg/pos = r(1−p) / (p(1−s)). Rows with p = 1 and s = 1 carry no false
/// positives and leave the ratio free; it is recovered from the printed
/// accuracy a as (a − r)/(1 − a). Returns `None` when the printed rates are
/// structurally contradictory (exactly one of p, s equal to 1, or a
/// non-positive implied ratio).
pub fn fit_confusion(row: &PrintedScores, positives: u64) -> Option<FittedMatrix> {
    let p = row.precision;
    let r = row.recall;
    let s = row.specificity;
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&r) || !(0.0..=1.0).contains(&s) {
        return None;
    }
    let (class_ratio, mode) = if p >= 1.0 && s >= 1.0 {
        if row.accuracy >= 1.0 || row.accuracy <= r {
            return None;
        }
        ((row.accuracy - r) / (1.0 - row.accuracy), FitMode::AccuracySolved)
    } else if p >= 1.0 || s >= 1.0 || p <= 0.0 {
        // fp must be both zero and nonzero; no population fits.
        return None;
    } else {
        (r * (1.0 - p) / (p * (1.0 - s)), FitMode::FromRates)
    };
    if !class_ratio.is_finite() || class_ratio <= 0.0 {
        return None;
    }

    let pos = positives as f64;
    let negatives = (class_ratio * pos).round().max(1.0);
    let tp = (r * pos).round();
    let fp = ((1.0 - s) * negatives).round().min(negatives);
    let matrix = ConfusionMatrix::new(
        tp as u64,
        (negatives - fp) as u64,
        fp as u64,
        (pos - tp) as u64,
    );
    Some(FittedMatrix { matrix, class_ratio, mode })
}

/// Audit outcome for one printed row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreAudit {
    pub row: PrintedScores,
    /// F-measure recomputed from the printed precision and recall.
    pub f_recomputed: f64,
    pub f_delta: f64,
    pub fit: Option<FittedMatrix>,
    /// Accuracy recomputed from the fitted integer matrix, when one exists.
    pub accuracy_recomputed: Option<f64>,
    pub accuracy_delta: Option<f64>,
}

impl ScoreAudit {
    pub fn f_consistent(&self, tolerance: f64) -> bool {
        self.f_delta <= tolerance
    }

    pub fn accuracy_consistent(&self, tolerance: f64) -> bool {
        self.accuracy_delta.is_some_and(|d| d <= tolerance)
    }
}

/// Audits one printed row against `positives` accounts in the positive class.
pub fn audit_scores(row: &PrintedScores, positives: u64) -> ScoreAudit {
    let f_recomputed = if row.precision + row.recall > 0.0 {
        2.0 * row.precision * row.recall / (row.precision + row.recall)
    } else {
        0.0
    };
    let fit = fit_confusion(row, positives);
    let accuracy_recomputed = fit.map(|f| {
        let cm = f.matrix;
        (cm.true_positives + cm.true_negatives) as f64 / cm.total() as f64
    });
    ScoreAudit {
        row: row.clone(),
        f_recomputed,
        f_delta: (f_recomputed - row.f_measure).abs(),
        fit,
        accuracy_recomputed,
        accuracy_delta: accuracy_recomputed.map(|a| (a - row.accuracy).abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: f64, r: f64, s: f64, a: f64, f: f64, mcc: f64) -> PrintedScores {
        PrintedScores {
            test_set: "t".into(),
            technique: "x".into(),
            kind: "unsupervised".into(),
            precision: p,
            recall: r,
            specificity: s,
            accuracy: a,
            f_measure: f,
            mcc,
        }
    }

    #[test]
    fn balanced_self_consistent_row_passes_both_checks() {
        let audit = audit_scores(&row(0.982, 0.972, 0.981, 0.976, 0.977, 0.952), 991);
        assert!(audit.f_consistent(0.001));
        assert!(audit.accuracy_consistent(0.005));
        let fit = audit.fit.unwrap();
        assert_eq!(fit.mode, FitMode::FromRates);
        assert_eq!(fit.matrix.true_positives, 963);
        assert_eq!(fit.matrix.false_positives, 18);
    }

    #[test]
    fn unbalanced_population_row_is_recovered() {
        // Rates only fit a population with ~2.78 negatives per positive;
        // the audit must infer that rather than assume balance.
        let audit = audit_scores(&row(0.267, 0.080, 0.921, 0.698, 0.123, 0.001), 991);
        let fit = audit.fit.unwrap();
        assert!((fit.class_ratio - 2.78).abs() < 0.01);
        assert!(audit.accuracy_consistent(0.005));
    }

    #[test]
    fn no_false_positive_row_solves_ratio_from_accuracy() {
        let audit = audit_scores(&row(1.0, 0.094, 1.0, 0.691, 0.171, 0.252), 991);
        let fit = audit.fit.unwrap();
        assert_eq!(fit.mode, FitMode::AccuracySolved);
        assert!(audit.accuracy_consistent(0.005));
        assert!(audit.f_consistent(0.001));
    }

    #[test]
    fn contradictory_row_fails_accuracy_audit() {
        // Specificity 0.981 with precision 0.635 and recall 0.950 implies an
        // accuracy near 0.980; a printed accuracy of 0.922 cannot coexist.
        let audit = audit_scores(&row(0.635, 0.950, 0.981, 0.922, 0.761, 0.738), 464);
        assert!(audit.f_consistent(0.001));
        assert!(!audit.accuracy_consistent(0.005));
        assert!((audit.accuracy_recomputed.unwrap() - 0.980).abs() < 0.001);
    }

    #[test]
    fn structurally_impossible_rates_fit_nothing() {
        // Precision 1 demands zero false positives, specificity < 1 demands
        // some; no confusion matrix satisfies both.
        assert!(fit_confusion(&row(1.0, 0.5, 0.9, 0.7, 0.66, 0.5), 100).is_none());
    }
}

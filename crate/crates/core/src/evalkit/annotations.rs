//! Crowdsourcing annotation analytics: gold-question contributor gating,
//! majority voting, and Fleiss' kappa inter-rater agreement.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::AccountId;

/// One contributor answer about one account.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerClass {
    Spambot,
    Genuine,
    UnableToClassify,
}

impl AnswerClass {
    pub const ALL: [AnswerClass; 3] =
        [AnswerClass::Spambot, AnswerClass::Genuine, AnswerClass::UnableToClassify];

    pub fn as_str(&self) -> &'static str {
        match self {
            AnswerClass::Spambot => "spambot",
            AnswerClass::Genuine => "genuine",
            AnswerClass::UnableToClassify => "unable_to_classify",
        }
    }
}

impl std::str::FromStr for AnswerClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spambot" => Ok(AnswerClass::Spambot),
            "genuine" => Ok(AnswerClass::Genuine),
            "unable_to_classify" => Ok(AnswerClass::UnableToClassify),
            other => Err(format!("unknown answer class `{other}`")),
        }
    }
}

/// An answer with the submission order used for deterministic subsampling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub contributor: String,
    pub account: AccountId,
    pub class: AnswerClass,
    /// Campaign-wide submission sequence number.
    pub order: u64,
}

/// Outcome of one contributor's gold (test) question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldOutcome {
    pub contributor: String,
    pub correct: bool,
}

/// Retains contributors whose gold-question accuracy is strictly greater
/// than `min_accuracy`. Every contributor seen in `gold` takes part; a
/// contributor with zero gold outcomes cannot be gated and is an error.
pub fn gate_contributors(
    gold: &[GoldOutcome],
    min_accuracy: f64,
) -> Result<BTreeSet<String>, EvalError> {
    let mut tally: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for outcome in gold {
        let entry = tally.entry(&outcome.contributor).or_insert((0, 0));
        entry.1 += 1;
        if outcome.correct {
            entry.0 += 1;
        }
    }
    Ok(tally
        .into_iter()
        .filter(|(_, (correct, total))| *correct as f64 / *total as f64 > min_accuracy)
        .map(|(contributor, _)| contributor.to_owned())
        .collect())
}

/// Final class of one account after voting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VoteOutcome {
    Class(AnswerClass),
    /// No strict majority among the three classes.
    Unresolved,
}

/// Strict-majority vote over at least 3 answers.
pub fn majority_vote(answers: &[AnswerClass]) -> Result<VoteOutcome, EvalError> {
    if answers.len() < 3 {
        return Err(EvalError::TooFewAnswers(answers.len()));
    }
    let mut counts: BTreeMap<AnswerClass, usize> = BTreeMap::new();
    for class in AnswerClass::ALL {
        counts.insert(class, 0);
    }
    for answer in answers {
        *counts.get_mut(answer).unwrap() += 1;
    }
    let winner = counts
        .iter()
        .max_by_key(|(_, &count)| count)
        .map(|(&class, &count)| (class, count))
        .unwrap();
    Ok(if winner.1 * 2 > answers.len() {
        VoteOutcome::Class(winner.0)
    } else {
        VoteOutcome::Unresolved
    })
}

/// Fleiss' kappa result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub kappa: f64,
    pub items: usize,
    pub categories: usize,
    pub raters_per_item: u64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
}

/// Fleiss' kappa over an items × categories count matrix. Every item must
/// have been rated by the same number of raters n ≥ 2.
///
/// κ = (P̄ − P̄e) / (1 − P̄e), with per-item agreement
/// Pᵢ = Σⱼ nᵢⱼ(nᵢⱼ−1) / (n(n−1)) and chance agreement P̄e = Σⱼ pⱼ².
/// When all mass falls in a single category P̄e = 1 and κ is undefined,
/// which is surfaced as an error.
pub fn fleiss_kappa(matrix: &[Vec<u64>]) -> Result<AgreementReport, EvalError> {
    if matrix.is_empty() || matrix[0].is_empty() {
        return Err(EvalError::EmptyRatingMatrix);
    }
    let categories = matrix[0].len();
    let n = matrix[0].iter().sum::<u64>();
    if n < 2 {
        return Err(EvalError::TooFewRaters(n));
    }
    for (row_idx, row) in matrix.iter().enumerate() {
        let sum: u64 = row.iter().sum();
        if row.len() != categories || sum != n {
            return Err(EvalError::UnevenRaterCounts { row: row_idx, got: sum, expected: n });
        }
    }

    let items = matrix.len() as f64;
    let n_f = n as f64;
    let observed_agreement = matrix
        .iter()
        .map(|row| {
            row.iter().map(|&c| (c * c.saturating_sub(1)) as f64).sum::<f64>()
                / (n_f * (n_f - 1.0))
        })
        .sum::<f64>()
        / items;

    let total_ratings = items * n_f;
    let expected_agreement = (0..categories)
        .map(|j| {
            let column: u64 = matrix.iter().map(|row| row[j]).sum();
            let p = column as f64 / total_ratings;
            p * p
        })
        .sum::<f64>();

    if (1.0 - expected_agreement).abs() < 1e-12 {
        return Err(EvalError::DegenerateAgreement);
    }
    Ok(AgreementReport {
        kappa: (observed_agreement - expected_agreement) / (1.0 - expected_agreement),
        items: matrix.len(),
        categories,
        raters_per_item: n,
        observed_agreement,
        expected_agreement,
    })
}

/// A crowdsourcing campaign's raw material: answers plus gold outcomes.
#[derive(Debug, Clone, Default)]
pub struct AnnotationSet {
    pub answers: Vec<Answer>,
    pub gold: Vec<GoldOutcome>,
}

impl AnnotationSet {
    /// Contributors passing the gold-question gate.
    pub fn trusted_contributors(&self, min_accuracy: f64) -> Result<BTreeSet<String>, EvalError> {
        let mut missing: Vec<String> = BTreeSet::from_iter(
            self.answers
                .iter()
                .map(|a| a.contributor.clone())
                .filter(|c| !self.gold.iter().any(|g| &g.contributor == c)),
        )
        .into_iter()
        .collect();
        if !missing.is_empty() {
            missing.sort();
            return Err(EvalError::MissingGoldOutcomes(missing));
        }
        gate_contributors(&self.gold, min_accuracy)
    }

    /// Answers from trusted contributors, grouped per account in submission
    /// order.
    pub fn trusted_answers(
        &self,
        trusted: &BTreeSet<String>,
    ) -> BTreeMap<AccountId, Vec<&Answer>> {
        let mut map: BTreeMap<AccountId, Vec<&Answer>> = BTreeMap::new();
        for answer in &self.answers {
            if trusted.contains(&answer.contributor) {
                map.entry(answer.account.clone()).or_default().push(answer);
            }
        }
        for answers in map.values_mut() {
            answers.sort_by_key(|a| a.order);
        }
        map
    }

    /// Majority vote per account over trusted answers. Accounts with fewer
    /// than 3 trusted answers are dropped, mirroring campaign retention.
    pub fn vote_all(
        &self,
        trusted: &BTreeSet<String>,
    ) -> BTreeMap<AccountId, VoteOutcome> {
        self.trusted_answers(trusted)
            .into_iter()
            .filter(|(_, answers)| answers.len() >= 3)
            .map(|(account, answers)| {
                let classes: Vec<AnswerClass> = answers.iter().map(|a| a.class).collect();
                let outcome = majority_vote(&classes).expect("length checked");
                (account, outcome)
            })
            .collect()
    }

    /// Items × categories rating matrix over trusted answers, keeping the
    /// earliest `n` answers per account where `n` is the minimum trusted
    /// answer count across retained accounts (so rater counts are constant,
    /// as Fleiss' kappa requires). Accounts with fewer than `min_answers`
    /// trusted answers are dropped first.
    pub fn rating_matrix(
        &self,
        trusted: &BTreeSet<String>,
        min_answers: usize,
    ) -> Vec<Vec<u64>> {
        let grouped = self.trusted_answers(trusted);
        let retained: Vec<&Vec<&Answer>> =
            grouped.values().filter(|answers| answers.len() >= min_answers).collect();
        let Some(n) = retained.iter().map(|answers| answers.len()).min() else {
            return Vec::new();
        };
        retained
            .iter()
            .map(|answers| {
                let mut row = vec![0u64; AnswerClass::ALL.len()];
                for answer in answers.iter().take(n) {
                    row[answer.class as usize] += 1;
                }
                row
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold(contributor: &str, correct: usize, wrong: usize) -> Vec<GoldOutcome> {
        let mut out = Vec::new();
        for _ in 0..correct {
            out.push(GoldOutcome { contributor: contributor.into(), correct: true });
        }
        for _ in 0..wrong {
            out.push(GoldOutcome { contributor: contributor.into(), correct: false });
        }
        out
    }

    #[test]
    fn gate_is_strictly_greater_than_threshold() {
        let mut outcomes = gold("eight_of_ten", 8, 2);
        outcomes.extend(gold("seven_of_ten", 7, 3));
        let trusted = gate_contributors(&outcomes, 0.70).unwrap();
        assert!(trusted.contains("eight_of_ten"));
        assert!(!trusted.contains("seven_of_ten"));
    }

    #[test]
    fn empty_trusted_set_when_nobody_passes() {
        let mut outcomes = gold("a", 1, 9);
        outcomes.extend(gold("b", 5, 5));
        let trusted = gate_contributors(&outcomes, 0.70).unwrap();
        assert!(trusted.is_empty());
    }

    #[test]
    fn strict_majority_wins() {
        use AnswerClass::*;
        let vote = majority_vote(&[Spambot, Spambot, Genuine]).unwrap();
        assert_eq!(vote, VoteOutcome::Class(Spambot));
        let vote = majority_vote(&[Genuine, Genuine, Genuine]).unwrap();
        assert_eq!(vote, VoteOutcome::Class(Genuine));
    }

    #[test]
    fn three_way_tie_is_unresolved() {
        use AnswerClass::*;
        let vote = majority_vote(&[Spambot, Genuine, UnableToClassify]).unwrap();
        assert_eq!(vote, VoteOutcome::Unresolved);
    }

    #[test]
    fn fewer_than_three_answers_errors() {
        use AnswerClass::*;
        assert!(majority_vote(&[Spambot, Genuine]).is_err());
    }

    #[test]
    fn unanimous_items_on_distinct_categories_give_kappa_one() {
        let matrix = vec![vec![3, 0], vec![0, 3]];
        let report = fleiss_kappa(&matrix).unwrap();
        assert!((report.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_matrix_matches_hand_evaluation() {
        // Hand evaluation: item agreements are 1, 1, 1/3, 1/3, so
        // P̄ = 2/3; both category margins are 1/2, so P̄e = 1/2 and
        // κ = (2/3 − 1/2)/(1 − 1/2) = 1/3.
        let matrix = vec![vec![3, 0], vec![0, 3], vec![2, 1], vec![1, 2]];
        let report = fleiss_kappa(&matrix).unwrap();
        assert!((report.kappa - 1.0 / 3.0).abs() < 1e-6, "got {}", report.kappa);
    }

    #[test]
    fn single_category_mass_is_undefined() {
        let matrix = vec![vec![3, 0], vec![3, 0]];
        assert!(matches!(fleiss_kappa(&matrix), Err(EvalError::DegenerateAgreement)));
    }

    #[test]
    fn uneven_rater_counts_rejected() {
        let matrix = vec![vec![3, 0], vec![2, 2]];
        assert!(matches!(fleiss_kappa(&matrix), Err(EvalError::UnevenRaterCounts { .. })));
    }

    #[test]
    fn kappa_invariant_under_item_and_category_permutation() {
        let matrix = vec![vec![3, 0], vec![0, 3], vec![2, 1], vec![1, 2]];
        let permuted_items = vec![vec![1, 2], vec![2, 1], vec![0, 3], vec![3, 0]];
        let relabeled = vec![vec![0, 3], vec![3, 0], vec![1, 2], vec![2, 1]];
        let base = fleiss_kappa(&matrix).unwrap().kappa;
        assert!((fleiss_kappa(&permuted_items).unwrap().kappa - base).abs() < 1e-12);
        assert!((fleiss_kappa(&relabeled).unwrap().kappa - base).abs() < 1e-12);
    }

    #[test]
    fn pipeline_gates_votes_and_subsamples() {
        use AnswerClass::*;
        let mut set = AnnotationSet::default();
        set.gold.extend(gold("good1", 9, 1));
        set.gold.extend(gold("good2", 8, 2));
        set.gold.extend(gold("good3", 10, 0));
        set.gold.extend(gold("good4", 8, 2));
        set.gold.extend(gold("bad", 3, 7));
        let mut order = 0;
        let mut push = |contributor: &str, account: &str, class| {
            set.answers.push(Answer {
                contributor: contributor.into(),
                account: AccountId::from(account),
                class,
                order,
            });
            order += 1;
        };
        // acc1: three trusted spambot answers plus an untrusted dissent.
        push("good1", "acc1", Spambot);
        push("good2", "acc1", Spambot);
        push("good3", "acc1", Spambot);
        push("bad", "acc1", Genuine);
        // acc2: four trusted answers; earliest three decide the matrix row.
        push("good1", "acc2", Genuine);
        push("good2", "acc2", Genuine);
        push("good3", "acc2", Spambot);
        push("good4", "acc2", Genuine);
        // acc3: only two trusted answers, dropped from votes and matrix.
        push("good1", "acc3", Spambot);
        push("good2", "acc3", Spambot);

        let trusted = set.trusted_contributors(0.70).unwrap();
        assert_eq!(trusted.len(), 4);

        let votes = set.vote_all(&trusted);
        assert_eq!(votes.len(), 2);
        assert_eq!(votes[&AccountId::from("acc1")], VoteOutcome::Class(Spambot));
        assert_eq!(votes[&AccountId::from("acc2")], VoteOutcome::Class(Genuine));

        let matrix = set.rating_matrix(&trusted, 3);
        assert_eq!(matrix.len(), 2);
        assert!(matrix.iter().all(|row| row.iter().sum::<u64>() == 3));
        // acc1 row: all three in the spambot column.
        assert_eq!(matrix[0][Spambot as usize], 3);
        // acc2 row: earliest three are genuine, genuine, spambot.
        assert_eq!(matrix[1][Genuine as usize], 2);
        assert_eq!(matrix[1][Spambot as usize], 1);
    }
}

//! Reputation-distribution tamper test: bin a reputation score over a
//! reference group, histogram both groups on the shared bins, and compare
//! with the Kullback-Leibler distance against a threshold.
//!
//! The verdict is group-level only; the test flags that a group contains
//! malicious members without attributing individual accounts.

use chrono::Datelike;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Account;

/// Reputation score used for the distribution comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// Account creation date, binned by calendar quarter.
    JoinDate,
    /// Follower count, binned on log10(1 + x).
    FollowersCount,
}

impl ScoreKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScoreKind::JoinDate => "join_date",
            ScoreKind::FollowersCount => "followers_count",
        }
    }

    /// Transformed scalar score of one account.
    fn score(&self, account: &Account) -> f64 {
        match self {
            // Quarter index counted from year 0; consecutive quarters are
            // consecutive integers.
            ScoreKind::JoinDate => {
                let date = account.created_at.date_naive();
                (date.year() as f64) * 4.0 + ((date.month0() / 3) as f64)
            }
            ScoreKind::FollowersCount => (1.0 + account.followers_count as f64).log10(),
        }
    }
}

impl std::str::FromStr for ScoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "join_date" => Ok(ScoreKind::JoinDate),
            "followers_count" => Ok(ScoreKind::FollowersCount),
            other => Err(format!("unknown score kind `{other}` (expected join_date|followers_count)")),
        }
    }
}

/// Bin layout fitted on a reference group and shared by every histogram
/// taking part in one comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBinning {
    pub kind: ScoreKind,
    /// Ascending bin edges; bin i covers [edges[i], edges[i+1]).
    pub edges: Vec<f64>,
}

impl ScoreBinning {
    /// Fits bins over the reference range: equal-width bins for follower
    /// counts, one bin per calendar quarter for join dates (`bin_count` is
    /// a lower bound there, padding trailing quarters when the reference
    /// span is narrower).
    pub fn fit(
        reference: &[Account],
        kind: ScoreKind,
        bin_count: usize,
    ) -> Result<Self, DistError> {
        if reference.is_empty() {
            return Err(DistError::EmptyGroup("reference".into()));
        }
        if bin_count < 2 {
            return Err(DistError::TooFewBins(bin_count));
        }
        let scores: Vec<f64> = reference.iter().map(|a| kind.score(a)).collect();
        let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let edges = match kind {
            ScoreKind::JoinDate => {
                // Quarter indices are integers; edges sit between quarters.
                let first = lo.floor();
                let last = hi.floor();
                let quarters = ((last - first) as usize + 1).max(bin_count);
                (0..=quarters).map(|i| first + i as f64).collect()
            }
            ScoreKind::FollowersCount => {
                let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
                let width = (hi - lo) / bin_count as f64;
                (0..=bin_count).map(|i| lo + width * i as f64).collect()
            }
        };
        Ok(ScoreBinning { kind, edges })
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1
    }

    fn bin_of(&self, score: f64) -> usize {
        // Clamp out-of-range scores into the edge bins.
        let last = self.bin_count() - 1;
        match self.edges.iter().rposition(|&e| e <= score) {
            None => 0,
            Some(i) => i.min(last),
        }
    }

    /// Histograms a group on these bins with Laplace smoothing, one
    /// pseudo-count per bin, so every bin carries strictly positive mass.
    pub fn histogram(&self, accounts: &[Account]) -> Result<ScoreDistribution, DistError> {
        if accounts.is_empty() {
            return Err(DistError::EmptyGroup("histogram input".into()));
        }
        let bins = self.bin_count();
        let mut counts = vec![0u64; bins];
        for account in accounts {
            counts[self.bin_of(self.kind.score(account))] += 1;
        }
        let denom = (accounts.len() + bins) as f64;
        let probabilities = counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect();
        Ok(ScoreDistribution {
            kind: self.kind,
            edges: self.edges.clone(),
            probabilities,
            sample_count: accounts.len() as u64,
        })
    }
}

/// Smoothed per-bin probability masses of one group's reputation score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub kind: ScoreKind,
    pub edges: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub sample_count: u64,
}

impl ScoreDistribution {
    /// Rows of (bin_lo, bin_hi, mass) for export.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.edges
            .windows(2)
            .zip(&self.probabilities)
            .map(|(edge, &mass)| (edge[0], edge[1], mass))
    }

    pub fn total_mass(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// Kullback-Leibler distance Σ pᵢ·ln(pᵢ/qᵢ) in nats. Both distributions must
/// share the score kind and bin edges. Smoothing guarantees every qᵢ > 0, so
/// the sum is finite; the result is clamped at 0 against rounding noise.
pub fn kl_divergence(p: &ScoreDistribution, q: &ScoreDistribution) -> Result<f64, DistError> {
    if p.kind != q.kind || p.edges != q.edges {
        return Err(DistError::BinMismatch);
    }
    let sum: f64 = p
        .probabilities
        .iter()
        .zip(&q.probabilities)
        .map(|(&pi, &qi)| if pi == qi { 0.0 } else { pi * (pi / qi).ln() })
        .sum();
    Ok(sum.max(0.0))
}

/// Group-level tamper verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TamperVerdict {
    pub kl_value: f64,
    pub threshold: f64,
    pub tampered: bool,
}

/// Bins the score over the reference group, histograms both groups, and
/// labels the suspect group tampered when KL(suspect ‖ reference) exceeds
/// the threshold.
pub fn tamper_test(
    suspect: &[Account],
    reference: &[Account],
    kind: ScoreKind,
    bin_count: usize,
    threshold: f64,
) -> Result<TamperVerdict, DistError> {
    if suspect.is_empty() {
        return Err(DistError::EmptyGroup("suspect".into()));
    }
    let binning = ScoreBinning::fit(reference, kind, bin_count)?;
    let reference_hist = binning.histogram(reference)?;
    let suspect_hist = binning.histogram(suspect)?;
    let kl_value = kl_divergence(&suspect_hist, &reference_hist)?;
    Ok(TamperVerdict { kl_value, threshold, tampered: kl_value > threshold })
}

/// Calibrates a tamper threshold as the 99th percentile (nearest rank) of
/// KL values over seeded bootstrap half-splits of the reference group.
pub fn calibrate_threshold(
    reference: &[Account],
    kind: ScoreKind,
    bin_count: usize,
    splits: usize,
    seed: u64,
) -> Result<f64, DistError> {
    if reference.len() < 4 {
        return Err(DistError::EmptyGroup("reference (needs at least 4 accounts)".into()));
    }
    if splits == 0 {
        return Err(DistError::TooFewSplits);
    }
    let binning = ScoreBinning::fit(reference, kind, bin_count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..reference.len()).collect();
    let mut values = Vec::with_capacity(splits);
    for _ in 0..splits {
        indices.shuffle(&mut rng);
        let mid = indices.len() / 2;
        let half_a: Vec<Account> = indices[..mid].iter().map(|&i| reference[i].clone()).collect();
        let half_b: Vec<Account> = indices[mid..].iter().map(|&i| reference[i].clone()).collect();
        let pa = binning.histogram(&half_a)?;
        let pb = binning.histogram(&half_b)?;
        values.push(kl_divergence(&pa, &pb)?);
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let rank = ((0.99 * values.len() as f64).ceil() as usize).clamp(1, values.len());
    Ok(values[rank - 1])
}

/// Errors raised by distribution comparisons.
#[derive(Debug, Error)]
pub enum DistError {
    #[error("{0} group is empty")]
    EmptyGroup(String),
    #[error("bin count must be at least 2, got {0}")]
    TooFewBins(usize),
    #[error("distributions have different score kinds or bin edges")]
    BinMismatch,
    #[error("threshold calibration needs at least one split")]
    TooFewSplits,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AccountId, AccountStatus, Label};
    use chrono::{TimeZone, Utc};

    fn account(id: usize, year: i32, month: u32, followers: u64) -> Account {
        Account {
            id: AccountId(format!("a{id:05}")),
            screen_name: format!("u{id}"),
            created_at: Utc.with_ymd_and_hms(year, month, 15, 12, 0, 0).unwrap(),
            followers_count: followers,
            friends_count: 0,
            status: AccountStatus::alive(),
            label: Label::Unknown,
            dataset_tag: "synthetic".into(),
        }
    }

    fn spread_group(n: usize, seed: u64) -> Vec<Account> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let year = rng.random_range(2007..=2014);
                let month = rng.random_range(1..=12);
                let followers = 10u64.pow(rng.random_range(0..5)) + rng.random_range(0..9);
                account(i, year, month, followers)
            })
            .collect()
    }

    #[test]
    fn histogram_mass_sums_to_one() {
        let group = spread_group(500, 1);
        for kind in [ScoreKind::JoinDate, ScoreKind::FollowersCount] {
            let binning = ScoreBinning::fit(&group, kind, 10).unwrap();
            let hist = binning.histogram(&group).unwrap();
            assert!((hist.total_mass() - 1.0).abs() < 1e-9);
            assert!(hist.probabilities.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn identical_scores_concentrate_in_one_bin() {
        let group: Vec<Account> = (0..100).map(|i| account(i, 2012, 3, 1000)).collect();
        let binning = ScoreBinning::fit(&group, ScoreKind::FollowersCount, 10).unwrap();
        let hist = binning.histogram(&group).unwrap();
        let floor = 1.0 / (100.0 + 10.0);
        let max = hist.probabilities.iter().copied().fold(0.0, f64::max);
        assert!((max - (100.0 + 1.0) / 110.0).abs() < 1e-12);
        let at_floor = hist.probabilities.iter().filter(|&&p| (p - floor).abs() < 1e-12).count();
        assert_eq!(at_floor, 9);
    }

    #[test]
    fn uniform_scores_fill_bins_evenly() {
        // Followers drawn so the log10 transform is uniform over [2, 5);
        // each of 10 bins should hold mass 0.1 within 3 sigma. The range
        // starts at 100 followers so integer rounding cannot distort the
        // transform.
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let group: Vec<Account> = (0..10_000)
            .map(|i| {
                let u: f64 = rng.random_range(2.0..5.0);
                account(i, 2010, 1, (10f64.powf(u) - 1.0).round() as u64)
            })
            .collect();
        let binning = ScoreBinning::fit(&group, ScoreKind::FollowersCount, 10).unwrap();
        let hist = binning.histogram(&group).unwrap();
        let sigma = (0.1 * 0.9 / 10_000.0_f64).sqrt();
        for &mass in &hist.probabilities {
            assert!((mass - 0.1).abs() <= 3.0 * sigma, "bin mass {mass} too far from 0.1");
        }
    }

    #[test]
    fn kl_of_identical_distributions_is_zero() {
        let group = spread_group(300, 2);
        let binning = ScoreBinning::fit(&group, ScoreKind::JoinDate, 10).unwrap();
        let hist = binning.histogram(&group).unwrap();
        assert_eq!(kl_divergence(&hist, &hist).unwrap(), 0.0);
    }

    #[test]
    fn kl_matches_direct_two_term_summation() {
        // Direct evaluation: 0.5·ln(0.5/0.9) + 0.5·ln(0.5/0.1) = 0.5108256…
        // and 0.9·ln(0.9/0.5) + 0.1·ln(0.1/0.5) = 0.3680642…, documenting
        // the asymmetry of the distance.
        let dist = |probs: Vec<f64>| ScoreDistribution {
            kind: ScoreKind::FollowersCount,
            edges: vec![0.0, 1.0, 2.0],
            probabilities: probs,
            sample_count: 0,
        };
        let p = dist(vec![0.5, 0.5]);
        let q = dist(vec![0.9, 0.1]);
        let forward = kl_divergence(&p, &q).unwrap();
        let backward = kl_divergence(&q, &p).unwrap();
        assert!((forward - 0.5108256237659907).abs() < 1e-12);
        assert!((backward - 0.3680642071684971).abs() < 1e-12);
        assert!(forward != backward);
    }

    #[test]
    fn kl_requires_matching_bins() {
        let a = ScoreDistribution {
            kind: ScoreKind::FollowersCount,
            edges: vec![0.0, 1.0],
            probabilities: vec![1.0],
            sample_count: 1,
        };
        let b = ScoreDistribution {
            kind: ScoreKind::FollowersCount,
            edges: vec![0.0, 2.0],
            probabilities: vec![1.0],
            sample_count: 1,
        };
        assert!(matches!(kl_divergence(&a, &b), Err(DistError::BinMismatch)));
    }

    #[test]
    fn suspect_equal_to_reference_is_not_tampered() {
        let group = spread_group(400, 3);
        let verdict =
            tamper_test(&group, &group, ScoreKind::JoinDate, 10, 1e-6).unwrap();
        assert!(!verdict.tampered);
        assert!(verdict.kl_value.abs() < 1e-12);
    }

    #[test]
    fn narrow_creation_burst_is_tampered_at_calibrated_threshold() {
        let reference = spread_group(2_000, 4);
        // 500 accounts created in the same month.
        let suspect: Vec<Account> =
            (0..500).map(|i| account(100_000 + i, 2012, 2, 1500)).collect();
        let threshold =
            calibrate_threshold(&reference, ScoreKind::JoinDate, 10, 200, 5).unwrap();
        let verdict =
            tamper_test(&suspect, &reference, ScoreKind::JoinDate, 10, threshold).unwrap();
        assert!(verdict.tampered, "kl {} vs threshold {}", verdict.kl_value, threshold);
    }

    #[test]
    fn random_half_split_of_reference_is_clean() {
        let reference = spread_group(2_000, 6);
        let threshold =
            calibrate_threshold(&reference, ScoreKind::JoinDate, 10, 200, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut indices: Vec<usize> = (0..reference.len()).collect();
        indices.shuffle(&mut rng);
        let half: Vec<Account> =
            indices[..reference.len() / 2].iter().map(|&i| reference[i].clone()).collect();
        let verdict =
            tamper_test(&half, &reference, ScoreKind::JoinDate, 10, threshold).unwrap();
        assert!(!verdict.tampered, "kl {} vs threshold {}", verdict.kl_value, threshold);
    }

    #[test]
    fn verdict_monotone_in_threshold() {
        let reference = spread_group(500, 9);
        let suspect: Vec<Account> = (0..100).map(|i| account(50_000 + i, 2013, 6, 10)).collect();
        let low = tamper_test(&suspect, &reference, ScoreKind::JoinDate, 10, 0.01).unwrap();
        let high = tamper_test(&suspect, &reference, ScoreKind::JoinDate, 10, 100.0).unwrap();
        assert!(low.kl_value == high.kl_value);
        assert!(!high.tampered);
        assert!(low.tampered == (low.kl_value > 0.01));
    }

    #[test]
    fn empty_group_is_an_error() {
        let group = spread_group(10, 10);
        assert!(ScoreBinning::fit(&[], ScoreKind::JoinDate, 10).is_err());
        let binning = ScoreBinning::fit(&group, ScoreKind::JoinDate, 10).unwrap();
        assert!(binning.histogram(&[]).is_err());
        assert!(tamper_test(&[], &group, ScoreKind::JoinDate, 10, 0.1).is_err());
    }

    #[test]
    fn gibbs_inequality_on_random_groups() {
        for seed in 0..20 {
            let a = spread_group(200, 100 + seed);
            let b = spread_group(200, 200 + seed);
            let binning = ScoreBinning::fit(&b, ScoreKind::FollowersCount, 8).unwrap();
            let pa = binning.histogram(&a).unwrap();
            let pb = binning.histogram(&b).unwrap();
            assert!(kl_divergence(&pa, &pb).unwrap() >= 0.0);
        }
    }
}

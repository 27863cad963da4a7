//! Behavioral sequence ("digital DNA") spambot detection.
//!
//! Each account's timeline becomes a string over a 3-symbol alphabet, one
//! symbol per tweet in chronological order. Coordinated bots share long
//! stretches of identical behavior, so the length of the longest substring
//! common to at least k of the group's sequences stays anomalously high as k
//! grows. The similarity curve (k ↦ that length), its largest discrete drop,
//! and the witness substring at the drop point drive the group's verdict.

mod suffix;

pub use suffix::{MultiSequenceLcs, SharedSubstring};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Account, AccountId, Tweet, TweetKind};
use crate::Verdict;

/// Injective mapping from tweet kinds to single symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnaAlphabet {
    plain: Option<u8>,
    reply: Option<u8>,
    retweet: Option<u8>,
}

impl DnaAlphabet {
    /// The standard 3-symbol behavioral alphabet: plain → A, reply → C,
    /// retweet → T.
    pub fn standard() -> Self {
        DnaAlphabet { plain: Some(b'A'), reply: Some(b'C'), retweet: Some(b'T') }
    }

    /// Builds a (possibly partial) alphabet from kind/symbol pairs.
    /// Symbols must be distinct ASCII.
    pub fn from_pairs(pairs: &[(TweetKind, char)]) -> Result<Self, DnaError> {
        let mut alphabet = DnaAlphabet { plain: None, reply: None, retweet: None };
        let mut used = Vec::new();
        for &(kind, symbol) in pairs {
            if !symbol.is_ascii() {
                return Err(DnaError::NonAsciiSymbol(symbol));
            }
            let byte = symbol as u8;
            if used.contains(&byte) {
                return Err(DnaError::DuplicateSymbol(symbol));
            }
            used.push(byte);
            let slot = match kind {
                TweetKind::Plain => &mut alphabet.plain,
                TweetKind::Reply => &mut alphabet.reply,
                TweetKind::Retweet => &mut alphabet.retweet,
            };
            if slot.is_some() {
                return Err(DnaError::DuplicateKind(kind));
            }
            *slot = Some(byte);
        }
        Ok(alphabet)
    }

    pub fn symbol(&self, kind: TweetKind) -> Option<u8> {
        match kind {
            TweetKind::Plain => self.plain,
            TweetKind::Reply => self.reply,
            TweetKind::Retweet => self.retweet,
        }
    }
}

impl Default for DnaAlphabet {
    fn default() -> Self {
        DnaAlphabet::standard()
    }
}

/// One account's behavioral string: one symbol per tweet, oldest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnaSequence {
    pub account_id: AccountId,
    pub symbols: String,
}

impl DnaSequence {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Encodes an account's timeline. Tweets must belong to the account and are
/// encoded in chronological order (ties broken by tweet id); an empty
/// timeline yields an empty sequence. A tweet kind outside the alphabet
/// domain is an error.
pub fn encode_account(
    account: &Account,
    tweets: &[&Tweet],
    alphabet: &DnaAlphabet,
) -> Result<DnaSequence, DnaError> {
    let mut ordered: Vec<&&Tweet> = tweets.iter().collect();
    ordered.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
    let mut symbols = String::with_capacity(tweets.len());
    for tweet in ordered {
        if tweet.account_id != account.id {
            return Err(DnaError::ForeignTweet {
                tweet: tweet.id.clone(),
                owner: tweet.account_id.clone(),
                expected: account.id.clone(),
            });
        }
        let symbol = alphabet
            .symbol(tweet.kind)
            .ok_or(DnaError::KindOutsideAlphabet(tweet.kind))?;
        symbols.push(symbol as char);
    }
    Ok(DnaSequence { account_id: account.id.clone(), symbols })
}

/// Longest common substring length shared by at least k sequences, for every
/// k from 2 to the number of non-empty sequences. Non-increasing in k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimilarityCurve {
    points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub lcs: usize,
}

impl SimilarityCurve {
    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn lcs_at(&self, k: usize) -> Option<usize> {
        self.points.iter().find(|p| p.k == k).map(|p| p.lcs)
    }

    /// Group size: the largest k on the curve.
    pub fn max_k(&self) -> usize {
        self.points.last().map_or(0, |p| p.k)
    }
}

/// Computes the similarity curve over a group's sequences. Empty sequences
/// carry no behavioral evidence and are skipped; fewer than 2 non-empty
/// sequences is an error.
pub fn lcs_curve(sequences: &[DnaSequence]) -> Result<SimilarityCurve, DnaError> {
    let non_empty: Vec<&DnaSequence> = sequences.iter().filter(|s| !s.is_empty()).collect();
    if non_empty.len() < 2 {
        return Err(DnaError::TooFewSequences(non_empty.len()));
    }
    let bytes: Vec<&[u8]> = non_empty.iter().map(|s| s.symbols.as_bytes()).collect();
    let index = MultiSequenceLcs::new(&bytes);
    let points = (2..=non_empty.len())
        .map(|k| CurvePoint { k, lcs: index.shared_length(k) })
        .collect();
    Ok(SimilarityCurve { points })
}

/// Finds the split group size: the k with the largest discrete drop
/// `lcs_k − lcs_(k+1)`, ties broken toward larger k. A flat curve (all
/// drops zero) has no split; a curve with fewer than 2 points cannot be
/// split-analyzed and is an error.
pub fn find_split(curve: &SimilarityCurve) -> Result<Option<usize>, DnaError> {
    let points = curve.points();
    if points.len() < 2 {
        return Err(DnaError::CurveTooShort(points.len()));
    }
    let mut best: Option<(usize, usize)> = None; // (drop, k)
    for pair in points.windows(2) {
        let drop = pair[0].lcs.saturating_sub(pair[1].lcs);
        if drop > 0 && best.is_none_or(|(d, _)| drop >= d) {
            best = Some((drop, pair[0].k));
        }
    }
    Ok(best.map(|(_, k)| k))
}

/// Group-level verdict with per-account classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSplit {
    pub k_star: Option<usize>,
    /// Witness substring shared by the high-similarity members, when split.
    pub witness: Option<String>,
    pub verdicts: BTreeMap<AccountId, Verdict>,
}

impl GroupSplit {
    pub fn spambots(&self) -> impl Iterator<Item = &AccountId> {
        self.verdicts
            .iter()
            .filter(|(_, &v)| v == Verdict::Spambot)
            .map(|(id, _)| id)
    }
}

/// Labels the accounts whose sequences contain the witness substring of
/// `lcs_(k_star)` as spambots and everything else as genuine. With no split
/// (or with empty sequences, which carry no evidence) accounts stay genuine.
pub fn classify_group(
    sequences: &[DnaSequence],
    curve: &SimilarityCurve,
    k_star: Option<usize>,
) -> Result<GroupSplit, DnaError> {
    let mut verdicts: BTreeMap<AccountId, Verdict> = sequences
        .iter()
        .map(|s| (s.account_id.clone(), Verdict::Genuine))
        .collect();

    let Some(k) = k_star else {
        return Ok(GroupSplit { k_star: None, witness: None, verdicts });
    };
    if curve.lcs_at(k).is_none() {
        return Err(DnaError::SplitOutsideCurve(k));
    }

    let non_empty: Vec<&DnaSequence> = sequences.iter().filter(|s| !s.is_empty()).collect();
    if non_empty.len() < 2 {
        return Err(DnaError::TooFewSequences(non_empty.len()));
    }
    let bytes: Vec<&[u8]> = non_empty.iter().map(|s| s.symbols.as_bytes()).collect();
    let index = MultiSequenceLcs::new(&bytes);
    let witness = index.witness(k);
    let Some(witness) = witness else {
        return Ok(GroupSplit { k_star: Some(k), witness: None, verdicts });
    };
    for &seq_idx in &witness.sequences {
        verdicts.insert(non_empty[seq_idx].account_id.clone(), Verdict::Spambot);
    }
    Ok(GroupSplit {
        k_star: Some(k),
        witness: Some(String::from_utf8_lossy(&witness.symbols).into_owned()),
        verdicts,
    })
}

/// Errors raised by sequence encoding and curve analysis.
#[derive(Debug, Error)]
pub enum DnaError {
    #[error("alphabet symbol `{0}` is not ASCII")]
    NonAsciiSymbol(char),
    #[error("alphabet symbol `{0}` used twice")]
    DuplicateSymbol(char),
    #[error("tweet kind {0:?} mapped twice")]
    DuplicateKind(TweetKind),
    #[error("tweet kind {0:?} has no symbol in the alphabet")]
    KindOutsideAlphabet(TweetKind),
    #[error("tweet {tweet} belongs to {owner}, not {expected}")]
    ForeignTweet { tweet: String, owner: AccountId, expected: AccountId },
    #[error("similarity analysis needs at least 2 non-empty sequences, got {0}")]
    TooFewSequences(usize),
    #[error("split analysis needs a curve with at least 2 points, got {0}")]
    CurveTooShort(usize),
    #[error("split group size {0} is outside the curve")]
    SplitOutsideCurve(usize),
}

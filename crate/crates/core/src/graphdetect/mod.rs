//! Feature-graph spambot detection: per-account entity statistics, a
//! complete weighted similarity graph over min-max normalized features, and
//! greedy modularity community detection, with community-to-class labeling.

mod fastgreedy;

pub use fastgreedy::{fastgreedy, modularity, Partition};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Account, AccountId, Label, Tweet, TweetKind};
use crate::Verdict;

/// Number of feature dimensions: 4 statistics over 4 entity classes.
pub const FEATURE_DIM: usize = 16;

/// Entity classes, in feature-vector order.
const ENTITY_CLASSES: [&str; 4] = ["urls", "hashtags", "mentions", "retweets"];

/// Statistics per entity class, in feature-vector order.
const ENTITY_STATS: [&str; 4] = ["total", "mean_per_tweet", "distinct", "max_repetition"];

/// Human-readable names of the 16 dimensions, `<class>_<statistic>`.
pub fn feature_names() -> Vec<String> {
    ENTITY_CLASSES
        .iter()
        .flat_map(|class| ENTITY_STATS.iter().map(move |stat| format!("{class}_{stat}")))
        .collect()
}

/// Fixed-order statistics vector for one account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub account_id: AccountId,
    pub values: [f64; FEATURE_DIM],
}

/// Extracts the 16-dimensional entity-statistics vector from a timeline.
///
/// For each entity class (urls, hashtags, mentions, retweets) four
/// statistics are taken: total occurrence count, mean occurrences per tweet,
/// distinct value count, and the maximum repetition count of a single value.
/// A retweet event's value is the retweeted account, read as the first
/// mention of the retweet when present. An empty timeline yields the zero
/// vector.
pub fn extract_features(account: &Account, tweets: &[&Tweet]) -> FeatureVector {
    let mut values = [0.0f64; FEATURE_DIM];
    if tweets.is_empty() {
        return FeatureVector { account_id: account.id.clone(), values };
    }
    let tweet_count = tweets.len() as f64;

    let urls = tweets.iter().flat_map(|t| t.urls.iter().map(String::as_str));
    write_stats(&mut values[0..4], urls, tweet_count);

    let hashtags = tweets.iter().flat_map(|t| t.hashtags.iter().map(String::as_str));
    write_stats(&mut values[4..8], hashtags, tweet_count);

    let mentions = tweets.iter().flat_map(|t| t.mentions.iter().map(|m| m.as_str()));
    write_stats(&mut values[8..12], mentions, tweet_count);

    // Retweets: one event per retweet-kind tweet; the retweeted source is
    // the first mention when the retweet carries one.
    let retweets: Vec<&Tweet> =
        tweets.iter().copied().filter(|t| t.kind == TweetKind::Retweet).collect();
    let sources = retweets.iter().filter_map(|t| t.mentions.first().map(|m| m.as_str()));
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for source in sources {
        *counts.entry(source).or_default() += 1;
    }
    values[12] = retweets.len() as f64;
    values[13] = retweets.len() as f64 / tweet_count;
    values[14] = counts.len() as f64;
    values[15] = counts.values().copied().max().unwrap_or(0) as f64;

    FeatureVector { account_id: account.id.clone(), values }
}

fn write_stats<'a>(slot: &mut [f64], entities: impl Iterator<Item = &'a str>, tweet_count: f64) {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    let mut total = 0u64;
    for entity in entities {
        *counts.entry(entity).or_default() += 1;
        total += 1;
    }
    slot[0] = total as f64;
    slot[1] = total as f64 / tweet_count;
    slot[2] = counts.len() as f64;
    slot[3] = counts.values().copied().max().unwrap_or(0) as f64;
}

/// Undirected weighted account graph. Weights lie in (0, 1].
#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    nodes: Vec<AccountId>,
    /// Edges keyed by node index pair (i < j).
    edges: BTreeMap<(usize, usize), f64>,
}

impl SimilarityGraph {
    /// Builds a graph from explicit edges; used for synthetic topologies.
    /// Self-loops and out-of-range weights are rejected.
    pub fn from_edges(
        nodes: Vec<AccountId>,
        edges: &[(usize, usize, f64)],
    ) -> Result<Self, GraphError> {
        let mut map = BTreeMap::new();
        for &(a, b, w) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if a >= nodes.len() || b >= nodes.len() {
                return Err(GraphError::NodeOutOfRange(a.max(b)));
            }
            if !(w > 0.0 && w <= 1.0) {
                return Err(GraphError::WeightOutOfRange(w));
            }
            map.insert((a.min(b), a.max(b)), w);
        }
        Ok(SimilarityGraph { nodes, edges: map })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[AccountId] {
        &self.nodes
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.edges.get(&(a.min(b), a.max(b))).copied()
    }

    /// Edges as (i, j, weight) with i < j, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }
}

/// Builds the complete similarity graph over feature vectors.
///
/// Every dimension is min-max normalized to [0, 1] over the input set first
/// (a constant dimension maps to 0 everywhere and contributes nothing), then
/// each pair's weight is 1/(1 + d) with d the Euclidean distance of the
/// normalized vectors: bounded, monotone, and threshold-free.
pub fn build_graph(vectors: &[FeatureVector]) -> Result<SimilarityGraph, GraphError> {
    if vectors.len() < 2 {
        return Err(GraphError::TooFewVectors(vectors.len()));
    }
    for vector in vectors {
        if vector.values.iter().any(|v| !v.is_finite()) {
            return Err(GraphError::NonFiniteFeature(vector.account_id.clone()));
        }
    }

    let mut lo = [f64::INFINITY; FEATURE_DIM];
    let mut hi = [f64::NEG_INFINITY; FEATURE_DIM];
    for vector in vectors {
        for (dim, &v) in vector.values.iter().enumerate() {
            lo[dim] = lo[dim].min(v);
            hi[dim] = hi[dim].max(v);
        }
    }
    let normalized: Vec<[f64; FEATURE_DIM]> = vectors
        .iter()
        .map(|vector| {
            let mut out = [0.0; FEATURE_DIM];
            for dim in 0..FEATURE_DIM {
                let span = hi[dim] - lo[dim];
                out[dim] = if span > 0.0 { (vector.values[dim] - lo[dim]) / span } else { 0.0 };
            }
            out
        })
        .collect();

    let nodes: Vec<AccountId> = vectors.iter().map(|v| v.account_id.clone()).collect();
    let mut edges = BTreeMap::new();
    for i in 0..normalized.len() {
        for j in i + 1..normalized.len() {
            let distance: f64 = normalized[i]
                .iter()
                .zip(&normalized[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            edges.insert((i, j), 1.0 / (1.0 + distance));
        }
    }
    Ok(SimilarityGraph { nodes, edges })
}

/// How communities receive spambot/genuine labels.
pub enum LabelingMode<'a> {
    /// Each community takes the majority label of its members found in the
    /// calibration map; communities without calibrated members (or with a
    /// tied majority) fall back to the heuristic and are flagged.
    Calibrated(&'a BTreeMap<AccountId, Label>),
    /// The community with the highest mean internal edge weight is the
    /// spambot community: bots sit closer to each other than genuine
    /// accounts do.
    Heuristic,
}

/// Per-account verdicts plus labeling diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLabels {
    pub verdicts: BTreeMap<AccountId, Verdict>,
    /// Community indices labeled by heuristic fallback in calibrated mode.
    pub heuristic_fallbacks: Vec<usize>,
    /// Set when the partition collapsed into a single community over more
    /// than one account: the detector could not separate the groups and the
    /// one label it emits covers everything.
    pub degenerate_partition: bool,
}

/// Assigns a verdict to every account by labeling its community.
pub fn label_clusters(
    graph: &SimilarityGraph,
    partition: &Partition,
    mode: LabelingMode<'_>,
) -> ClusterLabels {
    let spambot_by_weight = densest_community(graph, partition);
    let mut verdicts = BTreeMap::new();
    let mut fallbacks = Vec::new();
    for (idx, community) in partition.communities().iter().enumerate() {
        let verdict = match &mode {
            LabelingMode::Heuristic => heuristic_verdict(idx, spambot_by_weight),
            LabelingMode::Calibrated(calibration) => {
                let mut spambots = 0u64;
                let mut genuine = 0u64;
                for &node in community {
                    match calibration.get(&graph.nodes[node]) {
                        Some(Label::Spambot) => spambots += 1,
                        Some(Label::Genuine) => genuine += 1,
                        Some(Label::Unknown) | None => {}
                    }
                }
                if spambots > genuine {
                    Verdict::Spambot
                } else if genuine > spambots {
                    Verdict::Genuine
                } else {
                    fallbacks.push(idx);
                    heuristic_verdict(idx, spambot_by_weight)
                }
            }
        };
        for &node in community {
            verdicts.insert(graph.nodes[node].clone(), verdict);
        }
    }
    ClusterLabels {
        verdicts,
        heuristic_fallbacks: fallbacks,
        degenerate_partition: partition.communities().len() == 1 && graph.node_count() > 1,
    }
}

fn heuristic_verdict(idx: usize, spambot_community: Option<usize>) -> Verdict {
    if Some(idx) == spambot_community {
        Verdict::Spambot
    } else {
        Verdict::Genuine
    }
}

/// Community with the highest mean internal edge weight; `None` when no
/// community has an internal edge (then nothing looks coordinated).
fn densest_community(graph: &SimilarityGraph, partition: &Partition) -> Option<usize> {
    let mut membership = vec![usize::MAX; graph.node_count()];
    for (idx, community) in partition.communities().iter().enumerate() {
        for &node in community {
            membership[node] = idx;
        }
    }
    let mut weight_sum = vec![0.0f64; partition.communities().len()];
    let mut edge_count = vec![0u64; partition.communities().len()];
    for (a, b, w) in graph.edges() {
        if membership[a] == membership[b] {
            weight_sum[membership[a]] += w;
            edge_count[membership[a]] += 1;
        }
    }
    (0..partition.communities().len())
        .filter(|&idx| edge_count[idx] > 0)
        .map(|idx| (idx, weight_sum[idx] / edge_count[idx] as f64))
        .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .map(|(idx, _)| idx)
}

/// Errors raised by feature and graph construction.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph construction needs at least 2 feature vectors, got {0}")]
    TooFewVectors(usize),
    #[error("feature vector of {0} contains a non-finite value")]
    NonFiniteFeature(AccountId),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge references node {0} outside the graph")]
    NodeOutOfRange(usize),
    #[error("edge weight {0} outside (0, 1]")]
    WeightOutOfRange(f64),
}

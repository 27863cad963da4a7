//! Greedy modularity agglomeration over weighted graphs: start from
//! singleton communities and repeatedly merge the pair with the largest
//! modularity gain until no merge increases modularity. Ties break toward
//! the lexicographically smallest community pair, communities being
//! identified by their smallest node index, so the result is deterministic.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SimilarityGraph;

/// Disjoint communities covering every node, with the partition's
/// modularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    communities: Vec<Vec<usize>>,
    modularity: f64,
}

impl Partition {
    /// Communities as sorted node-index lists, ordered by smallest member.
    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    pub fn modularity(&self) -> f64 {
        self.modularity
    }

    /// Community index per node.
    pub fn assignment(&self, node_count: usize) -> Vec<usize> {
        let mut assignment = vec![0usize; node_count];
        for (idx, community) in self.communities.iter().enumerate() {
            for &node in community {
                assignment[node] = idx;
            }
        }
        assignment
    }
}

/// Weighted modularity of an assignment: Q = Σ_c (w_in_c/m − (k_c/2m)²)
/// with m the total edge weight and k_c the community's strength sum.
/// An edgeless graph has modularity 0 by convention.
pub fn modularity(graph: &SimilarityGraph, assignment: &[usize]) -> f64 {
    let m = graph.total_weight();
    if m == 0.0 {
        return 0.0;
    }
    let communities = assignment.iter().copied().max().map_or(0, |c| c + 1);
    let mut internal = vec![0.0f64; communities];
    let mut strength = vec![0.0f64; communities];
    for (a, b, w) in graph.edges() {
        strength[assignment[a]] += w;
        strength[assignment[b]] += w;
        if assignment[a] == assignment[b] {
            internal[assignment[a]] += w;
        }
    }
    (0..communities)
        .map(|c| internal[c] / m - (strength[c] / (2.0 * m)).powi(2))
        .sum()
}

/// Greedy modularity maximization. Returns the best-modularity partition
/// encountered; since every accepted merge strictly increases modularity,
/// that is the partition at the stopping point.
pub fn fastgreedy(graph: &SimilarityGraph) -> Partition {
    let n = graph.node_count();
    if n == 0 {
        return Partition { communities: Vec::new(), modularity: 0.0 };
    }
    let m = graph.total_weight();
    if m == 0.0 {
        let communities = (0..n).map(|i| vec![i]).collect();
        return Partition { communities, modularity: 0.0 };
    }

    // Normalized bookkeeping: between[c][d] holds e_cd, the one-sided
    // fraction of edge ends joining c and d; strength[c] holds a_c.
    let two_m = 2.0 * m;
    let mut between: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    let mut strength = vec![0.0f64; n];
    for (a, b, w) in graph.edges() {
        *between[a].entry(b).or_insert(0.0) += w / two_m;
        *between[b].entry(a).or_insert(0.0) += w / two_m;
        strength[a] += w / two_m;
        strength[b] += w / two_m;
    }
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut alive: BTreeSet<usize> = (0..n).collect();

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for &c in &alive {
            for (&d, &e_cd) in &between[c] {
                if d <= c {
                    continue;
                }
                let gain = 2.0 * (e_cd - strength[c] * strength[d]);
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, c, d));
                }
            }
        }
        let Some((gain, c, d)) = best else { break };
        if gain <= 0.0 {
            break;
        }

        // Merge d into c; c stays the smallest member index of the union.
        strength[c] += strength[d];
        let absorbed = std::mem::take(&mut between[d]);
        for (x, e_dx) in absorbed {
            between[x].remove(&d);
            if x == c {
                continue;
            }
            *between[c].entry(x).or_insert(0.0) += e_dx;
            *between[x].entry(c).or_insert(0.0) += e_dx;
        }
        between[c].remove(&d);
        let moved = std::mem::take(&mut members[d]);
        members[c].extend(moved);
        alive.remove(&d);
    }

    let mut communities: Vec<Vec<usize>> = alive
        .into_iter()
        .map(|c| {
            let mut nodes = std::mem::take(&mut members[c]);
            nodes.sort_unstable();
            nodes
        })
        .collect();
    communities.sort_by_key(|nodes| nodes[0]);

    let mut assignment = vec![0usize; n];
    for (idx, community) in communities.iter().enumerate() {
        for &node in community {
            assignment[node] = idx;
        }
    }
    let q = modularity(graph, &assignment);
    Partition { communities, modularity: q }
}

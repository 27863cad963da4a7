//! Generalized suffix array machinery for multi-sequence longest common
//! substring queries.
//!
//! The sequences are concatenated with unique separator symbols, a suffix
//! array and LCP array are built over the concatenation, and every internal
//! node of the (implicit) suffix tree is enumerated as an LCP interval. For
//! each node the number of *distinct* source sequences below it is counted
//! with the classic duplicate-pair discount: consecutive same-source
//! suffixes in suffix-array order contribute one duplicate to every node
//! deep enough to contain both. A node of string depth d with c distinct
//! sources witnesses a substring of length d shared by c sequences.

/// Suffix array by prefix doubling with counting sort per round.
pub fn suffix_array(text: &[u32]) -> Vec<usize> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![0];
    }

    let mut symbols: Vec<u32> = text.to_vec();
    symbols.sort_unstable();
    symbols.dedup();
    let mut rank: Vec<usize> =
        text.iter().map(|s| symbols.binary_search(s).unwrap()).collect();

    let mut sa: Vec<usize> = (0..n).collect();
    sa.sort_unstable_by_key(|&i| rank[i]);

    let mut tmp = vec![0usize; n];
    let mut step = 1;
    while step < n {
        // Sort by (rank[i], rank[i + step]) with a stable counting sort on
        // the first key over suffixes pre-ordered by the second key.
        let mut by_second = Vec::with_capacity(n);
        by_second.extend(n - step..n);
        by_second.extend(sa.iter().copied().filter(|&i| i >= step).map(|i| i - step));

        let mut bucket_start = vec![0usize; n + 1];
        for &r in &rank {
            bucket_start[r + 1] += 1;
        }
        for r in 0..n {
            bucket_start[r + 1] += bucket_start[r];
        }
        let mut cursor = bucket_start;
        for &i in &by_second {
            sa[cursor[rank[i]]] = i;
            cursor[rank[i]] += 1;
        }

        let second = |i: usize| if i + step < n { rank[i + step] + 1 } else { 0 };
        tmp[sa[0]] = 0;
        let mut classes = 0;
        for w in 1..n {
            let (a, b) = (sa[w - 1], sa[w]);
            if rank[a] != rank[b] || second(a) != second(b) {
                classes += 1;
            }
            tmp[b] = classes;
        }
        std::mem::swap(&mut rank, &mut tmp);
        if classes == n - 1 {
            break;
        }
        step <<= 1;
    }
    sa
}

/// LCP array by Kasai's algorithm: `lcp[i]` is the longest common prefix of
/// the suffixes at suffix-array positions i and i + 1.
pub fn lcp_array(text: &[u32], sa: &[usize]) -> Vec<usize> {
    let n = text.len();
    if n < 2 {
        return Vec::new();
    }
    let mut rank = vec![0usize; n];
    for (pos, &suffix) in sa.iter().enumerate() {
        rank[suffix] = pos;
    }
    let mut lcp = vec![0usize; n - 1];
    let mut h = 0usize;
    for i in 0..n {
        if rank[i] == 0 {
            h = 0;
            continue;
        }
        let j = sa[rank[i] - 1];
        while i + h < n && j + h < n && text[i + h] == text[j + h] {
            h += 1;
        }
        lcp[rank[i] - 1] = h;
        h = h.saturating_sub(1);
    }
    lcp
}

/// Internal suffix-tree nodes as LCP intervals: (string depth, left, right)
/// with both suffix-array bounds inclusive and depth ≥ 1.
fn lcp_intervals(lcp: &[usize]) -> Vec<(usize, usize, usize)> {
    let suffixes = lcp.len() + 1;
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    let mut nodes = Vec::new();
    for i in 1..suffixes {
        let depth = lcp[i - 1];
        let mut left = i - 1;
        while stack.last().is_some_and(|&(d, _)| d > depth) {
            let (d, l) = stack.pop().unwrap();
            nodes.push((d, l, i - 1));
            left = l;
        }
        if stack.last().is_none_or(|&(d, _)| d < depth) {
            stack.push((depth, left));
        }
    }
    while let Some((d, l)) = stack.pop() {
        if d > 0 {
            nodes.push((d, l, suffixes - 1));
        }
    }
    nodes
}

/// Fenwick tree over suffix-array positions.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn add(&mut self, mut i: usize) {
        i += 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> u32 {
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }

    /// Count of marked positions in the inclusive range [l, r].
    fn range(&self, l: usize, r: usize) -> u32 {
        if r < l {
            0
        } else {
            self.prefix(r + 1) - self.prefix(l)
        }
    }
}

/// A substring shared by several sequences: its text and the indices of the
/// sequences containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedSubstring {
    pub symbols: Vec<u8>,
    pub sequences: Vec<usize>,
}

/// Multi-sequence longest-common-substring index over byte sequences.
pub struct MultiSequenceLcs {
    sequence_count: usize,
    text: Vec<u32>,
    sa: Vec<usize>,
    /// Source sequence per text position; separators carry no source.
    source: Vec<Option<usize>>,
    /// (depth, left, right, distinct source count) per internal node.
    nodes: Vec<(usize, usize, usize, usize)>,
    /// `shared[k]` (1-based, k ≥ 2) is the longest substring length shared
    /// by at least k distinct sequences.
    shared: Vec<usize>,
}

impl MultiSequenceLcs {
    /// Builds the index. Sequences must be non-empty; the alphabet is the
    /// full byte range.
    pub fn new(sequences: &[&[u8]]) -> Self {
        let n_seqs = sequences.len();
        let total: usize = sequences.iter().map(|s| s.len()).sum();
        let mut text = Vec::with_capacity(total + n_seqs);
        let mut source = Vec::with_capacity(total + n_seqs);
        for (idx, seq) in sequences.iter().enumerate() {
            for &byte in seq.iter() {
                text.push(byte as u32 + n_seqs as u32);
                source.push(Some(idx));
            }
            // Unique separator: never matches anything else, so no common
            // substring can cross a sequence boundary.
            text.push(idx as u32);
            source.push(None);
        }

        let sa = suffix_array(&text);
        let lcp = lcp_array(&text, &sa);
        let m = sa.len();

        // Duplicate events: for each suffix, the minimum LCP back to the
        // previous suffix of the same source, found with a monotone stack of
        // (start index, running minimum) over the LCP array.
        let mut last_rank: Vec<Option<usize>> = vec![None; n_seqs];
        let mut min_stack: Vec<(usize, usize)> = Vec::new();
        let mut events: Vec<(usize, usize)> = Vec::new();
        for j in 0..m {
            if j > 0 {
                let value = lcp[j - 1];
                let mut start = j - 1;
                while let Some(&(s, v)) = min_stack.last() {
                    if v >= value {
                        min_stack.pop();
                        start = s;
                    } else {
                        break;
                    }
                }
                min_stack.push((start, value));
            }
            if let Some(src) = source[sa[j]] {
                if let Some(prev) = last_rank[src] {
                    let at = min_stack.partition_point(|&(s, _)| s <= prev) - 1;
                    events.push((j, min_stack[at].1));
                }
                last_rank[src] = Some(j);
            }
        }

        let mut colored_prefix = vec![0usize; m + 1];
        for j in 0..m {
            colored_prefix[j + 1] = colored_prefix[j] + usize::from(source[sa[j]].is_some());
        }

        // Offline sweep from deep to shallow: an event with minimum LCP e
        // marks a duplicate inside every node of depth ≤ e.
        let mut raw_nodes = lcp_intervals(&lcp);
        raw_nodes.sort_unstable_by_key(|node| std::cmp::Reverse(node.0));
        events.sort_unstable_by_key(|event| std::cmp::Reverse(event.1));

        let mut fenwick = Fenwick::new(m);
        let mut next_event = 0;
        let mut nodes = Vec::with_capacity(raw_nodes.len());
        let mut shared = vec![0usize; n_seqs + 1];
        for (depth, left, right) in raw_nodes {
            while next_event < events.len() && events[next_event].1 >= depth {
                fenwick.add(events[next_event].0);
                next_event += 1;
            }
            let colored = colored_prefix[right + 1] - colored_prefix[left];
            let duplicates = fenwick.range(left, right) as usize;
            let distinct = colored - duplicates;
            nodes.push((depth, left, right, distinct));
            if distinct >= 2 && depth > shared[distinct] {
                shared[distinct] = depth;
            }
        }
        // A substring in c sequences is also in at least k ≤ c sequences.
        for k in (2..n_seqs).rev() {
            shared[k] = shared[k].max(shared[k + 1]);
        }

        MultiSequenceLcs { sequence_count: n_seqs, text, sa, source, nodes, shared }
    }

    pub fn sequence_count(&self) -> usize {
        self.sequence_count
    }

    /// Longest substring length occurring in at least `k` distinct
    /// sequences, for k in 2..=N.
    pub fn shared_length(&self, k: usize) -> usize {
        if k < 2 || k > self.sequence_count {
            0
        } else {
            self.shared[k]
        }
    }

    /// The lexicographically smallest substring attaining
    /// `shared_length(k)`, along with every sequence containing it. `None`
    /// when that length is zero.
    pub fn witness(&self, k: usize) -> Option<SharedSubstring> {
        let length = self.shared_length(k);
        if length == 0 {
            return None;
        }
        // Candidate loci all sit at depth exactly `length` (a deeper node
        // with enough sources would contradict maximality); the first
        // interval in suffix-array order is the lexicographically smallest.
        let (_, left, right, _) = self
            .nodes
            .iter()
            .filter(|&&(d, _, _, distinct)| d == length && distinct >= k)
            .min_by_key(|&&(_, l, _, _)| l)
            .copied()?;
        let start = self.sa[left];
        let symbols: Vec<u8> = self.text[start..start + length]
            .iter()
            .map(|&s| (s - self.sequence_count as u32) as u8)
            .collect();
        let mut sequences: Vec<usize> = (left..=right)
            .filter_map(|pos| self.source[self.sa[pos]])
            .collect();
        sequences.sort_unstable();
        sequences.dedup();
        Some(SharedSubstring { symbols, sequences })
    }
}

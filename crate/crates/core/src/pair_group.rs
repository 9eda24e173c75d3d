//! The classical pair-group algorithm.
//!
//! Exactly two clusters merge per step. When several pairs share the minimum
//! distance a [`TiePolicy`] picks one, and different picks can lead to
//! different hierarchies. [`enumerate_tie_dendrograms`] explores every pick
//! and returns each distinct outcome.
//!
//! Clusters are identified by their smallest leaf index, so a tied pair is
//! the ordered key `(smaller id, larger id)`. Tie detection is exact equality
//! of values rounded to the data precision.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linkage::{pair_update, Method};
use crate::proximity_io::{round_half_away, ProximityData};
use crate::tree::{Multidendrogram, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiePolicy {
    /// The lexicographically smallest `(i, j)` pair of cluster ids.
    FirstIndex,
    /// The lexicographically largest pair.
    LastIndex,
    /// A uniformly drawn pair from a generator seeded with the value.
    Random(u64),
}

impl std::str::FromStr for TiePolicy {
    type Err = String;

    /// `first`, `last` or `random:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "first" => Ok(TiePolicy::FirstIndex),
            "last" => Ok(TiePolicy::LastIndex),
            _ => lower
                .strip_prefix("random:")
                .and_then(|seed| seed.parse().ok())
                .map(TiePolicy::Random)
                .ok_or_else(|| format!("unknown tie policy {s:?} (expected first, last or random:SEED)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("more than {0} dendrograms reachable through ties")]
pub struct EnumerationBudgetExceeded(pub usize);

/// A strictly binary dendrogram. Every internal node has a zero-width band
/// whose value is the merge height.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram(Multidendrogram);

impl Dendrogram {
    pub fn as_multidendrogram(&self) -> &Multidendrogram {
        &self.0
    }

    pub fn into_multidendrogram(self) -> Multidendrogram {
        self.0
    }

    /// Merge heights (distance space) in merge order.
    pub fn heights(&self) -> Vec<f64> {
        self.0.clusters().map(|(_, c)| c.band_lower).collect()
    }

    pub fn canonical_form(&self) -> String {
        self.0.canonical_form()
    }
}

#[derive(Debug, Clone)]
struct PairGroupState {
    method: Method,
    precision: u32,
    /// Live clusters: tree node and size.
    nodes: Vec<NodeId>,
    sizes: Vec<usize>,
    /// Row-major over live positions.
    dist: Vec<f64>,
    tree: Multidendrogram,
}

impl PairGroupState {
    fn new(data: &ProximityData, method: Method) -> Self {
        let n = data.len();
        let precision = data.precision();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dist[i * n + j] = round_half_away(data.engine_value(i, j), precision);
                }
            }
        }
        Self {
            method,
            precision,
            nodes: (0..n).collect(),
            sizes: vec![1; n],
            dist,
            tree: Multidendrogram::new(data.labels().to_vec(), data.measure(), precision),
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn d(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.len() + b]
    }

    fn id(&self, a: usize) -> usize {
        self.tree.min_leaf(self.nodes[a])
    }

    /// Live-position pairs at the minimum distance, sorted by cluster-id key.
    fn tied_pairs(&self) -> Vec<(usize, usize)> {
        let k = self.len();
        let pairs = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b)));
        let min = pairs.clone().map(|(a, b)| self.d(a, b)).min_by(f64::total_cmp).expect("two clusters");
        let mut tied: Vec<(usize, usize)> = pairs.filter(|&(a, b)| self.d(a, b) == min).collect();
        tied.sort_by_key(|&(a, b)| {
            let (x, y) = (self.id(a), self.id(b));
            (x.min(y), x.max(y))
        });
        tied
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (a, b) = (a.min(b), a.max(b));
        let k = self.len();
        let height = self.d(a, b);
        let node = self.tree.push_cluster(vec![self.nodes[a], self.nodes[b]], height, height);

        let mut updated = Vec::with_capacity(k);
        for c in 0..k {
            updated.push(if c == a || c == b {
                0.0
            } else {
                let v = pair_update(self.method, self.sizes[a], self.sizes[b], self.sizes[c], self.d(a, c), self.d(b, c), height);
                round_half_away(v, self.precision)
            });
        }
        for (c, &v) in updated.iter().enumerate() {
            self.dist[a * k + c] = v;
            self.dist[c * k + a] = v;
        }
        self.dist[a * k + a] = 0.0;

        // Drop row and column `b`.
        let mut dist = Vec::with_capacity((k - 1) * (k - 1));
        for r in (0..k).filter(|&r| r != b) {
            dist.extend((0..k).filter(|&c| c != b).map(|c| self.dist[r * k + c]));
        }
        self.dist = dist;
        self.nodes[a] = node;
        self.sizes[a] += self.sizes[b];
        self.nodes.remove(b);
        self.sizes.remove(b);
    }

    /// Canonical serialization of the current forest.
    fn forest_key(&self) -> String {
        let mut parts: Vec<String> = self.nodes.iter().map(|&n| self.tree.canonical_subtree(n)).collect();
        parts.sort();
        parts.join("|")
    }
}

/// Clusters `data` pairwise, breaking ties with `policy`.
pub fn pair_group_cluster(data: &ProximityData, method: Method, policy: TiePolicy) -> Dendrogram {
    let mut state = PairGroupState::new(data, method);
    let mut rng = match policy {
        TiePolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    while state.len() > 1 {
        let tied = state.tied_pairs();
        let (a, b) = match policy {
            TiePolicy::FirstIndex => tied[0],
            TiePolicy::LastIndex => tied[tied.len() - 1],
            TiePolicy::Random(_) => {
                let rng = rng.as_mut().expect("seeded");
                tied[rng.random_range(0..tied.len())]
            }
        };
        state.merge(a, b);
    }
    Dendrogram(state.tree)
}

/// Every structurally distinct dendrogram obtainable by some sequence of tie
/// choices, sorted by canonical form.
///
/// Fails once more than `max_count` distinct outcomes, or more than
/// `max_count × n` intermediate states, have been reached.
pub fn enumerate_tie_dendrograms(
    data: &ProximityData,
    method: Method,
    max_count: usize,
) -> Result<Vec<Dendrogram>, EnumerationBudgetExceeded> {
    let state_budget = max_count.saturating_mul(data.len().max(1));
    let mut found: BTreeMap<String, Dendrogram> = BTreeMap::new();
    let mut visited: HashSet<String> = HashSet::new();
    let mut stack = vec![PairGroupState::new(data, method)];

    while let Some(state) = stack.pop() {
        if state.len() == 1 {
            let key = state.tree.canonical_form();
            found.entry(key).or_insert_with(|| Dendrogram(state.tree));
            if found.len() > max_count {
                return Err(EnumerationBudgetExceeded(max_count));
            }
            continue;
        }
        for (a, b) in state.tied_pairs().into_iter().rev() {
            let mut next = state.clone();
            next.merge(a, b);
            if visited.insert(next.forest_key()) {
                if visited.len() > state_budget {
                    return Err(EnumerationBudgetExceeded(max_count));
                }
                stack.push(next);
            }
        }
    }
    Ok(found.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proximity_io::{parse_list, parse_matrix};

    fn triangle() -> ProximityData {
        parse_list("A B 0.4\nB C 0.4\nA C 0.5").unwrap()
    }

    #[test]
    fn two_points() {
        let d = pair_group_cluster(&parse_matrix("0 3\n3 0").unwrap(), Method::SingleLinkage, TiePolicy::FirstIndex);
        assert_eq!(d.heights(), vec![3.0]);
        assert_eq!(d.as_multidendrogram().root_cluster().unwrap().leaf_count, 2);
    }

    #[test]
    fn complete_linkage_triangle_depends_on_policy() {
        let first = pair_group_cluster(&triangle(), Method::CompleteLinkage, TiePolicy::FirstIndex);
        assert_eq!(first.canonical_form(), r#"(("A","B")[0.4,0.4],"C")[0.5,0.5]"#);
        let last = pair_group_cluster(&triangle(), Method::CompleteLinkage, TiePolicy::LastIndex);
        assert_eq!(last.canonical_form(), r#"("A",("B","C")[0.4,0.4])[0.5,0.5]"#);
        assert_eq!(first.heights(), last.heights());
    }

    #[test]
    fn random_policy_is_seed_deterministic() {
        let data = parse_list("a b 1\na c 1\na d 1\nb c 1\nb d 1\nc d 1").unwrap();
        for seed in 0..20 {
            let x = pair_group_cluster(&data, Method::UnweightedAverage, TiePolicy::Random(seed));
            let y = pair_group_cluster(&data, Method::UnweightedAverage, TiePolicy::Random(seed));
            assert_eq!(x, y);
        }
    }

    #[test]
    fn policies_agree_without_ties() {
        let data = parse_matrix("0 3 1 4\n3 0 5 6\n1 5 0 2.5\n4 6 2.5 0").unwrap();
        for m in Method::ALL {
            let a = pair_group_cluster(&data, m, TiePolicy::FirstIndex);
            let b = pair_group_cluster(&data, m, TiePolicy::LastIndex);
            let c = pair_group_cluster(&data, m, TiePolicy::Random(99));
            assert_eq!(a, b);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn enumeration_counts() {
        let distinct = parse_matrix("0 3 1 4\n3 0 5 6\n1 5 0 2.5\n4 6 2.5 0").unwrap();
        assert_eq!(enumerate_tie_dendrograms(&distinct, Method::CompleteLinkage, 100).unwrap().len(), 1);

        let all = enumerate_tie_dendrograms(&triangle(), Method::CompleteLinkage, 100).unwrap();
        assert_eq!(all.len(), 2);

        let single = enumerate_tie_dendrograms(&triangle(), Method::SingleLinkage, 100).unwrap();
        assert_eq!(single.len(), 2);
        let cophenetic: HashSet<Vec<u64>> = single
            .iter()
            .map(|d| crate::dendro::cophenetic_matrix(d.as_multidendrogram()).values().iter().map(|v| v.to_bits()).collect())
            .collect();
        assert_eq!(cophenetic.len(), 1);
    }

    #[test]
    fn enumeration_respects_budget() {
        let data = parse_list("a b 1\na c 1\na d 1\nb c 1\nb d 1\nc d 1").unwrap();
        assert_eq!(enumerate_tie_dendrograms(&data, Method::CompleteLinkage, 2), Err(EnumerationBudgetExceeded(2)));
        // Four equidistant points: 6 first pairs, then either a pair joins the
        // third point or the two remaining points pair up.
        let all = enumerate_tie_dendrograms(&data, Method::SingleLinkage, 1000).unwrap();
        assert_eq!(all.len(), 15);
    }

    #[test]
    fn tie_policy_parsing() {
        assert_eq!("first".parse::<TiePolicy>(), Ok(TiePolicy::FirstIndex));
        assert_eq!("LAST".parse::<TiePolicy>(), Ok(TiePolicy::LastIndex));
        assert_eq!("random:42".parse::<TiePolicy>(), Ok(TiePolicy::Random(42)));
        assert!("random:x".parse::<TiePolicy>().is_err());
    }
}

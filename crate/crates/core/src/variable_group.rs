//! The variable-group agglomerative algorithm.
//!
//! Each iteration:
//!
//! 1. finds the smallest inter-cluster distance `D_lower`;
//! 2. links every pair of clusters at exactly `D_lower` and merges each
//!    connected component of those links into one supercluster;
//! 3. computes the distances between the resulting superclusters with the
//!    group formula (rounded to the data precision), records their minimum as
//!    `D_next`, and gives each new supercluster the band
//!    `[D_lower, D_max(X_I)]`, where `D_max(X_I)` is the largest distance
//!    between two of its constituent clusters.
//!
//! Because every tied pair is merged in the same iteration there is nothing
//! to break ties on, and the result does not depend on input order. Without
//! ties the algorithm performs exactly the pair-group merges.
//!
//! Bands whose upper end exceeds `D_next` are reported as [`ReversalEvent`]s
//! but left untouched.

use petgraph::unionfind::UnionFind;

use crate::linkage::{group_distance, GroupDistanceInput, Method};
use crate::proximity_io::{round_half_away, ProximityData};
use crate::tree::{Multidendrogram, NodeId};

/// A band reaching above the next iteration's minimum distance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ReversalEvent {
    pub node: NodeId,
    /// Distance-space upper band end.
    pub band_upper: f64,
    /// Distance-space minimum of the following iteration.
    pub d_next: f64,
}

/// What happened in one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub d_lower: f64,
    /// `None` after the final merge.
    pub d_next: Option<f64>,
    /// Internal nodes created, in creation order.
    pub formed: Vec<NodeId>,
    /// Number of cluster pairs found at `d_lower`.
    pub tied_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusteringTrace {
    pub iterations: Vec<IterationRecord>,
}

impl ClusteringTrace {
    /// Iterations in which more than one pair sat at the minimum distance.
    pub fn tie_iterations(&self) -> usize {
        self.iterations.iter().filter(|it| it.tied_pairs > 1).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableGroupResult {
    pub tree: Multidendrogram,
    pub trace: ClusteringTrace,
    pub reversals: Vec<ReversalEvent>,
}

impl VariableGroupResult {
    /// Number of internal nodes with a non-degenerate band.
    pub fn band_count(&self) -> usize {
        self.tree.clusters().filter(|(_, c)| c.has_band()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ActiveCluster {
    node: NodeId,
    size: usize,
}

/// The live partition and its distance table.
#[derive(Debug, Clone, PartialEq)]
pub struct AgglomerationState {
    clusters: Vec<ActiveCluster>,
    /// Row-major `k × k`, symmetric, rounded.
    dist: Vec<f64>,
    precision: u32,
}

impl AgglomerationState {
    /// Singleton clusters over the data, with distances rounded to the data
    /// precision. Weights enter negated.
    pub fn from_data(data: &ProximityData) -> Self {
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
        let clusters = (0..n).map(|node| ActiveCluster { node, size: 1 }).collect();
        Self { clusters, dist, precision }
    }

    /// Number of live clusters.
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.len() + b]
    }

    /// Tree node behind the live cluster at position `a`.
    pub fn node(&self, a: usize) -> NodeId {
        self.clusters[a].node
    }

    pub fn size(&self, a: usize) -> usize {
        self.clusters[a].size
    }

    /// `D_lower`: the smallest distance between two live clusters.
    pub fn d_lower(&self) -> Option<f64> {
        let k = self.len();
        (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).map(|(a, b)| self.distance(a, b)).min_by(f64::total_cmp)
    }

    fn tied_pairs(&self, d_lower: f64) -> Vec<(usize, usize)> {
        let k = self.len();
        (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).filter(|&(a, b)| self.distance(a, b) == d_lower).collect()
    }
}

/// Partitions the live clusters (by position) into the superclusters of the
/// next merge: connected components of the graph linking every pair at
/// exactly `D_lower`. Singletons are clusters left untouched. Components are
/// ordered by their first member, members ascending.
pub fn tie_groups(state: &AgglomerationState) -> Vec<Vec<usize>> {
    let k = state.len();
    let Some(d_lower) = state.d_lower() else {
        return (0..k).map(|a| vec![a]).collect();
    };
    let mut components = UnionFind::<usize>::new(k);
    for (a, b) in state.tied_pairs(d_lower) {
        components.union(a, b);
    }
    let labeling = components.into_labeling();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; k];
    for (a, &rep) in labeling.iter().enumerate() {
        if slot[rep] == usize::MAX {
            slot[rep] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[rep]].push(a);
    }
    groups
}

/// Band `[D_lower, D_max(X_I)]` of a supercluster given by live positions.
///
/// # Panics
///
/// If the component has fewer than two members.
pub fn agglomeration_interval(component: &[usize], state: &AgglomerationState) -> (f64, f64) {
    assert!(component.len() >= 2, "a band needs at least two clusters");
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for (x, &a) in component.iter().enumerate() {
        for &b in &component[x + 1..] {
            let d = state.distance(a, b);
            lower = lower.min(d);
            upper = upper.max(d);
        }
    }
    let d_lower = state.d_lower().expect("at least two clusters");
    debug_assert_eq!(lower, d_lower, "a tie component must contain a pair at D_lower");
    (d_lower, upper)
}

fn group_input(state: &AgglomerationState, g: &[usize], h: &[usize]) -> GroupDistanceInput {
    let within = |members: &[usize]| -> Vec<f64> {
        let mut out = Vec::with_capacity(members.len() * (members.len().saturating_sub(1)) / 2);
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                out.push(state.distance(a, b));
            }
        }
        out
    };
    GroupDistanceInput {
        sizes_i: g.iter().map(|&a| state.size(a)).collect(),
        sizes_j: h.iter().map(|&b| state.size(b)).collect(),
        cross: g.iter().flat_map(|&a| h.iter().map(move |&b| state.distance(a, b))).collect(),
        within_i: within(g),
        within_j: within(h),
    }
}

/// Runs one iteration, appending the new nodes to `tree`.
fn iterate(state: &AgglomerationState, method: Method, tree: &mut Multidendrogram) -> (AgglomerationState, IterationRecord) {
    let d_lower = state.d_lower().expect("at least two clusters");
    let tied_pairs = state.tied_pairs(d_lower).len();
    let groups = tie_groups(state);

    let mut formed = Vec::new();
    let mut clusters = Vec::with_capacity(groups.len());
    for group in &groups {
        if group.len() == 1 {
            clusters.push(state.clusters[group[0]].clone());
            continue;
        }
        let (lower, upper) = agglomeration_interval(group, state);
        let node = tree.push_cluster(group.iter().map(|&a| state.node(a)).collect(), lower, upper);
        formed.push(node);
        clusters.push(ActiveCluster { node, size: group.iter().map(|&a| state.size(a)).sum() });
    }

    let k = groups.len();
    let mut dist = vec![0.0; k * k];
    for x in 0..k {
        for y in x + 1..k {
            let (g, h) = (&groups[x], &groups[y]);
            let d = if g.len() == 1 && h.len() == 1 {
                state.distance(g[0], h[0])
            } else {
                round_half_away(group_distance(method, &group_input(state, g, h)), state.precision)
            };
            dist[x * k + y] = d;
            dist[y * k + x] = d;
        }
    }
    let next = AgglomerationState { clusters, dist, precision: state.precision };
    let record = IterationRecord { d_lower, d_next: next.d_lower(), formed, tied_pairs };
    (next, record)
}

/// Clusters `data` with the variable-group algorithm.
///
/// Distances are rounded to `data.precision()` on entry and after every
/// update. Weight data is clustered as negated distances; the returned tree
/// stores distance-space bands and reports weights through
/// [`Multidendrogram::reported_band`].
pub fn variable_group_cluster(data: &ProximityData, method: Method) -> VariableGroupResult {
    let mut tree = Multidendrogram::new(data.labels().to_vec(), data.measure(), data.precision());
    let mut state = AgglomerationState::from_data(data);
    let mut trace = ClusteringTrace::default();
    while state.len() > 1 {
        let (next, record) = iterate(&state, method, &mut tree);
        trace.iterations.push(record);
        state = next;
    }
    let reversals = detect_band_reversals(&tree, &trace);
    VariableGroupResult { tree, trace, reversals }
}

/// Every node whose band reaches above the minimum distance of the iteration
/// after its formation, in formation order.
pub fn detect_band_reversals(tree: &Multidendrogram, trace: &ClusteringTrace) -> Vec<ReversalEvent> {
    let mut events = Vec::new();
    for it in &trace.iterations {
        let Some(d_next) = it.d_next else { continue };
        for &node in &it.formed {
            let cluster = tree.cluster(node).expect("formed nodes are internal");
            if cluster.band_upper > d_next {
                events.push(ReversalEvent { node, band_upper: cluster.band_upper, d_next });
            }
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proximity_io::{parse_list, parse_matrix};

    fn triangle() -> ProximityData {
        parse_list("A B 0.4\nB C 0.4\nA C 0.5").unwrap()
    }

    /// Oracle: breadth-first search over the tie graph.
    fn components_by_bfs(state: &AgglomerationState) -> Vec<Vec<usize>> {
        let k = state.len();
        let d_lower = state.d_lower().unwrap();
        let mut seen = vec![false; k];
        let mut out = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut at = 0;
            while at < comp.len() {
                let a = comp[at];
                for b in 0..k {
                    if !seen[b] && a != b && state.distance(a, b) == d_lower {
                        seen[b] = true;
                        comp.push(b);
                    }
                }
                at += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    #[test]
    fn triangle_forms_one_supercluster() {
        let state = AgglomerationState::from_data(&triangle());
        assert_eq!(tie_groups(&state), vec![vec![0, 1, 2]]);
        assert_eq!(agglomeration_interval(&[0, 1, 2], &state), (0.4, 0.5));
    }

    #[test]
    fn distinct_distances_give_one_pair() {
        let data = parse_matrix("0 3 1 4\n3 0 5 6\n1 5 0 2.5\n4 6 2.5 0").unwrap();
        let state = AgglomerationState::from_data(&data);
        assert_eq!(tie_groups(&state), vec![vec![0, 2], vec![1], vec![3]]);
        assert_eq!(agglomeration_interval(&[0, 2], &state), (1.0, 1.0));
    }

    #[test]
    fn disjoint_ties_merge_together() {
        let data = parse_list("A B 1\nC D 1\nA C 2\nA D 3\nB C 4\nB D 5").unwrap();
        let state = AgglomerationState::from_data(&data);
        let groups = tie_groups(&state);
        assert_eq!(groups, components_by_bfs(&state));
        assert_eq!(groups, vec![vec![0, 1], vec![2, 3]]);

        let result = variable_group_cluster(&data, Method::CompleteLinkage);
        let first = &result.trace.iterations[0];
        assert_eq!(first.formed.len(), 2);
        assert_eq!(first.tied_pairs, 2);
    }

    #[test]
    fn clique_band_is_degenerate() {
        let data = parse_list("A B 2\nB C 2\nA C 2\nA D 7\nB D 7\nC D 7").unwrap();
        let state = AgglomerationState::from_data(&data);
        assert_eq!(agglomeration_interval(&[0, 1, 2], &state), (2.0, 2.0));
    }

    #[test]
    fn band_worked_example() {
        let result = variable_group_cluster(&triangle(), Method::CompleteLinkage);
        let root = result.tree.root_cluster().unwrap();
        assert_eq!(root.children, vec![0, 1, 2]);
        assert_eq!((root.band_lower, root.band_upper), (0.4, 0.5));
        assert_eq!(root.leaf_count, 3);
        assert_eq!(result.trace.iterations.len(), 1);
        assert!(result.reversals.is_empty());
        assert_eq!(result.band_count(), 1);
    }

    #[test]
    fn tie_components_are_connected_components() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.random_range(3..9);
            let mut rows = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let v = f64::from(rng.random_range(1..4));
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
            }
            let state = AgglomerationState::from_data(&ProximityData::unlabeled(rows, crate::Measure::Distance).unwrap());
            assert_eq!(tie_groups(&state), components_by_bfs(&state));
        }
    }

    #[test]
    fn weights_cluster_largest_first() {
        let data = crate::proximity_io::parse_list_as("A B 0.9\nA C 0.2\nB C 0.3", crate::Measure::Weight).unwrap();
        let result = variable_group_cluster(&data, Method::SingleLinkage);
        let tree = &result.tree;
        let first = tree.cluster(result.trace.iterations[0].formed[0]).unwrap();
        assert_eq!(first.children, vec![0, 1]);
        assert_eq!(tree.fusion_value(first), 0.9);
        assert_eq!(tree.fusion_value(tree.root_cluster().unwrap()), 0.3);
    }

    #[test]
    fn weight_bands_run_from_lower_to_higher_weight() {
        let data = crate::proximity_io::parse_list_as("A B 0.5\nB C 0.5\nA C 0.4", crate::Measure::Weight).unwrap();
        let result = variable_group_cluster(&data, Method::CompleteLinkage);
        let tree = &result.tree;
        let root = tree.root_cluster().unwrap();
        assert_eq!(tree.reported_band(root), (0.4, 0.5));
        assert_eq!(tree.fusion_value(root), 0.5);
    }
}

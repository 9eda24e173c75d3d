//! Analysis of a finished multidendrogram: the ultrametric (cophenetic)
//! matrix, how far it deviates from the clustered data, and a nested details
//! view.
//!
//! The ultrametric value of two leaves is the fusion value (lower band end) of
//! the lowest node containing both. Deviation measures are taken over the
//! strict upper triangle, diagonal excluded:
//!
//! * cophenetic correlation coefficient: Pearson correlation of `d` and `u`;
//! * normalized mean squared error: `Σ (d − u)² / Σ d²`;
//! * normalized mean absolute error: `Σ |d − u| / Σ |d|`.
//!
//! Callers should pass the precision-rounded data that was actually clustered.

use crate::proximity_io::{Measure, ProximityData};
use crate::tree::{Multidendrogram, Node};

/// Cophenetic values in the data's own units.
#[derive(Debug, Clone, PartialEq)]
pub struct UltrametricMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
    measure: Measure,
    precision: u32,
}

impl UltrametricMatrix {
    pub fn new(labels: Vec<String>, values: Vec<f64>, measure: Measure, precision: u32) -> Self {
        assert_eq!(values.len(), labels.len() * labels.len());
        Self { labels, values, measure, precision }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    /// Checks `u(i,k) ≤ max(u(i,j), u(j,k))` for every triple, exactly. For
    /// weights the inequality is read in distance space (`≥ min`).
    pub fn is_ultrametric(&self) -> bool {
        let n = self.len();
        let sign = self.measure.engine_sign();
        let u = |i: usize, j: usize| sign * self.get(i, j);
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| u(i, k) <= u(i, j).max(u(j, k)))))
    }
}

/// Builds the ultrametric matrix of `tree` in `O(n²)`.
pub fn cophenetic_matrix(tree: &Multidendrogram) -> UltrametricMatrix {
    let n = tree.num_leaves();
    let mut values = vec![0.0; n * n];
    let mut leaves: Vec<Vec<usize>> = Vec::with_capacity(tree.nodes().len());
    for node in tree.nodes() {
        match node {
            Node::Leaf(i) => leaves.push(vec![*i]),
            Node::Internal(c) => {
                let fusion = tree.fusion_value(c);
                let groups: Vec<Vec<usize>> = c.children.iter().map(|&ch| std::mem::take(&mut leaves[ch])).collect();
                for (x, g) in groups.iter().enumerate() {
                    for h in &groups[x + 1..] {
                        for &a in g {
                            for &b in h {
                                values[a * n + b] = fusion;
                                values[b * n + a] = fusion;
                            }
                        }
                    }
                }
                leaves.push(groups.concat());
            }
        }
    }
    UltrametricMatrix::new(tree.labels().to_vec(), values, tree.measure(), tree.precision())
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DeviationReport {
    /// `None` when either side has zero variance (including a single pair).
    pub ccc: Option<f64>,
    pub nmse: f64,
    pub nmae: f64,
}

/// Compares the clustered data with its ultrametric matrix.
///
/// When a normalizing sum is zero the error is 0 if the numerator is also
/// zero and `+∞` otherwise.
///
/// # Panics
///
/// If the two matrices have different sizes.
pub fn deviation_measures(original: &ProximityData, ultra: &UltrametricMatrix) -> DeviationReport {
    assert_eq!(original.len(), ultra.len(), "matrices must cover the same items");
    let pairs: Vec<(f64, f64)> = original.upper_triangle().map(|(i, j, d)| (d, ultra.get(i, j))).collect();

    let ratio = |num: f64, den: f64| {
        if den != 0.0 {
            num / den
        } else if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let nmse = ratio(pairs.iter().map(|(d, u)| (d - u).powi(2)).sum(), pairs.iter().map(|(d, _)| d * d).sum());
    let nmae = ratio(pairs.iter().map(|(d, u)| (d - u).abs()).sum(), pairs.iter().map(|(d, _)| d.abs()).sum());
    DeviationReport { ccc: pearson(&pairs), nmse, nmae }
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let constant = |f: fn(&(f64, f64)) -> f64| pairs.windows(2).all(|w| f(&w[0]) == f(&w[1]));
    if pairs.len() < 2 || constant(|p| p.0) || constant(|p| p.1) {
        return None;
    }
    let m = pairs.len() as f64;
    let mean_d = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_u = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut cov, mut var_d, mut var_u) = (0.0, 0.0, 0.0);
    for &(d, u) in pairs {
        cov += (d - mean_d) * (u - mean_u);
        var_d += (d - mean_d).powi(2);
        var_u += (u - mean_u).powi(2);
    }
    Some(cov / (var_d * var_u).sqrt())
}

/// One internal node of the details view.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct NodeDetails {
    pub leaf_count: usize,
    /// Band in the data's units, low end first.
    pub band_lower: f64,
    pub band_upper: f64,
    pub children: Vec<DetailsChild>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(untagged)]
pub enum DetailsChild {
    Leaf(String),
    Node(NodeDetails),
}

impl NodeDetails {
    /// Depth of the deepest internal node below and including this one.
    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .filter_map(|c| match c {
                DetailsChild::Node(n) => Some(n.depth()),
                DetailsChild::Leaf(_) => None,
            })
            .max()
            .unwrap_or(0)
    }
}

/// Nested view of the root node.
///
/// # Panics
///
/// If the tree has no internal node.
pub fn details(tree: &Multidendrogram) -> NodeDetails {
    node_details(tree, tree.root())
}

fn node_details(tree: &Multidendrogram, id: usize) -> NodeDetails {
    let c = tree.cluster(id).expect("details start at an internal node");
    let (band_lower, band_upper) = tree.reported_band(c);
    let children = c
        .children
        .iter()
        .map(|&ch| match tree.node(ch) {
            Node::Leaf(i) => DetailsChild::Leaf(tree.labels()[*i].clone()),
            Node::Internal(_) => DetailsChild::Node(node_details(tree, ch)),
        })
        .collect();
    NodeDetails { leaf_count: c.leaf_count, band_lower, band_upper, children }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proximity_io::{parse_list, parse_matrix};
    use crate::variable_group::variable_group_cluster;
    use crate::Method;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Oracle: climb from each leaf to the root and take the first common node.
    fn lca_brute_force(tree: &Multidendrogram) -> Vec<f64> {
        let n = tree.num_leaves();
        let mut parent = vec![usize::MAX; tree.nodes().len()];
        for (id, c) in tree.clusters() {
            for &ch in &c.children {
                parent[ch] = id;
            }
        }
        let ancestors = |mut x: usize| {
            let mut out = vec![];
            while parent[x] != usize::MAX {
                x = parent[x];
                out.push(x);
            }
            out
        };
        let mut u = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let up_j = ancestors(j);
                    let lca = ancestors(i).into_iter().find(|a| up_j.contains(a)).unwrap();
                    u[i * n + j] = tree.fusion_value(tree.cluster(lca).unwrap());
                }
            }
        }
        u
    }

    #[test]
    fn pair_tree() {
        let mut t = Multidendrogram::new(labels(&["a", "b"]), Measure::Distance, 0);
        t.push_cluster(vec![0, 1], 3.0, 3.0);
        assert_eq!(cophenetic_matrix(&t).values(), [0.0, 3.0, 3.0, 0.0]);
    }

    #[test]
    fn band_uses_lower_end() {
        let result = variable_group_cluster(&parse_list("A B 0.4\nB C 0.4\nA C 0.5").unwrap(), Method::CompleteLinkage);
        let u = cophenetic_matrix(&result.tree);
        assert_eq!((u.get(0, 1), u.get(0, 2), u.get(1, 2)), (0.4, 0.4, 0.4));
    }

    #[test]
    fn chain_matches_lca_oracle() {
        let mut t = Multidendrogram::new(labels(&["A", "B", "C"]), Measure::Distance, 0);
        let ab = t.push_cluster(vec![0, 1], 1.0, 1.0);
        t.push_cluster(vec![ab, 2], 2.0, 2.0);
        let u = cophenetic_matrix(&t);
        assert_eq!((u.get(0, 1), u.get(0, 2), u.get(1, 2)), (1.0, 2.0, 2.0));
        assert_eq!(u.values(), lca_brute_force(&t).as_slice());
        assert!(u.is_ultrametric());
    }

    #[test]
    fn cophenetic_matches_lca_oracle_on_random_trees() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(2..10);
            let mut rows = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let v = f64::from(rng.random_range(1..6));
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
            }
            let data = ProximityData::unlabeled(rows, Measure::Distance).unwrap();
            for m in Method::ALL {
                let tree = variable_group_cluster(&data, m).tree;
                assert_eq!(cophenetic_matrix(&tree).values(), lca_brute_force(&tree).as_slice());
            }
        }
    }

    #[test]
    fn identical_matrices_give_perfect_scores() {
        let data = parse_matrix("0 1 2 2\n1 0 2 2\n2 2 0 1\n2 2 1 0").unwrap();
        let u = UltrametricMatrix::new(data.labels().to_vec(), (0..16).map(|k| data.get(k / 4, k % 4)).collect(), Measure::Distance, 0);
        let r = deviation_measures(&data, &u);
        assert!((r.ccc.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!((r.nmse, r.nmae), (0.0, 0.0));
    }

    #[test]
    fn shifted_ultrametric() {
        let data = parse_matrix("0 1 2 2\n1 0 2 2\n2 2 0 1\n2 2 1 0").unwrap();
        let c = 0.5;
        let values = (0..16).map(|k| if k / 4 == k % 4 { 0.0 } else { data.get(k / 4, k % 4) + c }).collect();
        let u = UltrametricMatrix::new(data.labels().to_vec(), values, Measure::Distance, 1);
        let r = deviation_measures(&data, &u);
        assert!((r.ccc.unwrap() - 1.0).abs() < 1e-12);
        let sum_d: f64 = data.upper_triangle().map(|p| p.2).sum();
        assert!((r.nmae - c * 6.0 / sum_d).abs() < 1e-12);
    }

    #[test]
    fn single_pair_has_undefined_correlation() {
        let data = parse_matrix("0 5\n5 0").unwrap();
        let tree = variable_group_cluster(&data, Method::SingleLinkage).tree;
        let r = deviation_measures(&data, &cophenetic_matrix(&tree));
        assert_eq!(r, DeviationReport { ccc: None, nmse: 0.0, nmae: 0.0 });
    }

    #[test]
    fn details_of_nested_tree() {
        let mut t = Multidendrogram::new(labels(&["a", "b", "c", "d"]), Measure::Distance, 1);
        let ab = t.push_cluster(vec![0, 1], 1.0, 1.0);
        t.push_cluster(vec![ab, 2, 3], 2.0, 2.5);
        let d = details(&t);
        assert_eq!(d.leaf_count, 4);
        assert_eq!((d.band_lower, d.band_upper), (2.0, 2.5));
        assert_eq!(d.depth(), 2);
        match &d.children[0] {
            DetailsChild::Node(inner) => {
                assert_eq!(inner.leaf_count, 2);
                assert_eq!(inner.band_lower, inner.band_upper);
            }
            other => panic!("expected nested node, got {other:?}"),
        }
        assert_eq!(d.children[1], DetailsChild::Leaf("c".into()));
    }

    #[test]
    fn details_of_tie_example() {
        let result = variable_group_cluster(&parse_list("A B 0.4\nB C 0.4\nA C 0.5").unwrap(), Method::CompleteLinkage);
        let d = details(&result.tree);
        assert_eq!((d.leaf_count, d.band_lower, d.band_upper, d.children.len()), (3, 0.4, 0.5, 3));
    }
}

//! The multidendrogram: a rooted tree with unbounded arity whose internal
//! nodes carry fusion bands.
//!
//! Nodes live in an arena. Leaves occupy ids `0..n` in label order; internal
//! nodes are appended in formation order, so every child id is smaller than
//! its parent's. Bands are stored in distance space. For weight data the
//! engines cluster negated weights, and [`Multidendrogram::reported`] maps
//! stored heights back to weights.

use std::fmt::Write;

use crate::proximity_io::Measure;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Index into the label list.
    Leaf(usize),
    Internal(Cluster),
}

/// An internal node.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Ordered by ascending smallest leaf index.
    pub children: Vec<NodeId>,
    /// Distance at which the group formed; the scalar fusion value.
    pub band_lower: f64,
    /// Largest distance between two of the joined clusters.
    pub band_upper: f64,
    pub leaf_count: usize,
    /// Smallest leaf index below this node.
    pub min_leaf: usize,
}

impl Cluster {
    pub fn has_band(&self) -> bool {
        self.band_upper > self.band_lower
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Multidendrogram {
    labels: Vec<String>,
    measure: Measure,
    precision: u32,
    nodes: Vec<Node>,
}

impl Multidendrogram {
    /// A forest of `labels.len()` leaves with no internal nodes yet.
    pub fn new(labels: Vec<String>, measure: Measure, precision: u32) -> Self {
        let nodes = (0..labels.len()).map(Node::Leaf).collect();
        Self { labels, measure, precision, nodes }
    }

    /// Appends an internal node over `children` and returns its id.
    ///
    /// # Panics
    ///
    /// If fewer than two children are given or a child id does not exist.
    pub fn push_cluster(&mut self, mut children: Vec<NodeId>, band_lower: f64, band_upper: f64) -> NodeId {
        assert!(children.len() >= 2, "a cluster needs at least two children");
        children.sort_by_key(|&c| self.min_leaf(c));
        let leaf_count = children.iter().map(|&c| self.leaf_count(c)).sum();
        let min_leaf = self.min_leaf(children[0]);
        self.nodes.push(Node::Internal(Cluster { children, band_lower, band_upper, leaf_count, min_leaf }));
        self.nodes.len() - 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn cluster(&self, id: NodeId) -> Option<&Cluster> {
        match &self.nodes[id] {
            Node::Internal(c) => Some(c),
            Node::Leaf(_) => None,
        }
    }

    pub fn num_leaves(&self) -> usize {
        self.labels.len()
    }

    /// The last node formed. Only meaningful once clustering has finished.
    pub fn root(&self) -> NodeId {
        self.nodes.len() - 1
    }

    pub fn root_cluster(&self) -> Option<&Cluster> {
        self.cluster(self.root())
    }

    /// Internal nodes with their ids, in formation order.
    pub fn clusters(&self) -> impl Iterator<Item = (NodeId, &Cluster)> {
        self.nodes.iter().enumerate().filter_map(|(id, n)| match n {
            Node::Internal(c) => Some((id, c)),
            Node::Leaf(_) => None,
        })
    }

    pub fn leaf_count(&self, id: NodeId) -> usize {
        match &self.nodes[id] {
            Node::Leaf(_) => 1,
            Node::Internal(c) => c.leaf_count,
        }
    }

    pub fn min_leaf(&self, id: NodeId) -> usize {
        match &self.nodes[id] {
            Node::Leaf(i) => *i,
            Node::Internal(c) => c.min_leaf,
        }
    }

    /// Stored (distance-space) height of a node; leaves have none.
    pub fn height(&self, id: NodeId) -> Option<f64> {
        self.cluster(id).map(|c| c.band_lower)
    }

    /// Maps a stored height to the data's own units.
    pub fn reported(&self, height: f64) -> f64 {
        let v = self.measure.engine_sign() * height;
        if v == 0.0 {
            0.0
        } else {
            v
        }
    }

    /// Band of a cluster in the data's units, ordered low to high. For
    /// weights the fusion value is the upper end.
    pub fn reported_band(&self, cluster: &Cluster) -> (f64, f64) {
        let (a, b) = (self.reported(cluster.band_lower), self.reported(cluster.band_upper));
        (a.min(b), a.max(b))
    }

    /// The scalar fusion value of a cluster in the data's units.
    pub fn fusion_value(&self, cluster: &Cluster) -> f64 {
        self.reported(cluster.band_lower)
    }

    /// Leaf indices under `id` in canonical left-to-right order.
    pub fn leaves_under(&self, id: NodeId) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.leaf_count(id));
        let mut stack = vec![id];
        while let Some(top) = stack.pop() {
            match &self.nodes[top] {
                Node::Leaf(i) => out.push(*i),
                Node::Internal(c) => stack.extend(c.children.iter().rev()),
            }
        }
        out
    }

    /// Nodes with no parent yet, in id order.
    pub fn top_level(&self) -> Vec<NodeId> {
        let mut has_parent = vec![false; self.nodes.len()];
        for (_, c) in self.clusters() {
            for &child in &c.children {
                has_parent[child] = true;
            }
        }
        (0..self.nodes.len()).filter(|&id| !has_parent[id]).collect()
    }

    /// A label-based serialization independent of leaf numbering and of the
    /// order in which nodes were created. Two trees over the same labels have
    /// the same canonical form iff they have the same shape and bit-identical
    /// bands.
    pub fn canonical_form(&self) -> String {
        self.canonical_subtree(self.root())
    }

    /// Canonical form of the subtree rooted at `id`.
    pub fn canonical_subtree(&self, id: NodeId) -> String {
        self.canonical_with_key(id).1
    }

    fn canonical_with_key(&self, id: NodeId) -> (&str, String) {
        match &self.nodes[id] {
            Node::Leaf(i) => (self.labels[*i].as_str(), format!("{:?}", self.labels[*i])),
            Node::Internal(c) => {
                let mut parts: Vec<(&str, String)> = c.children.iter().map(|&ch| self.canonical_with_key(ch)).collect();
                parts.sort_by(|a, b| a.0.cmp(b.0));
                let key = parts[0].0;
                let mut s = String::from("(");
                for (k, (_, part)) in parts.iter().enumerate() {
                    if k > 0 {
                        s.push(',');
                    }
                    s.push_str(part);
                }
                write!(s, ")[{:?},{:?}]", c.band_lower, c.band_upper).expect("write to string");
                (key, s)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn children_sorted_and_counts_summed() {
        let mut t = Multidendrogram::new(labels(&["a", "b", "c", "d"]), Measure::Distance, 1);
        let cd = t.push_cluster(vec![3, 2], 1.0, 1.0);
        let root = t.push_cluster(vec![cd, 1, 0], 2.0, 3.0);
        let c = t.root_cluster().unwrap();
        assert_eq!(t.root(), root);
        assert_eq!(c.children, vec![0, 1, cd]);
        assert_eq!(c.leaf_count, 4);
        assert_eq!(t.leaves_under(root), vec![0, 1, 2, 3]);
        assert_eq!(t.top_level(), vec![root]);
    }

    #[test]
    fn canonical_form_ignores_numbering() {
        let mut t1 = Multidendrogram::new(labels(&["a", "b", "c"]), Measure::Distance, 1);
        let ab = t1.push_cluster(vec![0, 1], 1.0, 1.0);
        t1.push_cluster(vec![ab, 2], 2.0, 2.0);

        let mut t2 = Multidendrogram::new(labels(&["c", "b", "a"]), Measure::Distance, 1);
        let ba = t2.push_cluster(vec![1, 2], 1.0, 1.0);
        t2.push_cluster(vec![0, ba], 2.0, 2.0);

        assert_eq!(t1.canonical_form(), t2.canonical_form());
        assert_eq!(t1.canonical_form(), r#"(("a","b")[1.0,1.0],"c")[2.0,2.0]"#);
    }

    #[test]
    fn weights_are_reported_with_flipped_sign() {
        let mut t = Multidendrogram::new(labels(&["a", "b", "c"]), Measure::Weight, 1);
        let root = t.push_cluster(vec![0, 1, 2], -0.5, -0.4);
        let c = t.cluster(root).unwrap();
        assert_eq!(t.reported_band(c), (0.4, 0.5));
        assert_eq!(t.fusion_value(c), 0.5);
    }
}

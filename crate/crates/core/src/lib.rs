/*!
Agglomerative hierarchical clustering that stays unique in the presence of
tied distances.

The classical pair-group algorithm merges exactly two clusters per step. When
several pairs sit at the same minimum distance it has to pick one, and the
final hierarchy depends on that pick. The variable-group algorithm implemented
here instead merges every group of clusters connected by minimum-distance
pairs in a single step. The result is a *multidendrogram*: a tree whose
internal nodes may have more than two children and carry a fusion band
`[lower, upper]`, where `lower` is the distance at which the group formed and
`upper` is the largest distance between its members.

# Overview

* [`proximity_io`] parses matrix-like and list-like text files into
  [`ProximityData`] and handles precision and distance/weight measures.
* [`linkage`] holds the coefficients of the seven clustering methods and
  evaluates both the pairwise update and the group update formulas.
* [`variable_group`] is the tie-aware engine producing a [`Multidendrogram`].
* [`pair_group`] is the classical engine with pluggable tie breaking, plus an
  exhaustive enumerator of every dendrogram reachable through ties.
* [`dendro`] computes the cophenetic (ultrametric) matrix, deviation measures
  and a navigable details view.
* [`export`] writes text details, Newick, ultrametric TXT and SVG.
* [`cli`] drives the `multidendrogram direct ...` command.

# Example

```
use multidendrogram::{parse_list, variable_group_cluster, Method};

let data = parse_list("A B 0.4\nB C 0.4\nA C 0.5").unwrap();
let result = variable_group_cluster(&data, Method::CompleteLinkage);
let root = result.tree.root_cluster().unwrap();
assert_eq!(root.children.len(), 3);
assert_eq!((root.band_lower, root.band_upper), (0.4, 0.5));
```
*/

pub mod cli;
pub mod dendro;
pub mod export;
pub mod linkage;
pub mod pair_group;
pub mod proximity_io;
pub mod tree;
pub mod variable_group;

pub use dendro::{cophenetic_matrix, details, deviation_measures, DeviationReport, NodeDetails, UltrametricMatrix};
pub use export::{render_svg, to_newick, to_text_details, ultrametric_to_txt, RenderOptions};
pub use linkage::{group_distance, pair_update, GroupDistanceInput, Method};
pub use pair_group::{enumerate_tie_dendrograms, pair_group_cluster, Dendrogram, TiePolicy};
pub use proximity_io::{
    apply_precision, detect_format, infer_precision, parse, parse_list, parse_matrix, similarity_to_dissimilarity, FormatKind, Measure,
    ProximityData, ProximityError,
};
pub use tree::{Cluster, Multidendrogram, Node, NodeId};
pub use variable_group::{detect_band_reversals, variable_group_cluster, ReversalEvent, VariableGroupResult};

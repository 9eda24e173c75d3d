//! Similarities as weights: the most similar items join first and fusion
//! values decrease towards the root. Also shows converting to distances.
//!
//! cargo run --example weights_mode

use multidendrogram::{parse, similarity_to_dissimilarity, to_newick, variable_group_cluster, Measure, Method};

fn main() {
    let text = "x y 0.9\nx z 0.6\ny z 0.6\nx w 0.2\ny w 0.3\nz w 0.2";
    let weights = parse(text, Measure::Weight).expect("valid list");

    let tree = variable_group_cluster(&weights, Method::CompleteLinkage).tree;
    for (_, c) in tree.clusters() {
        let (lower, upper) = tree.reported_band(c);
        println!("{} leaves joined at {lower} (band {lower}..{upper})", c.leaf_count);
    }
    print!("weights:   {}", to_newick(&tree, 1));

    let distances = similarity_to_dissimilarity(&weights).expect("values in [0, 1]");
    let tree = variable_group_cluster(&distances, Method::CompleteLinkage).tree;
    print!("distances: {}", to_newick(&tree, 1));
}

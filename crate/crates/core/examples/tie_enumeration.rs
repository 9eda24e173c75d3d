//! The classical pair-group algorithm on tied data: each tie-breaking rule
//! gives a different tree, and the enumerator lists every possible outcome.
//!
//! cargo run --example tie_enumeration

use multidendrogram::{cophenetic_matrix, enumerate_tie_dendrograms, pair_group_cluster, parse_list, Method, TiePolicy};

fn main() {
    let data = parse_list("A B 0.4\nB C 0.4\nA C 0.5").expect("valid list");

    for policy in [TiePolicy::FirstIndex, TiePolicy::LastIndex] {
        let tree = pair_group_cluster(&data, Method::CompleteLinkage, policy);
        println!("{policy:?}: {}", tree.canonical_form());
    }

    for method in [Method::CompleteLinkage, Method::SingleLinkage] {
        let all = enumerate_tie_dendrograms(&data, method, 100).expect("small input");
        let mut matrices: Vec<Vec<f64>> = Vec::new();
        for d in &all {
            let m = cophenetic_matrix(d.as_multidendrogram()).values().to_vec();
            if !matrices.contains(&m) {
                matrices.push(m);
            }
        }
        println!("{}: {} dendrograms, {} ultrametric matrices", method.name(), all.len(), matrices.len());
    }
}

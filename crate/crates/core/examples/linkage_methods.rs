//! Runs all seven methods on the same data and prints each tree's merges.
//!
//! cargo run --example linkage_methods

use multidendrogram::{parse_matrix, variable_group_cluster, Method};

const DATA: &str = "\
a b c d e
0 2 6 10 9
2 0 5 9 8
6 5 0 4 5
10 9 4 0 3
9 8 5 3 0
";

fn main() {
    let data = parse_matrix(DATA).expect("valid matrix");
    for method in Method::ALL {
        let result = variable_group_cluster(&data, method);
        let tree = &result.tree;
        let merges: Vec<String> = tree
            .clusters()
            .map(|(id, c)| {
                let names: Vec<&str> = tree.leaves_under(id).iter().map(|&l| tree.labels()[l].as_str()).collect();
                format!("{{{}}}@{}", names.join(""), c.band_lower)
            })
            .collect();
        println!("{:<20} {}", method.name(), merges.join(" "));
        for r in &result.reversals {
            println!("{:<20} reversal: band upper {} above next minimum {}", "", r.band_upper, r.d_next);
        }
    }
}

//! Three items where A-B and B-C tie at 0.4. The variable-group algorithm
//! joins all three in one step and records the band [0.4, 0.5].
//!
//! cargo run --example band_triangle

use multidendrogram::{details, parse_list, to_text_details, variable_group_cluster, Method};

fn main() {
    let data = parse_list("A B 0.4\nB C 0.4\nA C 0.5").expect("valid list");
    let result = variable_group_cluster(&data, Method::CompleteLinkage);

    print!("{}", to_text_details(&details(&result.tree), data.precision()));
    let root = result.tree.root_cluster().expect("root");
    println!("band width: {:.1}", root.band_upper - root.band_lower);
}

//! How well each method's ultrametric matrix fits the original distances.
//!
//! cargo run --example deviation_measures

use multidendrogram::{cophenetic_matrix, deviation_measures, parse_matrix, variable_group_cluster, Method};

fn main() {
    let data = parse_matrix("0 1 4 5\n1 0 3 6\n4 3 0 2\n5 6 2 0").expect("valid matrix");
    println!("{:<20} {:>8} {:>8} {:>8}", "method", "ccc", "nmse", "nmae");
    for method in Method::ALL {
        let ultra = cophenetic_matrix(&variable_group_cluster(&data, method).tree);
        let d = deviation_measures(&data, &ultra);
        let ccc = d.ccc.map_or("n/a".to_owned(), |c| format!("{c:.4}"));
        println!("{:<20} {ccc:>8} {:>8.4} {:>8.4}", method.name(), d.nmse, d.nmae);
    }
}

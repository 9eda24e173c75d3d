//! Writes the text details, Newick, ultrametric matrix and SVG of one tree
//! into a temporary directory.
//!
//! cargo run --example export_formats

use multidendrogram::export::Orientation;
use multidendrogram::{
    cophenetic_matrix, details, parse_list, render_svg, to_newick, to_text_details, ultrametric_to_txt, variable_group_cluster, Method,
    RenderOptions,
};

fn main() -> std::io::Result<()> {
    let data = parse_list("oak elm 0.30\noak ash 0.45\noak fir 0.80\nelm ash 0.45\nelm fir 0.75\nash fir 0.70").expect("valid list");
    let tree = variable_group_cluster(&data, Method::UnweightedAverage).tree;
    let p = data.precision();

    let dir = std::env::temp_dir().join("multidendrogram-export");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("trees.txt"), to_text_details(&details(&tree), p))?;
    std::fs::write(dir.join("trees.nwk"), to_newick(&tree, p))?;
    std::fs::write(dir.join("trees.ultrametric.txt"), ultrametric_to_txt(&cophenetic_matrix(&tree)))?;

    let mut options = RenderOptions::for_tree(&tree);
    for orientation in [Orientation::North, Orientation::West] {
        options.orientation = orientation;
        let svg = render_svg(&tree, &options).expect("default axis is valid");
        std::fs::write(dir.join(format!("trees-{orientation:?}.svg").to_lowercase()), svg)?;
    }

    print!("{}", to_newick(&tree, p));
    println!("files in {}", dir.display());
    Ok(())
}

//! The same data written as a labeled matrix, a matrix with a label column
//! and a list, with different separators. All three parse identically.
//!
//! cargo run --example parse_formats

use multidendrogram::{detect_format, parse, Measure};

fn main() {
    let inputs = [
        "# header row, tabs\np\tq\tr\n0\t1.5\t2\n1.5\t0\t2.5\n2\t2.5\t0\n",
        "p; 0; 1.5; 2\nq; 1.5; 0; 2.5\nr; 2; 2.5; 0\n",
        "p,q,1.5\np|r|2\nq r 2.5\n",
    ];
    let parsed: Vec<_> = inputs.iter().map(|text| parse(text, Measure::Distance).expect("valid input")).collect();
    for (text, data) in inputs.iter().zip(&parsed) {
        println!("{:?}: {:?}, {} decimals", detect_format(text).unwrap(), data.labels(), data.precision());
    }
    println!("identical: {}", parsed.windows(2).all(|w| w[0] == w[1]));

    match parse("0 1\n2 0\n", Measure::Distance) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("rejected: {e}"),
    }
}

//! Draws a Latin hypercube design and shows that every axis has exactly one
//! point per stratum, and that derived streams reproduce it bit for bit.
//!
//! ```bash
//! cargo run --example lhs_design
//! ```

use pias_workbench::sampling::{lhs_sample, Bounds, RngStream};

fn main() -> pias_workbench::Result<()> {
    let n = 8;
    let bounds = Bounds::cube(2, -5.0, 5.0)?;
    let stream = RngStream::new(7).derive("example").derive("lhs");
    let points = lhs_sample(n, &bounds, &stream)?;

    println!("{:>10} {:>10} {:>8} {:>8}", "x0", "x1", "bin0", "bin1");
    let mut bins = vec![vec![0usize; n]; 2];
    for p in &points {
        let b: Vec<usize> = p.iter().map(|x| ((x + 5.0) / 10.0 * n as f64).floor() as usize).collect();
        bins[0][b[0]] += 1;
        bins[1][b[1]] += 1;
        println!("{:>10.4} {:>10.4} {:>8} {:>8}", p[0], p[1], b[0], b[1]);
    }
    println!("points per stratum, axis 0: {:?}", bins[0]);
    println!("points per stratum, axis 1: {:?}", bins[1]);

    let again = lhs_sample(n, &bounds, &RngStream::new(7).derive("example").derive("lhs"))?;
    println!("same path reproduces the design: {}", again == points);
    let other = lhs_sample(n, &bounds, &RngStream::new(7).derive("example").derive("lhs2"))?;
    println!("sibling path differs: {}", other != points);
    println!("stream path: {}", stream.path_string());
    Ok(())
}

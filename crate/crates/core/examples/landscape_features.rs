//! Computes the landscape feature vector of a few instances and prints a
//! side-by-side table; features that are not available print as NA.
//!
//! ```bash
//! cargo run --release --example landscape_features
//! ```

use pias_workbench::ela::{instance_features, FEATURE_NAMES};
use pias_workbench::problems::{instantiate, name_of, ProblemSpec};
use pias_workbench::sampling::RngStream;

fn main() -> pias_workbench::Result<()> {
    let ids = [1, 8, 15, 21];
    let root = RngStream::new(1).derive("example");
    let mut columns = Vec::new();
    for f in ids {
        let inst = instantiate(ProblemSpec::new(f, 1, 2))?;
        columns.push(instance_features(&inst, 500, 5, &root.derive(inst.spec.to_string()))?);
    }

    print!("{:<24}", "feature");
    for f in ids {
        print!("{:>18}", name_of(f).unwrap().chars().take(16).collect::<String>());
    }
    println!();
    for (k, name) in FEATURE_NAMES.iter().enumerate() {
        print!("{name:<24}");
        for c in &columns {
            match c.values()[k] {
                Some(v) => print!("{v:>18.4}"),
                None => print!("{:>18}", "NA"),
            }
        }
        println!();
    }
    Ok(())
}

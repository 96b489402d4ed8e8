//! Builds a small problem suite, prints each instance's group, optimum and
//! rotation check, and writes the manifest CSV.
//!
//! ```bash
//! cargo run --release --example suite_manifest -- /tmp/manifest.csv
//! ```

use std::path::PathBuf;

use pias_workbench::problems::{group_of, instantiate, name_of, write_manifest, EvaluationBudgetCounter, ProblemSpec};

fn main() -> pias_workbench::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("manifest.csv"));
    let mut instances = Vec::new();
    for f in 1..=24 {
        for i in 1..=2 {
            instances.push(instantiate(ProblemSpec::new(f, i, 5))?);
        }
    }
    println!("{:<14} {:<28} {:<28} {:>12} {:>12}", "spec", "name", "group", "f_opt", "|QQt - I|");
    for inst in &instances {
        let f = inst.spec.function_id;
        println!(
            "{:<14} {:<28} {:<28} {:>12.4} {:>12.2e}",
            inst.spec.to_string(),
            name_of(f).unwrap(),
            format!("{:?}", group_of(f).unwrap()),
            inst.f_opt,
            inst.orthogonality_defect()
        );
    }

    let inst = &instances[0];
    let mut counter = EvaluationBudgetCounter::new(2);
    let at_opt = inst.evaluate(&inst.x_opt, &mut counter)?;
    println!("\n{}: f(x_opt) - f_opt = {:.3e}", inst.spec, at_opt - inst.f_opt);
    inst.evaluate(&inst.x_opt, &mut counter)?;
    match inst.evaluate(&inst.x_opt, &mut counter) {
        Err(e) => println!("third evaluation with a budget of 2: {e}"),
        Ok(_) => unreachable!(),
    }

    write_manifest(&path, &instances)?;
    println!("manifest written to {}", path.display());
    Ok(())
}

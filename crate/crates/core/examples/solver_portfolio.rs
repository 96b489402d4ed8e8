//! Runs the six-solver portfolio on a handful of instances and prints the
//! best-so-far precision at each checkpoint budget, plus who wins where.
//!
//! ```bash
//! cargo run --release --example solver_portfolio
//! ```

use pias_workbench::perfdata::cap_and_log;
use pias_workbench::problems::{instantiate, ProblemSpec};
use pias_workbench::sampling::RngStream;
use pias_workbench::solvers::{run_grid, SolverConfig, SolverName};

fn main() -> pias_workbench::Result<()> {
    let dimension = 5;
    let checkpoints = [100, 250, 1000, 2500];
    let instances = (1..=24)
        .map(|f| instantiate(ProblemSpec::new(f, 1, dimension)))
        .collect::<Result<Vec<_>, _>>()?;
    let configs: Vec<SolverConfig> = SolverName::ALL.into_iter().map(SolverConfig::new).collect();
    let runs = run_grid(&configs, &instances, 3, &checkpoints, &RngStream::new(42).derive("example"))?;

    for (k, budget) in checkpoints.iter().enumerate() {
        println!("budget {budget}: median log10 precision over 3 runs");
        print!("{:>4}", "f");
        for name in SolverName::ALL {
            print!("{:>20}", name.as_str());
        }
        println!("{:>20}", "best");
        let mut wins = [0usize; 6];
        for inst in &instances {
            print!("{:>4}", inst.spec.function_id);
            let mut row = Vec::new();
            for name in SolverName::ALL {
                let mut ps: Vec<f64> = runs
                    .iter()
                    .filter(|r| r.solver == name && r.problem == inst.spec)
                    .map(|r| r.checkpoints[k].1)
                    .collect();
                ps.sort_by(f64::total_cmp);
                let lp = cap_and_log(ps[ps.len() / 2])?;
                row.push(lp);
                print!("{lp:>20.3}");
            }
            let best = (0..6).min_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            wins[best] += 1;
            println!("{:>20}", SolverName::ALL[best].as_str());
        }
        println!("wins: {wins:?}\n");
    }
    Ok(())
}

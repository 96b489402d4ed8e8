//! Runs the portfolio on 2-D instances, aggregates runs into capped
//! log-precisions, labels the best solver per row and filters the portfolio.
//!
//! ```bash
//! cargo run --release --example performance_table
//! ```

use pias_workbench::perfdata::{filter_portfolio, BestLabelTable, PerformanceTable, PORTFOLIO_THRESHOLD, PRECISION_CAP};
use pias_workbench::problems::{instantiate, ProblemSpec};
use pias_workbench::sampling::RngStream;
use pias_workbench::solvers::{run_grid, SolverConfig, SolverName};

fn main() -> pias_workbench::Result<()> {
    let budgets = [100, 1000];
    let specs: Vec<ProblemSpec> = (1..=24).flat_map(|f| (1..=3).map(move |i| ProblemSpec::new(f, i, 2))).collect();
    let instances = specs.iter().map(|s| instantiate(*s)).collect::<Result<Vec<_>, _>>()?;
    let solvers = SolverName::ALL.to_vec();
    let configs: Vec<SolverConfig> = solvers.iter().map(|s| SolverConfig::new(*s)).collect();
    let root = RngStream::new(5).derive("example");

    let runs = run_grid(&configs, &instances, 5, &budgets, &root.derive("collect"))?;
    let table = PerformanceTable::from_trajectories(&runs, &specs, &solvers, &budgets, PRECISION_CAP)?;
    let labels = BestLabelTable::from_performance(&table, &solvers, &root.derive("labels"))?;

    for &budget in &budgets {
        println!("budget {budget}");
        print!("{:<14}", "instance");
        for s in &solvers {
            print!("{:>20}", s.as_str());
        }
        println!("{:>20}", "label");
        for spec in specs.iter().filter(|s| s.instance_id == 1) {
            print!("{:<14}", spec.to_string());
            for s in &solvers {
                print!("{:>20.3}", table.log_precision(spec, *s, budget)?);
            }
            let label = labels.get(spec, budget).unwrap();
            let star = if label.was_tie { "*" } else { "" };
            println!("{:>21}", format!("{}{star}", label.best_solver.as_str()));
        }
        let entry = filter_portfolio(&labels, 2, budget, PORTFOLIO_THRESHOLD, &solvers)?;
        let kept: Vec<&str> = entry.solvers.iter().map(|s| s.as_str()).collect();
        println!("portfolio after the {PORTFOLIO_THRESHOLD} win-share filter: {}\n", kept.join(", "));
    }
    println!("* tie broken by a seeded draw");
    Ok(())
}

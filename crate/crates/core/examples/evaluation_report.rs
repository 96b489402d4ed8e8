//! Scores out-of-fold selections against the virtual and single best
//! solvers and writes boxplot, heatmap and summary files.
//!
//! ```bash
//! cargo run --release --example evaluation_report -- /tmp/report
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use pias_workbench::ela::instance_features;
use pias_workbench::evaluation::{emit_reports, evaluate_selector};
use pias_workbench::learners::{LearnerKind, ParamGrid, TreeParams};
use pias_workbench::perfdata::{filter_portfolio, BestLabelTable, PerformanceTable, PORTFOLIO_THRESHOLD, PRECISION_CAP};
use pias_workbench::problems::{instantiate, ProblemSpec};
use pias_workbench::sampling::RngStream;
use pias_workbench::selection::{train_selector, Approach, CellData};
use pias_workbench::solvers::{run_grid, SolverConfig, SolverName};

fn main() -> pias_workbench::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("pias_report"));
    let budgets = [250, 1000];
    let specs: Vec<ProblemSpec> = (1..=24).flat_map(|f| (1..=5).map(move |i| ProblemSpec::new(f, i, 2))).collect();
    let instances = specs.iter().map(|s| instantiate(*s)).collect::<Result<Vec<_>, _>>()?;
    let solvers = SolverName::ALL.to_vec();
    let configs: Vec<SolverConfig> = solvers.iter().map(|s| SolverConfig::new(*s)).collect();
    let root = RngStream::new(3).derive("example");

    let features: BTreeMap<_, _> = instances
        .iter()
        .map(|inst| Ok((inst.spec, instance_features(inst, 200, 3, &root.derive("features").derive(inst.spec.to_string()))?)))
        .collect::<pias_workbench::Result<_>>()?;
    let runs = run_grid(&configs, &instances, 5, &budgets, &root.derive("collect"))?;
    let table = PerformanceTable::from_trajectories(&runs, &specs, &solvers, &budgets, PRECISION_CAP)?;
    let labels = BestLabelTable::from_performance(&table, &solvers, &root.derive("labels"))?;
    let grid = ParamGrid::single(TreeParams { n_trees: 30, ..TreeParams::default() }).expand()?;

    let mut reports = Vec::new();
    for &budget in &budgets {
        let entry = filter_portfolio(&labels, 2, budget, PORTFOLIO_THRESHOLD, &solvers)?;
        let cell = CellData::build(&features, &table, &labels, &entry, &root.derive("labels"))?;
        for approach in Approach::ALL {
            let trained = train_selector(approach, &cell, LearnerKind::Forest, &grid, &root.derive("train"))?;
            let picks: Vec<_> = cell.specs.iter().zip(&trained.cv_selection).map(|(s, &i)| (*s, cell.portfolio[i])).collect();
            let report = evaluate_selector(approach, LearnerKind::Forest, 2, budget, &cell.portfolio, &picks, &table)?;
            println!(
                "budget {budget:>5} {:<15} mean loss {:.3} (SBS {} {:.3}), VBS hits {:.1}%",
                approach.as_str(),
                report.summary.mean,
                report.sbs,
                report.sbs_mean_loss,
                100.0 * report.vbs_hit_rate
            );
            reports.push(report);
        }
    }
    let files = emit_reports(&out, &reports, &[LearnerKind::Forest], &Approach::ALL)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

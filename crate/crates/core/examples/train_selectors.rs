//! Trains regression, classification and pairwise selectors for one
//! (dimension, budget) cell under nested leave-one-instance-out CV, then
//! saves and reloads the deployable bundle.
//!
//! ```bash
//! cargo run --release --example train_selectors
//! ```

use std::collections::BTreeMap;

use pias_workbench::ela::instance_features;
use pias_workbench::learners::{LearnerKind, ParamGrid, TreeParams};
use pias_workbench::perfdata::{filter_portfolio, BestLabelTable, PerformanceTable, PORTFOLIO_THRESHOLD, PRECISION_CAP};
use pias_workbench::problems::{instantiate, ProblemSpec};
use pias_workbench::sampling::RngStream;
use pias_workbench::selection::{train_selector, Approach, CellData, SelectorModel};
use pias_workbench::solvers::{run_grid, SolverConfig, SolverName};

fn main() -> pias_workbench::Result<()> {
    let budget = 500;
    let specs: Vec<ProblemSpec> = (1..=24).flat_map(|f| (1..=5).map(move |i| ProblemSpec::new(f, i, 2))).collect();
    let instances = specs.iter().map(|s| instantiate(*s)).collect::<Result<Vec<_>, _>>()?;
    let solvers = SolverName::ALL.to_vec();
    let configs: Vec<SolverConfig> = solvers.iter().map(|s| SolverConfig::new(*s)).collect();
    let root = RngStream::new(11).derive("example");

    let features: BTreeMap<_, _> = instances
        .iter()
        .map(|inst| Ok((inst.spec, instance_features(inst, 200, 3, &root.derive("features").derive(inst.spec.to_string()))?)))
        .collect::<pias_workbench::Result<_>>()?;
    let runs = run_grid(&configs, &instances, 5, &[budget], &root.derive("collect"))?;
    let table = PerformanceTable::from_trajectories(&runs, &specs, &solvers, &[budget], PRECISION_CAP)?;
    let labels = BestLabelTable::from_performance(&table, &solvers, &root.derive("labels"))?;
    let entry = filter_portfolio(&labels, 2, budget, PORTFOLIO_THRESHOLD, &solvers)?;
    let cell = CellData::build(&features, &table, &labels, &entry, &root.derive("labels"))?;
    let names: Vec<&str> = cell.portfolio.iter().map(|s| s.as_str()).collect();
    println!("cell d=2 budget={budget}: {} instances, portfolio {}", cell.len(), names.join(", "));

    let grid = ParamGrid::single(TreeParams { n_trees: 30, ..TreeParams::default() }).expand()?;
    for approach in Approach::ALL {
        let trained = train_selector(approach, &cell, LearnerKind::Forest, &grid, &root.derive("train"))?;
        let agree = trained.cv_selection.iter().zip(&cell.labels).filter(|(a, b)| a == b).count();
        println!(
            "{:<15} models={:<3} out-of-fold picks matching the label: {agree}/{}",
            approach.as_str(),
            trained.model.models.len(),
            cell.len()
        );
        for (name, cv) in trained.cv.iter().take(2) {
            let scores: Vec<String> = cv.folds.iter().map(|f| format!("{:.2}", f.outer_score.unwrap_or(f64::NAN))).collect();
            println!("  {name}: outer-fold scores [{}]", scores.join(", "));
        }

        let dir = std::env::temp_dir().join(format!("pias_example_{approach}"));
        trained.model.save(&dir)?;
        let loaded = SelectorModel::load(&dir)?;
        let row = &cell.features[0];
        println!("  reloaded bundle picks {} for {}", loaded.select(row), cell.specs[0]);
        if let Some(wins) = loaded.pairwise_wins(row) {
            println!("  pairwise wins {wins:?} (sum {})", wins.iter().sum::<usize>());
        }
    }
    Ok(())
}

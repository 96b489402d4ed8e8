//! Selection rules, selector bundles and loss reporting.

use std::collections::BTreeMap;

use pias_workbench::ela::{FeatureVector, FEATURE_NAMES};
use pias_workbench::evaluation::{emit_reports, evaluate_selector, loss, vbs, LossSummary};
use pias_workbench::learners::{LearnerKind, ParamGrid, TreeParams};
use pias_workbench::perfdata::{BestLabelTable, PerformanceTable, PortfolioEntry, PRECISION_CAP};
use pias_workbench::problems::ProblemSpec;
use pias_workbench::sampling::RngStream;
use pias_workbench::selection::{oracle_selection, pairs, select_pairwise, train_selector, Approach, CellData, SelectorModel};
use pias_workbench::solvers::SolverName;
use proptest::prelude::*;
use rand::Rng;

/// Random cell over `k` solvers with frequent exact ties at the cap.
fn world(k: usize, seed: u64) -> (BTreeMap<ProblemSpec, FeatureVector>, PerformanceTable, BestLabelTable, PortfolioEntry) {
    let solvers = &SolverName::ALL[..k];
    let mut rng = RngStream::new(seed).derive("world").rng();
    let mut table = PerformanceTable::default();
    let mut features = BTreeMap::new();
    for f in 1..=24 {
        for i in 1..=5 {
            let spec = ProblemSpec::new(f, i, 2);
            let fv: Vec<Option<f64>> = (0..FEATURE_NAMES.len())
                .map(|j| (j % 11 != 3 || rng.random_bool(0.5)).then(|| f64::from(f) * (j as f64 + 1.0).ln() + rng.random::<f64>()))
                .collect();
            features.insert(spec, FeatureVector::from_values(fv).unwrap());
            for (s, solver) in solvers.iter().enumerate() {
                let p = if rng.random_bool(0.3) { 0.0 } else { 10f64.powf(-rng.random_range(0.0..6.0) + (f as usize % (s + 2)) as f64 * 0.5) };
                table.insert(spec, *solver, 100, p, PRECISION_CAP).unwrap();
            }
        }
    }
    let labels = BestLabelTable::from_performance(&table, solvers, &RngStream::new(seed).derive("labels")).unwrap();
    let entry = PortfolioEntry { dimension: 2, budget: 100, solvers: solvers.to_vec(), fallback: false };
    (features, table, labels, entry)
}

#[test]
fn oracle_selections_have_zero_loss() {
    for k in 2..=6 {
        let (features, table, labels, entry) = world(k, k as u64);
        let cell = CellData::build(&features, &table, &labels, &entry, &RngStream::new(k as u64).derive("labels")).unwrap();
        for approach in Approach::ALL {
            let picks: Vec<_> = (0..cell.len()).map(|r| (cell.specs[r], cell.portfolio[oracle_selection(approach, &cell, r)])).collect();
            for (spec, s) in &picks {
                assert_eq!(loss(*s, spec, 100, &table, &entry.solvers).unwrap(), 0.0);
                assert!(vbs(&table, spec, 100, &entry.solvers).unwrap().0.contains(s));
            }
            let report = evaluate_selector(approach, LearnerKind::Forest, 2, 100, &entry.solvers, &picks, &table).unwrap();
            assert_eq!(report.vbs_hit_rate, 1.0);
            assert_eq!(report.summary.mean, 0.0);
        }
    }
}

#[test]
fn trained_bundles_have_the_right_shape() {
    let (features, table, labels, entry) = world(5, 40);
    let cell = CellData::build(&features, &table, &labels, &entry, &RngStream::new(40).derive("labels")).unwrap();
    let grid = ParamGrid::single(TreeParams { n_trees: 5, ..TreeParams::default() }).expand().unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (approach, count) in [(Approach::Regression, 5), (Approach::Classification, 1), (Approach::Pairwise, 10)] {
        let trained = train_selector(approach, &cell, LearnerKind::Forest, &grid, &RngStream::new(1)).unwrap();
        assert_eq!(trained.model.models.len(), count);
        assert_eq!(trained.cv.len(), count);
        assert!(trained.cv_selection.iter().all(|s| *s < 5));
        let path = dir.path().join(approach.as_str());
        trained.model.save(&path).unwrap();
        let loaded = SelectorModel::load(&path).unwrap();
        assert_eq!(loaded, trained.model);
        for row in &cell.features {
            let s = loaded.select(row);
            assert!(entry.solvers.contains(&s));
            assert_eq!(s, trained.model.select(row));
            if let Some(wins) = loaded.pairwise_wins(row) {
                assert_eq!(wins.iter().sum::<usize>(), 10);
            }
        }
    }
    let mut one = entry.clone();
    one.solvers.truncate(1);
    let single = CellData::build(&features, &table, &labels, &one, &RngStream::new(40).derive("labels")).unwrap();
    assert!(train_selector(Approach::Regression, &single, LearnerKind::Forest, &grid, &RngStream::new(1)).is_err());
}

fn naive_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tournament_wins_sum_to_pair_count(k in 2usize..8, coins in prop::collection::vec(any::<bool>(), 28)) {
        let results: Vec<_> = pairs(k).into_iter().zip(&coins).map(|((i, j), c)| ((i, j), if *c { j } else { i })).collect();
        let out = select_pairwise(k, &results);
        prop_assert_eq!(out.wins.iter().sum::<usize>(), k * (k - 1) / 2);
        prop_assert!(out.selected < k);
        prop_assert_eq!(out.wins[out.selected], *out.wins.iter().max().unwrap());
        prop_assert_eq!(select_pairwise(k, &results), out);
    }

    #[test]
    fn summary_matches_naive_quartiles(values in prop::collection::vec(0.0f64..8.0, 1..60)) {
        let s = LossSummary::new(&values).unwrap();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let (q1, q3) = (naive_quantile(&sorted, 0.25), naive_quantile(&sorted, 0.75));
        prop_assert!((s.q1 - q1).abs() <= 1e-12 && (s.q3 - q3).abs() <= 1e-12);
        prop_assert!((s.median - naive_quantile(&sorted, 0.5)).abs() <= 1e-12);
        let fence = (q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1));
        let inside: Vec<f64> = sorted.iter().copied().filter(|v| *v >= fence.0 && *v <= fence.1).collect();
        prop_assert_eq!(s.whisker_low, inside[0]);
        prop_assert_eq!(s.whisker_high, *inside.last().unwrap());
        prop_assert_eq!(s.outliers.len() + inside.len(), values.len());
        prop_assert!(s.mean >= 0.0);
    }

    #[test]
    fn losses_are_nonnegative_and_consistent(seed in 0u64..500, k in 2usize..6) {
        let (_, table, _, entry) = world(k, seed);
        let mut rng = RngStream::new(seed).derive("picks").rng();
        let specs = table.specs_in_dimension(2);
        let picks: Vec<_> = specs.iter().map(|s| (*s, entry.solvers[rng.random_range(0..k)])).collect();
        let report = evaluate_selector(Approach::Regression, LearnerKind::Gbt, 2, 100, &entry.solvers, &picks, &table).unwrap();
        prop_assert!(report.instances.iter().all(|i| i.loss >= 0.0 && i.hit == (i.loss == 0.0)));
        prop_assert!(report.summary.mean >= 0.0 && report.sbs_mean_loss >= 0.0);
        if report.vbs_hit_rate == 1.0 {
            prop_assert_eq!(report.summary.mean, 0.0);
        }
    }
}

#[test]
fn loss_examples() {
    let spec = ProblemSpec::new(1, 1, 2);
    let mut table = PerformanceTable::default();
    table.insert(spec, SolverName::De, 100, 1e-2, PRECISION_CAP).unwrap();
    table.insert(spec, SolverName::Pso, 100, 1e-12, PRECISION_CAP).unwrap();
    table.insert(spec, SolverName::SimpleCma, 100, 0.0, PRECISION_CAP).unwrap();
    let portfolio = [SolverName::De, SolverName::Pso, SolverName::SimpleCma];
    assert!((loss(SolverName::De, &spec, 100, &table, &portfolio).unwrap() - 6.0).abs() <= 1e-12);
    assert_eq!(loss(SolverName::Pso, &spec, 100, &table, &portfolio).unwrap(), 0.0);
    assert_eq!(vbs(&table, &spec, 100, &portfolio).unwrap(), (vec![SolverName::Pso, SolverName::SimpleCma], -8.0));
    assert!(loss(SolverName::RandomSearch, &spec, 100, &table, &portfolio).is_err());
}

#[test]
fn reports_are_reproducible_and_oracle_heatmap_is_full() {
    let (features, table, labels, entry) = world(4, 9);
    let cell = CellData::build(&features, &table, &labels, &entry, &RngStream::new(9).derive("labels")).unwrap();
    let reports: Vec<_> = Approach::ALL
        .iter()
        .map(|&a| {
            let picks: Vec<_> = (0..cell.len()).map(|r| (cell.specs[r], cell.portfolio[oracle_selection(a, &cell, r)])).collect();
            evaluate_selector(a, LearnerKind::Forest, 2, 100, &entry.solvers, &picks, &table).unwrap()
        })
        .collect();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let files = emit_reports(a.path(), &reports, &[LearnerKind::Forest], &Approach::ALL).unwrap();
    emit_reports(b.path(), &reports, &[LearnerKind::Forest], &Approach::ALL).unwrap();
    for f in &files {
        let name = f.file_name().unwrap();
        assert_eq!(std::fs::read(f).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
    let heatmap = std::fs::read_to_string(a.path().join("heatmap.csv")).unwrap();
    let row = heatmap.lines().nth(1).unwrap();
    assert!(row.ends_with(",100.0,100.0,100.0"), "{row}");
    assert_eq!(heatmap.lines().next().unwrap().split(',').count(), 4 + 3);
    let boxplot = std::fs::read_to_string(a.path().join("boxplot_2_100.csv")).unwrap();
    let forest = boxplot.lines().find(|l| l.starts_with("forest/regression")).unwrap();
    let stats: Vec<&str> = forest.split(',').collect();
    assert!(stats[2..8].iter().all(|v| v.parse::<f64>().unwrap() == 0.0), "{forest}");
}

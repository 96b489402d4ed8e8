//! Solver trajectories, performance aggregation, labels and the portfolio filter.

use pias_workbench::perfdata::{
    cap_and_log, filter_portfolio, label_best, label_stream, BestLabel, BestLabelTable, PerformanceTable, PRECISION_CAP,
};
use pias_workbench::problems::{instantiate, ProblemSpec};
use pias_workbench::sampling::RngStream;
use pias_workbench::solvers::{run_grid, run_solver, SolverConfig, SolverName};
use proptest::prelude::*;
use SolverName::*;

#[test]
fn one_plus_one_es_solves_sphere() {
    let inst = instantiate(ProblemSpec::new(1, 1, 5)).unwrap();
    let run = run_solver(&SolverConfig::new(OnePlusOneEs), &inst, 1000, &[1000], &RngStream::new(2023).derive("sanity")).unwrap();
    let p = run.precision_at(1000).unwrap();
    assert!(p < 1e-2, "precision {p}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trajectories_are_monotone_and_exact(s in 0usize..6, f in 1u32..=24, d in prop::sample::select(vec![2usize, 5]), seed in any::<u64>()) {
        let solver = SolverName::ALL[s];
        let inst = instantiate(ProblemSpec::new(f, 1 + (seed % 10) as u32, d)).unwrap();
        let checkpoints = [10, 100, 250, 600];
        let run = run_solver(&SolverConfig::new(solver), &inst, 600, &checkpoints, &RngStream::new(seed)).unwrap();
        prop_assert_eq!(run.checkpoints.iter().map(|c| c.0).collect::<Vec<_>>(), checkpoints.to_vec());
        prop_assert!(run.checkpoints.iter().all(|c| c.1 >= 0.0));
        prop_assert!(run.checkpoints.windows(2).all(|w| w[1].1 <= w[0].1));
        let last = run.checkpoints.last().unwrap().1;
        prop_assert!(run.evaluations <= 600);
        prop_assert!(run.evaluations == 600 || last == 0.0, "{} stopped at {} with precision {}", solver, run.evaluations, last);
        let again = run_solver(&SolverConfig::new(solver), &inst, 600, &checkpoints, &RngStream::new(seed)).unwrap();
        prop_assert_eq!(run, again);
    }

    #[test]
    fn capping_is_idempotent(e in -20.0f64..5.0) {
        let p = 10f64.powf(e);
        let once = cap_and_log(p).unwrap();
        prop_assert_eq!(cap_and_log(10f64.powf(once)).unwrap(), once);
        prop_assert!(once >= -8.0);
    }

    #[test]
    fn labels_attain_the_row_minimum(values in prop::collection::vec(prop::sample::select(vec![-8.0, -5.0, -2.5, 0.0, 1.0]), 2..7), seed in any::<u64>()) {
        let group: Vec<(SolverName, f64)> = SolverName::ALL.iter().copied().zip(values.iter().copied()).collect();
        let stream = RngStream::new(seed).derive("row");
        let label = label_best(&group, &stream).unwrap();
        let min = group.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
        let best = group.iter().find(|g| g.0 == label.best_solver).unwrap().1;
        prop_assert_eq!(best, min);
        prop_assert_eq!(label.was_tie, group.iter().filter(|g| g.1 == min).count() >= 2);
        prop_assert_eq!(label, label_best(&group, &stream).unwrap());
    }

    #[test]
    fn lower_threshold_never_removes(wins in prop::collection::vec(0usize..30, 6), lo in 0.0f64..0.3, gap in 0.0f64..0.3) {
        let mut labels = BestLabelTable::default();
        let mut i = 0u32;
        for (s, &w) in SolverName::ALL.iter().zip(&wins) {
            for _ in 0..w {
                i += 1;
                labels.insert(ProblemSpec::new(1 + i % 24, 1 + i / 24, 2), 100, BestLabel { best_solver: *s, was_tie: false });
            }
        }
        prop_assume!(i > 0);
        let loose = filter_portfolio(&labels, 2, 100, lo, &SolverName::ALL).unwrap();
        let strict = filter_portfolio(&labels, 2, 100, lo + gap, &SolverName::ALL).unwrap();
        if !strict.fallback {
            prop_assert!(strict.solvers.iter().all(|s| loose.solvers.contains(s)));
        }
    }
}

#[test]
fn grid_is_independent_of_pool_size() {
    let instances: Vec<_> = (1..=6).map(|f| instantiate(ProblemSpec::new(f * 4, 2, 2)).unwrap()).collect();
    let configs: Vec<SolverConfig> = SolverName::ALL.iter().map(|s| SolverConfig::new(*s)).collect();
    let root = RngStream::new(77);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_grid(&configs, &instances, 3, &[50, 200], &root).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn tie_breaks_are_fair() {
    let group = [(De, -8.0), (Pso, -8.0)];
    let root = RngStream::new(31);
    let spec = ProblemSpec::new(3, 1, 2);
    let mut de = 0;
    for budget in 0..1000u64 {
        let label = label_best(&group, &label_stream(&root, &spec, budget)).unwrap();
        assert!(label.was_tie);
        de += usize::from(label.best_solver == De);
    }
    assert!((450..=550).contains(&de), "De chosen {de} times out of 1000");
}

#[test]
fn capping_examples() {
    assert!((cap_and_log(1e-12).unwrap() - -8.0).abs() <= 1e-12);
    assert!((cap_and_log(0.0).unwrap() - -8.0).abs() <= 1e-12);
    assert_eq!(cap_and_log(PRECISION_CAP).unwrap(), -8.0);
    assert!(cap_and_log(-1e-3).is_err());
}

#[test]
fn table_round_trips_through_csv() {
    let instances: Vec<_> = (1..=3).map(|f| instantiate(ProblemSpec::new(f, 1, 2)).unwrap()).collect();
    let specs: Vec<_> = instances.iter().map(|i| i.spec).collect();
    let solvers = [RandomSearch, De];
    let configs: Vec<SolverConfig> = solvers.iter().map(|s| SolverConfig::new(*s)).collect();
    let runs = run_grid(&configs, &instances, 3, &[20, 100], &RngStream::new(1)).unwrap();
    let table = PerformanceTable::from_trajectories(&runs, &specs, &solvers, &[20, 100], PRECISION_CAP).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("perf.csv");
    table.write_csv(&path).unwrap();
    assert_eq!(PerformanceTable::read_csv(&path).unwrap(), table);
    assert!(PerformanceTable::from_trajectories(&runs, &specs, &[Pso], &[20], PRECISION_CAP).is_err());
}

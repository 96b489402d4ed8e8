//! Stage runner, cache behaviour, config handling and the command line.

use std::path::Path;
use std::process::Command;

use pias_workbench::learners::{LearnerKind, ParamGrid, TreeParams};
use pias_workbench::selection::Approach;
use pias_workbench::solvers::{SolverConfig, SolverName};
use pias_workbench::workbench::{
    resolve_config, with_threads, ElaSettings, ExperimentConfig, PerfSettings, Stage, StageStatus, Workbench,
};
use pias_workbench::Error;

fn tiny(out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::desk_scale();
    c.master_seed = 17;
    c.dimensions = vec![2];
    c.function_ids = vec![1, 3, 6, 10, 15, 16, 20, 21];
    c.instance_ids = vec![1, 2, 3, 4];
    c.budgets = vec![50, 200];
    c.solvers = [SolverName::RandomSearch, SolverName::OnePlusOneEs, SolverName::De, SolverName::NelderMeadRestart]
        .iter()
        .map(|s| SolverConfig::new(*s))
        .collect();
    c.ela = ElaSettings { sample_size: 30, scale_with_dimension: true, repetitions: 2 };
    c.perfdata = PerfSettings { repetitions: 3, ..c.perfdata };
    c.learners = vec![LearnerKind::Forest];
    c.approaches = Approach::ALL.to_vec();
    c.grids.insert(LearnerKind::Forest, ParamGrid::single(TreeParams { n_trees: 8, ..TreeParams::default() }));
    c.output_dir = out.to_owned();
    c
}

fn statuses(bench: &Workbench) -> Vec<StageStatus> {
    bench.pipeline().unwrap().into_iter().map(|o| o.status).collect()
}

fn csv_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn pipeline_writes_artifacts_and_caches() {
    use StageStatus::*;
    let dir = tempfile::tempdir().unwrap();
    let bench = Workbench::new(tiny(dir.path())).unwrap();
    assert_eq!(statuses(&bench), vec![Ran; 5]);
    for rel in [
        "config.json",
        "suite/manifest.csv",
        "features/features.csv",
        "collect/trajectories.csv",
        "collect/performance.csv",
        "collect/labels.csv",
        "collect/portfolio.json",
        "train/cv_report.csv",
        "train/cv_selections.csv",
        "evaluate/losses.csv",
        "evaluate/report/heatmap.csv",
        "evaluate/report/summary.txt",
        "evaluate/report/boxplot_2_200.csv",
    ] {
        assert!(dir.path().join(rel).exists(), "{rel} missing");
    }
    let frozen = ExperimentConfig::load(&dir.path().join("config.json")).unwrap();
    assert_eq!(&frozen, bench.config());
    assert_eq!(statuses(&bench), vec![Cached; 5]);

    let mut retrained = tiny(dir.path());
    retrained.grids.insert(LearnerKind::Forest, ParamGrid::single(TreeParams { n_trees: 9, ..TreeParams::default() }));
    let bench2 = Workbench::new(retrained).unwrap();
    assert_eq!(statuses(&bench2), vec![Cached, Cached, Cached, Ran, Ran]);

    std::fs::write(dir.path().join("evaluate/losses.csv"), "tampered").unwrap();
    assert_eq!(statuses(&bench2), vec![Cached, Cached, Cached, Cached, Ran]);

    let perf = dir.path().join("collect/performance.csv");
    let text = std::fs::read_to_string(&perf).unwrap();
    std::fs::write(&perf, text.replacen("\n", "\n\n", 1)).unwrap();
    assert_eq!(statuses(&bench2), vec![Cached, Cached, Ran, Cached, Cached]);

    std::fs::remove_file(dir.path().join("features/features.csv")).unwrap();
    assert_eq!(statuses(&bench2), vec![Cached, Ran, Cached, Cached, Cached]);
}

#[test]
fn missing_upstream_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let bench = Workbench::new(tiny(dir.path())).unwrap();
    match bench.run_stage(Stage::Train) {
        Err(Error::MissingUpstream { stage, .. }) => assert_eq!(stage, "features"),
        other => panic!("expected a missing upstream error, got {other:?}"),
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let run = |dir: &Path, threads| {
        let bench = Workbench::new(tiny(dir)).unwrap();
        with_threads(Some(threads), || bench.pipeline()).unwrap().unwrap();
    };
    run(a.path(), 1);
    run(b.path(), 4);
    let (ca, cb) = (csv_files(a.path()), csv_files(b.path()));
    assert!(ca.len() >= 9);
    assert_eq!(ca, cb);
}

#[test]
fn config_files_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let c = tiny(dir.path());
    std::fs::write(&path, c.to_json()).unwrap();
    assert_eq!(ExperimentConfig::load(&path).unwrap(), c);

    let resolved = resolve_config(Some(&path), false, Some(99), Some(Path::new("/tmp/x"))).unwrap();
    assert_eq!((resolved.master_seed, resolved.output_dir.as_path()), (99, Path::new("/tmp/x")));
    let desk = resolve_config(Some(&path), true, None, None).unwrap();
    assert_eq!((desk.dimensions.clone(), desk.budgets.clone()), (vec![2, 5], vec![100, 250, 1000, 2500]));

    std::fs::write(&path, c.to_json().replace("\"schema_version\": 1", "\"schema_version\": 2")).unwrap();
    assert!(matches!(ExperimentConfig::load(&path), Err(Error::InvalidConfig(_))));
    std::fs::write(&path, c.to_json().replace("\"master_seed\"", "\"unknown\": 1, \"master_seed\"")).unwrap();
    assert!(ExperimentConfig::load(&path).is_err());
    let mut bad = c.clone();
    bad.instance_ids = vec![1, 2];
    assert!(Workbench::new(bad).is_err());
    let mut bad = c;
    bad.budgets = vec![100, 100];
    assert!(bad.validate().is_err());
}

#[test]
fn cli_runs_stages_and_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(&config, tiny(&dir.path().join("ignored")).to_json()).unwrap();
    let out = dir.path().join("out");
    let bin = env!("CARGO_BIN_EXE_pias");

    let ok = Command::new(bin)
        .args(["suite", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "5", "--threads", "2"])
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("suite: Ran"));
    assert!(out.join("suite/manifest.csv").exists());
    assert_eq!(ExperimentConfig::load(&out.join("config.json")).unwrap().master_seed, 5);

    let missing = Command::new(bin)
        .args(["train", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!missing.status.success());
    let err: serde_json::Value = serde_json::from_slice(missing.stderr.split(|b| *b == b'\n').rev().find(|l| !l.is_empty()).unwrap()).unwrap();
    assert_eq!(err["error"], "missing_upstream");

    let bad = Command::new(bin).args(["suite", "--config", "/nonexistent.json"]).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("\"error\""));
}

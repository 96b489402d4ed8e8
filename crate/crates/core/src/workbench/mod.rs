//! Configuration, cached stages and the end-to-end pipeline.
//!
//! Artifacts under the output directory:
//!
//! | stage | files |
//! |---|---|
//! | (every run) | `config.json` (frozen config) |
//! | suite | `suite/manifest.csv` |
//! | features | `features/features.csv` |
//! | collect | `collect/trajectories.csv`, `collect/performance.csv`, `collect/labels.csv`, `collect/portfolio.json` |
//! | train | `train/selectors/d<dim>_b<budget>/<learner>_<approach>/`, `train/cv_report.csv`, `train/cv_selections.csv` |
//! | evaluate | `evaluate/losses.csv`, `evaluate/report/` |
//!
//! Random streams hang off the master seed as `features/<spec>`,
//! `collect/<solver>/<spec>/rep<r>`, `labels/<spec>/b<budget>` and
//! `train/d<dim>_b<budget>/<learner>/<approach>/<model>`.

pub mod cache;
pub mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde_json::json;

use crate::ela::{instance_features, read_feature_matrix, write_feature_matrix};
use crate::error::{Error, Result};
use crate::evaluation::{emit_reports, evaluate_selector, EvaluationReport};
use crate::fmt::sci;
use crate::learners::cv::{write_cv_report, CV_REPORT_HEADER};
use crate::learners::LearnerKind;
use crate::perfdata::{filter_portfolio, BestLabelTable, PerformanceTable, PortfolioEntry};
use crate::problems::{instantiate, write_manifest, ProblemInstance, ProblemSpec};
use crate::sampling::RngStream;
use crate::selection::{train_selector, Approach, CellData};
use crate::solvers::{run_grid, write_trajectories};

pub use config::{ElaSettings, ExperimentConfig, PerfSettings, CONFIG_SCHEMA_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Suite,
    Features,
    Collect,
    Train,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Suite, Stage::Features, Stage::Collect, Stage::Train, Stage::Evaluate];

    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Suite => "suite",
            Stage::Features => "features",
            Stage::Collect => "collect",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Cached,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageOutcome {
    pub stage: Stage,
    pub status: StageStatus,
}

/// Builds the effective config: file (or full-scale defaults), then the
/// desk-scale preset, then the seed and output overrides.
pub fn resolve_config(path: Option<&Path>, desk_scale: bool, seed: Option<u64>, out: Option<&Path>) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if desk_scale {
        config.apply_desk_scale();
    }
    if let Some(s) = seed {
        config.master_seed = s;
    }
    if let Some(o) = out {
        config.output_dir = o.to_owned();
    }
    config.validate()?;
    Ok(config)
}

/// Runs `f` on a pool of `threads` workers (the global pool when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidConfig("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub struct Workbench {
    config: ExperimentConfig,
    out: PathBuf,
    master: RngStream,
}

impl Workbench {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        Ok(Workbench { out: config.output_dir.clone(), master: RngStream::new(config.master_seed), config })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    pub fn freeze_config(&self) -> Result<()> {
        crate::fmt::write_file(&self.path("config.json"), self.config.to_json().as_bytes())
    }

    fn specs(&self) -> Vec<ProblemSpec> {
        let c = &self.config;
        let mut specs = Vec::new();
        for &d in &c.dimensions {
            for &f in &c.function_ids {
                for &i in &c.instance_ids {
                    specs.push(ProblemSpec::new(f, i, d));
                }
            }
        }
        specs.sort();
        specs
    }

    fn instances(&self) -> Result<Vec<ProblemInstance>> {
        self.specs().into_iter().map(instantiate).collect()
    }

    fn subtree(&self, stage: Stage) -> serde_json::Value {
        let c = &self.config;
        let suite = json!({
            "dimensions": c.dimensions,
            "function_ids": c.function_ids,
            "instance_ids": c.instance_ids,
        });
        match stage {
            Stage::Suite => suite,
            Stage::Features => json!({ "suite": suite, "master_seed": c.master_seed, "ela": c.ela }),
            Stage::Collect => json!({
                "suite": suite,
                "master_seed": c.master_seed,
                "budgets": c.budgets,
                "solvers": c.solvers,
                "perfdata": c.perfdata,
            }),
            Stage::Train => json!({
                "master_seed": c.master_seed,
                "learners": c.learners,
                "approaches": c.approaches,
                "grids": c.learners.iter().map(|l| (l.as_str(), &c.grids[l])).collect::<BTreeMap<_, _>>(),
            }),
            Stage::Evaluate => json!({ "learners": c.learners, "approaches": c.approaches }),
        }
    }

    fn inputs(&self, stage: Stage) -> Vec<(Stage, PathBuf)> {
        let p = |s: Stage, rel: &str| (s, self.path(rel));
        match stage {
            Stage::Suite => vec![],
            Stage::Features | Stage::Collect => vec![p(Stage::Suite, "suite/manifest.csv")],
            Stage::Train => vec![
                p(Stage::Features, "features/features.csv"),
                p(Stage::Collect, "collect/performance.csv"),
                p(Stage::Collect, "collect/labels.csv"),
                p(Stage::Collect, "collect/portfolio.json"),
            ],
            Stage::Evaluate => vec![
                p(Stage::Collect, "collect/performance.csv"),
                p(Stage::Collect, "collect/portfolio.json"),
                p(Stage::Train, "train/cv_selections.csv"),
            ],
        }
    }

    /// Runs one stage unless its cache stamp is fresh.
    pub fn run_stage(&self, stage: Stage) -> Result<StageOutcome> {
        self.freeze_config()?;
        let inputs = self.inputs(stage);
        for (upstream, path) in &inputs {
            if !path.exists() {
                return Err(Error::MissingUpstream { stage: upstream.as_str(), path: path.clone() });
            }
        }
        let input_paths: Vec<PathBuf> = inputs.into_iter().map(|(_, p)| p).collect();
        let key = cache::stage_key(&self.out, stage.as_str(), &self.subtree(stage), &input_paths)?;
        if cache::is_fresh(&self.out, stage.as_str(), &key) {
            info!("stage {}: cached", stage.as_str());
            return Ok(StageOutcome { stage, status: StageStatus::Cached });
        }
        info!("stage {}: running", stage.as_str());
        let outputs = match stage {
            Stage::Suite => self.suite()?,
            Stage::Features => self.features()?,
            Stage::Collect => self.collect()?,
            Stage::Train => self.train()?,
            Stage::Evaluate => self.evaluate()?,
        };
        cache::write_stamp(&self.out, stage.as_str(), &key, &outputs)?;
        Ok(StageOutcome { stage, status: StageStatus::Ran })
    }

    pub fn pipeline(&self) -> Result<Vec<StageOutcome>> {
        Stage::ALL.iter().map(|s| self.run_stage(*s)).collect()
    }

    fn suite(&self) -> Result<Vec<PathBuf>> {
        let path = self.path("suite/manifest.csv");
        write_manifest(&path, &self.instances()?)?;
        Ok(vec![path])
    }

    fn features(&self) -> Result<Vec<PathBuf>> {
        let ela = &self.config.ela;
        let root = self.master.derive("features");
        let rows = self
            .instances()?
            .par_iter()
            .map(|inst| {
                let stream = root.derive(inst.spec.to_string());
                Ok((inst.spec, instance_features(inst, ela.points(inst.spec.dimension), ela.repetitions, &stream)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let path = self.path("features/features.csv");
        write_feature_matrix(&path, &rows)?;
        Ok(vec![path])
    }

    fn collect(&self) -> Result<Vec<PathBuf>> {
        let c = &self.config;
        let instances = self.instances()?;
        let runs = run_grid(&c.solvers, &instances, c.perfdata.repetitions, &c.budgets, &self.master.derive("collect"))?;
        let solvers = c.solver_names()?;
        let table = PerformanceTable::from_trajectories(&runs, &self.specs(), &solvers, &c.budgets, c.perfdata.cap)?;
        let labels = BestLabelTable::from_performance(&table, &solvers, &self.master.derive("labels"))?;
        let mut portfolio = Vec::new();
        for &d in &c.dimensions {
            for &b in &c.budgets {
                portfolio.push(filter_portfolio(&labels, d, b, c.perfdata.threshold, &solvers)?);
            }
        }
        let paths = [
            self.path("collect/trajectories.csv"),
            self.path("collect/performance.csv"),
            self.path("collect/labels.csv"),
            self.path("collect/portfolio.json"),
        ];
        write_trajectories(&paths[0], &runs)?;
        table.write_csv(&paths[1])?;
        labels.write_csv(&paths[2])?;
        let text = serde_json::to_string_pretty(&portfolio).expect("portfolio serializes") + "\n";
        crate::fmt::write_file(&paths[3], text.as_bytes())?;
        Ok(paths.to_vec())
    }

    fn train(&self) -> Result<Vec<PathBuf>> {
        let c = &self.config;
        let features = read_feature_matrix(&self.path("features/features.csv"))?;
        let table = PerformanceTable::read_csv(&self.path("collect/performance.csv"))?;
        let labels = BestLabelTable::read_csv(&self.path("collect/labels.csv"))?;
        let portfolio = read_portfolio(&self.path("collect/portfolio.json"))?;
        let label_root = self.master.derive("labels");
        let cells = portfolio
            .iter()
            .map(|entry| CellData::build(&features, &table, &labels, entry, &label_root))
            .collect::<Result<Vec<_>>>()?;
        let mut jobs = Vec::new();
        for (ci, cell) in cells.iter().enumerate() {
            if cell.portfolio.len() < 2 {
                warn!(
                    "d={} budget={}: portfolio has one solver ({}); selectors reduce to it",
                    cell.dimension, cell.budget, cell.portfolio[0]
                );
            }
            for &l in &c.learners {
                for &a in &c.approaches {
                    jobs.push((ci, l, a));
                }
            }
        }
        let grids: BTreeMap<LearnerKind, _> =
            c.learners.iter().map(|l| Ok((*l, c.grids[l].expand()?))).collect::<Result<_>>()?;
        let selectors_dir = self.path("train/selectors");
        if selectors_dir.exists() {
            std::fs::remove_dir_all(&selectors_dir).map_err(|e| Error::io(&selectors_dir, e))?;
        }
        let results = jobs
            .par_iter()
            .map(|&(ci, learner, approach)| {
                let cell = &cells[ci];
                let tag = format!("d{}_b{}", cell.dimension, cell.budget);
                if cell.portfolio.len() < 2 {
                    return Ok((Vec::new(), vec![0; cell.len()], Vec::new()));
                }
                let stream = self.master.derive("train").derive(&tag).derive(learner.as_str());
                let trained = train_selector(approach, cell, learner, &grids[&learner], &stream)?;
                let dir = selectors_dir.join(&tag).join(format!("{learner}_{approach}"));
                trained.model.save(&dir)?;
                let mut files: Vec<PathBuf> = vec![dir.join("manifest.json")];
                files.extend(trained.model.model_names().iter().map(|n| dir.join(format!("model_{n}.json"))));
                let mut report = Vec::new();
                for (name, cv) in &trained.cv {
                    write_cv_report(&mut report, &format!("{tag}/{learner}/{approach}/{name}"), cv);
                }
                Ok((report, trained.cv_selection, files))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut report = format!("{CV_REPORT_HEADER}\n").into_bytes();
        let mut selections = b"dimension,budget,learner,approach,function_id,instance_id,selected\n".to_vec();
        let mut outputs = Vec::new();
        for ((ci, learner, approach), (rows, chosen, files)) in jobs.iter().zip(results) {
            let cell = &cells[*ci];
            report.extend(rows);
            for (spec, s) in cell.specs.iter().zip(&chosen) {
                writeln!(
                    selections,
                    "{},{},{learner},{approach},{},{},{}",
                    cell.dimension, cell.budget, spec.function_id, spec.instance_id, cell.portfolio[*s]
                )
                .unwrap();
            }
            outputs.extend(files);
        }
        let report_path = self.path("train/cv_report.csv");
        let selection_path = self.path("train/cv_selections.csv");
        crate::fmt::write_file(&report_path, &report)?;
        crate::fmt::write_file(&selection_path, &selections)?;
        outputs.push(report_path);
        outputs.push(selection_path);
        Ok(outputs)
    }

    fn evaluate(&self) -> Result<Vec<PathBuf>> {
        let c = &self.config;
        let table = PerformanceTable::read_csv(&self.path("collect/performance.csv"))?;
        let portfolio = read_portfolio(&self.path("collect/portfolio.json"))?;
        let selections = read_cv_selections(&self.path("train/cv_selections.csv"))?;
        let mut reports: Vec<EvaluationReport> = Vec::new();
        for entry in &portfolio {
            for &l in &c.learners {
                for &a in &c.approaches {
                    let rows = selections.get(&(entry.dimension, entry.budget, l, a)).ok_or_else(|| {
                        Error::Evaluation(format!(
                            "no selections for d={} budget={} {l}/{a}",
                            entry.dimension, entry.budget
                        ))
                    })?;
                    reports.push(evaluate_selector(a, l, entry.dimension, entry.budget, &entry.solvers, rows, &table)?);
                }
            }
        }
        let mut losses = b"dimension,budget,learner,approach,function_id,instance_id,selected,loss,hit\n".to_vec();
        for r in &reports {
            for i in &r.instances {
                writeln!(
                    losses,
                    "{},{},{},{},{},{},{},{},{}",
                    r.dimension,
                    r.budget,
                    r.learner,
                    r.approach,
                    i.spec.function_id,
                    i.spec.instance_id,
                    i.selected,
                    sci(i.loss),
                    i.hit
                )
                .unwrap();
            }
        }
        let losses_path = self.path("evaluate/losses.csv");
        crate::fmt::write_file(&losses_path, &losses)?;
        let mut outputs = emit_reports(&self.path("evaluate/report"), &reports, &c.learners, &c.approaches)?;
        outputs.push(losses_path);
        Ok(outputs)
    }
}

pub fn read_portfolio(path: &Path) -> Result<Vec<PortfolioEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

pub type SelectionKey = (usize, u64, LearnerKind, Approach);

/// Out-of-fold selections grouped by cell, learner and approach.
pub fn read_cv_selections(path: &Path) -> Result<BTreeMap<SelectionKey, Vec<(ProblemSpec, crate::solvers::SolverName)>>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let bad = |detail: String| Error::SchemaMismatch { path: path.to_owned(), detail };
    let mut out: BTreeMap<SelectionKey, Vec<_>> = BTreeMap::new();
    for record in reader.records() {
        let r = record.map_err(|e| Error::csv(path, e))?;
        if r.len() != 7 {
            return Err(bad(format!("expected 7 columns, found {}", r.len())));
        }
        let int = |i: usize| r[i].parse::<u64>().map_err(|e| bad(format!("column {i}: {e}")));
        let dim = int(0)? as usize;
        let key = (dim, int(1)?, r[2].parse()?, r[3].parse()?);
        let spec = ProblemSpec::new(int(4)? as u32, int(5)? as u32, dim);
        out.entry(key).or_default().push((spec, r[6].parse()?));
    }
    Ok(out)
}

pub fn cmd_suite(config: &ExperimentConfig) -> Result<StageOutcome> {
    Workbench::new(config.clone())?.run_stage(Stage::Suite)
}

pub fn cmd_features(config: &ExperimentConfig) -> Result<StageOutcome> {
    Workbench::new(config.clone())?.run_stage(Stage::Features)
}

pub fn cmd_collect(config: &ExperimentConfig) -> Result<StageOutcome> {
    Workbench::new(config.clone())?.run_stage(Stage::Collect)
}

pub fn cmd_train(config: &ExperimentConfig) -> Result<StageOutcome> {
    Workbench::new(config.clone())?.run_stage(Stage::Train)
}

pub fn cmd_evaluate(config: &ExperimentConfig) -> Result<StageOutcome> {
    Workbench::new(config.clone())?.run_stage(Stage::Evaluate)
}

pub fn cmd_pipeline(config: &ExperimentConfig) -> Result<Vec<StageOutcome>> {
    Workbench::new(config.clone())?.pipeline()
}

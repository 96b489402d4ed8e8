//! The three selection approaches: per-solver regression, multi-class
//! classification, and a pairwise-classification tournament.
//!
//! One selector is trained per (dimension, budget) cell on the filtered
//! portfolio. Portfolio order is fixed when the cell is built and decides
//! every deterministic tie: the regression argmin, and the last step of the
//! pairwise cascade.
//!
//! Pairwise training rows for solvers `(i, j)` are labeled by the better
//! log-precision. When the two tie, the row takes the cell's tie-broken best
//! label if that label is `i` or `j`, and is dropped otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ela::{FeatureVector, FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::learners::{nested_logo_cv_query, tune_and_fit, CvResult, Dataset, LearnerKind, Query, Targets, TrainedModel, TreeParams};
use crate::perfdata::{label_best, label_stream, BestLabelTable, PerformanceTable, PortfolioEntry};
use crate::problems::ProblemSpec;
use crate::sampling::RngStream;
use crate::solvers::SolverName;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Regression,
    Classification,
    Pairwise,
}

impl Approach {
    pub const ALL: [Approach; 3] = [Approach::Regression, Approach::Classification, Approach::Pairwise];

    pub fn as_str(&self) -> &'static str {
        match self {
            Approach::Regression => "regression",
            Approach::Classification => "classification",
            Approach::Pairwise => "pairwise",
        }
    }

    /// Number of models for a portfolio of `k` solvers.
    pub fn model_count(&self, k: usize) -> usize {
        match self {
            Approach::Regression => k,
            Approach::Classification => 1,
            Approach::Pairwise => k * k.saturating_sub(1) / 2,
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Approach::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown approach `{s}`")))
    }
}

/// Row key whose string order matches [`ProblemSpec`] order.
pub fn row_key(spec: &ProblemSpec) -> String {
    format!("f{:02}_i{:04}_d{:03}", spec.function_id, spec.instance_id, spec.dimension)
}

/// Everything a selector sees for one (dimension, budget) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellData {
    pub dimension: usize,
    pub budget: u64,
    pub portfolio: Vec<SolverName>,
    /// Sorted instance keys; all per-row vectors follow this order.
    pub specs: Vec<ProblemSpec>,
    /// Raw features, NaN where not available.
    pub features: Vec<Vec<f64>>,
    pub feature_names: Vec<String>,
    /// `performance[row][s]`: log-precision of `portfolio[s]`.
    pub performance: Vec<Vec<f64>>,
    /// Index into `portfolio` of each row's tie-broken best solver.
    pub labels: Vec<usize>,
}

impl CellData {
    /// Joins features, performance and labels for a portfolio cell. A row
    /// whose global best solver was filtered out is relabeled by a fresh
    /// tie-broken argmin over the portfolio (stream `<row>/b<budget>/portfolio`).
    pub fn build(
        features: &BTreeMap<ProblemSpec, FeatureVector>,
        performance: &PerformanceTable,
        labels: &BestLabelTable,
        entry: &PortfolioEntry,
        label_root: &RngStream,
    ) -> Result<Self> {
        let portfolio = entry.solvers.clone();
        let specs = performance.specs_in_dimension(entry.dimension);
        if specs.is_empty() {
            return Err(Error::Selector(format!("no instances in dimension {}", entry.dimension)));
        }
        let mut rows = Vec::with_capacity(specs.len());
        let mut perf = Vec::with_capacity(specs.len());
        let mut labs = Vec::with_capacity(specs.len());
        for spec in &specs {
            let fv = features
                .get(spec)
                .ok_or_else(|| Error::Selector(format!("no feature row for {spec}")))?;
            rows.push(fv.to_dense());
            let group = performance
                .row_group(spec, entry.budget, &portfolio)
                .map_err(|e| Error::Selector(format!("missing rows for a solver: {e}")))?;
            perf.push(group.iter().map(|(_, v)| *v).collect::<Vec<f64>>());
            let global = labels
                .get(spec, entry.budget)
                .ok_or_else(|| Error::Selector(format!("no best label for {spec} at budget {}", entry.budget)))?;
            let best = match portfolio.iter().position(|s| *s == global.best_solver) {
                Some(i) => i,
                None => {
                    let stream = label_stream(label_root, spec, entry.budget).derive("portfolio");
                    let relabeled = label_best(&group, &stream)?;
                    portfolio.iter().position(|s| *s == relabeled.best_solver).expect("label from portfolio")
                }
            };
            labs.push(best);
        }
        Ok(CellData {
            dimension: entry.dimension,
            budget: entry.budget,
            portfolio,
            specs,
            features: rows,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            performance: perf,
            labels: labs,
        })
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn keys(&self) -> Vec<String> {
        self.specs.iter().map(row_key).collect()
    }

    pub fn groups(&self) -> Vec<u32> {
        self.specs.iter().map(|s| s.instance_id).collect()
    }

    pub fn query(&self) -> Query {
        Query { keys: self.keys(), features: self.features.clone(), groups: self.groups() }
    }

    fn dataset(&self, rows: &[usize], targets: Targets) -> Result<Dataset> {
        let keys = self.keys();
        let groups = self.groups();
        Dataset::new(
            rows.iter().map(|&i| keys[i].clone()).collect(),
            rows.iter().map(|&i| self.features[i].clone()).collect(),
            targets,
            rows.iter().map(|&i| groups[i]).collect(),
            self.feature_names.clone(),
        )
    }

    pub fn regression_dataset(&self, solver: usize) -> Result<Dataset> {
        let rows: Vec<usize> = (0..self.len()).collect();
        self.dataset(&rows, Targets::Real(self.performance.iter().map(|p| p[solver]).collect()))
    }

    pub fn classification_dataset(&self) -> Result<Dataset> {
        let rows: Vec<usize> = (0..self.len()).collect();
        self.dataset(&rows, Targets::Labels { values: self.labels.clone(), n_classes: self.portfolio.len() })
    }

    /// Label 0 when `i` wins, 1 when `j` wins; ties without an `i`/`j`
    /// best label are dropped.
    pub fn pair_label(&self, row: usize, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.performance[row][i], self.performance[row][j]);
        if a < b {
            Some(0)
        } else if b < a {
            Some(1)
        } else if self.labels[row] == i {
            Some(0)
        } else if self.labels[row] == j {
            Some(1)
        } else {
            None
        }
    }

    pub fn pairwise_dataset(&self, i: usize, j: usize) -> Result<Dataset> {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for r in 0..self.len() {
            if let Some(l) = self.pair_label(r, i, j) {
                rows.push(r);
                labels.push(l);
            }
        }
        self.dataset(&rows, Targets::Labels { values: labels, n_classes: 2 })
    }
}

/// Unordered pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect()
}

/// Argmin of predicted log-precision; earliest index on ties.
pub fn select_regression(predictions: &[f64]) -> usize {
    let mut best = 0;
    for (i, p) in predictions.iter().enumerate() {
        if *p < predictions[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairwiseOutcome {
    pub selected: usize,
    pub wins: Vec<usize>,
}

/// Tournament over `(pair, winner)` results: most wins; ties recount wins
/// among the tied solvers' head-to-head results, then earliest index.
pub fn select_pairwise(k: usize, results: &[((usize, usize), usize)]) -> PairwiseOutcome {
    let mut wins = vec![0usize; k];
    for (_, w) in results {
        wins[*w] += 1;
    }
    let top = wins.iter().copied().max().unwrap_or(0);
    let tied: Vec<usize> = (0..k).filter(|&s| wins[s] == top).collect();
    let selected = if tied.len() == 1 {
        tied[0]
    } else {
        let mut recount = vec![0usize; k];
        for ((i, j), w) in results {
            if tied.contains(i) && tied.contains(j) {
                recount[*w] += 1;
            }
        }
        let best = tied.iter().map(|&s| recount[s]).max().unwrap_or(0);
        *tied.iter().find(|&&s| recount[s] == best).expect("non-empty tied set")
    };
    PairwiseOutcome { selected, wins }
}

/// Per-row selection from the true performance values.
pub fn oracle_selection(approach: Approach, data: &CellData, row: usize) -> usize {
    match approach {
        Approach::Regression => select_regression(&data.performance[row]),
        Approach::Classification => data.labels[row],
        Approach::Pairwise => {
            let results: Vec<_> = pairs(data.portfolio.len())
                .into_iter()
                .map(|(i, j)| ((i, j), if data.pair_label(row, i, j) == Some(1) { j } else { i }))
                .collect();
            select_pairwise(data.portfolio.len(), &results).selected
        }
    }
}

/// A deployable selector: models refit on the whole cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectorModel {
    pub approach: Approach,
    pub learner: LearnerKind,
    pub dimension: usize,
    pub budget: u64,
    pub portfolio: Vec<SolverName>,
    /// Regression: one per solver; classification: one; pairwise: one per
    /// entry of [`pairs`].
    pub models: Vec<TrainedModel>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    approach: Approach,
    learner: LearnerKind,
    dimension: usize,
    budget: u64,
    portfolio: Vec<SolverName>,
    models: Vec<ManifestModel>,
}

#[derive(Serialize, Deserialize)]
struct ManifestModel {
    name: String,
    file: String,
}

impl SelectorModel {
    fn combine(&self, per_model: &[f64]) -> usize {
        match self.approach {
            Approach::Regression => select_regression(per_model),
            Approach::Classification => per_model[0] as usize,
            Approach::Pairwise => self.tournament(per_model).selected,
        }
    }

    fn tournament(&self, per_model: &[f64]) -> PairwiseOutcome {
        let results: Vec<_> = pairs(self.portfolio.len())
            .into_iter()
            .zip(per_model)
            .map(|((i, j), c)| ((i, j), if *c as usize == 1 { j } else { i }))
            .collect();
        select_pairwise(self.portfolio.len(), &results)
    }

    pub fn select_index(&self, row: &[f64]) -> usize {
        let per_model: Vec<f64> = self.models.iter().map(|m| m.predict(row)).collect();
        self.combine(&per_model)
    }

    pub fn select(&self, row: &[f64]) -> SolverName {
        self.portfolio[self.select_index(row)]
    }

    /// Win counts of the pairwise tournament for one row.
    pub fn pairwise_wins(&self, row: &[f64]) -> Option<Vec<usize>> {
        (self.approach == Approach::Pairwise).then(|| {
            let per_model: Vec<f64> = self.models.iter().map(|m| m.predict(row)).collect();
            self.tournament(&per_model).wins
        })
    }

    pub fn model_names(&self) -> Vec<String> {
        model_names(self.approach, &self.portfolio)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let names = self.model_names();
        let mut entries = Vec::new();
        for (name, model) in names.iter().zip(&self.models) {
            let file = format!("model_{name}.json");
            model.save(&dir.join(&file))?;
            entries.push(ManifestModel { name: name.clone(), file });
        }
        let manifest = Manifest {
            format_version: BUNDLE_FORMAT_VERSION,
            approach: self.approach,
            learner: self.learner,
            dimension: self.dimension,
            budget: self.budget,
            portfolio: self.portfolio.clone(),
            models: entries,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        crate::fmt::write_file(&dir.join("manifest.json"), text.as_bytes())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
        if manifest.format_version != BUNDLE_FORMAT_VERSION {
            return Err(Error::SchemaMismatch {
                path,
                detail: format!("bundle format_version {}", manifest.format_version),
            });
        }
        if manifest.models.len() != manifest.approach.model_count(manifest.portfolio.len()) {
            return Err(Error::SchemaMismatch { path, detail: "model count does not match approach".into() });
        }
        let models = manifest
            .models
            .iter()
            .map(|m| TrainedModel::load(&dir.join(&m.file)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SelectorModel {
            approach: manifest.approach,
            learner: manifest.learner,
            dimension: manifest.dimension,
            budget: manifest.budget,
            portfolio: manifest.portfolio,
            models,
        })
    }
}

pub fn model_names(approach: Approach, portfolio: &[SolverName]) -> Vec<String> {
    match approach {
        Approach::Regression => portfolio.iter().map(|s| s.to_string()).collect(),
        Approach::Classification => vec!["classifier".into()],
        Approach::Pairwise => pairs(portfolio.len())
            .into_iter()
            .map(|(i, j)| format!("{}__{}", portfolio[i], portfolio[j]))
            .collect(),
    }
}

/// Selector plus the out-of-fold evidence used for evaluation.
#[derive(Clone, Debug)]
pub struct TrainedSelector {
    pub model: SelectorModel,
    /// Nested-CV result per model, named as in [`model_names`].
    pub cv: Vec<(String, CvResult)>,
    /// Portfolio index selected for each row of the cell from outer-fold
    /// predictions only.
    pub cv_selection: Vec<usize>,
}

/// Trains every model of `approach` under nested LOGO-CV and refits each
/// on the full cell for deployment.
pub fn train_selector(
    approach: Approach,
    data: &CellData,
    learner: LearnerKind,
    grid: &[TreeParams],
    stream: &RngStream,
) -> Result<TrainedSelector> {
    let k = data.portfolio.len();
    if k < 2 {
        return Err(Error::Selector(format!("portfolio of {k} solver(s); selection needs at least 2")));
    }
    let names = model_names(approach, &data.portfolio);
    let datasets: Vec<Dataset> = match approach {
        Approach::Regression => (0..k).map(|s| data.regression_dataset(s)).collect::<Result<_>>()?,
        Approach::Classification => vec![data.classification_dataset()?],
        Approach::Pairwise => pairs(k).into_iter().map(|(i, j)| data.pairwise_dataset(i, j)).collect::<Result<_>>()?,
    };
    let query = data.query();
    let root = stream.derive(approach.as_str());
    let fitted = names
        .par_iter()
        .zip(datasets.par_iter())
        .map(|(name, ds)| {
            let s = root.derive(name);
            let cv = nested_logo_cv_query(ds, &query, learner, grid, &s.derive("cv"))?;
            let model = tune_and_fit(ds, learner, grid, &s)?;
            Ok((cv, model))
        })
        .collect::<Result<Vec<_>>>()?;
    let (cvs, models): (Vec<CvResult>, Vec<TrainedModel>) = fitted.into_iter().unzip();
    let model = SelectorModel {
        approach,
        learner,
        dimension: data.dimension,
        budget: data.budget,
        portfolio: data.portfolio.clone(),
        models,
    };
    let cv_selection = (0..data.len())
        .map(|r| {
            let per_model: Vec<f64> = cvs.iter().map(|cv| cv.predictions[r]).collect();
            model.combine(&per_model)
        })
        .collect();
    Ok(TrainedSelector { model, cv: names.into_iter().zip(cvs).collect(), cv_selection })
}

/// Selection output: `function_id,instance_id,dimension,budget,selected`.
pub fn write_selections(path: &Path, budget: u64, rows: &[(ProblemSpec, SolverName)]) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "function_id,instance_id,dimension,budget,selected").unwrap();
    for (spec, solver) in rows {
        writeln!(out, "{},{},{},{budget},{solver}", spec.function_id, spec.instance_id, spec.dimension).unwrap();
    }
    crate::fmt::write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_argmin_and_ties() {
        assert_eq!(select_regression(&[-8.0, -2.0, -5.0]), 0);
        assert_eq!(select_regression(&[1.0, 1.0, 1.0]), 0);
        assert_eq!(select_regression(&[3.0, -1.0, -1.0]), 1);
        assert_eq!(select_regression(&[3.0 + 7.5, -1.0 + 7.5, 2.0 + 7.5]), 1);
    }

    #[test]
    fn pairwise_cases() {
        // A beats B and C, B beats C
        let r = select_pairwise(3, &[((0, 1), 0), ((0, 2), 0), ((1, 2), 1)]);
        assert_eq!(r, PairwiseOutcome { selected: 0, wins: vec![2, 1, 0] });
        // cycle A>B, B>C, C>A
        let r = select_pairwise(3, &[((0, 1), 0), ((1, 2), 1), ((0, 2), 2)]);
        assert_eq!(r.selected, 0);
        assert_eq!(r.wins, vec![1, 1, 1]);
        // two tied at the top, head-to-head decides
        let r = select_pairwise(4, &[((0, 1), 1), ((0, 2), 0), ((0, 3), 0), ((1, 2), 2), ((1, 3), 1), ((2, 3), 3)]);
        assert_eq!(r.wins, vec![2, 2, 1, 1]);
        assert_eq!(r.selected, 1);
        assert_eq!(select_pairwise(2, &[((0, 1), 1)]).selected, 1);
    }

    #[test]
    fn pair_enumeration() {
        assert_eq!(pairs(5).len(), 10);
        assert_eq!(pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(Approach::Pairwise.model_count(6), 15);
    }

    #[test]
    fn row_keys_sort_like_specs() {
        let mut specs = vec![ProblemSpec::new(10, 1, 5), ProblemSpec::new(2, 10, 5), ProblemSpec::new(2, 9, 5)];
        let mut keys: Vec<String> = specs.iter().map(row_key).collect();
        specs.sort();
        keys.sort();
        assert_eq!(keys, specs.iter().map(row_key).collect::<Vec<_>>());
    }
}

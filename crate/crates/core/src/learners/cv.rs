//! Nested leave-one-group-out cross-validation with grid search.
//!
//! The outer loop holds out one group. For every grid point the inner loop
//! runs leave-one-group-out over the remaining groups; the point with the
//! best mean inner holdout score (first on ties) is refit on all outer
//! training rows and predicts the held-out group. Imputation medians are
//! recomputed inside every split that fits a model.
//!
//! Random streams are derived as `outer{g}/grid{k}/inner{h}` for tuning fits
//! and `outer{g}/refit` for the fold model.

use std::io::Write;

use rayon::prelude::*;

use super::model::Provenance;
use super::{column_medians, f1_macro, fit_rows, r2, Dataset, LearnerKind, Targets, Task, TrainedModel, TreeParams};
use crate::error::{Error, Result};
use crate::fmt::sci;
use crate::sampling::RngStream;

/// Rows to predict, possibly a superset of the labeled rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub keys: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub groups: Vec<u32>,
}

impl Query {
    pub fn from_dataset(d: &Dataset) -> Self {
        Query { keys: d.keys().to_vec(), features: d.features().to_vec(), groups: d.groups().to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerSplit {
    pub group: u32,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub medians: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OuterFold {
    pub group: u32,
    /// Labeled rows used for tuning and the refit.
    pub train_rows: Vec<usize>,
    /// Labeled rows of the held-out group.
    pub test_rows: Vec<usize>,
    /// Query rows of the held-out group.
    pub query_rows: Vec<usize>,
    pub medians: Vec<f64>,
    pub inner: Vec<InnerSplit>,
    /// Mean inner score per grid point; `None` when the grid has one point.
    pub grid_scores: Vec<Option<f64>>,
    pub chosen: usize,
    pub chosen_params: TreeParams,
    pub outer_score: Option<f64>,
}

impl OuterFold {
    pub fn inner_score(&self) -> Option<f64> {
        self.grid_scores[self.chosen]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvResult {
    pub kind: LearnerKind,
    pub task: Task,
    pub folds: Vec<OuterFold>,
    /// Out-of-fold prediction for every query row, in query order.
    pub predictions: Vec<f64>,
}

/// Higher is better: R² for regression, macro-F1 for classification.
pub fn score_rows(model: &TrainedModel, dataset: &Dataset, rows: &[usize]) -> f64 {
    match dataset.targets() {
        Targets::Real(y) => {
            let truth: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
            let pred: Vec<f64> = rows.iter().map(|&i| model.predict(&dataset.features()[i])).collect();
            r2(&truth, &pred)
        }
        Targets::Labels { values, .. } => {
            let truth: Vec<usize> = rows.iter().map(|&i| values[i]).collect();
            let pred: Vec<usize> = rows.iter().map(|&i| model.predict_class(&dataset.features()[i])).collect();
            f1_macro(&truth, &pred)
        }
    }
}

fn rows_where(groups: &[u32], keep: impl Fn(u32) -> bool) -> Vec<usize> {
    groups.iter().enumerate().filter(|(_, g)| keep(**g)).map(|(i, _)| i).collect()
}

fn first_best(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = k;
        }
    }
    best
}

/// Mean LOGO holdout score of each grid point over `groups`, excluding
/// rows whose group is `excluded`.
fn logo_scores(
    dataset: &Dataset,
    kind: LearnerKind,
    grid: &[TreeParams],
    groups: &[u32],
    excluded: Option<u32>,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    let units: Vec<(usize, u32)> = (0..grid.len()).flat_map(|k| groups.iter().map(move |&h| (k, h))).collect();
    let scores = units
        .par_iter()
        .map(|&(k, h)| {
            let train = rows_where(dataset.groups(), |g| g != h && Some(g) != excluded);
            let test = rows_where(dataset.groups(), |g| g == h);
            let s = stream.derive(format!("grid{k}")).derive(format!("inner{h}"));
            let model = fit_rows(kind, dataset, &train, &grid[k], &s)?;
            Ok(score_rows(&model, dataset, &test))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(scores.chunks(groups.len()).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect())
}

pub fn nested_logo_cv(dataset: &Dataset, kind: LearnerKind, grid: &[TreeParams], stream: &RngStream) -> Result<CvResult> {
    nested_logo_cv_query(dataset, &Query::from_dataset(dataset), kind, grid, stream)
}

/// Nested CV predicting `query` rows out-of-fold. Every query group must
/// have labeled rows in `dataset`.
pub fn nested_logo_cv_query(
    dataset: &Dataset,
    query: &Query,
    kind: LearnerKind,
    grid: &[TreeParams],
    stream: &RngStream,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("hyperparameter grid is empty".into()));
    }
    let groups = dataset.distinct_groups();
    if groups.len() < 3 {
        return Err(Error::InvalidDataset(format!(
            "nested leave-one-group-out needs at least 3 groups, found {}",
            groups.len()
        )));
    }
    if let Some(g) = query.groups.iter().find(|g| !groups.contains(g)) {
        return Err(Error::InvalidDataset(format!("group {g} has zero labeled rows")));
    }
    if query.features.len() != query.groups.len() || query.keys.len() != query.groups.len() {
        return Err(Error::InvalidDataset("query row counts differ".into()));
    }

    let folds = groups
        .par_iter()
        .map(|&g| {
            let outer_stream = stream.derive(format!("outer{g}"));
            let train_rows = rows_where(dataset.groups(), |x| x != g);
            let inner_groups: Vec<u32> = groups.iter().copied().filter(|&h| h != g).collect();
            let inner = inner_groups
                .iter()
                .map(|&h| {
                    let train = rows_where(dataset.groups(), |x| x != g && x != h);
                    InnerSplit {
                        group: h,
                        medians: column_medians(dataset.features(), &train),
                        train_rows: train,
                        test_rows: rows_where(dataset.groups(), |x| x == h),
                    }
                })
                .collect();
            let grid_scores: Vec<Option<f64>> = if grid.len() > 1 {
                logo_scores(dataset, kind, grid, &inner_groups, Some(g), &outer_stream)?.into_iter().map(Some).collect()
            } else {
                vec![None]
            };
            let chosen = first_best(&grid_scores.iter().map(|s| s.unwrap_or(0.0)).collect::<Vec<_>>());
            let model = fit_rows(kind, dataset, &train_rows, &grid[chosen], &outer_stream.derive("refit"))?;
            let test_rows = rows_where(dataset.groups(), |x| x == g);
            let query_rows = rows_where(&query.groups, |x| x == g);
            let predictions: Vec<f64> = query_rows.iter().map(|&i| model.predict(&query.features[i])).collect();
            let fold = OuterFold {
                group: g,
                medians: model.imputation_medians.clone(),
                outer_score: (!test_rows.is_empty()).then(|| score_rows(&model, dataset, &test_rows)),
                train_rows,
                test_rows,
                query_rows,
                inner,
                grid_scores,
                chosen,
                chosen_params: grid[chosen].clone(),
            };
            Ok((fold, predictions))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut predictions = vec![f64::NAN; query.groups.len()];
    for (fold, preds) in &folds {
        for (&i, p) in fold.query_rows.iter().zip(preds) {
            predictions[i] = *p;
        }
    }
    Ok(CvResult {
        kind,
        task: dataset.task(),
        folds: folds.into_iter().map(|(f, _)| f).collect(),
        predictions,
    })
}

/// Deployment model: grid point chosen by plain LOGO over all groups, then
/// refit on every row with stream `deploy`.
pub fn tune_and_fit(dataset: &Dataset, kind: LearnerKind, grid: &[TreeParams], stream: &RngStream) -> Result<TrainedModel> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("hyperparameter grid is empty".into()));
    }
    let groups = dataset.distinct_groups();
    let tune_stream = stream.derive("tune");
    let (chosen, tuning_score) = if grid.len() > 1 && groups.len() >= 2 {
        let scores = logo_scores(dataset, kind, grid, &groups, None, &tune_stream)?;
        let k = first_best(&scores);
        (k, Some(scores[k]))
    } else {
        (0, None)
    };
    let rows: Vec<usize> = (0..dataset.len()).collect();
    let deploy = stream.derive("deploy");
    let mut model = fit_rows(kind, dataset, &rows, &grid[chosen], &deploy)?;
    model.provenance = Some(Provenance {
        grid_size: grid.len(),
        grid_index: chosen,
        tuning_score,
        tuning_groups: groups,
        stream_path: deploy.path_string(),
    });
    Ok(model)
}

pub const CV_REPORT_HEADER: &str = "model,fold,chosen_params,inner_score,outer_score";

/// Appends CV report rows (`model,fold,chosen_params,inner_score,outer_score`)
/// for one model; inner and outer scores are empty when not defined.
pub fn write_cv_report(out: &mut Vec<u8>, name: &str, cv: &CvResult) {
    for fold in &cv.folds {
        writeln!(
            out,
            "{name},{},{},{},{}",
            fold.group,
            fold.chosen_params.canonical(),
            sci(fold.inner_score().unwrap_or(f64::NAN)),
            sci(fold.outer_score.unwrap_or(f64::NAN))
        )
        .unwrap();
    }
}

//! From-scratch tree learners, metrics and nested leave-one-group-out
//! cross-validation.
//!
//! Rows of a [`Dataset`] are held in canonical key order. Every random draw
//! (bootstrap indices, boosting subsamples, per-split feature subsets) comes
//! from an [`RngStream`] derived per fold, grid point and tree, so a fit does
//! not depend on the order rows were supplied in or on the thread count.
//!
//! | learner | regression | classification |
//! |---|---|---|
//! | `tree` | CART, variance reduction, mean leaves | CART, Gini, majority leaves |
//! | `forest` | bagged CART, mean of trees | bagged CART, plurality vote |
//! | `gbt` | squared-loss boosting with shrinkage | one-vs-rest logistic boosting, Newton leaves |
//!
//! Ties in votes and class scores resolve to the lowest class index.

pub mod cv;
pub mod ensemble;
pub mod metrics;
pub mod model;
pub mod tree;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ela::stats::median_in_place;
use crate::error::{Error, Result};
use crate::sampling::RngStream;

pub use cv::{nested_logo_cv, nested_logo_cv_query, tune_and_fit, CvResult, OuterFold, Query};
pub use metrics::{accuracy, f1_macro, r2};
pub use model::{Ensemble, TrainedModel, MODEL_FORMAT_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Tree,
    Forest,
    Gbt,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [LearnerKind::Tree, LearnerKind::Forest, LearnerKind::Gbt];

    pub fn as_str(&self) -> &'static str {
        match self {
            LearnerKind::Tree => "tree",
            LearnerKind::Forest => "forest",
            LearnerKind::Gbt => "gbt",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown learner `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Targets {
    Real(Vec<f64>),
    Labels { values: Vec<usize>, n_classes: usize },
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Real(v) => v.len(),
            Targets::Labels { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            Targets::Real(_) => Task::Regression,
            Targets::Labels { .. } => Task::Classification,
        }
    }

    fn select(&self, order: &[usize]) -> Targets {
        match self {
            Targets::Real(v) => Targets::Real(order.iter().map(|&i| v[i]).collect()),
            Targets::Labels { values, n_classes } => Targets::Labels {
                values: order.iter().map(|&i| values[i]).collect(),
                n_classes: *n_classes,
            },
        }
    }
}

/// Labeled rows with instance-ID groups. Features may contain NaN
/// (not available); they are imputed inside every training split.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    keys: Vec<String>,
    features: Vec<Vec<f64>>,
    targets: Targets,
    groups: Vec<u32>,
    feature_names: Vec<String>,
}

impl Dataset {
    /// Validates shapes and sorts rows by key.
    pub fn new(
        keys: Vec<String>,
        features: Vec<Vec<f64>>,
        targets: Targets,
        groups: Vec<u32>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let m = keys.len();
        if m == 0 {
            return Err(Error::InvalidDataset("empty dataset".into()));
        }
        if features.len() != m || targets.len() != m || groups.len() != m {
            return Err(Error::InvalidDataset(format!(
                "row counts differ: {m} keys, {} feature rows, {} targets, {} groups",
                features.len(),
                targets.len(),
                groups.len()
            )));
        }
        let p = feature_names.len();
        if let Some(row) = features.iter().position(|r| r.len() != p) {
            return Err(Error::InvalidDataset(format!(
                "row {row} has {} features, expected {p}",
                features[row].len()
            )));
        }
        match &targets {
            Targets::Real(v) => {
                if v.iter().any(|y| !y.is_finite()) {
                    return Err(Error::InvalidDataset("non-finite regression target".into()));
                }
            }
            Targets::Labels { values, n_classes } => {
                if *n_classes == 0 || values.iter().any(|c| c >= n_classes) {
                    return Err(Error::InvalidDataset(format!("labels must lie in 0..{n_classes}")));
                }
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        if order.windows(2).any(|w| keys[w[0]] == keys[w[1]]) {
            return Err(Error::InvalidDataset("duplicate row keys".into()));
        }
        Ok(Dataset {
            keys: order.iter().map(|&i| keys[i].clone()).collect(),
            features: order.iter().map(|&i| features[i].clone()).collect(),
            targets: targets.select(&order),
            groups: order.iter().map(|&i| groups[i]).collect(),
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn groups(&self) -> &[u32] {
        &self.groups
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn task(&self) -> Task {
        self.targets.task()
    }

    pub fn distinct_groups(&self) -> Vec<u32> {
        self.groups.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }
}

/// NaN-ignoring column medians over `rows`; an all-missing column imputes to 0.
pub fn column_medians(features: &[Vec<f64>], rows: &[usize]) -> Vec<f64> {
    let p = features.first().map_or(0, Vec::len);
    let mut buf = Vec::with_capacity(rows.len());
    (0..p)
        .map(|j| {
            buf.clear();
            buf.extend(rows.iter().map(|&i| features[i][j]).filter(|v| !v.is_nan()));
            if buf.is_empty() {
                0.0
            } else {
                median_in_place(&mut buf)
            }
        })
        .collect()
}

pub fn impute_row(row: &[f64], medians: &[f64]) -> Vec<f64> {
    row.iter().zip(medians).map(|(v, m)| if v.is_nan() { *m } else { *v }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureRule {
    /// `floor(sqrt(p))` features per split.
    Sqrt,
}

/// Features considered at each split: a fraction of `p` or a named rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaxFeatures {
    Fraction(f64),
    Rule(FeatureRule),
}

impl MaxFeatures {
    pub fn count(&self, p: usize) -> usize {
        let k = match self {
            MaxFeatures::Fraction(f) => (f * p as f64).round() as usize,
            MaxFeatures::Rule(FeatureRule::Sqrt) => (p as f64).sqrt().floor() as usize,
        };
        k.clamp(1, p.max(1))
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::Fraction(v) => write!(f, "{v}"),
            MaxFeatures::Rule(FeatureRule::Sqrt) => f.write_str("sqrt"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub n_trees: usize,
    pub features_per_split: MaxFeatures,
    /// Boosting shrinkage.
    pub learning_rate: f64,
    /// Boosting row subsample fraction (without replacement).
    pub subsample: f64,
    /// Forest bootstrap resampling.
    pub bootstrap: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            n_trees: 100,
            features_per_split: MaxFeatures::Fraction(1.0),
            learning_rate: 0.1,
            subsample: 1.0,
            bootstrap: true,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be at least 1".into());
        }
        if self.n_trees == 0 {
            return bad("n_trees must be at least 1".into());
        }
        if self.max_depth == Some(0) {
            return bad("max_depth must be at least 1 (or null for unlimited)".into());
        }
        if let MaxFeatures::Fraction(f) = self.features_per_split {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("features_per_split {f} outside (0, 1]"));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning_rate {} outside (0, 1]", self.learning_rate));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad(format!("subsample {} outside (0, 1]", self.subsample));
        }
        Ok(())
    }

    /// Stable one-line rendering used in CV reports and cache keys.
    pub fn canonical(&self) -> String {
        let depth = self.max_depth.map_or("none".to_owned(), |d| d.to_string());
        format!(
            "max_depth={depth};min_samples_leaf={};n_trees={};features_per_split={};learning_rate={};subsample={};bootstrap={}",
            self.min_samples_leaf, self.n_trees, self.features_per_split, self.learning_rate, self.subsample, self.bootstrap
        )
    }
}

/// Explicit grid; the expansion is the Cartesian product in field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamGrid {
    pub max_depth: Vec<Option<usize>>,
    pub min_samples_leaf: Vec<usize>,
    pub n_trees: Vec<usize>,
    pub features_per_split: Vec<MaxFeatures>,
    pub learning_rate: Vec<f64>,
    pub subsample: Vec<f64>,
    pub bootstrap: Vec<bool>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        let d = TreeParams::default();
        ParamGrid {
            max_depth: vec![d.max_depth],
            min_samples_leaf: vec![d.min_samples_leaf],
            n_trees: vec![d.n_trees],
            features_per_split: vec![d.features_per_split],
            learning_rate: vec![d.learning_rate],
            subsample: vec![d.subsample],
            bootstrap: vec![d.bootstrap],
        }
    }
}

impl ParamGrid {
    pub fn single(params: TreeParams) -> Self {
        ParamGrid {
            max_depth: vec![params.max_depth],
            min_samples_leaf: vec![params.min_samples_leaf],
            n_trees: vec![params.n_trees],
            features_per_split: vec![params.features_per_split],
            learning_rate: vec![params.learning_rate],
            subsample: vec![params.subsample],
            bootstrap: vec![params.bootstrap],
        }
    }

    pub fn default_tree() -> Self {
        ParamGrid {
            max_depth: vec![Some(4), Some(8), None],
            min_samples_leaf: vec![1, 3],
            n_trees: vec![1],
            bootstrap: vec![false],
            ..ParamGrid::default()
        }
    }

    pub fn default_forest() -> Self {
        ParamGrid {
            max_depth: vec![None, Some(10)],
            min_samples_leaf: vec![1, 3],
            n_trees: vec![100, 300],
            features_per_split: vec![MaxFeatures::Fraction(1.0 / 3.0), MaxFeatures::Rule(FeatureRule::Sqrt)],
            ..ParamGrid::default()
        }
    }

    pub fn default_gbt() -> Self {
        ParamGrid {
            max_depth: vec![Some(3), Some(6)],
            n_trees: vec![100, 300],
            learning_rate: vec![0.1, 0.3],
            ..ParamGrid::default()
        }
    }

    pub fn default_for(kind: LearnerKind) -> Self {
        match kind {
            LearnerKind::Tree => Self::default_tree(),
            LearnerKind::Forest => Self::default_forest(),
            LearnerKind::Gbt => Self::default_gbt(),
        }
    }

    pub fn expand(&self) -> Result<Vec<TreeParams>> {
        let mut out = Vec::new();
        for &max_depth in &self.max_depth {
            for &min_samples_leaf in &self.min_samples_leaf {
                for &n_trees in &self.n_trees {
                    for &features_per_split in &self.features_per_split {
                        for &learning_rate in &self.learning_rate {
                            for &subsample in &self.subsample {
                                for &bootstrap in &self.bootstrap {
                                    let p = TreeParams {
                                        max_depth,
                                        min_samples_leaf,
                                        n_trees,
                                        features_per_split,
                                        learning_rate,
                                        subsample,
                                        bootstrap,
                                    };
                                    p.validate()?;
                                    out.push(p);
                                }
                            }
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidConfig("hyperparameter grid is empty".into()));
        }
        Ok(out)
    }
}

/// Fits one model on all rows of `dataset`.
pub fn fit(kind: LearnerKind, dataset: &Dataset, params: &TreeParams, stream: &RngStream) -> Result<TrainedModel> {
    let rows: Vec<usize> = (0..dataset.len()).collect();
    fit_rows(kind, dataset, &rows, params, stream)
}

pub fn fit_tree(dataset: &Dataset, params: &TreeParams, stream: &RngStream) -> Result<TrainedModel> {
    fit(LearnerKind::Tree, dataset, params, stream)
}

pub fn fit_forest(dataset: &Dataset, params: &TreeParams, stream: &RngStream) -> Result<TrainedModel> {
    fit(LearnerKind::Forest, dataset, params, stream)
}

pub fn fit_gbt(dataset: &Dataset, params: &TreeParams, stream: &RngStream) -> Result<TrainedModel> {
    fit(LearnerKind::Gbt, dataset, params, stream)
}

/// Fits on a subset of rows (indices into canonical order). Imputation
/// medians come from these rows only.
pub fn fit_rows(
    kind: LearnerKind,
    dataset: &Dataset,
    rows: &[usize],
    params: &TreeParams,
    stream: &RngStream,
) -> Result<TrainedModel> {
    if rows.is_empty() {
        return Err(Error::InvalidDataset("cannot fit on zero rows".into()));
    }
    params.validate()?;
    let medians = column_medians(&dataset.features, rows);
    let x: Vec<Vec<f64>> = rows.iter().map(|&i| impute_row(&dataset.features[i], &medians)).collect();
    let targets = dataset.targets.select(rows);
    let ensemble = ensemble::fit_ensemble(kind, &x, &targets, params, stream);
    Ok(TrainedModel::new(kind, &targets, params.clone(), dataset.feature_names.clone(), medians, ensemble))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_and_validation() {
        let d = Dataset::new(
            vec!["b".into(), "a".into()],
            vec![vec![2.0], vec![1.0]],
            Targets::Real(vec![20.0, 10.0]),
            vec![2, 1],
            vec!["x".into()],
        )
        .unwrap();
        assert_eq!(d.keys(), ["a", "b"]);
        assert_eq!(d.features()[0], vec![1.0]);
        assert_eq!(d.targets(), &Targets::Real(vec![10.0, 20.0]));
        assert_eq!(d.groups(), [1, 2]);
        assert!(Dataset::new(vec![], vec![], Targets::Real(vec![]), vec![], vec![]).is_err());
        let dup = Dataset::new(
            vec!["a".into(), "a".into()],
            vec![vec![1.0], vec![1.0]],
            Targets::Real(vec![0.0, 0.0]),
            vec![1, 1],
            vec!["x".into()],
        );
        assert!(dup.is_err());
    }

    #[test]
    fn medians_skip_missing() {
        let f = vec![vec![1.0, f64::NAN], vec![f64::NAN, f64::NAN], vec![3.0, f64::NAN], vec![10.0, f64::NAN]];
        assert_eq!(column_medians(&f, &[0, 1, 2]), vec![2.0, 0.0]);
        assert_eq!(column_medians(&f, &[0, 2, 3]), vec![3.0, 0.0]);
        assert_eq!(impute_row(&f[1], &[2.0, 0.0]), vec![2.0, 0.0]);
    }

    #[test]
    fn grid_expansion() {
        let g = ParamGrid::default_forest().expand().unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g[0].n_trees, 100);
        assert_eq!(MaxFeatures::Rule(FeatureRule::Sqrt).count(40), 6);
        assert_eq!(MaxFeatures::Fraction(1.0 / 3.0).count(40), 13);
        let empty = ParamGrid { n_trees: vec![], ..ParamGrid::default() };
        assert!(empty.expand().is_err());
        let bad = ParamGrid { learning_rate: vec![0.0], ..ParamGrid::default() };
        assert!(bad.expand().is_err());
        let json = serde_json::to_string(&ParamGrid::default_forest()).unwrap();
        assert_eq!(serde_json::from_str::<ParamGrid>(&json).unwrap(), ParamGrid::default_forest());
    }
}

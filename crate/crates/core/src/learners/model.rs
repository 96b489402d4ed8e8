//! Trained models and their versioned JSON form.
//!
//! A model file is one JSON object:
//!
//! | field | content |
//! |---|---|
//! | `format_version` | integer, currently 1 |
//! | `kind`, `task` | learner (`tree`/`forest`/`gbt`) and `regression`/`classification` |
//! | `n_classes` | 0 for regression |
//! | `params` | the fitted hyperparameters |
//! | `feature_names`, `feature_schema_hash` | column order and its SHA-256 |
//! | `imputation_medians` | per-column fill values from the training rows |
//! | `ensemble` | tagged tree structure, nodes in pre-order |
//! | `provenance` | how the hyperparameters were chosen, if tuned |

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{impute_row, LearnerKind, Targets, Task, TreeParams};
use crate::error::{Error, Result};

pub use super::ensemble::Ensemble;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Record of the tuning step that produced a model's hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub grid_size: usize,
    pub grid_index: usize,
    /// Mean holdout score of the chosen grid point; `None` for a one-point grid.
    pub tuning_score: Option<f64>,
    pub tuning_groups: Vec<u32>,
    pub stream_path: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub kind: LearnerKind,
    pub task: Task,
    pub n_classes: usize,
    pub params: TreeParams,
    pub feature_names: Vec<String>,
    pub feature_schema_hash: String,
    pub imputation_medians: Vec<f64>,
    pub ensemble: Ensemble,
    pub provenance: Option<Provenance>,
}

pub fn schema_hash(names: &[String]) -> String {
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl TrainedModel {
    pub(crate) fn new(
        kind: LearnerKind,
        targets: &Targets,
        params: TreeParams,
        feature_names: Vec<String>,
        imputation_medians: Vec<f64>,
        ensemble: Ensemble,
    ) -> Self {
        let n_classes = match targets {
            Targets::Real(_) => 0,
            Targets::Labels { n_classes, .. } => *n_classes,
        };
        TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            kind,
            task: targets.task(),
            n_classes,
            params,
            feature_schema_hash: schema_hash(&feature_names),
            feature_names,
            imputation_medians,
            ensemble,
            provenance: None,
        }
    }

    /// Prediction for a raw row (NaN allowed): a value for regression,
    /// the class index as `f64` for classification.
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.ensemble.predict(&impute_row(row, &self.imputation_medians), self.n_classes)
    }

    pub fn predict_class(&self, row: &[f64]) -> usize {
        self.predict(row) as usize
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        model.checked()
    }

    fn checked(self) -> Result<Self> {
        let model = self;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "format_version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        if model.feature_schema_hash != schema_hash(&model.feature_names)
            || model.imputation_medians.len() != model.feature_names.len()
        {
            return Err(Error::Model("feature schema is inconsistent".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::fmt::write_file(path, self.to_json().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: TrainedModel = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        model.checked().map_err(|e| match e {
            Error::Model(detail) => Error::SchemaMismatch { path: path.to_owned(), detail },
            other => other,
        })
    }
}

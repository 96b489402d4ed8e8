//! Experiment configuration: one JSON document with a `schema_version`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{FeatureRule, LearnerKind, MaxFeatures, ParamGrid};
use crate::perfdata::{PORTFOLIO_THRESHOLD, PRECISION_CAP};
use crate::problems::functions::FUNCTION_COUNT;
use crate::selection::Approach;
use crate::solvers::{SolverConfig, SolverName};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElaSettings {
    /// LHS points per sample; multiplied by the dimension when
    /// `scale_with_dimension` is set.
    pub sample_size: usize,
    pub scale_with_dimension: bool,
    pub repetitions: usize,
}

impl ElaSettings {
    pub fn points(&self, dimension: usize) -> usize {
        if self.scale_with_dimension {
            self.sample_size * dimension
        } else {
            self.sample_size
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerfSettings {
    pub repetitions: u32,
    pub cap: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub master_seed: u64,
    pub dimensions: Vec<usize>,
    pub function_ids: Vec<u32>,
    pub instance_ids: Vec<u32>,
    /// Strictly increasing checkpoint budgets; the largest is the run length.
    pub budgets: Vec<u64>,
    pub solvers: Vec<SolverConfig>,
    pub ela: ElaSettings,
    pub perfdata: PerfSettings,
    pub learners: Vec<LearnerKind>,
    pub approaches: Vec<Approach>,
    pub grids: BTreeMap<LearnerKind, ParamGrid>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    /// Full-scale settings: 24 functions x 10 instances, 1000-point LHS with
    /// 100 repetitions, 50 runs per solver up to 10 000 evaluations.
    fn default() -> Self {
        ExperimentConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            master_seed: 2023,
            dimensions: vec![5, 20],
            function_ids: (1..=FUNCTION_COUNT).collect(),
            instance_ids: (1..=10).collect(),
            budgets: vec![100, 250, 500, 1000, 2500, 5000, 10_000],
            solvers: SolverName::ALL.iter().map(|s| SolverConfig::new(*s)).collect(),
            ela: ElaSettings { sample_size: 1000, scale_with_dimension: false, repetitions: 100 },
            perfdata: PerfSettings { repetitions: 50, cap: PRECISION_CAP, threshold: PORTFOLIO_THRESHOLD },
            learners: vec![LearnerKind::Forest, LearnerKind::Gbt],
            approaches: Approach::ALL.to_vec(),
            grids: LearnerKind::ALL.iter().map(|k| (*k, ParamGrid::default_for(*k))).collect(),
            output_dir: PathBuf::from("pias-out"),
        }
    }
}

impl ExperimentConfig {
    /// Desk-scale preset: d in {2, 5}, budgets {100, 250, 1000, 2500},
    /// 10 runs, 10 feature repetitions of 250*d LHS points, and small grids.
    pub fn desk_scale() -> Self {
        let mut c = ExperimentConfig::default();
        c.apply_desk_scale();
        c
    }

    /// Overwrites the scale-related fields with the desk-scale values.
    pub fn apply_desk_scale(&mut self) {
        self.dimensions = vec![2, 5];
        self.budgets = vec![100, 250, 1000, 2500];
        self.perfdata.repetitions = 10;
        self.ela = ElaSettings { sample_size: 250, scale_with_dimension: true, repetitions: 10 };
        self.grids = desk_grids();
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(CONFIG_SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(Error::InvalidConfig(format!(
                    "schema_version {v} is not supported (expected {CONFIG_SCHEMA_VERSION})"
                )))
            }
            None => return Err(Error::InvalidConfig("missing schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn solver_names(&self) -> Result<Vec<SolverName>> {
        self.solvers.iter().map(|s| s.solver()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return bad(format!("schema_version {} is not supported", self.schema_version));
        }
        if self.dimensions.is_empty() || self.dimensions.iter().any(|&d| d < 2) {
            return bad("dimensions must be a non-empty list of values >= 2".into());
        }
        if self.function_ids.is_empty() || self.function_ids.iter().any(|f| !(1..=FUNCTION_COUNT).contains(f)) {
            return bad(format!("function_ids must be a non-empty subset of 1..={FUNCTION_COUNT}"));
        }
        if self.instance_ids.len() < 3 || self.instance_ids.contains(&0) {
            return bad("instance_ids needs at least 3 ids, all >= 1 (nested leave-one-group-out)".into());
        }
        for (name, list) in [
            ("dimensions", self.dimensions.iter().map(|v| *v as u64).collect::<Vec<_>>()),
            ("function_ids", self.function_ids.iter().map(|v| u64::from(*v)).collect()),
            ("instance_ids", self.instance_ids.iter().map(|v| u64::from(*v)).collect()),
            ("budgets", self.budgets.clone()),
        ] {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("{name} must be strictly increasing"));
            }
        }
        if self.budgets.is_empty() || self.budgets[0] == 0 {
            return bad("budgets must be a non-empty list of positive values".into());
        }
        if self.solvers.is_empty() {
            return bad("no solvers configured".into());
        }
        let names = self.solver_names()?;
        for (i, s) in names.iter().enumerate() {
            if names[..i].contains(s) {
                return bad(format!("solver {s} listed twice"));
            }
        }
        for s in &self.solvers {
            s.resolve()?;
        }
        if self.ela.sample_size == 0 || self.ela.repetitions == 0 {
            return bad("ela sample_size and repetitions must be positive".into());
        }
        for &d in &self.dimensions {
            if self.ela.points(d) < d + 2 {
                return bad(format!("ela sample of {} points is too small for d={d}", self.ela.points(d)));
            }
        }
        if self.perfdata.repetitions == 0 {
            return bad("perfdata repetitions must be positive".into());
        }
        if !(self.perfdata.cap > 0.0) {
            return bad("perfdata cap must be positive".into());
        }
        if !(0.0..1.0).contains(&self.perfdata.threshold) {
            return bad("perfdata threshold must lie in [0, 1)".into());
        }
        if self.learners.is_empty() || self.approaches.is_empty() {
            return bad("learners and approaches must be non-empty".into());
        }
        for l in &self.learners {
            self.grids
                .get(l)
                .ok_or_else(|| Error::InvalidConfig(format!("no grid for learner {l}")))?
                .expand()?;
        }
        Ok(())
    }
}

/// Grids small enough for nested CV of every selector on one core.
pub fn desk_grids() -> BTreeMap<LearnerKind, ParamGrid> {
    let forest = ParamGrid {
        max_depth: vec![None],
        min_samples_leaf: vec![1, 3],
        n_trees: vec![50],
        features_per_split: vec![MaxFeatures::Rule(FeatureRule::Sqrt)],
        ..ParamGrid::default()
    };
    let gbt = ParamGrid {
        max_depth: vec![Some(3)],
        n_trees: vec![50],
        learning_rate: vec![0.2],
        features_per_split: vec![MaxFeatures::Fraction(0.5)],
        ..ParamGrid::default()
    };
    let tree = ParamGrid { max_depth: vec![Some(4), None], n_trees: vec![1], bootstrap: vec![false], ..ParamGrid::default() };
    BTreeMap::from([(LearnerKind::Tree, tree), (LearnerKind::Forest, forest), (LearnerKind::Gbt, gbt)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for c in [ExperimentConfig::default(), ExperimentConfig::desk_scale()] {
            c.validate().unwrap();
            let back: ExperimentConfig = serde_json::from_str(&c.to_json()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn invalid_configs() {
        let mut c = ExperimentConfig::desk_scale();
        c.budgets = vec![250, 100];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::desk_scale();
        c.instance_ids = vec![1, 2];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::desk_scale();
        c.function_ids = vec![25];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::desk_scale();
        c.grids.remove(&LearnerKind::Forest);
        assert!(c.validate().is_err());
    }
}

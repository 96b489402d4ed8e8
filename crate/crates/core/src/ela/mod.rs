//! Cheap exploratory landscape analysis features.
//!
//! The schema has 40 entries in six groups. Names map onto their flacco
//! counterparts as follows:
//!
//! | feature | flacco |
//! |---------|--------|
//! | `distr.skewness`, `distr.kurtosis`, `distr.number_of_peaks` | `ela_distr.*` |
//! | `meta.lin_adj_r2`, `meta.lin_intercept`, `meta.lin_coef_min`, `meta.lin_coef_max`, `meta.lin_coef_max_by_min` | `ela_meta.lin_simple.*` |
//! | `meta.quad_adj_r2`, `meta.quad_cond` | `ela_meta.quad_simple.adj_r2`, `ela_meta.quad_simple.cond` |
//! | `disp.{ratio,diff}_{mean,median}_{02,05,10,25}` | `disp.*` |
//! | `nbc.nn_nb_mean_ratio`, `nbc.nn_nb_sd_ratio`, `nbc.nn_nb_cor`, `nbc.dist_ratio_coeff_var` | `nbc.nn_nb.*`, `nbc.dist_ratio.coeff_var` |
//! | `nbc.nb_fitness_cor` | `nbc.nb_fitness.cor` (correlation of nearest-better distance with fitness rank here) |
//! | `ic.h_max`, `ic.eps_s`, `ic.eps_max`, `ic.eps_ratio`, `ic.m0` | `ic.*` |
//! | `pca.expl_var_x_09`, `pca.expl_var_xy_09` | `pca.expl_var.cov_x`, `pca.expl_var.cov_init` |
//! | `pca.expl_var_first_pc_x`, `pca.expl_var_first_pc_xy` | `pca.expl_var_PC1.cov_x`, `pca.expl_var_PC1.cov_init` |
//!
//! Invariant under adding a constant to `y` (property-tested): skewness,
//! kurtosis, number of peaks, all dispersion features, all nbc features, all
//! information-content features, the linear/quadratic adjusted R² and
//! coefficients except the intercept, and the PCA features of `X`.

pub mod disp;
pub mod distr;
pub mod ic;
pub mod meta;
pub mod nbc;
pub mod pca;
pub mod stats;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt::{parse_cell, sci};
use crate::problems::{EvaluationBudgetCounter, ProblemInstance, ProblemSpec};
use crate::sampling::{lhs_sample, RngStream};

pub use disp::{dispersion, DispersionFeatures, DISPERSION_QUANTILES};
pub use distr::{ela_distr, DistrFeatures};
pub use ic::{info_content, InfoContentFeatures};
pub use meta::{ela_meta, MetaFeatures};
pub use nbc::{nbc, NbcFeatures};
pub use pca::{pca_features, PcaFeatures};

pub const FEATURE_NAMES: [&str; 40] = [
    "distr.skewness",
    "distr.kurtosis",
    "distr.number_of_peaks",
    "meta.lin_adj_r2",
    "meta.lin_intercept",
    "meta.lin_coef_min",
    "meta.lin_coef_max",
    "meta.lin_coef_max_by_min",
    "meta.quad_adj_r2",
    "meta.quad_cond",
    "disp.ratio_mean_02",
    "disp.ratio_mean_05",
    "disp.ratio_mean_10",
    "disp.ratio_mean_25",
    "disp.ratio_median_02",
    "disp.ratio_median_05",
    "disp.ratio_median_10",
    "disp.ratio_median_25",
    "disp.diff_mean_02",
    "disp.diff_mean_05",
    "disp.diff_mean_10",
    "disp.diff_mean_25",
    "disp.diff_median_02",
    "disp.diff_median_05",
    "disp.diff_median_10",
    "disp.diff_median_25",
    "nbc.nn_nb_mean_ratio",
    "nbc.nn_nb_sd_ratio",
    "nbc.nn_nb_cor",
    "nbc.dist_ratio_coeff_var",
    "nbc.nb_fitness_cor",
    "ic.h_max",
    "ic.eps_s",
    "ic.eps_max",
    "ic.eps_ratio",
    "ic.m0",
    "pca.expl_var_x_09",
    "pca.expl_var_xy_09",
    "pca.expl_var_first_pc_x",
    "pca.expl_var_first_pc_xy",
];

/// Design points and their objective values.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl Sample {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n == 0 || n != y.len() {
            return Err(Error::InvalidSample(format!("{} points but {} values", n, y.len())));
        }
        let d = x[0].len();
        if d == 0 || x.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidSample("ragged or empty design rows".into()));
        }
        if n < d + 2 {
            return Err(Error::InvalidSample(format!("n = {n} < d + 2 = {}", d + 2)));
        }
        if x.iter().flatten().any(|v| v.is_nan()) {
            return Err(Error::InvalidSample("NaN in design".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample("non-finite objective value".into()));
        }
        Ok(Sample { x, y })
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn dimension(&self) -> usize {
        self.x[0].len()
    }

    /// Same design with `c` added to every objective value.
    pub fn shifted(&self, c: f64) -> Sample {
        Sample { x: self.x.clone(), y: self.y.iter().map(|v| v + c).collect() }
    }
}

/// Feature values in [`FEATURE_NAMES`] order; `None` marks not available.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    values: Vec<Option<f64>>,
}

impl FeatureVector {
    pub fn from_values(values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != FEATURE_NAMES.len() {
            return Err(Error::InvalidSample(format!(
                "feature vector has {} entries, schema has {}",
                values.len(),
                FEATURE_NAMES.len()
            )));
        }
        Ok(FeatureVector { values })
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).and_then(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, Option<f64>)> + '_ {
        FEATURE_NAMES.iter().copied().zip(self.values.iter().copied())
    }

    /// `NaN` for not-available entries.
    pub fn to_dense(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect()
    }
}

fn clean(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite())
}

pub fn compute_features(sample: &Sample) -> FeatureVector {
    let (x, y) = (sample.x(), sample.y());
    let n = sample.len();
    let dist = stats::Distances::new(x);
    let mut values = Vec::with_capacity(FEATURE_NAMES.len());
    if n >= 4 {
        values.extend(ela_distr(y).values());
    } else {
        values.extend([None; 3]);
    }
    values.extend(ela_meta(x, y).values());
    values.extend(disp::dispersion_with(&dist, y, &DISPERSION_QUANTILES).values());
    if n >= 3 {
        values.extend(nbc::nbc_with(&dist, y).values());
        values.extend(ic::info_content_with(&dist, y).values());
    } else {
        values.extend([None; 10]);
    }
    if n > sample.dimension() + 1 {
        values.extend(pca_features(x, y).values());
    } else {
        values.extend([None; 4]);
    }
    let values = values.into_iter().map(clean).collect();
    FeatureVector { values }
}

/// Per-feature median over repetitions, ignoring not-available entries. A
/// feature missing in more than half of the repetitions stays not available.
pub fn aggregate_features(vectors: &[FeatureVector]) -> Result<FeatureVector> {
    if vectors.is_empty() {
        return Err(Error::InvalidSample("no feature vectors to aggregate".into()));
    }
    let reps = vectors.len();
    let values = (0..FEATURE_NAMES.len())
        .map(|k| {
            let present: Vec<f64> = vectors.iter().filter_map(|v| v.values[k]).collect();
            if 2 * (reps - present.len()) > reps || present.is_empty() {
                None
            } else {
                Some(stats::median(&present))
            }
        })
        .collect();
    Ok(FeatureVector { values })
}

/// LHS design of `n` points in the instance domain, evaluated under a counter
/// limited to `n`.
pub fn sample_instance(instance: &ProblemInstance, n: usize, stream: &RngStream) -> Result<Sample> {
    let x = lhs_sample(n, &instance.domain, stream)?;
    let mut counter = EvaluationBudgetCounter::new(n as u64);
    let y = x
        .iter()
        .map(|p| instance.evaluate(p, &mut counter))
        .collect::<Result<Vec<f64>>>()?;
    Sample::new(x, y)
}

/// Median-aggregated features of `repetitions` independent LHS samples.
pub fn instance_features(
    instance: &ProblemInstance,
    sample_size: usize,
    repetitions: usize,
    stream: &RngStream,
) -> Result<FeatureVector> {
    let vectors = (0..repetitions)
        .map(|r| sample_instance(instance, sample_size, &stream.derive(format!("rep{r}"))).map(|s| compute_features(&s)))
        .collect::<Result<Vec<_>>>()?;
    aggregate_features(&vectors)
}

/// One row of the feature matrix.
pub type FeatureRow = (ProblemSpec, FeatureVector);

pub fn write_feature_matrix(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let mut out = Vec::new();
    write!(out, "function_id,instance_id,dimension").unwrap();
    for name in FEATURE_NAMES {
        write!(out, ",{name}").unwrap();
    }
    writeln!(out).unwrap();
    for (spec, fv) in rows {
        write!(out, "{},{},{}", spec.function_id, spec.instance_id, spec.dimension).unwrap();
        for v in fv.values() {
            write!(out, ",{}", v.map(sci).unwrap_or_default()).unwrap();
        }
        writeln!(out).unwrap();
    }
    crate::fmt::write_file(path, &out)
}

pub fn read_feature_matrix(path: &Path) -> Result<BTreeMap<ProblemSpec, FeatureVector>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let expected: Vec<&str> = ["function_id", "instance_id", "dimension"]
        .into_iter()
        .chain(FEATURE_NAMES)
        .collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::SchemaMismatch {
            path: path.to_owned(),
            detail: "feature matrix header does not match the feature schema".into(),
        });
    }
    let bad = |detail: String| Error::SchemaMismatch { path: path.to_owned(), detail };
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let int = |i: usize| record[i].parse::<u64>().map_err(|e| bad(format!("column {i}: {e}")));
        let spec = ProblemSpec::new(int(0)? as u32, int(1)? as u32, int(2)? as usize);
        let values = (3..record.len())
            .map(|i| {
                parse_cell(&record[i])
                    .map(|v| (!v.is_nan()).then_some(v))
                    .map_err(|e| bad(format!("column {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert(spec, FeatureVector { values });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(first: Option<f64>) -> FeatureVector {
        let mut values = vec![Some(0.0); FEATURE_NAMES.len()];
        values[0] = first;
        FeatureVector { values }
    }

    #[test]
    fn median_aggregation() {
        assert_eq!(aggregate_features(&[fv(Some(4.0))]).unwrap(), fv(Some(4.0)));
        let agg = aggregate_features(&[fv(Some(1.0)), fv(Some(2.0)), fv(Some(100.0))]).unwrap();
        assert_eq!(agg.values()[0], Some(2.0));
        let agg = aggregate_features(&[fv(Some(1.0)), fv(None), fv(Some(3.0)), fv(None), fv(Some(5.0))]).unwrap();
        assert_eq!(agg.values()[0], Some(3.0));
        let agg = aggregate_features(&[fv(Some(1.0)), fv(None), fv(None)]).unwrap();
        assert_eq!(agg.values()[0], None);
        assert!(aggregate_features(&[]).is_err());
    }

    #[test]
    fn sample_validation() {
        assert!(Sample::new(vec![vec![0.0, 1.0]; 3], vec![0.0; 3]).is_err());
        assert!(Sample::new(vec![vec![0.0, 1.0]; 4], vec![0.0, 1.0, f64::INFINITY, 2.0]).is_err());
        assert!(Sample::new(vec![vec![f64::NAN, 1.0]; 4], vec![0.0; 4]).is_err());
        assert!(Sample::new(vec![vec![0.0, 1.0]; 4], vec![0.0; 4]).is_ok());
    }

    #[test]
    fn schema_length_and_uniqueness() {
        let mut names = FEATURE_NAMES.to_vec();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 40);
    }
}

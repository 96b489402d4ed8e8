//! Principal-component features of `X` and of `[X | y]`.

use nalgebra::{DMatrix, SymmetricEigen};

pub const EXPLAINED_VARIANCE_TARGET: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub struct PcaFeatures {
    pub expl_var_x_09: Option<f64>,
    pub expl_var_xy_09: Option<f64>,
    pub expl_var_first_pc_x: Option<f64>,
    pub expl_var_first_pc_xy: Option<f64>,
}

impl PcaFeatures {
    pub fn values(&self) -> Vec<Option<f64>> {
        vec![
            self.expl_var_x_09,
            self.expl_var_xy_09,
            self.expl_var_first_pc_x,
            self.expl_var_first_pc_xy,
        ]
    }
}

/// `(fraction of components reaching the target, share of the first component)`.
fn explained(columns: &[Vec<f64>]) -> (Option<f64>, Option<f64>) {
    let p = columns.len();
    let n = columns[0].len();
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let cov = DMatrix::from_fn(p, p, |a, b| {
        columns[a]
            .iter()
            .zip(&columns[b])
            .map(|(u, v)| (u - means[a]) * (v - means[b]))
            .sum::<f64>()
            / (n - 1) as f64
    });
    let mut eig: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().map(|v| v.max(0.0)).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = eig.iter().sum();
    if !(total > 0.0) {
        return (None, None);
    }
    let mut cum = 0.0;
    let mut needed = p;
    for (k, v) in eig.iter().enumerate() {
        cum += v;
        if cum / total >= EXPLAINED_VARIANCE_TARGET - 1e-12 {
            needed = k + 1;
            break;
        }
    }
    (Some(needed as f64 / p as f64), Some(eig[0] / total))
}

pub fn pca_features(x: &[Vec<f64>], y: &[f64]) -> PcaFeatures {
    let d = x[0].len();
    let mut cols: Vec<Vec<f64>> = (0..d).map(|j| x.iter().map(|r| r[j]).collect()).collect();
    let (x09, x1) = explained(&cols);
    cols.push(y.to_vec());
    let (xy09, xy1) = explained(&cols);
    PcaFeatures {
        expl_var_x_09: x09,
        expl_var_xy_09: xy09,
        expl_var_first_pc_x: x1,
        expl_var_first_pc_xy: xy1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_varying_axis() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 3.0, -1.0]).collect();
        let y = vec![0.0; 20];
        let f = pca_features(&x, &y);
        assert!((f.expl_var_first_pc_x.unwrap() - 1.0).abs() < 1e-12);
        assert!((f.expl_var_x_09.unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_design_not_available() {
        let x = vec![vec![1.0, 1.0]; 5];
        let f = pca_features(&x, &[0.0; 5]);
        assert_eq!(f.expl_var_first_pc_x, None);
        assert_eq!(f.expl_var_first_pc_xy, None);
    }
}

//! Linear and quadratic meta-model features.

use log::warn;
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct MetaFeatures {
    pub lin_adj_r2: Option<f64>,
    pub lin_intercept: Option<f64>,
    pub lin_coef_min: Option<f64>,
    pub lin_coef_max: Option<f64>,
    pub lin_coef_max_by_min: Option<f64>,
    pub quad_adj_r2: Option<f64>,
    pub quad_cond: Option<f64>,
}

impl MetaFeatures {
    pub fn values(&self) -> Vec<Option<f64>> {
        vec![
            self.lin_adj_r2,
            self.lin_intercept,
            self.lin_coef_min,
            self.lin_coef_max,
            self.lin_coef_max_by_min,
            self.quad_adj_r2,
            self.quad_cond,
        ]
    }
}

pub(crate) const RIDGE_LAMBDA: f64 = 1e-10;

struct Fit {
    coef: Vec<f64>,
    adj_r2: Option<f64>,
}

/// Least squares with intercept; falls back to ridge when the design is
/// rank deficient.
fn least_squares(design: DMatrix<f64>, y: &[f64]) -> Fit {
    let (n, cols) = design.shape();
    let yv = DVector::from_column_slice(y);
    let qr = design.clone().qr();
    let r = qr.r();
    let diag_max = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let rank_ok = (0..cols).all(|i| r[(i, i)].abs() > 1e-12 * diag_max.max(1.0));
    let solved = rank_ok
        .then(|| r.solve_upper_triangular(&(qr.q().transpose() * &yv)))
        .flatten();
    let coef = match solved {
        Some(c) => c,
        None => {
            warn!("meta-model design is singular; solving with ridge lambda = {RIDGE_LAMBDA}");
            let xt = design.transpose();
            let gram = &xt * &design + DMatrix::identity(cols, cols) * RIDGE_LAMBDA;
            let rhs = &xt * &yv;
            gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(cols))
        }
    };
    let fitted = &design * &coef;
    let mean = y.iter().sum::<f64>() / n as f64;
    let sse: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    let sst: f64 = y.iter().map(|a| (a - mean).powi(2)).sum();
    let p = (cols - 1) as f64;
    let dof = n as f64 - p - 1.0;
    let adj_r2 = if sst > 0.0 && dof > 0.0 {
        let r2 = 1.0 - sse / sst;
        Some(1.0 - (1.0 - r2) * (n as f64 - 1.0) / dof)
    } else {
        None
    };
    Fit { coef: coef.iter().copied().collect(), adj_r2 }
}

fn ratio(max: f64, min: f64) -> Option<f64> {
    (min > 0.0).then(|| max / min)
}

pub fn ela_meta(x: &[Vec<f64>], y: &[f64]) -> MetaFeatures {
    let n = x.len();
    let d = x[0].len();
    let lin = least_squares(DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] }), y);
    let quad = least_squares(
        DMatrix::from_fn(n, 2 * d + 1, |i, j| match j {
            0 => 1.0,
            j if j <= d => x[i][j - 1],
            j => x[i][j - d - 1].powi(2),
        }),
        y,
    );
    let lin_abs: Vec<f64> = lin.coef[1..].iter().map(|c| c.abs()).collect();
    let lin_min = lin_abs.iter().copied().fold(f64::INFINITY, f64::min);
    let lin_max = lin_abs.iter().copied().fold(0.0, f64::max);
    let quad_abs: Vec<f64> = quad.coef[d + 1..].iter().map(|c| c.abs()).collect();
    let quad_min = quad_abs.iter().copied().fold(f64::INFINITY, f64::min);
    let quad_max = quad_abs.iter().copied().fold(0.0, f64::max);
    MetaFeatures {
        lin_adj_r2: lin.adj_r2,
        lin_intercept: Some(lin.coef[0]),
        lin_coef_min: Some(lin_min),
        lin_coef_max: Some(lin_max),
        lin_coef_max_by_min: ratio(lin_max, lin_min),
        quad_adj_r2: quad.adj_r2,
        quad_cond: ratio(quad_max, quad_min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{lhs_sample, Bounds, RngStream};

    fn design(d: usize, n: usize) -> Vec<Vec<f64>> {
        lhs_sample(n, &Bounds::cube(d, -5.0, 5.0).unwrap(), &RngStream::new(2).derive("meta")).unwrap()
    }

    #[test]
    fn exact_linear_fit() {
        let x = design(3, 50);
        let y: Vec<f64> = x.iter().map(|p| 2.0 + p[0] - 3.0 * p[1] + 0.5 * p[2]).collect();
        let f = ela_meta(&x, &y);
        assert!((f.lin_adj_r2.unwrap() - 1.0).abs() < 1e-12);
        assert!((f.lin_intercept.unwrap() - 2.0).abs() < 1e-10, "{f:?}");
        assert!((f.lin_coef_min.unwrap() - 0.5).abs() < 1e-10);
        assert!((f.lin_coef_max.unwrap() - 3.0).abs() < 1e-10);
        assert!((f.lin_coef_max_by_min.unwrap() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn sphere_is_an_exact_quadratic() {
        let x = design(4, 80);
        let y: Vec<f64> = x.iter().map(|p| p.iter().map(|v| v * v).sum()).collect();
        let f = ela_meta(&x, &y);
        assert!((f.quad_adj_r2.unwrap() - 1.0).abs() < 1e-12);
        assert!((f.quad_cond.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn condition_is_coefficient_ratio() {
        let x = design(2, 40);
        let y: Vec<f64> = x.iter().map(|p| 10.0 * p[0] * p[0] + p[1] * p[1]).collect();
        let f = ela_meta(&x, &y);
        assert!((f.quad_cond.unwrap() - 10.0).abs() < 1e-8);
    }

    #[test]
    fn singular_design_falls_back_to_ridge() {
        // second column duplicates the first
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64).collect();
        let f = ela_meta(&x, &y);
        assert!(f.lin_adj_r2.unwrap() > 0.999_999);
    }
}

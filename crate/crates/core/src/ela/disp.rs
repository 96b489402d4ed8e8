//! Dispersion of the best points relative to the whole sample.

use super::stats::{median_in_place, Distances};

pub const DISPERSION_QUANTILES: [f64; 4] = [0.02, 0.05, 0.10, 0.25];

/// Per quantile: ratio and difference of mean and median pairwise distance,
/// best subset versus all points.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionFeatures {
    pub ratio_mean: [Option<f64>; 4],
    pub ratio_median: [Option<f64>; 4],
    pub diff_mean: [Option<f64>; 4],
    pub diff_median: [Option<f64>; 4],
}

impl DispersionFeatures {
    pub fn values(&self) -> Vec<Option<f64>> {
        [self.ratio_mean, self.ratio_median, self.diff_mean, self.diff_median].concat()
    }
}

fn mean_and_median(mut dists: Vec<f64>) -> (f64, f64) {
    let mean = dists.iter().sum::<f64>() / dists.len() as f64;
    (mean, median_in_place(&mut dists))
}

/// Indices of the `k` best points by `y`, ties by index.
pub fn best_indices(y: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

pub fn dispersion_with(dist: &Distances, y: &[f64], quantiles: &[f64; 4]) -> DispersionFeatures {
    let n = y.len();
    let (all_mean, all_median) = mean_and_median(dist.all().to_vec());
    let mut out = DispersionFeatures {
        ratio_mean: [None; 4],
        ratio_median: [None; 4],
        diff_mean: [None; 4],
        diff_median: [None; 4],
    };
    for (slot, q) in quantiles.iter().enumerate() {
        let k = ((q * n as f64).ceil() as usize).min(n);
        if k < 2 {
            continue;
        }
        let mut best = best_indices(y, k);
        // condensed order, so the full subset reproduces the all-pairs sums
        best.sort_unstable();
        let mut pair = Vec::with_capacity(k * (k - 1) / 2);
        for (a, &i) in best.iter().enumerate() {
            for &j in &best[a + 1..] {
                pair.push(dist.get(i, j));
            }
        }
        let (m, med) = mean_and_median(pair);
        if all_mean > 0.0 {
            out.ratio_mean[slot] = Some(m / all_mean);
        }
        if all_median > 0.0 {
            out.ratio_median[slot] = Some(med / all_median);
        }
        out.diff_mean[slot] = Some(m - all_mean);
        out.diff_median[slot] = Some(med - all_median);
    }
    out
}

pub fn dispersion(x: &[Vec<f64>], y: &[f64], quantiles: &[f64; 4]) -> DispersionFeatures {
    dispersion_with(&Distances::new(x), y, quantiles)
}

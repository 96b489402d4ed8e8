//! y-distribution features.

use super::stats::quantile_sorted;

#[derive(Clone, Debug, PartialEq)]
pub struct DistrFeatures {
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
    pub number_of_peaks: f64,
}

impl DistrFeatures {
    pub fn values(&self) -> Vec<Option<f64>> {
        vec![self.skewness, self.kurtosis, Some(self.number_of_peaks)]
    }
}

pub fn ela_distr(y: &[f64]) -> DistrFeatures {
    let n = y.len() as f64;
    let constant = y.iter().all(|v| *v == y[0]);
    if constant {
        return DistrFeatures { skewness: None, kurtosis: None, number_of_peaks: 1.0 };
    }
    let m = y.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in y {
        let c = v - m;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    DistrFeatures {
        skewness: Some(m3 / m2.powf(1.5)),
        kurtosis: Some(m4 / (m2 * m2) - 3.0),
        number_of_peaks: number_of_peaks(y) as f64,
    }
}

/// Modes of the histogram of `y` with Freedman-Diaconis bins (Sturges when
/// the IQR vanishes, at most `n` bins) smoothed by a 3-bin moving average.
/// A mode is a plateau strictly higher than both neighbouring plateaus, with
/// zero padding beyond the edges.
pub fn number_of_peaks(y: &[f64]) -> usize {
    let n = y.len();
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    if lo == hi {
        return 1;
    }
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let bins = if iqr > 0.0 {
        let width = 2.0 * iqr / (n as f64).cbrt();
        ((hi - lo) / width).ceil() as usize
    } else {
        (n as f64).log2().ceil() as usize + 1
    }
    .clamp(1, n);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0.0f64; bins];
    for v in &sorted {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1.0;
    }
    let smoothed: Vec<f64> = (0..bins)
        .map(|k| {
            let left = if k > 0 { counts[k - 1] } else { 0.0 };
            let right = if k + 1 < bins { counts[k + 1] } else { 0.0 };
            (left + counts[k] + right) / 3.0
        })
        .collect();
    let mut runs: Vec<f64> = Vec::with_capacity(bins + 2);
    runs.push(0.0);
    for v in smoothed {
        if *runs.last().unwrap() != v {
            runs.push(v);
        }
    }
    if *runs.last().unwrap() != 0.0 {
        runs.push(0.0);
    }
    runs.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count().max(1)
}

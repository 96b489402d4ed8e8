//! Regression and classification scores.

use std::collections::BTreeSet;

/// Coefficient of determination. For a constant target the score is 1 when
/// every prediction is exact and 0 otherwise.
pub fn r2(y: &[f64], pred: &[f64]) -> f64 {
    assert_eq!(y.len(), pred.len(), "r2 needs equal lengths");
    if y.is_empty() {
        return 0.0;
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ssr: f64 = y.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum();
    if sst == 0.0 {
        return if ssr == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ssr / sst
}

/// Unweighted mean of per-class F1 over classes seen in either vector.
pub fn f1_macro(labels: &[usize], pred: &[usize]) -> f64 {
    assert_eq!(labels.len(), pred.len(), "f1_macro needs equal lengths");
    let classes: BTreeSet<usize> = labels.iter().chain(pred).copied().collect();
    if classes.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for &c in &classes {
        let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
        for (&l, &p) in labels.iter().zip(pred) {
            match (l == c, p == c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fneg += 1,
                (false, false) => {}
            }
        }
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fneg == 0 { 0.0 } else { tp as f64 / (tp + fneg) as f64 };
        if precision + recall > 0.0 {
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    total / classes.len() as f64
}

pub fn accuracy(labels: &[usize], pred: &[usize]) -> f64 {
    assert_eq!(labels.len(), pred.len(), "accuracy needs equal lengths");
    if labels.is_empty() {
        return 0.0;
    }
    labels.iter().zip(pred).filter(|(a, b)| a == b).count() as f64 / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r2_cases() {
        assert_eq!(r2(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]), 1.0);
        assert_eq!(r2(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]), 0.0);
        assert_eq!(r2(&[0.0, 1.0, 2.0], &[0.0, 1.0, 1.0]), 0.5);
        assert_eq!(r2(&[5.0, 5.0], &[5.0, 5.0]), 1.0);
        assert_eq!(r2(&[5.0, 5.0], &[5.0, 4.0]), 0.0);
    }

    #[test]
    fn f1_cases() {
        assert_eq!(f1_macro(&[0, 1, 0, 1], &[0, 1, 0, 1]), 1.0);
        assert!((f1_macro(&[0, 0, 1, 1], &[0, 0, 0, 0]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1_macro(&[0, 0], &[1, 1]), 0.0);
        assert_eq!(accuracy(&[0, 1, 1, 1], &[0, 1, 0, 1]), 0.75);
    }
}

//! Nearest-better clustering features.
//!
//! Point `j` is better than `i` when `y_j < y_i`, or `y_j == y_i` and `j < i`.
//! The overall best point uses its nearest-neighbour distance as its
//! nearest-better distance.

use super::stats::{mean, pearson, sd, Distances};

#[derive(Clone, Debug, PartialEq)]
pub struct NbcFeatures {
    pub nn_nb_mean_ratio: Option<f64>,
    pub nn_nb_sd_ratio: Option<f64>,
    pub nn_nb_cor: Option<f64>,
    pub dist_ratio_coeff_var: Option<f64>,
    pub nb_fitness_cor: Option<f64>,
}

impl NbcFeatures {
    pub fn values(&self) -> Vec<Option<f64>> {
        vec![
            self.nn_nb_mean_ratio,
            self.nn_nb_sd_ratio,
            self.nn_nb_cor,
            self.dist_ratio_coeff_var,
            self.nb_fitness_cor,
        ]
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Per-point nearest-neighbour and nearest-better distances.
pub fn nn_and_nb(dist: &Distances, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut nn = vec![f64::INFINITY; n];
    let mut nb = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dij = dist.get(i, j);
            if dij < nn[i] {
                nn[i] = dij;
            }
            let better = y[j] < y[i] || (y[j] == y[i] && j < i);
            if better && dij < nb[i] {
                nb[i] = dij;
            }
        }
        if nb[i].is_infinite() {
            nb[i] = nn[i];
        }
    }
    (nn, nb)
}

/// Ordinal ranks of `y` (0 = best), ties by index.
pub fn ordinal_ranks(y: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; y.len()];
    for (r, i) in order.into_iter().enumerate() {
        ranks[i] = r as f64;
    }
    ranks
}

pub fn nbc_with(dist: &Distances, y: &[f64]) -> NbcFeatures {
    let (nn, nb) = nn_and_nb(dist, y);
    let ratios: Vec<f64> = nn
        .iter()
        .zip(&nb)
        .map(|(a, b)| if *b == 0.0 { 1.0 } else { a / b })
        .collect();
    let nb_sd = sd(&nb);
    NbcFeatures {
        nn_nb_mean_ratio: finite(mean(&nn) / mean(&nb)),
        nn_nb_sd_ratio: if nb_sd > 0.0 { finite(sd(&nn) / nb_sd) } else { None },
        nn_nb_cor: pearson(&nn, &nb),
        dist_ratio_coeff_var: finite(sd(&ratios) / mean(&ratios)),
        nb_fitness_cor: pearson(&nb, &ordinal_ranks(y)),
    }
}

pub fn nbc(x: &[Vec<f64>], y: &[f64]) -> NbcFeatures {
    nbc_with(&Distances::new(x), y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increasing_grid_has_unit_mean_ratio() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.5]).collect();
        let y: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let (nn, nb) = nn_and_nb(&Distances::new(&x), &y);
        assert!(nn.iter().all(|v| *v == 0.5));
        assert!(nb.iter().all(|v| *v == 0.5));
        assert_eq!(nbc(&x, &y).nn_nb_mean_ratio, Some(1.0));
    }

    #[test]
    fn three_points_are_finite() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]];
        let y = vec![1.0, 0.0, 3.0];
        let f = nbc(&x, &y);
        assert!(f.nn_nb_mean_ratio.unwrap().is_finite());
        assert!(f.dist_ratio_coeff_var.unwrap().is_finite());
    }

    #[test]
    fn ties_resolved_by_index() {
        let x = vec![vec![0.0], vec![1.0], vec![3.0]];
        let y = vec![5.0, 5.0, 5.0];
        let (nn, nb) = nn_and_nb(&Distances::new(&x), &y);
        assert_eq!(nn, vec![1.0, 1.0, 2.0]);
        // point 0 is the best; 1's better set is {0}; 2's is {0, 1}
        assert_eq!(nb, vec![1.0, 1.0, 2.0]);
    }
}

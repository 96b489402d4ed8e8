//! Information-content features.
//!
//! Points are ordered by a greedy nearest-neighbour tour that starts at the
//! best point (ties by lowest index at every step). With `Δ_k = y_{k+1} - y_k`
//! along the tour and threshold `ε`, each step gets a symbol in {-1, 0, 1}
//! (`Δ < -ε`, `|Δ| ≤ ε`, `Δ > ε`). Then
//!
//! * `H(ε) = -Σ_{a≠b} p_ab log_6 p_ab` over consecutive symbol pairs;
//! * `M(ε) = μ / (n - 1)` where `μ` is the length of the symbol string after
//!   dropping zeros and collapsing repeats (partial information content).
//!
//! Reported: `h_max = max H`, `eps_max = log10` of its first maximizing `ε`,
//! `eps_s = log10` of the smallest `ε` with `H(ε) < 0.05`, `m0 = M(0)` and
//! `eps_ratio = log10` of the smallest `ε` with `M(ε) ≤ m0 / 2`.
//! The `ε` grid is `10^(-5 + k/10)`, `k = 0..=100`.

use super::stats::Distances;

pub const SETTLING_SENSITIVITY: f64 = 0.05;
pub const INFO_SENSITIVITY: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct InfoContentFeatures {
    pub h_max: Option<f64>,
    pub eps_s: Option<f64>,
    pub eps_max: Option<f64>,
    pub eps_ratio: Option<f64>,
    pub m0: Option<f64>,
}

impl InfoContentFeatures {
    pub fn values(&self) -> Vec<Option<f64>> {
        vec![self.h_max, self.eps_s, self.eps_max, self.eps_ratio, self.m0]
    }
}

pub fn epsilon_grid() -> Vec<f64> {
    (0..=100).map(|k| 10f64.powf(-5.0 + k as f64 / 10.0)).collect()
}

pub fn nearest_neighbor_tour(dist: &Distances, y: &[f64]) -> Vec<usize> {
    let n = y.len();
    let start = (0..n).min_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b))).unwrap();
    let mut visited = vec![false; n];
    let mut tour = Vec::with_capacity(n);
    let mut current = start;
    visited[current] = true;
    tour.push(current);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if !visited[j] {
                let dj = dist.get(current, j);
                if dj < best_d {
                    best_d = dj;
                    best = j;
                }
            }
        }
        visited[best] = true;
        tour.push(best);
        current = best;
    }
    tour
}

fn symbols(deltas: &[f64], eps: f64) -> Vec<i8> {
    deltas
        .iter()
        .map(|&d| {
            if d < -eps {
                -1
            } else if d > eps {
                1
            } else {
                0
            }
        })
        .collect()
}

/// Pair entropy of a symbol string, excluding equal-symbol pairs.
pub fn pair_entropy(sym: &[i8]) -> f64 {
    if sym.len() < 2 {
        return 0.0;
    }
    let mut counts = [[0usize; 3]; 3];
    for w in sym.windows(2) {
        counts[(w[0] + 1) as usize][(w[1] + 1) as usize] += 1;
    }
    let total = (sym.len() - 1) as f64;
    let mut h = 0.0;
    for (a, row) in counts.iter().enumerate() {
        for (b, &c) in row.iter().enumerate() {
            if a != b && c > 0 {
                let p = c as f64 / total;
                h -= p * p.ln() / 6f64.ln();
            }
        }
    }
    h
}

pub fn partial_information(sym: &[i8]) -> f64 {
    let mut last = 0i8;
    let mut mu = 0usize;
    for &s in sym {
        if s != 0 && s != last {
            mu += 1;
            last = s;
        }
    }
    mu as f64 / sym.len() as f64
}

pub fn info_content_with(dist: &Distances, y: &[f64]) -> InfoContentFeatures {
    let tour = nearest_neighbor_tour(dist, y);
    let deltas: Vec<f64> = tour.windows(2).map(|w| y[w[1]] - y[w[0]]).collect();
    let grid = epsilon_grid();
    let entropies: Vec<f64> = grid.iter().map(|&e| pair_entropy(&symbols(&deltas, e))).collect();
    let m0 = partial_information(&symbols(&deltas, 0.0));

    let mut h_max = f64::NEG_INFINITY;
    let mut eps_max = grid[0];
    for (&h, &e) in entropies.iter().zip(&grid) {
        if h > h_max {
            h_max = h;
            eps_max = e;
        }
    }
    let eps_s = entropies
        .iter()
        .zip(&grid)
        .find(|(h, _)| **h < SETTLING_SENSITIVITY)
        .map(|(_, e)| e.log10());
    let eps_ratio = grid
        .iter()
        .find(|&&e| partial_information(&symbols(&deltas, e)) <= INFO_SENSITIVITY * m0)
        .map(|e| e.log10());
    InfoContentFeatures {
        h_max: Some(h_max),
        eps_s,
        eps_max: Some(eps_max.log10()),
        eps_ratio,
        m0: Some(m0),
    }
}

pub fn info_content(x: &[Vec<f64>], y: &[f64]) -> InfoContentFeatures {
    info_content_with(&Distances::new(x), y)
}

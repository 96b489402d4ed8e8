//! CART trees with exhaustive sorted split search.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TreeParams;

/// Cap on the magnitude of a Newton leaf step.
pub const NEWTON_STEP_LIMIT: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    /// Regression value, or class index for classification trees.
    Leaf { value: f64 },
}

/// Nodes in pre-order; the root is node 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// What the rows of a tree are fitted against.
pub enum Target<'a> {
    /// Variance reduction. Leaves hold the mean, or the clamped Newton step
    /// `sum(y) / sum(h)` when second-order weights are given.
    Regression { y: &'a [f64], hessian: Option<&'a [f64]> },
    /// Gini impurity; leaves hold the majority class (lowest index on ties).
    Classification { y: &'a [usize], n_classes: usize },
}

/// Grows one tree on `rows` of `x` (duplicates allowed, as in a bootstrap).
pub fn grow(x: &[Vec<f64>], target: &Target, rows: &[usize], params: &TreeParams, rng: &mut ChaCha8Rng) -> Tree {
    let p = x.first().map_or(0, Vec::len);
    let mut builder = Builder {
        x,
        target,
        params,
        rng,
        p,
        k: params.features_per_split.count(p),
        nodes: Vec::new(),
        scratch: Vec::with_capacity(rows.len()),
    };
    builder.build(rows.to_vec(), 0);
    Tree { nodes: builder.nodes }
}

struct Builder<'a, 'r> {
    x: &'a [Vec<f64>],
    target: &'a Target<'a>,
    params: &'a TreeParams,
    rng: &'r mut ChaCha8Rng,
    p: usize,
    k: usize,
    nodes: Vec<Node>,
    scratch: Vec<(f64, usize)>,
}

impl Builder<'_, '_> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        match self.best_split(&rows, depth) {
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| self.x[i][feature] <= threshold);
                drop(rows);
                let left = self.build(l, depth + 1);
                let right = self.build(r, depth + 1);
                self.nodes[id] = Node::Split { feature, threshold, left, right };
            }
            None => self.nodes[id] = Node::Leaf { value: self.leaf_value(&rows) },
        }
        id
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        match self.target {
            Target::Regression { y, .. } => rows.iter().all(|&i| y[i] == y[rows[0]]),
            Target::Classification { y, .. } => rows.iter().all(|&i| y[i] == y[rows[0]]),
        }
    }

    fn leaf_value(&self, rows: &[usize]) -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        match self.target {
            Target::Regression { y, hessian: None } => rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64,
            Target::Regression { y, hessian: Some(h) } => {
                let g: f64 = rows.iter().map(|&i| y[i]).sum();
                let w: f64 = rows.iter().map(|&i| h[i]).sum();
                if w > 0.0 {
                    (g / w).clamp(-NEWTON_STEP_LIMIT, NEWTON_STEP_LIMIT)
                } else {
                    0.0
                }
            }
            Target::Classification { y, n_classes } => {
                let mut counts = vec![0usize; *n_classes];
                for &i in rows {
                    counts[y[i]] += 1;
                }
                majority(&counts) as f64
            }
        }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        if self.k >= self.p {
            (0..self.p).collect()
        } else {
            let mut f = index::sample(self.rng, self.p, self.k).into_vec();
            f.sort_unstable();
            f
        }
    }

    /// Best `(feature, threshold)` by impurity decrease, or `None` for a leaf.
    fn best_split(&mut self, rows: &[usize], depth: usize) -> Option<(usize, f64)> {
        let n = rows.len();
        let msl = self.params.min_samples_leaf.max(1);
        if n < 2 * msl || self.params.max_depth.is_some_and(|d| depth >= d) || self.p == 0 || self.is_pure(rows) {
            return None;
        }
        let features = self.candidate_features();
        let mut best: Option<(usize, f64)> = None;
        let mut best_gain = 0.0;
        let mut scratch = std::mem::take(&mut self.scratch);
        match self.target {
            Target::Regression { y, .. } => {
                let total: f64 = rows.iter().map(|&i| y[i]).sum();
                let parent = total * total / n as f64;
                let mean = total / n as f64;
                let sse: f64 = rows.iter().map(|&i| (y[i] - mean).powi(2)).sum();
                let min_gain = 1e-12 * sse;
                for &f in &features {
                    sorted_column(self.x, rows, f, &mut scratch);
                    let mut sl = 0.0;
                    for i in 0..n - 1 {
                        sl += y[scratch[i].1];
                        let nl = i + 1;
                        if scratch[i].0 == scratch[i + 1].0 || nl < msl || n - nl < msl {
                            continue;
                        }
                        let sr = total - sl;
                        let gain = sl * sl / nl as f64 + sr * sr / (n - nl) as f64 - parent;
                        if gain > best_gain && gain > min_gain {
                            best_gain = gain;
                            best = Some((f, midpoint(scratch[i].0, scratch[i + 1].0)));
                        }
                    }
                }
            }
            Target::Classification { y, n_classes } => {
                let mut total = vec![0i64; *n_classes];
                for &i in rows {
                    total[y[i]] += 1;
                }
                let sq_total: i64 = total.iter().map(|c| c * c).sum();
                let parent = sq_total as f64 / n as f64;
                let mut left = vec![0i64; *n_classes];
                for &f in &features {
                    sorted_column(self.x, rows, f, &mut scratch);
                    left.iter_mut().for_each(|c| *c = 0);
                    let (mut sql, mut sqr) = (0i64, sq_total);
                    for i in 0..n - 1 {
                        let c = y[scratch[i].1];
                        sql += 2 * left[c] + 1;
                        sqr -= 2 * (total[c] - left[c]) - 1;
                        left[c] += 1;
                        let nl = i + 1;
                        if scratch[i].0 == scratch[i + 1].0 || nl < msl || n - nl < msl {
                            continue;
                        }
                        let gain = sql as f64 / nl as f64 + sqr as f64 / (n - nl) as f64 - parent;
                        if gain > best_gain && gain > 1e-12 {
                            best_gain = gain;
                            best = Some((f, midpoint(scratch[i].0, scratch[i + 1].0)));
                        }
                    }
                }
            }
        }
        self.scratch = scratch;
        best
    }
}

fn sorted_column(x: &[Vec<f64>], rows: &[usize], f: usize, out: &mut Vec<(f64, usize)>) {
    out.clear();
    out.extend(rows.iter().map(|&i| (x[i][f], i)));
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
}

/// Threshold in `[a, b)` for `a < b`.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) * 0.5;
    if m >= b {
        a
    } else {
        m
    }
}

/// Index of the largest count; lowest index wins ties.
pub fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::MaxFeatures;
    use crate::sampling::RngStream;

    fn params(depth: Option<usize>) -> TreeParams {
        TreeParams { max_depth: depth, n_trees: 1, bootstrap: false, ..TreeParams::default() }
    }

    #[test]
    fn threshold_split() {
        let x: Vec<Vec<f64>> = (-5..5).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (-5..5).map(|i| usize::from(i >= 0)).collect();
        let rows: Vec<usize> = (0..10).collect();
        let t = grow(&x, &Target::Classification { y: &y, n_classes: 2 }, &rows, &params(Some(1)), &mut RngStream::new(0).rng());
        assert_eq!(t.nodes.len(), 3);
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(t.predict(xi), *yi as f64);
        }
        assert_eq!(t.nodes[0], Node::Split { feature: 0, threshold: -0.5, left: 1, right: 2 });
    }

    #[test]
    fn constant_target_is_one_leaf() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let y = vec![3.25; 20];
        let rows: Vec<usize> = (0..20).collect();
        let t = grow(&x, &Target::Regression { y: &y, hessian: None }, &rows, &params(None), &mut RngStream::new(0).rng());
        assert_eq!(t.nodes, vec![Node::Leaf { value: 3.25 }]);
    }

    #[test]
    fn pure_node_never_splits() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let y = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let rows: Vec<usize> = (0..8).collect();
        let t = grow(&x, &Target::Classification { y: &y, n_classes: 2 }, &rows, &params(None), &mut RngStream::new(0).rng());
        assert_eq!(t.leaf_count(), 2);
    }

    #[test]
    fn min_samples_leaf_respected() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = vec![100.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let rows: Vec<usize> = (0..10).collect();
        let p = TreeParams { min_samples_leaf: 3, ..params(None) };
        let t = grow(&x, &Target::Regression { y: &y, hessian: None }, &rows, &p, &mut RngStream::new(0).rng());
        // the isolated spike cannot be cut off alone
        assert!(t.predict(&[0.0]) < 100.0);
    }

    #[test]
    fn feature_subsampling_uses_stream() {
        let x: Vec<Vec<f64>> = (0..50).map(|i| (0..6).map(|j| ((i * (j + 3)) % 17) as f64).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| r.iter().sum()).collect();
        let rows: Vec<usize> = (0..50).collect();
        let p = TreeParams { features_per_split: MaxFeatures::Fraction(0.34), ..params(None) };
        let t = |s| grow(&x, &Target::Regression { y: &y, hessian: None }, &rows, &p, &mut RngStream::new(s).rng());
        assert_eq!(t(1), t(1));
        assert_ne!(t(1), t(2));
    }

    #[test]
    fn majority_ties_go_low() {
        assert_eq!(majority(&[2, 3, 3]), 1);
        assert_eq!(majority(&[0, 0]), 0);
    }
}

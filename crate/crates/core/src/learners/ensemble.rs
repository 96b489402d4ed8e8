//! Single trees, bagged forests and gradient-boosted trees.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, majority, Target, Tree};
use super::{LearnerKind, Targets, TreeParams};
use crate::sampling::RngStream;

/// Probability clamp for the boosting start score.
const PRIOR_CLAMP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ensemble {
    Tree { tree: Tree },
    /// Mean (regression) or plurality vote (classification).
    Forest { trees: Vec<Tree> },
    /// One score column for regression, one per class otherwise;
    /// `stages[t][c]` is the tree added to column `c` at stage `t`.
    Gbt { init: Vec<f64>, learning_rate: f64, stages: Vec<Vec<Tree>> },
}

impl Ensemble {
    /// Regression value or class index (as f64) for an imputed row.
    pub fn predict(&self, row: &[f64], n_classes: usize) -> f64 {
        match self {
            Ensemble::Tree { tree } => tree.predict(row),
            Ensemble::Forest { trees } => {
                if n_classes == 0 {
                    trees.iter().map(|t| t.predict(row)).sum::<f64>() / trees.len() as f64
                } else {
                    let mut votes = vec![0usize; n_classes];
                    for t in trees {
                        votes[t.predict(row) as usize] += 1;
                    }
                    majority(&votes) as f64
                }
            }
            Ensemble::Gbt { .. } => {
                let scores = self.scores(row);
                if n_classes == 0 {
                    scores[0]
                } else {
                    argmax(&scores) as f64
                }
            }
        }
    }

    /// Boosting score columns (the raw prediction for the other kinds).
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        match self {
            Ensemble::Gbt { init, learning_rate, stages } => {
                let mut s = init.clone();
                for stage in stages {
                    for (c, t) in stage.iter().enumerate() {
                        s[c] += learning_rate * t.predict(row);
                    }
                }
                s
            }
            _ => vec![self.predict(row, 0)],
        }
    }

    pub fn tree_count(&self) -> usize {
        match self {
            Ensemble::Tree { .. } => 1,
            Ensemble::Forest { trees } => trees.len(),
            Ensemble::Gbt { stages, .. } => stages.iter().map(Vec::len).sum(),
        }
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Fits on already-imputed rows. A single tree uses the same stream as
/// tree 0 of a forest, so a one-tree forest without bootstrap is that tree.
pub fn fit_ensemble(kind: LearnerKind, x: &[Vec<f64>], targets: &Targets, params: &TreeParams, stream: &RngStream) -> Ensemble {
    let m = x.len();
    let all: Vec<usize> = (0..m).collect();
    match kind {
        LearnerKind::Tree => {
            let mut rng = stream.derive("tree0").rng();
            Ensemble::Tree { tree: grow_plain(x, targets, &all, params, &mut rng) }
        }
        LearnerKind::Forest => {
            let trees = (0..params.n_trees)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream.derive(format!("tree{t}")).rng();
                    let rows: Vec<usize> = if params.bootstrap {
                        (0..m).map(|_| rng.random_range(0..m)).collect()
                    } else {
                        all.clone()
                    };
                    grow_plain(x, targets, &rows, params, &mut rng)
                })
                .collect();
            Ensemble::Forest { trees }
        }
        LearnerKind::Gbt => match targets {
            Targets::Real(y) => boost_regression(x, y, params, stream),
            Targets::Labels { values, n_classes } => boost_classification(x, values, *n_classes, params, stream),
        },
    }
}

fn grow_plain(x: &[Vec<f64>], targets: &Targets, rows: &[usize], params: &TreeParams, rng: &mut ChaCha8Rng) -> Tree {
    let target = match targets {
        Targets::Real(y) => Target::Regression { y, hessian: None },
        Targets::Labels { values, n_classes } => Target::Classification { y: values, n_classes: *n_classes },
    };
    grow(x, &target, rows, params, rng)
}

fn stage_rows(m: usize, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if fraction >= 1.0 {
        return (0..m).collect();
    }
    let k = ((fraction * m as f64).round() as usize).clamp(1, m);
    let mut rows = index::sample(rng, m, k).into_vec();
    rows.sort_unstable();
    rows
}

/// Squared-loss boosting: each stage fits the current residuals.
fn boost_regression(x: &[Vec<f64>], y: &[f64], params: &TreeParams, stream: &RngStream) -> Ensemble {
    let m = y.len();
    let init = y.iter().sum::<f64>() / m as f64;
    let mut f = vec![init; m];
    let mut stages = Vec::with_capacity(params.n_trees);
    let mut residual = vec![0.0; m];
    for t in 0..params.n_trees {
        let mut rng = stream.derive(format!("stage{t}")).rng();
        let rows = stage_rows(m, params.subsample, &mut rng);
        for i in 0..m {
            residual[i] = y[i] - f[i];
        }
        let tree = grow(x, &Target::Regression { y: &residual, hessian: None }, &rows, params, &mut rng);
        for i in 0..m {
            f[i] += params.learning_rate * tree.predict(&x[i]);
        }
        stages.push(vec![tree]);
    }
    Ensemble::Gbt { init: vec![init], learning_rate: params.learning_rate, stages }
}

/// One-vs-rest logistic boosting with Newton leaf values.
fn boost_classification(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: &TreeParams, stream: &RngStream) -> Ensemble {
    let m = y.len();
    let init: Vec<f64> = (0..n_classes)
        .map(|c| {
            let p = (y.iter().filter(|&&v| v == c).count() as f64 / m as f64).clamp(PRIOR_CLAMP, 1.0 - PRIOR_CLAMP);
            (p / (1.0 - p)).ln()
        })
        .collect();
    let mut f: Vec<Vec<f64>> = init.iter().map(|&s| vec![s; m]).collect();
    let mut stages = Vec::with_capacity(params.n_trees);
    let mut grad = vec![0.0; m];
    let mut hess = vec![0.0; m];
    for t in 0..params.n_trees {
        let mut stage = Vec::with_capacity(n_classes);
        for (c, fc) in f.iter_mut().enumerate() {
            let mut rng = stream.derive(format!("stage{t}/class{c}")).rng();
            let rows = stage_rows(m, params.subsample, &mut rng);
            for i in 0..m {
                let p = sigmoid(fc[i]);
                grad[i] = f64::from(u8::from(y[i] == c)) - p;
                hess[i] = p * (1.0 - p);
            }
            let tree = grow(x, &Target::Regression { y: &grad, hessian: Some(&hess) }, &rows, params, &mut rng);
            for i in 0..m {
                fc[i] += params.learning_rate * tree.predict(&x[i]);
            }
            stage.push(tree);
        }
        stages.push(stage);
    }
    Ensemble::Gbt { init, learning_rate: params.learning_rate, stages }
}

//! Nested leave-one-group-out CV on two seeded synthetic problems: two
//! Gaussian classes with means at -1.5 and +1.5 on every axis (separated by
//! the hyperplane sum(x) = 0) for the forest, and a quadratic surface for gbt.
//!
//! Run with `cargo run --release --example nested_cv`.

use std::time::Instant;

use pias_workbench::learners::{accuracy, nested_logo_cv, r2, Dataset, LearnerKind, ParamGrid, Targets};
use pias_workbench::sampling::RngStream;
use rand::Rng;
use rand_distr::StandardNormal;

fn synthetic(m: usize, p: usize, seed: u64, label: impl Fn(&[f64]) -> f64) -> (Vec<String>, Vec<Vec<f64>>, Vec<f64>, Vec<u32>) {
    let mut rng = RngStream::new(seed).rng();
    let x: Vec<Vec<f64>> = (0..m).map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let y = x.iter().map(|r| label(r)).collect();
    let keys = (0..m).map(|i| format!("row{i:04}")).collect();
    let groups = (0..m).map(|i| (i % 10) as u32 + 1).collect();
    (keys, x, y, groups)
}

fn main() -> pias_workbench::Result<()> {
    let p = 10;
    let (keys, mut x, _, groups) = synthetic(200, p, 7, |_| 0.0);
    let labels: Vec<usize> = (0..200).map(|i| i % 2).collect();
    for (row, &c) in x.iter_mut().zip(&labels) {
        let shift = if c == 1 { 1.5 } else { -1.5 };
        row.iter_mut().for_each(|v| *v += shift);
    }
    let separable = x.iter().zip(&labels).all(|(r, &c)| (r.iter().sum::<f64>() > 0.0) == (c == 1));
    println!("separated by sum(x) = 0: {separable}");
    let names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    let data = Dataset::new(keys, x, Targets::Labels { values: labels, n_classes: 2 }, groups, names)?;

    let grid = ParamGrid { n_trees: vec![50], min_samples_leaf: vec![1, 3], ..ParamGrid::default_forest() }.expand()?;
    let t = Instant::now();
    let cv = nested_logo_cv(&data, LearnerKind::Forest, &grid, &RngStream::new(1))?;
    let truth = match data.targets() {
        Targets::Labels { values, .. } => values.clone(),
        Targets::Real(_) => unreachable!(),
    };
    let pred: Vec<usize> = cv.predictions.iter().map(|v| *v as usize).collect();
    println!("forest, separable 2-class: outer-CV accuracy {:.3} ({:.1?})", accuracy(&truth, &pred), t.elapsed());
    println!("fold  chosen  inner_f1  outer_f1");
    for f in &cv.folds {
        println!("{:>4}  {:>6}  {:>8.3}  {:>8.3}", f.group, f.chosen, f.inner_score().unwrap_or(f64::NAN), f.outer_score.unwrap_or(f64::NAN));
    }

    let (keys, x, y, groups) = synthetic(200, 4, 11, |r| r[0] * r[0] + 0.5 * r[1] * r[1] - r[0] * r[1] + 0.3 * r[2]);
    let names: Vec<String> = (0..4).map(|j| format!("x{j}")).collect();
    let data = Dataset::new(keys, x, Targets::Real(y), groups, names)?;
    let grid = ParamGrid { n_trees: vec![100], ..ParamGrid::default_gbt() }.expand()?;
    let t = Instant::now();
    let cv = nested_logo_cv(&data, LearnerKind::Gbt, &grid, &RngStream::new(2))?;
    let truth = match data.targets() {
        Targets::Real(v) => v.clone(),
        Targets::Labels { .. } => unreachable!(),
    };
    println!("gbt, quadratic surface: outer-CV R² {:.3} ({:.1?})", r2(&truth, &cv.predictions), t.elapsed());
    Ok(())
}

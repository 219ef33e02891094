//! Gradient boosting: training MSE never rises with more trees, a single
//! unrestricted tree at learning rate 1 interpolates, and the 4-point split
//! example is reproduced exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slit_core::surrogate::{fit, BoostParams, TrainingSet, TreeNode};

use crate::common::ensure;

const DATASETS: u64 = 20;
/// Round-off allowance for "exact" and "non-increasing" comparisons,
/// relative to the target variance or magnitude.
const ROUNDOFF: f64 = 1e-12;

fn dataset(seed: u64) -> TrainingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(30..150);
    let d = rng.random_range(1..6);
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mut set = TrainingSet::new();
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + (3.0 * x[0]).sin() + rng.random_range(-0.2..0.2);
        set.push(x, y);
    }
    set
}

fn mse_of(pred: impl Fn(&[f64]) -> f64, data: &TrainingSet) -> f64 {
    data.features
        .iter()
        .zip(&data.targets)
        .map(|(x, y)| (pred(x) - y).powi(2))
        .sum::<f64>()
        / data.len() as f64
}

fn monotone_mse() -> Result<usize, String> {
    let mut trees = 0;
    for seed in 0..DATASETS {
        let data = dataset(seed);
        let params = BoostParams {
            n_trees: 60,
            max_depth: 1 + (seed as usize % 4),
            learning_rate: [0.05, 0.1, 0.3, 1.0][seed as usize % 4],
            min_leaf: 1 + (seed as usize % 5),
        };
        let model = fit(&data, &params).map_err(|e| e.to_string())?;
        trees += model.trees.len();
        let staged: Vec<f64> = (0..=model.trees.len())
            .map(|m| mse_of(|x| model.predict_staged(x, m), &data))
            .collect();
        let library = model.staged_mse(&data);
        let slack = ROUNDOFF * staged[0];
        for (m, w) in staged.windows(2).enumerate() {
            ensure(w[1] <= w[0] + slack, || {
                format!("dataset {seed}: mse rose from {} to {} at tree {}", w[0], w[1], m + 1)
            })?;
            ensure((library[m + 1] - staged[m + 1]).abs() <= slack, || {
                format!("dataset {seed}: staged_mse {} vs recomputed {}", library[m + 1], staged[m + 1])
            })?;
        }
        ensure(staged.last() < staged.first(), || format!("dataset {seed}: no improvement"))?;
    }
    Ok(trees)
}

fn interpolation() -> Result<(), String> {
    for seed in 100..100 + DATASETS {
        let data = dataset(seed);
        let params = BoostParams {
            n_trees: 1,
            max_depth: usize::MAX,
            learning_rate: 1.0,
            min_leaf: 1,
        };
        let model = fit(&data, &params).map_err(|e| e.to_string())?;
        let scale = data.targets.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        for (x, y) in data.features.iter().zip(&data.targets) {
            let p = model.predict(x).map_err(|e| e.to_string())?;
            ensure((p - y).abs() <= ROUNDOFF * scale, || format!("dataset {seed}: {p} vs target {y}"))?;
        }
    }
    Ok(())
}

fn four_points() -> Result<(), String> {
    let mut data = TrainingSet::new();
    for (x, y) in [(0.0, 0.0), (1.0, 0.0), (2.0, 10.0), (3.0, 10.0)] {
        data.push(vec![x], y);
    }
    let params = BoostParams {
        n_trees: 1,
        max_depth: 1,
        learning_rate: 1.0,
        min_leaf: 1,
    };
    let model = fit(&data, &params).map_err(|e| e.to_string())?;
    let root = &model.trees[0].nodes[0];
    ensure(
        matches!(root, TreeNode::Split { feature: 0, threshold, .. } if *threshold == 1.5),
        || format!("root is {root:?}, expected a split at x = 1.5"),
    )?;
    for (x, y) in [(0.0, 0.0), (1.0, 0.0), (2.0, 10.0), (3.0, 10.0), (0.4, 0.0)] {
        let p = model.predict(&[x]).map_err(|e| e.to_string())?;
        ensure(p == y, || format!("predict({x}) = {p}, expected {y}"))?;
    }
    Ok(())
}

pub fn run() -> Result<String, String> {
    let trees = monotone_mse()?;
    interpolation()?;
    four_points()?;
    Ok(format!(
        "{DATASETS} datasets non-increasing ({trees} trees), interpolation, 4-point split at 1.5"
    ))
}

//! Least-squares gradient boosting over regression trees.
//!
//! Each tree is fit to the residuals of the ensemble so far. Splits are
//! exact: every midpoint between consecutive distinct feature values is
//! scored by squared-error reduction, and ties go to the lowest feature
//! index, then the lowest threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SurrogateError {
    #[error("training set is empty")]
    Empty,
    #[error("training set has {rows} rows, fewer than min_leaf = {min_leaf}")]
    TooFewRows { rows: usize, min_leaf: usize },
    #[error("feature vector has length {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("row {0} contains a non-finite value")]
    NonFinite(usize),
    #[error("invalid boosting parameters: {0}")]
    InvalidParams(String),
    #[error("model json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostParams {
    pub n_trees: usize,
    /// `usize::MAX` grows trees until leaves are pure or too small.
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            n_trees: 50,
            max_depth: 3,
            learning_rate: 0.1,
            min_leaf: 5,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<(), SurrogateError> {
        if self.min_leaf == 0 {
            return Err(SurrogateError::InvalidParams("min_leaf must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(SurrogateError::InvalidParams("learning_rate must be in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Nodes are stored in pre-order; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
    pub max_depth: usize,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn is_stump(&self) -> bool {
        self.nodes.len() == 1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl TrainingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) {
        self.features.push(x);
        self.targets.push(y);
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn clear(&mut self) {
        self.features.clear();
        self.targets.clear();
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.features.first().map(Vec::len)
    }

    fn validate(&self) -> Result<usize, SurrogateError> {
        let dim = self.feature_dim().ok_or(SurrogateError::Empty)?;
        for (i, (x, y)) in self.features.iter().zip(&self.targets).enumerate() {
            if x.len() != dim {
                return Err(SurrogateError::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
                return Err(SurrogateError::NonFinite(i));
            }
        }
        Ok(dim)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradBoostModel {
    pub base_value: f64,
    pub trees: Vec<RegressionTree>,
    pub learning_rate: f64,
    /// Requested ensemble size; fitting stops early once no split helps.
    pub n_trees: usize,
    pub feature_dim: usize,
}

impl GradBoostModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64, SurrogateError> {
        if x.len() != self.feature_dim {
            return Err(SurrogateError::DimensionMismatch {
                expected: self.feature_dim,
                got: x.len(),
            });
        }
        Ok(self.predict_staged(x, self.trees.len()))
    }

    /// Prediction using only the first `m` trees.
    pub fn predict_staged(&self, x: &[f64], m: usize) -> f64 {
        self.base_value + self.learning_rate * self.trees[..m].iter().map(|t| t.predict(x)).sum::<f64>()
    }

    /// Training MSE after 0, 1, .., `trees.len()` trees.
    pub fn staged_mse(&self, data: &TrainingSet) -> Vec<f64> {
        let n = data.len() as f64;
        let mut pred = vec![self.base_value; data.len()];
        let mse = |p: &[f64]| p.iter().zip(&data.targets).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
        let mut out = vec![mse(&pred)];
        for t in &self.trees {
            for (p, x) in pred.iter_mut().zip(&data.features) {
                *p += self.learning_rate * t.predict(x);
            }
            out.push(mse(&pred));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SurrogateError> {
        serde_json::from_str(text).map_err(|e| SurrogateError::Json(e.to_string()))
    }
}

/// Per-feature sample orderings shared by every tree of a fit.
struct Presorted {
    order: Vec<Vec<u32>>,
}

impl Presorted {
    fn new(x: &[Vec<f64>], dim: usize) -> Self {
        let order = (0..dim)
            .map(|f| {
                let mut idx: Vec<u32> = (0..x.len() as u32).collect();
                idx.sort_by(|&a, &b| x[a as usize][f].total_cmp(&x[b as usize][f]));
                idx
            })
            .collect();
        Self { order }
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    r: &'a [f64],
    sorted: &'a Presorted,
    member: Vec<bool>,
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<TreeNode>,
}

impl TreeBuilder<'_> {
    fn best_split(&mut self, samples: &[u32]) -> Option<(usize, f64)> {
        let n = samples.len();
        if n < 2 * self.min_leaf {
            return None;
        }
        for &s in samples {
            self.member[s as usize] = true;
        }
        let total: f64 = samples.iter().map(|&s| self.r[s as usize]).sum();
        let parent = total * total / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        for (f, order) in self.sorted.order.iter().enumerate() {
            let mut left_sum = 0.0;
            let mut left_n = 0usize;
            let mut prev: Option<f64> = None;
            for &s in order {
                let s = s as usize;
                if !self.member[s] {
                    continue;
                }
                let v = self.x[s][f];
                if let Some(p) = prev {
                    if v > p && left_n >= self.min_leaf && n - left_n >= self.min_leaf {
                        let right_sum = total - left_sum;
                        let gain = left_sum * left_sum / left_n as f64
                            + right_sum * right_sum / (n - left_n) as f64
                            - parent;
                        if gain > 0.0 && best.is_none_or(|(g, _, _)| gain > g) {
                            best = Some((gain, f, 0.5 * (p + v)));
                        }
                    }
                }
                left_sum += self.r[s];
                left_n += 1;
                prev = Some(v);
            }
        }
        for &s in samples {
            self.member[s as usize] = false;
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, samples: Vec<u32>, depth: usize) -> usize {
        let id = self.nodes.len();
        let mean = samples.iter().map(|&s| self.r[s as usize]).sum::<f64>() / samples.len() as f64;
        self.nodes.push(TreeNode::Leaf { value: mean });
        if depth >= self.max_depth {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&samples) else {
            return id;
        };
        let (l, r): (Vec<u32>, Vec<u32>) = samples
            .into_iter()
            .partition(|&s| self.x[s as usize][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

pub fn fit(data: &TrainingSet, params: &BoostParams) -> Result<GradBoostModel, SurrogateError> {
    params.validate()?;
    let dim = data.validate()?;
    let n = data.len();
    if n < params.min_leaf {
        return Err(SurrogateError::TooFewRows {
            rows: n,
            min_leaf: params.min_leaf,
        });
    }
    let base_value = data.targets.iter().sum::<f64>() / n as f64;
    let mut model = GradBoostModel {
        base_value,
        trees: Vec::new(),
        learning_rate: params.learning_rate,
        n_trees: params.n_trees,
        feature_dim: dim,
    };
    if data.targets.iter().all(|&y| y == data.targets[0]) {
        return Ok(model);
    }
    let sorted = Presorted::new(&data.features, dim);
    let mut pred = vec![base_value; n];
    let mut resid = vec![0.0; n];
    for _ in 0..params.n_trees {
        for i in 0..n {
            resid[i] = data.targets[i] - pred[i];
        }
        let mut b = TreeBuilder {
            x: &data.features,
            r: &resid,
            sorted: &sorted,
            member: vec![false; n],
            max_depth: params.max_depth,
            min_leaf: params.min_leaf,
            nodes: Vec::new(),
        };
        b.grow((0..n as u32).collect(), 0);
        let tree = RegressionTree {
            nodes: b.nodes,
            max_depth: params.max_depth,
        };
        if tree.is_stump() {
            break;
        }
        for (p, x) in pred.iter_mut().zip(&data.features) {
            *p += params.learning_rate * tree.predict(x);
        }
        model.trees.push(tree);
    }
    Ok(model)
}

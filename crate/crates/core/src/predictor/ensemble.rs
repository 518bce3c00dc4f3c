use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{RegressionTree, TreeParams};
use super::{FeatureVector, Label, PredictorError, Result, Sample, TrainingDataset};
use crate::exec::Execution;
use crate::raycaster::FEATURE_COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RandomForest,
    GradientBoosted,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::RandomForest => "random_forest",
            Family::GradientBoosted => "gradient_boosted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub max_features: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 16,
            min_samples_leaf: 2,
            max_features: FEATURE_COUNT.div_ceil(3),
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub learning_rate: f64,
    /// Fraction of training rows drawn (without replacement) per round.
    pub subsample: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_rounds: 100,
            max_depth: 6,
            min_samples_leaf: 1,
            learning_rate: 0.2,
            subsample: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Hyperparameters {
    RandomForest(ForestParams),
    GradientBoosted(BoostParams),
}

impl Hyperparameters {
    pub fn family(&self) -> Family {
        match self {
            Hyperparameters::RandomForest(_) => Family::RandomForest,
            Hyperparameters::GradientBoosted(_) => Family::GradientBoosted,
        }
    }

    pub fn max_depth(&self) -> usize {
        match self {
            Hyperparameters::RandomForest(p) => p.max_depth,
            Hyperparameters::GradientBoosted(p) => p.max_depth,
        }
    }
}

/// A trained model and everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeEnsemble {
    pub family: Family,
    pub label: Label,
    pub seed: u64,
    pub hyperparameters: Hyperparameters,
    /// Initial prediction for boosting; unused by forests.
    pub base_score: f64,
    /// Set when every training label was identical.
    pub degenerate: bool,
    pub trees: Vec<RegressionTree>,
}

impl TreeEnsemble {
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        match self.hyperparameters {
            Hyperparameters::RandomForest(_) => {
                if self.trees.is_empty() {
                    return self.base_score;
                }
                self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
            }
            Hyperparameters::GradientBoosted(p) => self
                .trees
                .iter()
                .fold(self.base_score, |acc, t| acc + p.learning_rate * t.predict(x)),
        }
    }

    pub fn predict_rows(&self, rows: &[Sample]) -> Vec<f64> {
        rows.iter().map(|s| self.predict(&s.features)).collect()
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn features_used(&self) -> [bool; FEATURE_COUNT] {
        let mut used = [false; FEATURE_COUNT];
        for t in &self.trees {
            t.mark_used(&mut used);
        }
        used
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: TreeEnsemble = serde_json::from_str(s)?;
        if m.family != m.hyperparameters.family() {
            return Err(PredictorError::Schema("family does not match hyperparameters".into()));
        }
        if !m.base_score.is_finite() {
            return Err(PredictorError::Schema("non-finite base_score".into()));
        }
        for (i, t) in m.trees.iter().enumerate() {
            t.check()
                .map_err(|e| PredictorError::Schema(format!("tree {i}: {e}")))?;
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn columns(rows: &[Sample]) -> (Vec<FeatureVector>, Vec<f64>) {
    rows.iter().map(|s| (s.features, s.label)).unzip()
}

fn constant_label(y: &[f64]) -> Option<f64> {
    let first = *y.first()?;
    y.iter().all(|&v| v == first).then_some(first)
}

fn check_rows(ds: &TrainingDataset) -> Result<()> {
    if ds.train.is_empty() {
        return Err(PredictorError::TooFewRows { needed: 1, got: 0 });
    }
    Ok(())
}

pub fn train_random_forest(ds: &TrainingDataset, params: &ForestParams, seed: u64) -> Result<TreeEnsemble> {
    train_random_forest_with(ds, params, seed, Execution::default())
}

/// Bootstrap-aggregated CART trees. Tree `i` draws from stream `i` of a
/// ChaCha generator keyed by `seed`, so the result does not depend on how the
/// trees are scheduled.
pub fn train_random_forest_with(
    ds: &TrainingDataset,
    params: &ForestParams,
    seed: u64,
    exec: Execution,
) -> Result<TreeEnsemble> {
    check_rows(ds)?;
    let (x, y) = columns(&ds.train);
    let mut model = TreeEnsemble {
        family: Family::RandomForest,
        label: ds.label,
        seed,
        hyperparameters: Hyperparameters::RandomForest(*params),
        base_score: 0.0,
        degenerate: false,
        trees: Vec::new(),
    };
    if let Some(c) = constant_label(&y) {
        log::warn!("{}: all training labels equal {c}; fitting a constant model", ds.label);
        model.degenerate = true;
        model.base_score = c;
        model.trees = vec![RegressionTree::leaf(c)];
        return Ok(model);
    }
    let tp = TreeParams {
        max_depth: Some(params.max_depth),
        min_samples_leaf: params.min_samples_leaf,
        max_features: Some(params.max_features),
    };
    let n = x.len();
    model.trees = exec.map_range(params.n_trees, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let idx: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        RegressionTree::fit(&x, &y, &idx, tp, &mut rng)
    });
    Ok(model)
}

pub fn train_boosted_trees(ds: &TrainingDataset, params: &BoostParams, seed: u64) -> Result<TreeEnsemble> {
    train_boosted_trees_with(ds, params, seed, Execution::default())
}

/// Least-squares gradient boosting: start from the mean label and fit each
/// round's tree to the current residuals. Rounds are inherently sequential;
/// `exec` is accepted for signature symmetry.
pub fn train_boosted_trees_with(
    ds: &TrainingDataset,
    params: &BoostParams,
    seed: u64,
    _exec: Execution,
) -> Result<TreeEnsemble> {
    check_rows(ds)?;
    if !(0.0..=1.0).contains(&params.subsample) || params.subsample == 0.0 {
        return Err(PredictorError::Schema(format!(
            "subsample must be in (0, 1], got {}",
            params.subsample
        )));
    }
    let (x, y) = columns(&ds.train);
    let n = y.len();
    let base = y.iter().sum::<f64>() / n as f64;
    let mut model = TreeEnsemble {
        family: Family::GradientBoosted,
        label: ds.label,
        seed,
        hyperparameters: Hyperparameters::GradientBoosted(*params),
        base_score: base,
        degenerate: false,
        trees: Vec::new(),
    };
    if let Some(c) = constant_label(&y) {
        log::warn!("{}: all training labels equal {c}; fitting a constant model", ds.label);
        model.degenerate = true;
        model.base_score = c;
        return Ok(model);
    }
    if params.learning_rate == 0.0 {
        return Ok(model);
    }
    let tp = TreeParams {
        max_depth: Some(params.max_depth),
        min_samples_leaf: params.min_samples_leaf,
        max_features: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pred = vec![base; n];
    let n_sub = ((params.subsample * n as f64).round() as usize).clamp(1, n);
    for _ in 0..params.n_rounds {
        let residual: Vec<f64> = y.iter().zip(&pred).map(|(a, p)| a - p).collect();
        if residual.iter().all(|&r| r == 0.0) {
            break;
        }
        let idx: Vec<usize> = if n_sub < n {
            let mut v = index::sample(&mut rng, n, n_sub).into_vec();
            v.sort_unstable();
            v
        } else {
            (0..n).collect()
        };
        let tree = RegressionTree::fit(&x, &residual, &idx, tp, &mut rng);
        for (p, xi) in pred.iter_mut().zip(&x) {
            *p += params.learning_rate * tree.predict(xi);
        }
        model.trees.push(tree);
    }
    Ok(model)
}

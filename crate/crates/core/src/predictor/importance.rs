use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{derive_seed, r_squared, Label, PredictorError, Result, Sample, TreeEnsemble};
use crate::exec::Execution;
use crate::raycaster::{FEATURE_COUNT, FEATURE_NAMES};

/// Fewest validation rows a permutation estimate is computed on.
pub const MIN_PFI_ROWS: usize = 10;
pub const DEFAULT_REPETITIONS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureImportance {
    pub feature: &'static str,
    pub index: usize,
    /// Baseline R² minus mean permuted R².
    pub importance: f64,
    /// 1 = most important; ties keep feature order.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceReport {
    pub label: Label,
    pub baseline_r2: f64,
    pub repetitions: usize,
    pub seed: u64,
    /// In canonical feature order.
    pub features: Vec<FeatureImportance>,
}

impl ImportanceReport {
    pub fn ranking(&self) -> Vec<&FeatureImportance> {
        let mut v: Vec<_> = self.features.iter().collect();
        v.sort_by_key(|f| f.rank);
        v
    }

    pub fn importance(&self, feature: usize) -> f64 {
        self.features[feature].importance
    }
}

pub fn permutation_importance(
    model: &TreeEnsemble,
    rows: &[Sample],
    repetitions: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    permutation_importance_with(model, rows, repetitions, seed, Execution::default())
}

/// Shuffles one column at a time and records the drop in R². Feature `f`
/// always draws its permutations from the same derived seed, so results do not
/// depend on scheduling.
pub fn permutation_importance_with(
    model: &TreeEnsemble,
    rows: &[Sample],
    repetitions: usize,
    seed: u64,
    exec: Execution,
) -> Result<ImportanceReport> {
    if rows.len() < MIN_PFI_ROWS {
        return Err(PredictorError::TooFewRows {
            needed: MIN_PFI_ROWS,
            got: rows.len(),
        });
    }
    let repetitions = repetitions.max(1);
    let truth: Vec<f64> = rows.iter().map(|s| s.label).collect();
    let baseline = r_squared(&model.predict_rows(rows), &truth)?;

    let scores: Vec<Result<f64>> = exec.map_range(FEATURE_COUNT, |f| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, f as u64));
        let mut column: Vec<f64> = rows.iter().map(|s| s.features[f]).collect();
        let mut total = 0.0;
        for _ in 0..repetitions {
            column.shuffle(&mut rng);
            let pred: Vec<f64> = rows
                .iter()
                .zip(&column)
                .map(|(s, &v)| {
                    let mut x = s.features;
                    x[f] = v;
                    model.predict(&x)
                })
                .collect();
            total += r_squared(&pred, &truth)?;
        }
        Ok(baseline - total / repetitions as f64)
    });

    let mut features = Vec::with_capacity(FEATURE_COUNT);
    for (i, s) in scores.into_iter().enumerate() {
        features.push(FeatureImportance {
            feature: FEATURE_NAMES[i],
            index: i,
            importance: s?,
            rank: 0,
        });
    }
    let mut order: Vec<usize> = (0..FEATURE_COUNT).collect();
    order.sort_by(|&a, &b| {
        features[b]
            .importance
            .total_cmp(&features[a].importance)
            .then(a.cmp(&b))
    });
    for (r, &i) in order.iter().enumerate() {
        features[i].rank = r + 1;
    }
    Ok(ImportanceReport {
        label: model.label,
        baseline_r2: baseline,
        repetitions,
        seed,
        features,
    })
}

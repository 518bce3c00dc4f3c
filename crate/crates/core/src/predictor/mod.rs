//! Satisfaction prediction: response trimming, per-scenario aggregation, an
//! 8:2 train/validation split, random-forest and gradient-boosted regression
//! trees, validation-based model selection, and permutation feature
//! importance.

mod data;
mod ensemble;
mod importance;
mod metrics;
mod pipeline;
mod split;
mod tree;
mod trim;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use data::{
    aggregate_scenarios, build_rows, read_feature_table, read_responses, write_feature_table, write_responses,
    FeatureTable, FeatureVector, ResponseRecord, Sample, ScenarioMeans,
};
pub use ensemble::{
    train_boosted_trees, train_boosted_trees_with, train_random_forest, train_random_forest_with, BoostParams, Family,
    ForestParams, Hyperparameters, TreeEnsemble,
};
pub use importance::{permutation_importance, permutation_importance_with, FeatureImportance, ImportanceReport};
pub use metrics::{mae, metrics, r_squared, rmse, Metrics};
pub use pipeline::{
    candidate_grid, predict_scores, run_pipeline, select_model, train_candidates, CandidateScore, LabelOutcome,
    ModelSet, PipelineConfig, PipelineReport, SatisfactionScores, Selection,
};
pub use split::{split_dataset, SplitTag, TrainingDataset};
pub use tree::{RegressionTree, TreeNode, TreeParams};
pub use trim::{trim_responses, TrimReport};

/// Lowest and highest rating on the satisfaction scale.
pub const RATING_RANGE: (f64, f64) = (-5.0, 5.0);

/// The four survey labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Overall,
    Content,
    Access,
    Privacy,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Overall, Label::Content, Label::Access, Label::Privacy];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Overall => "overall",
            Label::Content => "content",
            Label::Access => "access",
            Label::Privacy => "privacy",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown label `{s}`"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PredictorError {
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("R² is undefined: the reference values have zero variance")]
    ZeroVariance,
    #[error("length mismatch: {0} predictions vs {1} reference values")]
    LengthMismatch(usize, usize),
    #[error("no model for label `{0}`")]
    ModelMissing(Label),
    #[error("expected {expected} features, got {got}")]
    FeatureCount { expected: usize, got: usize },
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = PredictorError> = std::result::Result<T, E>;

/// Stable per-task seed derivation (splitmix64 finalizer).
pub(crate) fn derive_seed(master: u64, task: u64) -> u64 {
    let mut z = master ^ task.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

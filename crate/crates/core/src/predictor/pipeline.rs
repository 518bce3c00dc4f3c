use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::importance::DEFAULT_REPETITIONS;
use super::{
    aggregate_scenarios, build_rows, derive_seed, metrics, permutation_importance_with, split_dataset,
    train_boosted_trees_with, train_random_forest_with, trim_responses, BoostParams, Family, FeatureTable,
    FeatureVector, ForestParams, Hyperparameters, ImportanceReport, Label, PredictorError, ResponseRecord, Result,
    Sample, TrainingDataset, TreeEnsemble, TrimReport, RATING_RANGE,
};
use crate::exec::Execution;

/// Every knob of the training run; mirrors the TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub pfi_repetitions: usize,
    pub forest: ForestParams,
    pub boosted: BoostParams,
    /// Depths tried for each family; the grid is families × depths.
    pub forest_depths: Vec<usize>,
    pub boosted_depths: Vec<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            pfi_repetitions: DEFAULT_REPETITIONS,
            forest: ForestParams::default(),
            boosted: BoostParams::default(),
            forest_depths: vec![8, 12, 16],
            boosted_depths: vec![3, 6, 9],
        }
    }
}

pub fn candidate_grid(cfg: &PipelineConfig) -> Vec<Hyperparameters> {
    let forests = cfg.forest_depths.iter().map(|&d| {
        Hyperparameters::RandomForest(ForestParams {
            max_depth: d,
            ..cfg.forest
        })
    });
    let boosted = cfg.boosted_depths.iter().map(|&d| {
        Hyperparameters::GradientBoosted(BoostParams {
            max_depth: d,
            ..cfg.boosted
        })
    });
    forests.chain(boosted).collect()
}

/// Trains each grid entry with its own derived seed.
pub fn train_candidates(
    ds: &TrainingDataset,
    grid: &[Hyperparameters],
    seed: u64,
    exec: Execution,
) -> Result<Vec<TreeEnsemble>> {
    exec.map_range(grid.len(), |i| {
        let s = derive_seed(seed, i as u64);
        match &grid[i] {
            Hyperparameters::RandomForest(p) => train_random_forest_with(ds, p, s, exec),
            Hyperparameters::GradientBoosted(p) => train_boosted_trees_with(ds, p, s, exec),
        }
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateScore {
    pub family: Family,
    pub max_depth: usize,
    pub n_trees: usize,
    pub r2: Option<f64>,
    pub mae: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub model: TreeEnsemble,
    pub chosen: usize,
    pub scores: Vec<CandidateScore>,
}

/// Highest validation R² wins; ties go to the random forest, then to the
/// model with fewer trees. If R² is undefined (constant validation labels)
/// the lowest squared error decides instead.
pub fn select_model(candidates: Vec<TreeEnsemble>, validation: &[Sample]) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(PredictorError::Schema("no candidate models to select from".into()));
    }
    let truth: Vec<f64> = validation.iter().map(|s| s.label).collect();
    let scores = candidates
        .iter()
        .map(|m| {
            let mt = metrics(&m.predict_rows(validation), &truth)?;
            Ok(CandidateScore {
                family: m.family,
                max_depth: m.hyperparameters.max_depth(),
                n_trees: m.n_trees(),
                r2: mt.r2,
                mae: mt.mae,
                rmse: mt.rmse,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let better = |a: &CandidateScore, b: &CandidateScore| {
        let ra = a.r2.unwrap_or(f64::NEG_INFINITY);
        let rb = b.r2.unwrap_or(f64::NEG_INFINITY);
        ra.total_cmp(&rb)
            .then(b.rmse.total_cmp(&a.rmse))
            .then(b.family.cmp(&a.family))
            .then(b.n_trees.cmp(&a.n_trees))
            .is_gt()
    };
    let mut chosen = 0;
    for i in 1..scores.len() {
        if better(&scores[i], &scores[chosen]) {
            chosen = i;
        }
    }
    let model = candidates.into_iter().nth(chosen).expect("index in range");
    Ok(Selection { model, chosen, scores })
}

/// One trained model per label.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelSet {
    pub models: BTreeMap<Label, TreeEnsemble>,
}

impl ModelSet {
    pub fn insert(&mut self, model: TreeEnsemble) {
        self.models.insert(model.label, model);
    }

    pub fn get(&self, label: Label) -> Result<&TreeEnsemble> {
        self.models.get(&label).ok_or(PredictorError::ModelMissing(label))
    }

    pub fn file_name(label: Label) -> String {
        format!("model_{label}.json")
    }

    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        std::fs::create_dir_all(dir.as_ref())?;
        for (label, m) in &self.models {
            m.save(dir.as_ref().join(Self::file_name(*label)))?;
        }
        Ok(())
    }

    /// Loads whichever `model_<label>.json` files exist in `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let mut set = ModelSet::default();
        for label in Label::ALL {
            let p = dir.as_ref().join(Self::file_name(label));
            if p.exists() {
                let m = TreeEnsemble::load(&p)?;
                if m.label != label {
                    return Err(PredictorError::Schema(format!(
                        "{} holds a `{}` model",
                        p.display(),
                        m.label
                    )));
                }
                set.insert(m);
            }
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SatisfactionScores {
    pub overall: f64,
    pub content: f64,
    pub access: f64,
    pub privacy: f64,
}

impl SatisfactionScores {
    pub fn get(&self, label: Label) -> f64 {
        match label {
            Label::Overall => self.overall,
            Label::Content => self.content,
            Label::Access => self.access,
            Label::Privacy => self.privacy,
        }
    }
}

/// Runs all four models and clamps to the rating scale.
pub fn predict_scores(models: &ModelSet, x: &FeatureVector) -> Result<SatisfactionScores> {
    let p = |l| -> Result<f64> { Ok(models.get(l)?.predict(x).clamp(RATING_RANGE.0, RATING_RANGE.1)) };
    Ok(SatisfactionScores {
        overall: p(Label::Overall)?,
        content: p(Label::Content)?,
        access: p(Label::Access)?,
        privacy: p(Label::Privacy)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelOutcome {
    pub label: Label,
    pub rows: usize,
    pub train_rows: usize,
    pub validation_rows: usize,
    pub selected: CandidateScore,
    pub candidates: Vec<CandidateScore>,
    pub importance: Option<ImportanceReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub trim: TrimReport,
    pub scenarios: usize,
    pub labels: Vec<LabelOutcome>,
}

/// trim → aggregate → split → train the candidate grid → select, per label.
pub fn run_pipeline(
    responses: &[ResponseRecord],
    features: &FeatureTable,
    cfg: &PipelineConfig,
    exec: Execution,
) -> Result<(ModelSet, PipelineReport)> {
    let (trimmed, trim) = trim_responses(responses);
    let means = aggregate_scenarios(&trimmed);
    let grid = candidate_grid(cfg);
    let mut set = ModelSet::default();
    let mut labels = Vec::new();
    for label in Label::ALL {
        let k = label.index() as u64;
        let rows = build_rows(&means, features, label)?;
        let n = rows.len();
        let ds = split_dataset(rows, label, derive_seed(cfg.seed, 100 + k))?;
        let cands = train_candidates(&ds, &grid, derive_seed(cfg.seed, 200 + k), exec)?;
        let sel = select_model(cands, &ds.validation)?;
        let importance = match permutation_importance_with(
            &sel.model,
            &ds.validation,
            cfg.pfi_repetitions,
            derive_seed(cfg.seed, 300 + k),
            exec,
        ) {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("{label}: permutation importance skipped: {e}");
                None
            }
        };
        log::info!(
            "{label}: {} rows, selected {} depth {} (validation R² {:?})",
            n,
            sel.model.family.as_str(),
            sel.model.hyperparameters.max_depth(),
            sel.scores[sel.chosen].r2
        );
        labels.push(LabelOutcome {
            label,
            rows: n,
            train_rows: ds.train.len(),
            validation_rows: ds.validation.len(),
            selected: sel.scores[sel.chosen].clone(),
            candidates: sel.scores,
            importance,
        });
        set.insert(sel.model);
    }
    Ok((
        set,
        PipelineReport {
            seed: cfg.seed,
            trim,
            scenarios: means.len(),
            labels,
        },
    ))
}

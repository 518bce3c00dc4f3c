use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Label, PredictorError, Result, Sample};

/// Minimum rows for a split.
pub const MIN_ROWS: usize = 5;
const TRAIN_FRACTION_NUM: usize = 8;
const TRAIN_FRACTION_DEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Validation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDataset {
    pub label: Label,
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
}

impl TrainingDataset {
    /// Everything in the train partition; handy for tests and toy fits.
    pub fn train_only(label: Label, rows: Vec<Sample>) -> Self {
        TrainingDataset {
            label,
            train: rows,
            validation: Vec::new(),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = (SplitTag, &Sample)> {
        self.train
            .iter()
            .map(|s| (SplitTag::Train, s))
            .chain(self.validation.iter().map(|s| (SplitTag::Validation, s)))
    }
}

/// Seeded shuffle, then the first 80% (rounded to nearest) train and the rest
/// validation.
pub fn split_dataset(rows: Vec<Sample>, label: Label, seed: u64) -> Result<TrainingDataset> {
    let n = rows.len();
    if n < MIN_ROWS {
        return Err(PredictorError::TooFewRows {
            needed: MIN_ROWS,
            got: n,
        });
    }
    let mut rows = rows;
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (n * TRAIN_FRACTION_NUM + TRAIN_FRACTION_DEN / 2) / TRAIN_FRACTION_DEN;
    let validation = rows.split_off(n_train);
    Ok(TrainingDataset {
        label,
        train: rows,
        validation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> Vec<Sample> {
        (0..n)
            .map(|i| Sample {
                scenario_id: format!("s{i}"),
                features: [i as f64; 23],
                label: i as f64 / n as f64,
            })
            .collect()
    }

    #[test]
    fn eight_to_two() {
        let ds = split_dataset(rows(590), Label::Overall, 1).unwrap();
        assert_eq!((ds.train.len(), ds.validation.len()), (472, 118));
        let ds = split_dataset(rows(10), Label::Overall, 1).unwrap();
        assert_eq!((ds.train.len(), ds.validation.len()), (8, 2));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = split_dataset(rows(50), Label::Content, 7).unwrap();
        let b = split_dataset(rows(50), Label::Content, 7).unwrap();
        assert_eq!(a, b);
        let c = split_dataset(rows(50), Label::Content, 8).unwrap();
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(
            split_dataset(rows(4), Label::Access, 0),
            Err(PredictorError::TooFewRows { needed: 5, got: 4 })
        ));
    }

    #[test]
    fn partitions_cover_every_row_once() {
        let ds = split_dataset(rows(37), Label::Privacy, 3).unwrap();
        let mut ids: Vec<_> = ds.rows().map(|(_, s)| s.scenario_id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 37);
    }
}

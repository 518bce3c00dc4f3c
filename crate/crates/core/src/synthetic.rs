//! Synthetic view scenarios with a known rating signal. Each label depends on
//! exactly three features; everything else is plausible-looking noise. Used to
//! exercise the training pipeline offline. Not derived from any survey.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::predictor::{FeatureTable, FeatureVector, Label, ResponseRecord, Sample};
use crate::raycaster::{ABSENT_DISTANCE, FEATURE_COUNT};

// Feature indices used by the signals.
const WN: usize = 0;
const WAS: usize = 1;
const Z1R: usize = 2;
const Z2R: usize = 3;
const Z3R: usize = 4;
const Z4R: usize = 5;
const BR: usize = 6;
const TR: usize = 8;
const SR: usize = 13;
const FH: usize = 21;
const SC: usize = 22;

/// The three features each label's signal reads, in [`Label::ALL`] order.
pub const SIGNAL_FEATURES: [[usize; 3]; 4] = [[SR, Z1R, FH], [TR, Z3R, WAS], [Z2R, Z4R, SC], [BR, WN, Z1R]];

const FH_RANGE: (f64, f64) = (1.5, 45.0);
const WAS_RANGE: (f64, f64) = (1.0, 15.0);
/// Chance each of the eight view categories appears.
const PRESENCE: [f64; 8] = [0.7, 0.15, 0.6, 0.2, 0.5, 0.15, 0.3, 0.85];
/// Ratio index → distance slot (B, E, T, G, W, D carry distances).
const DISTANCE_SLOT: [Option<usize>; 8] = [Some(14), Some(15), Some(16), None, Some(17), Some(18), Some(19), None];

fn unit(x: f64, (lo, hi): (f64, f64)) -> f64 {
    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Noiseless mean rating for `label`, always inside [−5, 5].
pub fn signal(label: Label, x: &FeatureVector) -> f64 {
    let y = match label {
        Label::Overall => -5.0 + 4.0 * x[SR] + 3.0 * x[Z1R] + 3.0 * unit(x[FH], FH_RANGE),
        Label::Content => -5.0 + 5.0 * x[TR] + 3.0 * x[Z3R] + 2.0 * unit(x[WAS], WAS_RANGE),
        Label::Access => -5.0 + 4.0 * x[Z2R] + 4.0 * x[Z4R] + x[SC],
        Label::Privacy => -5.0 + 5.0 * (1.0 - x[BR]) + (x[WN] - 1.0) + 2.0 * x[Z1R],
    };
    y.clamp(-5.0, 5.0)
}

/// One plausible 23-feature vector.
pub fn feature_vector<R: Rng>(rng: &mut R) -> FeatureVector {
    let mut x = [0.0; FEATURE_COUNT];
    x[WN] = rng.random_range(1..=4) as f64;
    x[WAS] = rng.random_range(WAS_RANGE.0..WAS_RANGE.1);
    for z in [Z1R, Z2R, Z3R, Z4R] {
        x[z] = rng.random_range(0.0..=1.0);
    }
    let mut weights = [0.0; 8];
    for (w, p) in weights.iter_mut().zip(PRESENCE) {
        if rng.random_bool(p) {
            *w = rng.random_range(0.05..1.0);
        }
    }
    if weights.iter().all(|&w| w == 0.0) {
        weights[7] = 1.0;
    }
    let total: f64 = weights.iter().sum();
    let mut present = 0;
    for (k, w) in weights.iter().enumerate() {
        x[6 + k] = w / total;
        if *w > 0.0 {
            present += 1;
        }
        if let Some(slot) = DISTANCE_SLOT[k] {
            x[slot] = if *w > 0.0 {
                // Log-uniform between 3 m and 400 m.
                (rng.random_range(3f64.ln()..400f64.ln())).exp()
            } else {
                ABSENT_DISTANCE
            };
        }
    }
    x[20] = present as f64;
    x[FH] = rng.random_range(FH_RANGE.0..FH_RANGE.1);
    x[SC] = rng.random_range(0..=2) as f64;
    x
}

pub fn scenario_id(i: usize) -> String {
    format!("syn-{i:04}")
}

pub fn synthetic_features(n: usize, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| (scenario_id(i), feature_vector(&mut rng))).collect()
}

/// Rows whose label is exactly the signal.
pub fn noiseless_rows(n: usize, label: Label, seed: u64) -> Vec<Sample> {
    synthetic_features(n, seed)
        .into_iter()
        .map(|(scenario_id, features)| Sample {
            scenario_id,
            label: signal(label, &features),
            features,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseNoise {
    pub participants: (usize, usize),
    pub sd: f64,
    /// Chance a rating is replaced by a uniform draw on the scale.
    pub outlier_rate: f64,
    pub missing_rate: f64,
}

impl Default for ResponseNoise {
    fn default() -> Self {
        ResponseNoise {
            participants: (6, 12),
            sd: 0.8,
            outlier_rate: 0.04,
            missing_rate: 0.03,
        }
    }
}

/// Individual survey responses scattered around the signal, rounded to the
/// nearest half point.
pub fn synthetic_responses(features: &FeatureTable, noise: ResponseNoise, seed: u64) -> Vec<ResponseRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.sd.max(0.0)).expect("finite sd");
    let mut out = Vec::new();
    let mut participant = 0usize;
    for (id, x) in features {
        let k = rng.random_range(noise.participants.0..=noise.participants.1.max(noise.participants.0));
        for _ in 0..k {
            participant += 1;
            let mut ratings = [None; 4];
            for (slot, label) in ratings.iter_mut().zip(Label::ALL) {
                if rng.random_bool(noise.missing_rate) {
                    continue;
                }
                let v = if rng.random_bool(noise.outlier_rate) {
                    rng.random_range(-5.0..=5.0)
                } else {
                    signal(label, x) + normal.sample(&mut rng)
                };
                *slot = Some(((v * 2.0).round() / 2.0).clamp(-5.0, 5.0));
            }
            out.push(ResponseRecord {
                scenario_id: id.clone(),
                participant_id: format!("p{participant:05}"),
                ratings,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_are_consistent() {
        let t = synthetic_features(200, 1);
        for x in t.values() {
            let sum: f64 = x[6..14].iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            let en = x[6..14].iter().filter(|&&r| r > 0.0).count() as f64;
            assert_eq!(x[20], en);
            for (k, slot) in DISTANCE_SLOT.iter().enumerate() {
                if let Some(s) = slot {
                    assert_eq!(x[6 + k] > 0.0, x[*s] != ABSENT_DISTANCE);
                }
            }
        }
    }

    #[test]
    fn signals_stay_on_scale_and_span_it() {
        let t = synthetic_features(500, 2);
        for label in Label::ALL {
            let ys: Vec<f64> = t.values().map(|x| signal(label, x)).collect();
            assert!(ys.iter().all(|y| (-5.0..=5.0).contains(y)));
            let (lo, hi) = ys.iter().fold((f64::MAX, f64::MIN), |(a, b), &y| (a.min(y), b.max(y)));
            assert!(hi - lo > 4.0, "{label}: {lo}..{hi}");
        }
    }

    #[test]
    fn responses_are_seeded() {
        let t = synthetic_features(10, 3);
        let a = synthetic_responses(&t, ResponseNoise::default(), 4);
        let b = synthetic_responses(&t, ResponseNoise::default(), 4);
        assert_eq!(a, b);
        assert!(a
            .iter()
            .flat_map(|r| r.ratings)
            .flatten()
            .all(|v| (-5.0..=5.0).contains(&v)));
    }
}

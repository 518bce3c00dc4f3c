use std::collections::BTreeMap;

use serde::Serialize;

use super::{Label, ResponseRecord};

/// Groups whose surviving responses spread wider than this are dropped.
pub const MAX_GROUP_STD: f64 = 3.0;
const IQR_FENCE: f64 = 1.5;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrimReport {
    /// Non-missing ratings seen.
    pub ratings_in: usize,
    pub missing: usize,
    pub iqr_trimmed: usize,
    pub std_trimmed: usize,
    pub groups_excluded: usize,
    /// Scenarios left with no rating at all.
    pub empty_scenarios: Vec<String>,
}

impl TrimReport {
    pub fn trimmed(&self) -> usize {
        self.iqr_trimmed + self.std_trimmed
    }

    pub fn trimmed_fraction(&self) -> f64 {
        if self.ratings_in == 0 {
            0.0
        } else {
            self.trimmed() as f64 / self.ratings_in as f64
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Outlier trimming within each scenario and label: responses outside the
/// 1.5·IQR fences are removed (repeated until none are), then any group whose
/// remaining standard deviation exceeds 3 is removed entirely. Trimmed ratings
/// become `None`; records with nothing left are dropped.
pub fn trim_responses(records: &[ResponseRecord]) -> (Vec<ResponseRecord>, TrimReport) {
    let mut report = TrimReport::default();
    let mut out: Vec<ResponseRecord> = records.to_vec();

    let mut groups: BTreeMap<(&str, Label), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        for label in Label::ALL {
            if r.rating(label).is_some() {
                report.ratings_in += 1;
                groups.entry((r.scenario_id.as_str(), label)).or_default().push(i);
            } else {
                report.missing += 1;
            }
        }
    }

    for ((_, label), mut members) in groups {
        let k = label.index();
        loop {
            let mut vals: Vec<f64> = members.iter().map(|&i| records[i].ratings[k].unwrap()).collect();
            vals.sort_unstable_by(f64::total_cmp);
            let (q1, q3) = (quantile(&vals, 0.25), quantile(&vals, 0.75));
            let iqr = q3 - q1;
            let (lo, hi) = (q1 - IQR_FENCE * iqr, q3 + IQR_FENCE * iqr);
            let before = members.len();
            members.retain(|&i| {
                let v = records[i].ratings[k].unwrap();
                let keep = v >= lo && v <= hi;
                if !keep {
                    out[i].ratings[k] = None;
                }
                keep
            });
            report.iqr_trimmed += before - members.len();
            if members.len() == before {
                break;
            }
        }
        let vals: Vec<f64> = members.iter().map(|&i| records[i].ratings[k].unwrap()).collect();
        if sample_std(&vals) > MAX_GROUP_STD {
            report.std_trimmed += members.len();
            report.groups_excluded += 1;
            for &i in &members {
                out[i].ratings[k] = None;
            }
        }
    }

    let mut alive: BTreeMap<&str, bool> = BTreeMap::new();
    for r in &out {
        *alive.entry(r.scenario_id.as_str()).or_default() |= r.ratings.iter().any(Option::is_some);
    }
    report.empty_scenarios = alive
        .iter()
        .filter(|(_, &a)| !a)
        .map(|(id, _)| id.to_string())
        .collect();
    for id in &report.empty_scenarios {
        log::warn!("scenario `{id}` has no responses left after trimming; excluded");
    }
    out.retain(|r| r.ratings.iter().any(Option::is_some));
    (out, report)
}

use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{Label, PredictorError, Result, RATING_RANGE};
use crate::raycaster::{ABSENT_DISTANCE, FEATURE_COUNT, FEATURE_NAMES};

pub type FeatureVector = [f64; FEATURE_COUNT];

/// Feature vectors keyed by scenario id.
pub type FeatureTable = BTreeMap<String, FeatureVector>;

const RESPONSE_HEADER: [&str; 6] = [
    "scenario_id",
    "participant_id",
    "overall",
    "content",
    "access",
    "privacy",
];

/// One participant's ratings of one scenario, in [`Label::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRecord {
    pub scenario_id: String,
    pub participant_id: String,
    pub ratings: [Option<f64>; 4],
}

impl ResponseRecord {
    pub fn rating(&self, label: Label) -> Option<f64> {
        self.ratings[label.index()]
    }
}

/// Mean rating per label for one scenario; `None` where every response was
/// missing or trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMeans {
    pub scenario_id: String,
    pub means: [Option<f64>; 4],
}

/// One training row.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub scenario_id: String,
    pub features: FeatureVector,
    pub label: f64,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "-" | "NA" | "na" | "NaN")
}

fn parse_number(cell: &str, what: impl Fn() -> String) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| PredictorError::Schema(format!("{}: `{cell}` is not a number", what())))?;
    if !v.is_finite() {
        return Err(PredictorError::Schema(format!("{}: `{cell}` is not finite", what())));
    }
    Ok(v)
}

fn check_header(headers: &csv::StringRecord, expected: &[&str], file: &str) -> Result<()> {
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(PredictorError::Schema(format!(
            "{file} header must be `{}`, got `{}`",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

/// Reads survey responses (`scenario_id,participant_id,overall,content,access,privacy`).
/// Empty cells are missing responses.
pub fn read_responses(reader: impl Read) -> Result<Vec<ResponseRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    // A file with no content at all holds no responses.
    if rdr.headers()?.is_empty() {
        return Ok(Vec::new());
    }
    check_header(rdr.headers()?, &RESPONSE_HEADER, "responses")?;
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let mut ratings = [None; 4];
        for (k, slot) in ratings.iter_mut().enumerate() {
            let cell = rec.get(k + 2).unwrap_or("");
            if is_missing(cell) {
                continue;
            }
            let v = parse_number(cell, || {
                format!("responses line {line}, column {}", RESPONSE_HEADER[k + 2])
            })?;
            if !(RATING_RANGE.0..=RATING_RANGE.1).contains(&v) {
                return Err(PredictorError::Schema(format!(
                    "responses line {line}: rating {v} outside [-5, 5]"
                )));
            }
            *slot = Some(v);
        }
        out.push(ResponseRecord {
            scenario_id: rec[0].trim().to_string(),
            participant_id: rec[1].trim().to_string(),
            ratings,
        });
    }
    Ok(out)
}

pub fn write_responses(records: &[ResponseRecord], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESPONSE_HEADER)?;
    for r in records {
        let mut row = vec![r.scenario_id.clone(), r.participant_id.clone()];
        row.extend(r.ratings.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a feature table: `scenario_id` followed by the 23 feature columns in
/// canonical order. Empty or `-` cells become [`ABSENT_DISTANCE`].
pub fn read_feature_table(reader: impl Read) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != FEATURE_COUNT + 1 {
        return Err(PredictorError::FeatureCount {
            expected: FEATURE_COUNT,
            got: headers.len().saturating_sub(1),
        });
    }
    let mut expected = vec!["scenario_id"];
    expected.extend(FEATURE_NAMES);
    check_header(&headers, &expected, "features")?;
    let mut table = FeatureTable::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        if rec.len() != FEATURE_COUNT + 1 {
            return Err(PredictorError::FeatureCount {
                expected: FEATURE_COUNT,
                got: rec.len().saturating_sub(1),
            });
        }
        let mut v = [0.0; FEATURE_COUNT];
        for (k, slot) in v.iter_mut().enumerate() {
            let cell = &rec[k + 1];
            *slot = if is_missing(cell) {
                ABSENT_DISTANCE
            } else {
                parse_number(cell, || format!("features line {line}, column {}", FEATURE_NAMES[k]))?
            };
        }
        let id = rec[0].trim().to_string();
        if table.insert(id.clone(), v).is_some() {
            return Err(PredictorError::Schema(format!(
                "features: duplicate scenario_id `{id}`"
            )));
        }
    }
    Ok(table)
}

pub fn write_feature_table(table: &FeatureTable, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["scenario_id"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header)?;
    for (id, v) in table {
        let mut row = vec![id.clone()];
        row.extend(v.iter().enumerate().map(|(i, x)| {
            if (14..20).contains(&i) && *x == ABSENT_DISTANCE {
                String::new()
            } else {
                x.to_string()
            }
        }));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Arithmetic mean per scenario and label, in first-seen scenario order.
pub fn aggregate_scenarios(records: &[ResponseRecord]) -> Vec<ScenarioMeans> {
    let mut order: Vec<&str> = Vec::new();
    let mut sums: BTreeMap<&str, [(f64, usize); 4]> = BTreeMap::new();
    for r in records {
        let entry = sums.entry(&r.scenario_id).or_insert_with(|| {
            order.push(&r.scenario_id);
            [(0.0, 0); 4]
        });
        for (slot, v) in entry.iter_mut().zip(r.ratings) {
            if let Some(v) = v {
                slot.0 += v;
                slot.1 += 1;
            }
        }
    }
    order
        .into_iter()
        .map(|id| {
            let s = sums[id];
            ScenarioMeans {
                scenario_id: id.to_string(),
                means: s.map(|(sum, n)| (n > 0).then(|| sum / n as f64)),
            }
        })
        .collect()
}

/// Joins scenario means with their feature vectors for one label. Scenarios
/// without a mean for the label are skipped; scenarios without features are
/// an error.
pub fn build_rows(means: &[ScenarioMeans], features: &FeatureTable, label: Label) -> Result<Vec<Sample>> {
    means
        .iter()
        .filter_map(|m| m.means[label.index()].map(|y| (m, y)))
        .map(|(m, y)| {
            let x = features
                .get(&m.scenario_id)
                .ok_or_else(|| PredictorError::Schema(format!("scenario `{}` has no feature vector", m.scenario_id)))?;
            Ok(Sample {
                scenario_id: m.scenario_id.clone(),
                features: *x,
                label: y,
            })
        })
        .collect()
}

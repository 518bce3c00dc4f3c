//! Case-study replication from shipped fixture tables: framework scores are
//! recomputed from the tabulated layers and factors, survey and predictor
//! columns are taken as printed (or from live models), and every pair of
//! sources is compared per label.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::framework::{content_score, scale_bipolar, unscale_bipolar, FrameworkError, LayerWeights};
use crate::predictor::{mae, rmse, FeatureVector, Label, ModelSet, PredictorError, RATING_RANGE};
use crate::raycaster::{ABSENT_DISTANCE, FEATURE_COUNT};

pub const FIXTURE_B: &str = include_str!("../fixtures/case_study_b.csv");
pub const FIXTURE_C: &str = include_str!("../fixtures/case_study_c.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FixtureSet {
    B,
    C,
}

impl FixtureSet {
    pub fn text(self) -> &'static str {
        match self {
            FixtureSet::B => FIXTURE_B,
            FixtureSet::C => FIXTURE_C,
        }
    }
}

impl fmt::Display for FixtureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixtureSet::B => "B",
            FixtureSet::C => "C",
        })
    }
}

impl FromStr for FixtureSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "B" => Ok(FixtureSet::B),
            "C" => Ok(FixtureSet::C),
            _ => Err(format!("unknown fixture set `{s}` (expected B or C)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CaseStudyError {
    #[error("fixture line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
}

/// One image column of a case-study table. `None` marks a dash or a value the
/// table does not report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureRow {
    pub image_id: u32,
    /// Mean survey ratings in [`Label::ALL`] order.
    pub survey: [Option<f64>; 4],
    pub framework_vqi_scaled: Option<f64>,
    pub framework_content_scaled: Option<f64>,
    pub framework_access_scaled: Option<f64>,
    pub framework_content: Option<f64>,
    pub layers: LayerWeights,
    /// Building, equipment, tree, pavement, ground vegetation, water, dynamic, sky.
    pub ratios: [f64; 8],
    /// Building, equipment, tree, ground vegetation, water, dynamic.
    pub distances: [Option<f64>; 6],
    pub sky_condition: Option<f64>,
    /// Predicted ratings in [`Label::ALL`] order.
    pub predictor: [Option<f64>; 4],
}

const COLUMNS: [&str; 35] = [
    "image_id",
    "survey_overall",
    "survey_content",
    "survey_access",
    "survey_privacy",
    "framework_vqi_scaled",
    "framework_content_scaled",
    "framework_access_scaled",
    "framework_content",
    "l_sky",
    "l_landscape",
    "wf_ct_dis",
    "l_nature",
    "wf_nature",
    "l_ground",
    "wf_movement",
    "sky",
    "sky_condition",
    "building",
    "building_distance",
    "equipment",
    "equipment_distance",
    "tree",
    "tree_distance",
    "pavement",
    "water",
    "water_distance",
    "ground_vegetation",
    "ground_vegetation_distance",
    "dynamic",
    "dynamic_distance",
    "predictor_overall",
    "predictor_content",
    "predictor_access",
    "predictor_privacy",
];

pub fn parse_fixture(text: &str) -> Result<Vec<FixtureRow>, CaseStudyError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(CaseStudyError::Parse {
            line: 1,
            message: format!("unexpected header `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |name: &str| -> Result<Option<f64>, CaseStudyError> {
            let k = COLUMNS.iter().position(|c| *c == name).expect("known column");
            match rec.get(k).unwrap_or("").trim() {
                "" | "-" => Ok(None),
                s => s.parse().map(Some).map_err(|_| CaseStudyError::Parse {
                    line,
                    message: format!("{name}: `{s}` is not a number"),
                }),
            }
        };
        let req = |name: &str| -> Result<f64, CaseStudyError> {
            cell(name)?.ok_or_else(|| CaseStudyError::Parse {
                line,
                message: format!("{name} is required"),
            })
        };
        let image_id = rec[0].trim().parse().map_err(|_| CaseStudyError::Parse {
            line,
            message: format!("bad image_id `{}`", &rec[0]),
        })?;
        let layers = LayerWeights {
            l_sky: req("l_sky")?,
            l_landscape: req("l_landscape")?,
            l_ground: req("l_ground")?,
            l_nature: req("l_nature")?,
            wf_ct_dis: req("wf_ct_dis")?,
            wf_movement: req("wf_movement")?,
            wf_nature: req("wf_nature")?,
        };
        layers.validate()?;
        rows.push(FixtureRow {
            image_id,
            survey: [
                cell("survey_overall")?,
                cell("survey_content")?,
                cell("survey_access")?,
                cell("survey_privacy")?,
            ],
            framework_vqi_scaled: cell("framework_vqi_scaled")?,
            framework_content_scaled: cell("framework_content_scaled")?,
            framework_access_scaled: cell("framework_access_scaled")?,
            framework_content: cell("framework_content")?,
            layers,
            ratios: [
                req("building")?,
                req("equipment")?,
                req("tree")?,
                req("pavement")?,
                req("ground_vegetation")?,
                req("water")?,
                req("dynamic")?,
                req("sky")?,
            ],
            distances: [
                cell("building_distance")?,
                cell("equipment_distance")?,
                cell("tree_distance")?,
                cell("ground_vegetation_distance")?,
                cell("water_distance")?,
                cell("dynamic_distance")?,
            ],
            sky_condition: cell("sky_condition")?,
            predictor: [
                cell("predictor_overall")?,
                cell("predictor_content")?,
                cell("predictor_access")?,
                cell("predictor_privacy")?,
            ],
        });
    }
    Ok(rows)
}

pub fn load_fixture(set: FixtureSet) -> Result<Vec<FixtureRow>, CaseStudyError> {
    parse_fixture(set.text())
}

/// Framework scores for one image on the [−5, 5] scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameworkRecompute {
    pub v_content: f64,
    pub scaled_content: f64,
    /// Access is taken from the printed scaled value; the tables do not give
    /// the window angles needed to recompute it.
    pub v_access: Option<f64>,
    pub scaled_access: Option<f64>,
    pub vqi: Option<f64>,
    pub scaled_vqi: Option<f64>,
}

impl FrameworkRecompute {
    /// Framework counterpart of each survey label: overall ↔ VQI, content ↔
    /// content, and access and privacy both ↔ access.
    pub fn for_label(&self, label: Label) -> Option<f64> {
        match label {
            Label::Overall => self.scaled_vqi,
            Label::Content => Some(self.scaled_content),
            Label::Access | Label::Privacy => self.scaled_access,
        }
    }
}

impl FixtureRow {
    pub fn framework(&self) -> Result<FrameworkRecompute, FrameworkError> {
        let v_content = content_score(&self.layers);
        let v_access = self.framework_access_scaled.map(unscale_bipolar);
        let vqi = v_access.map(|a| v_content * a);
        Ok(FrameworkRecompute {
            v_content,
            scaled_content: scale_bipolar(v_content)?,
            v_access,
            scaled_access: v_access.map(scale_bipolar).transpose()?,
            vqi,
            scaled_vqi: vqi.map(scale_bipolar).transpose()?,
        })
    }

    /// The 23-feature vector as far as the table reports it. Window count and
    /// area, zone ratios and floor height are not tabulated and are set to the
    /// absent sentinel, as is any unreported distance or sky condition.
    pub fn feature_vector(&self) -> FeatureVector {
        let mut x = [ABSENT_DISTANCE; FEATURE_COUNT];
        x[6..14].copy_from_slice(&self.ratios);
        for (k, d) in self.distances.iter().enumerate() {
            x[14 + k] = d.unwrap_or(ABSENT_DISTANCE);
        }
        x[20] = self.ratios.iter().filter(|&&r| r > 0.0).count() as f64;
        x[22] = self.sky_condition.unwrap_or(ABSENT_DISTANCE);
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Survey,
    Framework,
    Predictor,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Survey => "survey",
            Source::Framework => "framework",
            Source::Predictor => "predictor",
        }
    }
}

/// All three sources for one image and label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub image_id: u32,
    pub label: Label,
    pub survey: Option<f64>,
    pub framework: Option<f64>,
    pub predictor: Option<f64>,
}

impl Residual {
    pub fn get(&self, s: Source) -> Option<f64> {
        match s {
            Source::Survey => self.survey,
            Source::Framework => self.framework,
            Source::Predictor => self.predictor,
        }
    }
}

/// Published error values quoted alongside the recomputed ones. They come from
/// unrounded internal data and are not expected to match exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrintedReference {
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairError {
    pub label: Label,
    pub a: Source,
    pub b: Source,
    pub n: usize,
    pub mae: f64,
    pub rmse: f64,
    pub printed: Option<PrintedReference>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub set: FixtureSet,
    /// `fixture` or `model`.
    pub predictor_source: &'static str,
    pub pairs: Vec<PairError>,
    pub residuals: Vec<Residual>,
}

const PAIRS: [(Source, Source); 3] = [
    (Source::Framework, Source::Survey),
    (Source::Predictor, Source::Survey),
    (Source::Framework, Source::Predictor),
];

fn printed_reference(set: FixtureSet, label: Label, a: Source, b: Source) -> Option<PrintedReference> {
    use Source::*;
    match (set, label, a, b) {
        (FixtureSet::B, Label::Content, Framework, Predictor) => Some(PrintedReference {
            mae: Some(1.01),
            rmse: Some(1.42),
        }),
        (FixtureSet::C, Label::Overall, Framework, Survey) => Some(PrintedReference {
            mae: None,
            rmse: Some(3.78),
        }),
        (FixtureSet::C, Label::Overall, Predictor, Survey) => Some(PrintedReference {
            mae: Some(0.53),
            rmse: Some(0.65),
        }),
        _ => None,
    }
}

/// Compares survey, framework and predictor columns of a fixture set. With
/// `models`, predictions come from the given models run on each row's feature
/// vector instead of the printed predictor columns.
pub fn compare(set: FixtureSet, models: Option<&ModelSet>) -> Result<ComparisonReport, CaseStudyError> {
    let rows = load_fixture(set)?;
    let mut residuals = Vec::new();
    for row in &rows {
        let fw = row.framework()?;
        let x = row.feature_vector();
        for label in Label::ALL {
            let predictor = match models {
                Some(m) => m
                    .get(label)
                    .ok()
                    .map(|model| model.predict(&x).clamp(RATING_RANGE.0, RATING_RANGE.1)),
                None => row.predictor[label.index()],
            };
            residuals.push(Residual {
                image_id: row.image_id,
                label,
                survey: row.survey[label.index()],
                framework: fw.for_label(label),
                predictor,
            });
        }
    }
    let mut pairs = Vec::new();
    for label in Label::ALL {
        for (a, b) in PAIRS {
            let (va, vb): (Vec<f64>, Vec<f64>) = residuals
                .iter()
                .filter(|r| r.label == label)
                .filter_map(|r| Some((r.get(a)?, r.get(b)?)))
                .unzip();
            if va.is_empty() {
                continue;
            }
            pairs.push(PairError {
                label,
                a,
                b,
                n: va.len(),
                mae: mae(&va, &vb)?,
                rmse: rmse(&va, &vb)?,
                printed: printed_reference(set, label, a, b),
            });
        }
    }
    Ok(ComparisonReport {
        set,
        predictor_source: if models.is_some() { "model" } else { "fixture" },
        pairs,
        residuals,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ComparisonReport {
    pub fn pair(&self, label: Label, a: Source, b: Source) -> Option<&PairError> {
        self.pairs
            .iter()
            .find(|p| p.label == label && ((p.a, p.b) == (a, b) || (p.a, p.b) == (b, a)))
    }

    pub fn pairs_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "set",
            "label",
            "a",
            "b",
            "n",
            "mae",
            "rmse",
            "printed_mae",
            "printed_rmse",
        ])?;
        for p in &self.pairs {
            w.write_record([
                self.set.to_string(),
                p.label.to_string(),
                p.a.as_str().into(),
                p.b.as_str().into(),
                p.n.to_string(),
                p.mae.to_string(),
                p.rmse.to_string(),
                opt(p.printed.and_then(|r| r.mae)),
                opt(p.printed.and_then(|r| r.rmse)),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8"))
    }

    pub fn residuals_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["set", "image_id", "label", "survey", "framework", "predictor"])?;
        for r in &self.residuals {
            w.write_record([
                self.set.to_string(),
                r.image_id.to_string(),
                r.label.to_string(),
                opt(r.survey),
                opt(r.framework),
                opt(r.predictor),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse_with_expected_images() {
        let b: Vec<u32> = load_fixture(FixtureSet::B)
            .unwrap()
            .iter()
            .map(|r| r.image_id)
            .collect();
        assert_eq!(b, [114, 234, 404, 424, 574, 584]);
        let c: Vec<u32> = load_fixture(FixtureSet::C)
            .unwrap()
            .iter()
            .map(|r| r.image_id)
            .collect();
        assert_eq!(c, [4, 394, 550, 520, 334, 294, 284, 154]);
    }

    #[test]
    fn image_four_vqi() {
        let rows = load_fixture(FixtureSet::C).unwrap();
        let fw = rows[0].framework().unwrap();
        assert_eq!(fw.v_content, 0.9375);
        assert!((fw.v_access.unwrap() - 0.4818).abs() < 1e-12);
        assert!((fw.vqi.unwrap() - 0.45169).abs() < 1e-5);
        assert!((fw.scaled_vqi.unwrap() - -0.483).abs() < 0.0005);
    }

    #[test]
    fn feature_vector_encodes_absent_values() {
        let rows = load_fixture(FixtureSet::C).unwrap();
        let x = rows[6].feature_vector(); // image 284
        assert_eq!(x[6], 0.78);
        assert_eq!(x[7], 0.19);
        assert_eq!(x[13], 0.03);
        assert_eq!(x[14], 10.32);
        assert_eq!(x[16], ABSENT_DISTANCE);
        assert_eq!(x[20], 3.0);
        assert_eq!(x[22], 0.0);
        assert_eq!(x[21], ABSENT_DISTANCE);
    }

    #[test]
    fn pair_errors_are_symmetric_and_consistent_with_residuals() {
        let rep = compare(FixtureSet::C, None).unwrap();
        for p in &rep.pairs {
            let (va, vb): (Vec<f64>, Vec<f64>) = rep
                .residuals
                .iter()
                .filter(|r| r.label == p.label)
                .filter_map(|r| Some((r.get(p.a)?, r.get(p.b)?)))
                .unzip();
            assert_eq!(mae(&vb, &va).unwrap(), p.mae);
            assert_eq!(rmse(&vb, &va).unwrap(), p.rmse);
            let abs_sum: f64 = va.iter().zip(&vb).map(|(a, b)| (a - b).abs()).sum();
            assert!((abs_sum - p.mae * p.n as f64).abs() < 1e-9);
        }
        assert!(rep.pair(Label::Overall, Source::Survey, Source::Framework).is_some());
    }

    #[test]
    fn set_b_has_only_content_pairs() {
        let rep = compare(FixtureSet::B, None).unwrap();
        assert_eq!(rep.pairs.len(), 1);
        let p = &rep.pairs[0];
        assert_eq!(
            (p.label, p.a, p.b, p.n),
            (Label::Content, Source::Framework, Source::Predictor, 6)
        );
    }

    #[test]
    fn csv_outputs_have_headers() {
        let rep = compare(FixtureSet::C, None).unwrap();
        assert!(rep.pairs_csv().unwrap().starts_with("set,label,a,b,n,mae,rmse"));
        let res = rep.residuals_csv().unwrap();
        assert_eq!(res.lines().count(), 1 + 8 * 4);
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args};
use serde::{Deserialize, Serialize};
use viewscope::casestudy::{self, load_fixture, FixtureSet};
use viewscope::framework::{
    access_score, angles_from_subtense, derive_layers, scale_bipolar, unscale_bipolar, window_subtense, AccessAngles,
    AccessRow, LayerWeights,
};
use viewscope::predictor::{
    aggregate_scenarios, build_rows, permutation_importance_with, read_feature_table, read_responses, run_pipeline,
    trim_responses, FeatureTable, Label, ModelSet, PipelineConfig, TreeEnsemble,
};
use viewscope::raycaster::{extract_features_with, FEATURE_NAMES};
use viewscope::{parse_scene, Execution, ViewFeatures};

use crate::output::{emit, open, read_to_string, render};
use crate::{Cli, Format};

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

/// Config file (or defaults) with the command-line seed applied.
fn config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => toml::from_str(&read_to_string(p)?).with_context(|| format!("config {}", p.display()))?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn scenario_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

#[derive(Debug, Serialize, Deserialize)]
struct FeatureRecord {
    #[serde(default)]
    scenario_id: Option<String>,
    #[serde(flatten)]
    features: ViewFeatures,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    Many(Vec<T>),
    One(T),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::Many(v) => v,
            OneOrMany::One(t) => vec![t],
        }
    }
}

fn cast_one(path: &Path, resolution: Option<(u32, u32)>, exec: Execution) -> Result<ViewFeatures> {
    open(path)?;
    let mut model = parse_scene(path).with_context(|| format!("scene {}", path.display()))?;
    if let Some(r) = resolution {
        model.viewpoint.resolution = r;
    }
    extract_features_with(&model, exec).with_context(|| format!("casting {}", path.display()))
}

pub fn cast(cli: &Cli, scenes: &[PathBuf], resolution: Option<(u32, u32)>) -> Result<()> {
    let exec = execution(cli);
    let mut records = Vec::with_capacity(scenes.len());
    for path in scenes {
        let features = cast_one(path, resolution, exec)?;
        log::info!("{}: {} view elements", path.display(), features.element_count);
        records.push(FeatureRecord {
            scenario_id: Some(scenario_name(path)),
            features,
        });
    }
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&records)? + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["scenario_id"];
            header.extend(FEATURE_NAMES);
            w.write_record(&header)?;
            for r in &records {
                let mut row = vec![r.scenario_id.clone().unwrap_or_default()];
                row.extend(r.features.to_csv_cells());
                w.write_record(&row)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    emit(cli.output.as_deref(), &text)
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).multiple(true).args(["features", "layers", "scene", "fixture"])))]
pub struct FrameworkArgs {
    /// Ray-cast features (JSON as written by `cast --format json`).
    #[arg(long, conflicts_with_all = ["scene", "fixture"])]
    features: Option<PathBuf>,
    /// Layer weights used verbatim (JSON object or array); takes precedence over --features.
    #[arg(long, conflicts_with_all = ["scene", "fixture"])]
    layers: Option<PathBuf>,
    /// Cast a scene and measure the window angles for access.
    #[arg(long, conflicts_with = "fixture")]
    scene: Option<PathBuf>,
    /// Case-study set B or C, with access taken from the printed column.
    #[arg(long, value_parser = crate::parse_set)]
    fixture: Option<FixtureSet>,
    /// View angle in degrees for the access score.
    #[arg(long, conflicts_with_all = ["v_access", "scene", "fixture"])]
    alpha_view: Option<f64>,
    /// Access score on [0, 1], used as given.
    #[arg(long, conflicts_with_all = ["scene", "fixture"])]
    v_access: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerInput {
    #[serde(default)]
    id: Option<String>,
    l_sky: f64,
    l_landscape: f64,
    l_ground: f64,
    l_nature: f64,
    wf_ct_dis: f64,
    wf_movement: f64,
    wf_nature: f64,
    #[serde(default)]
    alpha_view: Option<f64>,
    #[serde(default)]
    v_access: Option<f64>,
}

impl LayerInput {
    fn weights(&self) -> LayerWeights {
        LayerWeights {
            l_sky: self.l_sky,
            l_landscape: self.l_landscape,
            l_ground: self.l_ground,
            l_nature: self.l_nature,
            wf_ct_dis: self.wf_ct_dis,
            wf_movement: self.wf_movement,
            wf_nature: self.wf_nature,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Access {
    Unknown,
    Value(f64),
    Angle(f64),
    Subtense(f64, f64),
}

#[derive(Debug, Serialize)]
struct FrameworkRecord {
    id: String,
    l_sky: f64,
    l_landscape: f64,
    l_ground: f64,
    l_nature: f64,
    wf_ct_dis: f64,
    wf_movement: f64,
    wf_nature: f64,
    access_row: Option<AccessRow>,
    alpha_view: Option<f64>,
    v_content: f64,
    v_access: Option<f64>,
    vqi: Option<f64>,
    scaled_content: f64,
    scaled_access: Option<f64>,
    scaled_vqi: Option<f64>,
}

fn score(id: String, l: LayerWeights, access: Access) -> Result<FrameworkRecord> {
    l.validate().with_context(|| format!("layers for `{id}`"))?;
    let angles = |a: AccessAngles| (Some(access_score(&a)), Some(a.alpha_view));
    let row = AccessRow::classify(&l);
    let (v_access, alpha_view) = match access {
        Access::Unknown => (None, None),
        Access::Value(v) => (Some(v), None),
        Access::Angle(a) => angles(AccessAngles::for_row(row, a)),
        Access::Subtense(h, v) => angles(angles_from_subtense(h, v, row)),
    };
    let v_content = viewscope::framework::content_score(&l);
    let vqi = v_access.map(|a| v_content * a);
    let scaled = |v: Option<f64>| {
        v.map(scale_bipolar)
            .transpose()
            .with_context(|| format!("scores for `{id}`"))
    };
    Ok(FrameworkRecord {
        l_sky: l.l_sky,
        l_landscape: l.l_landscape,
        l_ground: l.l_ground,
        l_nature: l.l_nature,
        wf_ct_dis: l.wf_ct_dis,
        wf_movement: l.wf_movement,
        wf_nature: l.wf_nature,
        access_row: alpha_view.map(|_| row),
        alpha_view,
        v_content,
        v_access,
        vqi,
        scaled_content: scale_bipolar(v_content)?,
        scaled_access: scaled(v_access)?,
        scaled_vqi: scaled(vqi)?,
        id,
    })
}

fn flag_access(args: &FrameworkArgs) -> Access {
    match (args.v_access, args.alpha_view) {
        (Some(v), _) => Access::Value(v),
        (None, Some(a)) => Access::Angle(a),
        (None, None) => Access::Unknown,
    }
}

pub fn framework(cli: &Cli, args: &FrameworkArgs) -> Result<()> {
    let mut records = Vec::new();
    if let Some(set) = args.fixture {
        for row in load_fixture(set)? {
            let access = row
                .framework_access_scaled
                .map_or(Access::Unknown, |s| Access::Value(unscale_bipolar(s)));
            records.push(score(row.image_id.to_string(), row.layers, access)?);
        }
    } else if let Some(path) = &args.scene {
        open(path)?;
        let model = parse_scene(path).with_context(|| format!("scene {}", path.display()))?;
        let features = extract_features_with(&model, execution(cli))?;
        let (h, v) = window_subtense(&model.room, &model.viewpoint).context("the room has no windows")?;
        records.push(score(
            scenario_name(path),
            derive_layers(&features),
            Access::Subtense(h, v),
        )?);
    } else if let Some(path) = &args.layers {
        if args.features.is_some() {
            log::info!("--layers given; ray-cast features are not used for layer weights");
        }
        let inputs: OneOrMany<LayerInput> =
            serde_json::from_str(&read_to_string(path)?).with_context(|| format!("layers {}", path.display()))?;
        for (i, input) in inputs.into_vec().into_iter().enumerate() {
            let access = match (input.v_access, input.alpha_view) {
                (Some(v), _) => Access::Value(v),
                (None, Some(a)) => Access::Angle(a),
                (None, None) => flag_access(args),
            };
            let id = input.id.clone().unwrap_or_else(|| i.to_string());
            records.push(score(id, input.weights(), access)?);
        }
    } else if let Some(path) = &args.features {
        let inputs: OneOrMany<FeatureRecord> =
            serde_json::from_str(&read_to_string(path)?).with_context(|| format!("features {}", path.display()))?;
        for (i, r) in inputs.into_vec().into_iter().enumerate() {
            let id = r.scenario_id.unwrap_or_else(|| i.to_string());
            records.push(score(id, derive_layers(&r.features), flag_access(args))?);
        }
    }
    emit(cli.output.as_deref(), &render(&records, cli.format)?)
}

#[derive(Debug, Serialize)]
struct MetricsRow {
    label: Label,
    family: &'static str,
    max_depth: usize,
    n_trees: usize,
    rows: usize,
    train_rows: usize,
    validation_rows: usize,
    r2: Option<f64>,
    mae: f64,
    rmse: f64,
}

fn read_inputs(responses: &Path, features: &Path) -> Result<(Vec<viewscope::predictor::ResponseRecord>, FeatureTable)> {
    let r = read_responses(open(responses)?).with_context(|| format!("responses {}", responses.display()))?;
    let f = read_feature_table(open(features)?).with_context(|| format!("features {}", features.display()))?;
    Ok((r, f))
}

pub fn train(cli: &Cli, responses: &Path, features: &Path) -> Result<()> {
    let cfg = config(cli)?;
    let (records, table) = read_inputs(responses, features)?;
    let (models, report) = run_pipeline(&records, &table, &cfg, execution(cli))?;
    let dir = cli.output.clone().unwrap_or_else(|| PathBuf::from("models"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    models.save_dir(&dir)?;
    let rows: Vec<MetricsRow> = report
        .labels
        .iter()
        .map(|o| MetricsRow {
            label: o.label,
            family: o.selected.family.as_str(),
            max_depth: o.selected.max_depth,
            n_trees: o.selected.n_trees,
            rows: o.rows,
            train_rows: o.train_rows,
            validation_rows: o.validation_rows,
            r2: o.selected.r2,
            mae: o.selected.mae,
            rmse: o.selected.rmse,
        })
        .collect();
    let table = render(&rows, cli.format)?;
    let ext = match cli.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    fs::write(dir.join(format!("metrics.{ext}")), &table)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    fs::write(dir.join("config.toml"), toml::to_string(&cfg)?)?;
    log::info!("models written to {}", dir.display());
    emit(None, &table)
}

pub fn compare(cli: &Cli, set: FixtureSet, models: Option<&Path>, residuals: Option<&Path>) -> Result<()> {
    let models = match models {
        Some(dir) => {
            if !dir.is_dir() {
                bail!("file not found: {}", dir.display());
            }
            Some(ModelSet::load_dir(dir).with_context(|| format!("models in {}", dir.display()))?)
        }
        None => None,
    };
    let report = casestudy::compare(set, models.as_ref())?;
    if let Some(p) = residuals {
        emit(Some(p), &report.residuals_csv()?)?;
    }
    let text = match cli.format {
        Format::Csv => report.pairs_csv()?,
        Format::Json => report.to_json() + "\n",
    };
    emit(cli.output.as_deref(), &text)
}

#[derive(Debug, Serialize)]
struct ImportanceRow {
    label: Label,
    rank: usize,
    feature: &'static str,
    index: usize,
    importance: f64,
    baseline_r2: f64,
}

pub fn pfi(cli: &Cli, model: &Path, responses: &Path, features: &Path, repetitions: Option<usize>) -> Result<()> {
    let cfg = config(cli)?;
    let models: Vec<TreeEnsemble> = if model.is_dir() {
        let set = ModelSet::load_dir(model).with_context(|| format!("models in {}", model.display()))?;
        Label::ALL
            .iter()
            .map(|&l| set.get(l).cloned())
            .collect::<Result<_, _>>()?
    } else {
        read_to_string(model)?;
        vec![TreeEnsemble::load(model).with_context(|| format!("model {}", model.display()))?]
    };
    let (records, table) = read_inputs(responses, features)?;
    let (trimmed, _) = trim_responses(&records);
    let means = aggregate_scenarios(&trimmed);
    let reps = repetitions.unwrap_or(cfg.pfi_repetitions);
    let mut out = Vec::new();
    for m in &models {
        let rows = build_rows(&means, &table, m.label)?;
        let report = permutation_importance_with(m, &rows, reps, cfg.seed, execution(cli))
            .with_context(|| format!("importance for {}", m.label))?;
        for f in report.ranking() {
            out.push(ImportanceRow {
                label: m.label,
                rank: f.rank,
                feature: f.feature,
                index: f.index,
                importance: f.importance,
                baseline_r2: report.baseline_r2,
            });
        }
    }
    emit(cli.output.as_deref(), &render(&out, cli.format)?)
}

//! Case-study comparisons against errors worked out by hand from the printed
//! columns.

use viewscope::casestudy::{compare, FixtureSet, Source};
use viewscope::predictor::{run_pipeline, Label, ModelSet, PipelineConfig};
use viewscope::synthetic::{synthetic_features, synthetic_responses, ResponseNoise};
use viewscope::Execution;

fn mae_rmse(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (
        d.iter().map(|e| e.abs()).sum::<f64>() / n,
        (d.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
    )
}

#[test]
fn set_b_content_framework_against_predictor() {
    let framework = [3.125, 0.0, 3.75, 3.75, 2.5, -5.0];
    let predictor = [1.68, 1.94, 3.20, 2.67, 1.50, -4.11];
    let (mae, rmse) = mae_rmse(&framework, &predictor);
    let rep = compare(FixtureSet::B, None).unwrap();
    let p = rep.pair(Label::Content, Source::Framework, Source::Predictor).unwrap();
    assert_eq!(p.n, 6);
    assert!((p.mae - mae).abs() < 1e-12 && (p.rmse - rmse).abs() < 1e-12);
    assert!((p.mae - 1.15).abs() < 0.005 && (p.rmse - 1.23).abs() < 0.005);
    let printed = p.printed.unwrap();
    assert_eq!((printed.mae, printed.rmse), (Some(1.01), Some(1.42)));
}

#[test]
fn set_c_overall_framework_against_survey() {
    let framework = [
        -0.483125, -0.483125, -3.116625, -1.5234375, -1.3865, -1.687625, -5.0, -5.0,
    ];
    let survey = [2.74, 3.625, -0.633, 1.9666, 3.1, 2.6, -2.925, 0.1];
    let rep = compare(FixtureSet::C, None).unwrap();
    let got: Vec<f64> = rep
        .residuals
        .iter()
        .filter(|r| r.label == Label::Overall)
        .map(|r| r.get(Source::Survey).unwrap())
        .collect();
    assert_eq!(got, survey);
    let p = rep.pair(Label::Overall, Source::Framework, Source::Survey).unwrap();
    let (mae, rmse) = mae_rmse(&framework, &survey);
    assert!(
        (p.mae - mae).abs() < 1e-9 && (p.rmse - rmse).abs() < 1e-9,
        "{p:?} vs {mae} {rmse}"
    );
    assert!((p.rmse - 3.78).abs() <= 0.02);
}

#[test]
fn live_models_replace_the_printed_predictor_column() {
    let features = synthetic_features(80, 3);
    let responses = synthetic_responses(&features, ResponseNoise::default(), 4);
    let cfg = PipelineConfig {
        forest_depths: vec![6],
        boosted_depths: vec![3],
        ..PipelineConfig::default()
    };
    let (models, _) = run_pipeline(&responses, &features, &cfg, Execution::default()).unwrap();
    let dir = tempdir();
    models.save_dir(&dir).unwrap();
    let loaded = ModelSet::load_dir(&dir).unwrap();
    assert_eq!(loaded, models);
    let live = compare(FixtureSet::C, Some(&loaded)).unwrap();
    let printed = compare(FixtureSet::C, None).unwrap();
    assert_ne!(live.predictor_source, printed.predictor_source);
    for label in Label::ALL {
        let p = live.pair(label, Source::Predictor, Source::Survey).unwrap();
        assert!(p.mae.is_finite() && p.rmse >= p.mae);
        // The framework side does not depend on the predictor source.
        assert_eq!(
            live.pair(label, Source::Framework, Source::Survey).unwrap().rmse,
            printed.pair(label, Source::Framework, Source::Survey).unwrap().rmse
        );
    }
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("viewscope-casestudy-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

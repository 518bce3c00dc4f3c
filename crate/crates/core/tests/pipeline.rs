//! End-to-end training on synthetic survey responses with a known signal.

use viewscope::predictor::{
    predict_scores, read_feature_table, read_responses, run_pipeline, write_feature_table, write_responses, Label,
    PipelineConfig,
};
use viewscope::synthetic::{signal, synthetic_features, synthetic_responses, ResponseNoise, SIGNAL_FEATURES};
use viewscope::Execution;

fn small_config(seed: u64) -> PipelineConfig {
    PipelineConfig {
        seed,
        forest_depths: vec![8],
        boosted_depths: vec![3],
        ..PipelineConfig::default()
    }
}

#[test]
fn recovers_signal_from_noisy_responses() {
    let features = synthetic_features(200, 21);
    let responses = synthetic_responses(&features, ResponseNoise::default(), 22);
    let (models, report) = run_pipeline(&responses, &features, &small_config(23), Execution::default()).unwrap();
    assert_eq!(report.scenarios, 200);
    assert!(report.trim.trimmed() > 0);
    for o in &report.labels {
        assert_eq!((o.train_rows, o.validation_rows), (160, 40));
        let r2 = o.selected.r2.unwrap();
        assert!(r2 > 0.7, "{}: validation R² {r2}", o.label);
        let pfi = o.importance.as_ref().unwrap();
        let top = pfi.ranking()[0].index;
        assert!(
            SIGNAL_FEATURES[o.label.index()].contains(&top),
            "{}: top feature {top}",
            o.label
        );
    }
    let x = features.values().next().unwrap();
    let s = predict_scores(&models, x).unwrap();
    for label in Label::ALL {
        assert!((s.get(label) - signal(label, x)).abs() < 2.0);
    }
}

#[test]
fn csv_round_trip_and_execution_mode_do_not_change_models() {
    let features = synthetic_features(40, 31);
    let responses = synthetic_responses(&features, ResponseNoise::default(), 32);
    let (mut fbuf, mut rbuf) = (Vec::new(), Vec::new());
    write_feature_table(&features, &mut fbuf).unwrap();
    write_responses(&responses, &mut rbuf).unwrap();
    let features2 = read_feature_table(fbuf.as_slice()).unwrap();
    let responses2 = read_responses(rbuf.as_slice()).unwrap();
    assert_eq!(features2, features);
    assert_eq!(responses2, responses);

    let cfg = small_config(33);
    let (a, _) = run_pipeline(&responses, &features, &cfg, Execution::Sequential).unwrap();
    let (b, _) = run_pipeline(&responses2, &features2, &cfg, Execution::Parallel).unwrap();
    for label in Label::ALL {
        assert_eq!(
            a.get(label).unwrap().to_json().unwrap(),
            b.get(label).unwrap().to_json().unwrap()
        );
    }
}

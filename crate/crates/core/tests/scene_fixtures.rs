//! Authored demo scenes against the analytic oracle in `common`.

mod common;

use common::*;
use viewscope::extract_features;
use viewscope::raycaster::FEATURE_NAMES;
use viewscope::scene::{parse_scene, window_metrics};

#[test]
fn box_half_window_matches_analytic_oracle() {
    let m = parse_scene(demo("box_half_window.json")).unwrap();
    let wm = window_metrics(&m.room);
    assert!((wm.area - 2.8).abs() < 1e-9);
    let acc = integrate(40.0, vec![0.0], vec![], box_half_oracle);
    let exp = expected_ratios(&acc);
    assert_eq!((exp[0], exp[7]), (0.5, 0.5));
    let f = extract_features(&m).unwrap();
    check_ratios("box_half_window", &f, exp, 0.02);
    assert_eq!(f.element_count, 2);
    let bd = f.distances.building.unwrap();
    assert!((bd - 10.0).abs() <= 0.1, "Bd = {bd}");
    assert!(bd > 10.0);
    assert_eq!(f.floor_height, 11.2);
    let fine = extract_features(&with_resolution(m, 732, 488)).unwrap();
    check_ratios("box_half_window 732x488", &fine, exp, 0.01);
}

#[test]
fn half_wall_window_matches_analytic_oracle() {
    let m = parse_scene(demo("half_wall_window.json")).unwrap();
    let acc = integrate(40.0, vec![0.0], vec![], half_wall_oracle);
    let exp = expected_ratios(&acc);
    assert_eq!(fraction(&acc, Cat::Wall), 0.5);
    let f = extract_features(&m).unwrap();
    check_ratios("half_wall_window", &f, exp, 0.02);
    for z in f.zones.as_array() {
        assert!((z - 0.5).abs() <= 2.0 / 366.0, "zone ratio {z}");
    }
    assert_eq!(f.ratios.building, 0.0);
    let fine = extract_features(&with_resolution(m, 732, 488)).unwrap();
    check_ratios("half_wall_window 732x488", &fine, exp, 0.01);
}

#[test]
fn layered_ground_matches_analytic_oracle() {
    let m = parse_scene(demo("layered_ground.json")).unwrap();
    let (us, vs) = layered_breaks();
    let acc = integrate(60.0, us, vs, layered_oracle);
    let exp = expected_ratios(&acc);
    // Five categories, all substantial.
    assert_eq!(exp.iter().filter(|&&r| r > 0.05).count(), 5, "{exp:?}");
    let f = extract_features(&m).unwrap();
    check_ratios("layered_ground", &f, exp, 0.02);
    assert_eq!(f.element_count, 5);
    assert!((f.floor_height - EYE_ABOVE_GROUND).abs() < 1e-9);
    let fine = extract_features(&with_resolution(m, 732, 488)).unwrap();
    check_ratios("layered_ground 732x488", &fine, exp, 0.01);
}

#[test]
fn refinement_does_not_move_away_from_the_oracle() {
    let m = parse_scene(demo("layered_ground.json")).unwrap();
    let (us, vs) = layered_breaks();
    let exp = expected_ratios(&integrate(60.0, us, vs, layered_oracle));
    let coarse = extract_features(&m).unwrap().ratios.as_array();
    let fine = extract_features(&with_resolution(m, 732, 488))
        .unwrap()
        .ratios
        .as_array();
    for k in 0..8 {
        let (ec, ef) = ((coarse[k] - exp[k]).abs(), (fine[k] - exp[k]).abs());
        // One pixel row of slack at the finer grid.
        assert!(ef <= ec + 1.0 / 488.0, "{}: {ec} -> {ef}", FEATURE_NAMES[6 + k]);
    }
}

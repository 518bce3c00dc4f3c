//! Analytic oracle for the authored demo scenes. Each scene is built so the
//! category under every image-plane point is piecewise constant on
//! axis-aligned rectangles of plane coordinates (u right, v up, forward = 1).
//! Exact area fractions follow from integrating over the breakpoint grid.
#![allow(dead_code)]

use std::path::PathBuf;

use viewscope::raycaster::FEATURE_NAMES;
use viewscope::scene::ViewModel;
use viewscope::ViewFeatures;

pub fn demo(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo").join(name)
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Cat {
    Wall,
    B,
    P,
    G,
    W,
    S,
}

pub const RATIO_ORDER: [Cat; 8] = [Cat::B, Cat::Wall, Cat::Wall, Cat::P, Cat::G, Cat::W, Cat::Wall, Cat::S];

pub fn frame(fov_deg: f64) -> (f64, f64) {
    let hw = (fov_deg.to_radians() / 2.0).tan();
    (hw, hw * 2.0 / 3.0)
}

/// Exact area fraction of each category over the frame.
pub fn integrate(
    fov_deg: f64,
    mut us: Vec<f64>,
    mut vs: Vec<f64>,
    classify: impl Fn(f64, f64) -> Cat,
) -> Vec<(Cat, f64)> {
    let (hw, hh) = frame(fov_deg);
    us.extend([-hw, hw]);
    vs.extend([-hh, hh]);
    us.retain(|u| u.abs() <= hw);
    vs.retain(|v| v.abs() <= hh);
    us.sort_by(f64::total_cmp);
    vs.sort_by(f64::total_cmp);
    let total = 4.0 * hw * hh;
    let mut acc: Vec<(Cat, f64)> = Vec::new();
    for u in us.windows(2) {
        for v in vs.windows(2) {
            let area = (u[1] - u[0]) * (v[1] - v[0]);
            let c = classify((u[0] + u[1]) / 2.0, (v[0] + v[1]) / 2.0);
            match acc.iter_mut().find(|(k, _)| *k == c) {
                Some(e) => e.1 += area / total,
                None => acc.push((c, area / total)),
            }
        }
    }
    acc
}

pub fn fraction(acc: &[(Cat, f64)], c: Cat) -> f64 {
    acc.iter().find(|(k, _)| *k == c).map_or(0.0, |e| e.1)
}

/// Category ratios normalized by window area, in feature order.
pub fn expected_ratios(acc: &[(Cat, f64)]) -> [f64; 8] {
    let window = 1.0 - fraction(acc, Cat::Wall);
    let mut r = [0.0; 8];
    for (k, c) in RATIO_ORDER.iter().enumerate() {
        if *c != Cat::Wall {
            r[k] = fraction(acc, *c) / window;
        }
    }
    r
}

pub fn with_resolution(mut m: ViewModel, w: u32, h: u32) -> ViewModel {
    m.viewpoint.resolution = (w, h);
    m
}

/// Largest deviation from the analytic ratios, or a message naming the first
/// ratio outside `tol` or a ratio sum outside 1 ± 2/(366·244).
pub fn ratio_error(name: &str, f: &ViewFeatures, expected: [f64; 8], tol: f64) -> Result<f64, String> {
    let got = f.ratios.as_array();
    let mut worst: f64 = 0.0;
    for k in 0..8 {
        let e = (got[k] - expected[k]).abs();
        if e > tol {
            return Err(format!(
                "{name}: {} = {} vs analytic {} (tol {tol})",
                FEATURE_NAMES[6 + k],
                got[k],
                expected[k]
            ));
        }
        worst = worst.max(e);
    }
    let sum: f64 = got.iter().sum();
    if (sum - 1.0).abs() > 2.0 / (366.0 * 244.0) {
        return Err(format!("{name}: ratio sum {sum}"));
    }
    Ok(worst)
}

pub fn check_ratios(name: &str, f: &ViewFeatures, expected: [f64; 8], tol: f64) {
    if let Err(e) = ratio_error(name, f, expected, tol) {
        panic!("{e}");
    }
}

// Cube face at y = 10 over x ∈ [0, 10]; nothing else but sky.
pub fn box_half_oracle(u: f64, _v: f64) -> Cat {
    if u > 0.0 {
        Cat::B
    } else {
        Cat::S
    }
}

// Window over u < 0 only; sky beyond it.
pub fn half_wall_oracle(u: f64, _v: f64) -> Cat {
    if u < 0.0 {
        Cat::S
    } else {
        Cat::Wall
    }
}

pub const EYE_ABOVE_GROUND: f64 = 4.4;

// Ground bands at z = eye − 4.4 by distance ahead, and a block face at
// y = 60 over x ∈ [0, 100] reaching well above the frame.
pub fn layered_oracle(u: f64, v: f64) -> Cat {
    let ground_y = if v < 0.0 { EYE_ABOVE_GROUND / -v } else { f64::INFINITY };
    if u > 0.0 && ground_y >= 60.0 {
        return Cat::B;
    }
    match ground_y {
        y if y < 20.0 => Cat::P,
        y if y < 40.0 => Cat::W,
        y if y < 5000.0 => Cat::G,
        _ => Cat::S,
    }
}

pub fn layered_breaks() -> (Vec<f64>, Vec<f64>) {
    let vs = [20.0, 40.0, 60.0, 5000.0]
        .iter()
        .map(|y| -EYE_ABOVE_GROUND / y)
        .chain([0.0])
        .collect();
    (vec![0.0], vs)
}

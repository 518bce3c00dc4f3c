//! Layer-weight view quality framework: view content from presence layers and
//! weighting factors, view access from the window's angular subtense, and the
//! product of the two as the view quality index (clarity is taken as 1).
//! Scores live on `[0, 1]` and are mapped affinely onto the `[-5, 5]`
//! satisfaction scale for comparison with survey ratings.

use serde::{Deserialize, Serialize};

use crate::raycaster::{camera_basis, ViewFeatures};
use crate::scene::{RoomModel, ViewpointSpec};

/// Weight given to a layer present in the view.
pub const LAYER_PRESENT: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrameworkError {
    #[error("value {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("the room has no windows")]
    NoWindow,
    #[error("{field} = {value} is not one of the allowed values {allowed:?}")]
    InvalidWeight {
        field: &'static str,
        value: f64,
        allowed: &'static [f64],
    },
}

/// Presence layers and weighting factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    pub l_sky: f64,
    pub l_landscape: f64,
    pub l_ground: f64,
    pub l_nature: f64,
    pub wf_ct_dis: f64,
    pub wf_movement: f64,
    pub wf_nature: f64,
}

const LAYER_VALUES: &[f64] = &[0.0, 0.25];
const CT_DIS_VALUES: &[f64] = &[0.0, 0.5, 0.75, 1.0];
const MOVEMENT_VALUES: &[f64] = &[0.0, 0.5, 1.0];
const NATURE_VALUES: &[f64] = &[0.0, 0.5, 0.75, 1.0];

impl LayerWeights {
    /// Checks every field against its enumerated set.
    pub fn validate(&self) -> Result<(), FrameworkError> {
        let check = |field, value: f64, allowed: &'static [f64]| {
            if allowed.contains(&value) {
                Ok(())
            } else {
                Err(FrameworkError::InvalidWeight { field, value, allowed })
            }
        };
        check("l_sky", self.l_sky, LAYER_VALUES)?;
        check("l_landscape", self.l_landscape, LAYER_VALUES)?;
        check("l_ground", self.l_ground, LAYER_VALUES)?;
        check("l_nature", self.l_nature, LAYER_VALUES)?;
        check("wf_ct_dis", self.wf_ct_dis, CT_DIS_VALUES)?;
        check("wf_movement", self.wf_movement, MOVEMENT_VALUES)?;
        check("wf_nature", self.wf_nature, NATURE_VALUES)
    }
}

fn presence(fraction: f64) -> f64 {
    if fraction > 0.0 {
        LAYER_PRESENT
    } else {
        0.0
    }
}

/// Content-distance factor from the perceived building distance.
pub fn content_distance_factor(distance: Option<f64>) -> f64 {
    match distance {
        None => 0.0,
        Some(d) if d <= 6.0 => 0.0,
        Some(d) if d <= 20.0 => 0.5,
        Some(d) if d <= 50.0 => 0.75,
        Some(_) => 1.0,
    }
}

/// Movement factor: 0.5 with no dynamic content, 1 when it is farther than
/// 6 m, 0 when it is nearby.
pub fn movement_factor(dynamic_ratio: f64, dynamic_distance: Option<f64>) -> f64 {
    if dynamic_ratio <= 0.0 {
        return 0.5;
    }
    match dynamic_distance {
        Some(d) if d > 6.0 => 1.0,
        _ => 0.0,
    }
}

pub fn nature_factor(nature_fraction: f64) -> f64 {
    if nature_fraction <= 0.0 {
        0.0
    } else if nature_fraction <= 0.25 {
        0.5
    } else if nature_fraction <= 0.5 {
        0.75
    } else {
        1.0
    }
}

/// Layer weights read off ray-cast features. Equipment counts toward the
/// landscape layer.
pub fn derive_layers(f: &ViewFeatures) -> LayerWeights {
    let r = &f.ratios;
    let nature = r.tree + r.ground_vegetation + r.water;
    LayerWeights {
        l_sky: presence(r.sky),
        l_landscape: presence(r.building + r.equipment),
        l_ground: presence(r.artificial_ground + r.ground_vegetation + r.water),
        l_nature: presence(nature),
        wf_ct_dis: content_distance_factor(f.distances.building),
        wf_movement: movement_factor(r.dynamic, f.distances.dynamic),
        wf_nature: nature_factor(nature),
    }
}

/// `L_sky + L_landscape·wf_ct.dis + L_ground·wf_movement + L_nature·wf_nature`,
/// clamped to `[0, 1]`.
pub fn content_score(l: &LayerWeights) -> f64 {
    let v = l.l_sky + l.l_landscape * l.wf_ct_dis + l.l_ground * l.wf_movement + l.l_nature * l.wf_nature;
    v.clamp(0.0, 1.0)
}

/// Which angle of the window subtense an access row measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleKind {
    Vertical,
    Horizontal,
    SmallerOfTwo,
}

/// Reference rows for view access, keyed by what the view contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessRow {
    SkyOrGround,
    LandscapeNoNature,
    LandscapeWithNature,
    LandscapeWithSkyOrGround,
}

impl AccessRow {
    pub const ALL: [AccessRow; 4] = [
        AccessRow::SkyOrGround,
        AccessRow::LandscapeNoNature,
        AccessRow::LandscapeWithNature,
        AccessRow::LandscapeWithSkyOrGround,
    ];

    /// `(angle kind, α_min, α_saturation)` in degrees.
    pub fn reference(self) -> (AngleKind, f64, Option<f64>) {
        match self {
            AccessRow::SkyOrGround => (AngleKind::Vertical, 30.0, None),
            AccessRow::LandscapeNoNature => (AngleKind::SmallerOfTwo, 11.0, Some(90.0)),
            AccessRow::LandscapeWithNature => (AngleKind::SmallerOfTwo, 9.0, Some(50.0)),
            AccessRow::LandscapeWithSkyOrGround => (AngleKind::Horizontal, 14.0, Some(54.0)),
        }
    }

    /// Picks the row for a set of layers: no landscape means a sky or ground
    /// view; landscape with nature, or with sky/ground, selects the richer
    /// rows; otherwise landscape alone.
    pub fn classify(l: &LayerWeights) -> AccessRow {
        if l.l_landscape == 0.0 {
            AccessRow::SkyOrGround
        } else if l.l_nature > 0.0 {
            AccessRow::LandscapeWithNature
        } else if l.l_sky > 0.0 || l.l_ground > 0.0 {
            AccessRow::LandscapeWithSkyOrGround
        } else {
            AccessRow::LandscapeNoNature
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessAngles {
    pub alpha_view: f64,
    pub alpha_min: f64,
    pub alpha_sat: Option<f64>,
    pub angle_kind: AngleKind,
}

impl AccessAngles {
    pub fn for_row(row: AccessRow, alpha_view: f64) -> AccessAngles {
        let (angle_kind, alpha_min, alpha_sat) = row.reference();
        AccessAngles {
            alpha_view,
            alpha_min,
            alpha_sat,
            angle_kind,
        }
    }
}

/// Horizontal and vertical angular subtense (degrees) of the union of all
/// windows, measured as angles off the view axis in the camera's horizontal
/// and vertical planes.
pub fn window_subtense(room: &RoomModel, vp: &ViewpointSpec) -> Option<(f64, f64)> {
    if room.windows.is_empty() {
        return None;
    }
    let forward = vp.direction;
    let (right, up) = camera_basis(forward);
    let (mut h_lo, mut h_hi, mut v_lo, mut v_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in room.windows.iter().flat_map(|w| &w.vertices) {
        let r = *p - vp.position;
        let depth = r.dot(forward);
        let h = r.dot(right).atan2(depth).to_degrees();
        let v = r.dot(up).atan2(depth).to_degrees();
        h_lo = h_lo.min(h);
        h_hi = h_hi.max(h);
        v_lo = v_lo.min(v);
        v_hi = v_hi.max(v);
    }
    Some(((h_hi - h_lo).min(180.0), (v_hi - v_lo).min(180.0)))
}

/// α_view for an access row, with that row's reference angles.
pub fn compute_view_angle(
    room: &RoomModel,
    vp: &ViewpointSpec,
    row: AccessRow,
) -> Result<AccessAngles, FrameworkError> {
    let (h, v) = window_subtense(room, vp).ok_or(FrameworkError::NoWindow)?;
    Ok(angles_from_subtense(h, v, row))
}

/// Selects the measured angle a row calls for.
pub fn angles_from_subtense(horizontal: f64, vertical: f64, row: AccessRow) -> AccessAngles {
    let (kind, _, _) = row.reference();
    let alpha_view = match kind {
        AngleKind::Vertical => vertical,
        AngleKind::Horizontal => horizontal,
        AngleKind::SmallerOfTwo => horizontal.min(vertical),
    };
    AccessAngles::for_row(row, alpha_view)
}

/// View access: 0 below α_min, 0.5 at α_min, 1 at or above α_saturation,
/// linear in between. Rows without a saturation angle jump to 1 above α_min.
pub fn access_score(a: &AccessAngles) -> f64 {
    let view = a.alpha_view;
    if view < a.alpha_min {
        return 0.0;
    }
    if view == a.alpha_min {
        return 0.5;
    }
    match a.alpha_sat {
        None => 1.0,
        Some(sat) if view >= sat => 1.0,
        Some(sat) => 0.5 + 0.5 * (view - a.alpha_min) / (sat - a.alpha_min),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameworkScores {
    pub v_content: f64,
    pub v_access: f64,
    pub vqi: f64,
    pub scaled_content: f64,
    pub scaled_access: f64,
    pub scaled_vqi: f64,
}

/// Quality index as the product of content and access, plus the three
/// scaled values.
pub fn vqi(v_content: f64, v_access: f64) -> Result<FrameworkScores, FrameworkError> {
    let vqi = v_content * v_access;
    Ok(FrameworkScores {
        v_content,
        v_access,
        vqi,
        scaled_content: scale_bipolar(v_content)?,
        scaled_access: scale_bipolar(v_access)?,
        scaled_vqi: scale_bipolar(vqi)?,
    })
}

/// `[0, 1] -> [-5, 5]`, `10·v − 5`.
pub fn scale_bipolar(v: f64) -> Result<f64, FrameworkError> {
    if !(-1e-9..=1.0 + 1e-9).contains(&v) {
        return Err(FrameworkError::OutOfRange(v));
    }
    Ok(10.0 * v - 5.0)
}

/// Inverse of [`scale_bipolar`].
pub fn unscale_bipolar(s: f64) -> f64 {
    (s + 5.0) / 10.0
}

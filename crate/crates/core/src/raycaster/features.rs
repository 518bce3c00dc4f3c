use serde::{Deserialize, Serialize};

use crate::scene::SkyCondition;

/// Number of window-view variables.
pub const FEATURE_COUNT: usize = 23;

/// Column names, in feature-vector order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "Wn", "Was", "Z1r", "Z2r", "Z3r", "Z4r", "Br", "Er", "Tr", "Pr", "Gr", "Wr", "Dr", "Sr", "Bd", "Ed", "Td", "Gd",
    "Wd", "Dd", "EN", "FH", "SC",
];

/// Encoding of an absent distance (category not visible) in the numeric vector.
pub const ABSENT_DISTANCE: f64 = -1.0;

/// The 23 window-view variables for one viewpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewFeatures {
    #[serde(rename = "Wn")]
    pub window_count: u32,
    #[serde(rename = "Was")]
    pub window_area: f64,
    /// Z1r..Z4r: middle-center, middle-side, top, bottom.
    #[serde(flatten)]
    pub zones: ZoneRatios,
    #[serde(flatten)]
    pub ratios: CategoryRatios,
    #[serde(flatten)]
    pub distances: CategoryDistances,
    #[serde(rename = "EN")]
    pub element_count: u32,
    #[serde(rename = "FH")]
    pub floor_height: f64,
    #[serde(rename = "SC")]
    pub sky_condition: SkyCondition,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ZoneRatios {
    #[serde(rename = "Z1r")]
    pub z1: f64,
    #[serde(rename = "Z2r")]
    pub z2: f64,
    #[serde(rename = "Z3r")]
    pub z3: f64,
    #[serde(rename = "Z4r")]
    pub z4: f64,
}

impl ZoneRatios {
    pub fn as_array(&self) -> [f64; 4] {
        [self.z1, self.z2, self.z3, self.z4]
    }
}

/// Fractions of window rays that end on each view category.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryRatios {
    #[serde(rename = "Br")]
    pub building: f64,
    #[serde(rename = "Er")]
    pub equipment: f64,
    #[serde(rename = "Tr")]
    pub tree: f64,
    #[serde(rename = "Pr")]
    pub artificial_ground: f64,
    #[serde(rename = "Gr")]
    pub ground_vegetation: f64,
    #[serde(rename = "Wr")]
    pub water: f64,
    #[serde(rename = "Dr")]
    pub dynamic: f64,
    #[serde(rename = "Sr")]
    pub sky: f64,
}

impl CategoryRatios {
    /// In [`crate::scene::ElementCategory::VIEW`] order.
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.building,
            self.equipment,
            self.tree,
            self.artificial_ground,
            self.ground_vegetation,
            self.water,
            self.dynamic,
            self.sky,
        ]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        CategoryRatios {
            building: a[0],
            equipment: a[1],
            tree: a[2],
            artificial_ground: a[3],
            ground_vegetation: a[4],
            water: a[5],
            dynamic: a[6],
            sky: a[7],
        }
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

/// Perceived distances in meters; `None` when the category is not visible.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryDistances {
    #[serde(rename = "Bd")]
    pub building: Option<f64>,
    #[serde(rename = "Ed")]
    pub equipment: Option<f64>,
    #[serde(rename = "Td")]
    pub tree: Option<f64>,
    #[serde(rename = "Gd")]
    pub ground_vegetation: Option<f64>,
    #[serde(rename = "Wd")]
    pub water: Option<f64>,
    #[serde(rename = "Dd")]
    pub dynamic: Option<f64>,
}

impl CategoryDistances {
    pub fn as_array(&self) -> [Option<f64>; 6] {
        [
            self.building,
            self.equipment,
            self.tree,
            self.ground_vegetation,
            self.water,
            self.dynamic,
        ]
    }
}

impl ViewFeatures {
    /// The numeric feature vector, absent distances encoded as [`ABSENT_DISTANCE`].
    pub fn to_vector(&self) -> [f64; FEATURE_COUNT] {
        let mut v = [0.0; FEATURE_COUNT];
        v[0] = self.window_count as f64;
        v[1] = self.window_area;
        v[2..6].copy_from_slice(&self.zones.as_array());
        v[6..14].copy_from_slice(&self.ratios.as_array());
        for (slot, d) in v[14..20].iter_mut().zip(self.distances.as_array()) {
            *slot = d.unwrap_or(ABSENT_DISTANCE);
        }
        v[20] = self.element_count as f64;
        v[21] = self.floor_height;
        v[22] = u8::from(self.sky_condition) as f64;
        v
    }

    /// One CSV cell per feature; absent distances are empty cells.
    pub fn to_csv_cells(&self) -> Vec<String> {
        self.to_vector()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                if (14..20).contains(&i) && *x == ABSENT_DISTANCE {
                    String::new()
                } else {
                    format!("{x}")
                }
            })
            .collect()
    }
}

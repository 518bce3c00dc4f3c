//! Window-view analysis: labeled scene parsing, two-stage ray casting of the
//! 23 window-view variables, a layer-weight view quality framework, a
//! tree-ensemble satisfaction predictor, and case-study comparisons.

pub mod bvh;
pub mod casestudy;
pub mod exec;
pub mod framework;
pub mod geometry;
pub mod predictor;
pub mod raycaster;
pub mod scene;
pub mod synthetic;

pub use exec::Execution;
pub use raycaster::{extract_features, ViewFeatures};
pub use scene::{parse_scene, ViewModel};

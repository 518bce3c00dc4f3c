//! Labeled scene, room and viewpoint model, plus the JSON scene format.
//!
//! A scene file carries the outdoor context (triangle meshes tagged with one
//! of the eight view categories), the room shell with its window polygons,
//! and the camera. Units are meters, z-up, right-handed.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{polygon_area, polygon_normal, Ray, Triangle, Vec3};

/// Minimum sky dome radius in meters.
pub const MIN_SKY_RADIUS: f64 = 50_000.0;
/// Window vertices may sit this far off the wall surface.
pub const WINDOW_WALL_TOLERANCE: f64 = 0.01;
const WINDOW_PLANARITY_TOLERANCE: f64 = 1e-6;
const DEGENERATE_AREA: f64 = 1e-12;
const DEFAULT_EYE_HEIGHT: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementCategory {
    Building,
    Equipment,
    Tree,
    ArtificialGround,
    GroundVegetation,
    Water,
    Dynamic,
    Sky,
    Wall,
    Floor,
    Ceiling,
    Window,
}

impl ElementCategory {
    /// The eight view categories, in feature-vector order (Br, Er, Tr, Pr, Gr, Wr, Dr, Sr).
    pub const VIEW: [ElementCategory; 8] = [
        ElementCategory::Building,
        ElementCategory::Equipment,
        ElementCategory::Tree,
        ElementCategory::ArtificialGround,
        ElementCategory::GroundVegetation,
        ElementCategory::Water,
        ElementCategory::Dynamic,
        ElementCategory::Sky,
    ];

    pub fn is_view(self) -> bool {
        self.view_index().is_some()
    }

    pub fn is_room(self) -> bool {
        matches!(
            self,
            ElementCategory::Wall | ElementCategory::Floor | ElementCategory::Ceiling | ElementCategory::Window
        )
    }

    pub fn is_ground(self) -> bool {
        matches!(
            self,
            ElementCategory::ArtificialGround | ElementCategory::GroundVegetation | ElementCategory::Water
        )
    }

    /// Position in [`ElementCategory::VIEW`].
    pub fn view_index(self) -> Option<usize> {
        ElementCategory::VIEW.iter().position(|&c| c == self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementCategory::Building => "building",
            ElementCategory::Equipment => "equipment",
            ElementCategory::Tree => "tree",
            ElementCategory::ArtificialGround => "artificial_ground",
            ElementCategory::GroundVegetation => "ground_vegetation",
            ElementCategory::Water => "water",
            ElementCategory::Dynamic => "dynamic",
            ElementCategory::Sky => "sky",
            ElementCategory::Wall => "wall",
            ElementCategory::Floor => "floor",
            ElementCategory::Ceiling => "ceiling",
            ElementCategory::Window => "window",
        }
    }
}

impl fmt::Display for ElementCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElementCategory::VIEW
            .iter()
            .chain(&[
                ElementCategory::Wall,
                ElementCategory::Floor,
                ElementCategory::Ceiling,
                ElementCategory::Window,
            ])
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum SkyCondition {
    Invisible = 0,
    Overcast = 1,
    Clear = 2,
}

impl TryFrom<u8> for SkyCondition {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(SkyCondition::Invisible),
            1 => Ok(SkyCondition::Overcast),
            2 => Ok(SkyCondition::Clear),
            other => Err(format!("sky_condition must be 0, 1 or 2, got {other}")),
        }
    }
}

impl From<SkyCondition> for u8 {
    fn from(s: SkyCondition) -> u8 {
        s as u8
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// Panics if the triangle indices are out of range; validated meshes never are.
    pub fn triangle(&self, i: usize) -> Triangle {
        let [a, b, c] = self.triangles[i];
        Triangle::new(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn iter_triangles(&self) -> impl Iterator<Item = Triangle> + '_ {
        (0..self.triangles.len()).map(|i| self.triangle(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub name: Option<String>,
    pub category: ElementCategory,
    pub mesh: Mesh,
}

impl SceneObject {
    fn label(&self, index: usize, group: &str) -> String {
        match &self.name {
            Some(n) => format!("{group}[{index}] ({n})"),
            None => format!("{group}[{index}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkyDome {
    pub center: Vec3,
    pub radius: f64,
}

impl SkyDome {
    /// Exit distance of a ray that starts inside the dome.
    pub fn exit_distance(&self, ray: &Ray) -> Option<f64> {
        let oc = ray.origin - self.center;
        let b = oc.dot(ray.dir);
        let c = oc.dot(oc) - self.radius * self.radius;
        let disc = b * b - c;
        if disc < 0.0 {
            return None;
        }
        let t = -b + disc.sqrt();
        (t > 0.0).then_some(t)
    }
}

/// Outdoor context: labeled meshes enclosed by the sky dome.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
    pub sky_dome: SkyDome,
    /// Ground elevation (z) to use for floor height when no ground mesh is modeled.
    pub ground_elevation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowPolygon {
    pub vertices: Vec<Vec3>,
}

impl WindowPolygon {
    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomModel {
    /// Wall, floor and ceiling meshes.
    pub shell: Vec<SceneObject>,
    pub windows: Vec<WindowPolygon>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMetrics {
    /// Wn
    pub count: usize,
    /// Was, m²
    pub area: f64,
}

/// Number of windows and their summed area.
pub fn window_metrics(room: &RoomModel) -> WindowMetrics {
    WindowMetrics {
        count: room.windows.len(),
        area: room.windows.iter().map(WindowPolygon::area).sum(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewpointSpec {
    pub position: Vec3,
    /// Unit view direction.
    pub direction: Vec3,
    pub fov_deg: f64,
    /// Frame aspect as width:height.
    pub aspect: (u32, u32),
    /// Pixels, x by y.
    pub resolution: (u32, u32),
    pub sky_condition: SkyCondition,
    pub floor_height: Option<f64>,
}

/// A fully parsed scene file.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewModel {
    pub scene: Scene,
    pub room: RoomModel,
    pub viewpoint: ViewpointSpec,
}

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("{0}: file not found")]
    NotFound(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {locus}: {message}")]
    Parse { locus: String, message: String },
    #[error("invalid scene: {0}")]
    Validation(ValidationReport),
}

/// One violated invariant. `code` is a stable kebab-case identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub code: &'static str,
    pub object: String,
    pub detail: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.code, self.object, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn contains(&self, code: &str) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }

    fn push(&mut self, code: &'static str, object: impl Into<String>, detail: impl Into<String>) {
        self.issues.push(Issue {
            code,
            object: object.into(),
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDocument {
    units: String,
    #[serde(default)]
    objects: Vec<MeshDocument>,
    room: RoomDocument,
    viewpoint: ViewpointDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sky_dome: Option<SkyDome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground_elevation: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    category: ElementCategory,
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomDocument {
    #[serde(default)]
    shell: Vec<MeshDocument>,
    #[serde(default)]
    windows: Vec<WindowDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowDocument {
    polygon: Vec<Vec3>,
}

fn default_fov() -> f64 {
    70.0
}
fn default_aspect() -> [u32; 2] {
    [3, 2]
}
fn default_resolution() -> [u32; 2] {
    [366, 244]
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ViewpointDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    position: Option<Vec3>,
    direction: Vec3,
    #[serde(default = "default_fov")]
    fov_deg: f64,
    #[serde(default = "default_aspect")]
    aspect: [u32; 2],
    #[serde(default = "default_resolution")]
    resolution: [u32; 2],
    sky_condition: SkyCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    floor_height: Option<f64>,
}

impl From<MeshDocument> for SceneObject {
    fn from(d: MeshDocument) -> Self {
        SceneObject {
            name: d.name,
            category: d.category,
            mesh: Mesh {
                vertices: d.vertices,
                triangles: d.triangles,
            },
        }
    }
}

impl From<&SceneObject> for MeshDocument {
    fn from(o: &SceneObject) -> Self {
        MeshDocument {
            name: o.name.clone(),
            category: o.category,
            vertices: o.mesh.vertices.clone(),
            triangles: o.mesh.triangles.clone(),
        }
    }
}

/// Reads, parses and validates a scene file.
pub fn parse_scene(path: impl AsRef<Path>) -> Result<ViewModel, SceneError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            SceneError::NotFound(path.display().to_string())
        } else {
            SceneError::Io {
                path: path.display().to_string(),
                source: e,
            }
        }
    })?;
    parse_scene_str(&text)
}

/// Parses and validates a scene document held in memory.
pub fn parse_scene_str(text: &str) -> Result<ViewModel, SceneError> {
    let model = parse_scene_unchecked(text)?;
    let report = validate_scene(&model.scene, &model.room, &model.viewpoint);
    if report.is_valid() {
        Ok(model)
    } else {
        Err(SceneError::Validation(report))
    }
}

/// Structural parse only: schema, categories and units are checked, geometric
/// invariants are not. Use [`validate_scene`] for the latter.
pub fn parse_scene_unchecked(text: &str) -> Result<ViewModel, SceneError> {
    let doc: SceneDocument = serde_json::from_str(text).map_err(|e| SceneError::Parse {
        locus: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    if doc.units != "m" {
        return Err(SceneError::Parse {
            locus: "field `units`".into(),
            message: format!("unsupported units `{}`, only \"m\" is accepted", doc.units),
        });
    }

    let objects: Vec<SceneObject> = doc.objects.into_iter().map(SceneObject::from).collect();
    let shell: Vec<SceneObject> = doc.room.shell.into_iter().map(SceneObject::from).collect();
    let windows: Vec<WindowPolygon> = doc
        .room
        .windows
        .into_iter()
        .map(|w| WindowPolygon { vertices: w.polygon })
        .collect();
    let room = RoomModel { shell, windows };

    let position = doc.viewpoint.position.unwrap_or_else(|| default_position(&room));
    let direction = doc.viewpoint.direction.normalized().ok_or_else(|| SceneError::Parse {
        locus: "field `viewpoint.direction`".into(),
        message: "direction must be a non-zero vector".into(),
    })?;
    let viewpoint = ViewpointSpec {
        position,
        direction,
        fov_deg: doc.viewpoint.fov_deg,
        aspect: (doc.viewpoint.aspect[0], doc.viewpoint.aspect[1]),
        resolution: (doc.viewpoint.resolution[0], doc.viewpoint.resolution[1]),
        sky_condition: doc.viewpoint.sky_condition,
        floor_height: doc.viewpoint.floor_height,
    };

    let sky_dome = doc
        .sky_dome
        .unwrap_or_else(|| synthesize_sky(&objects, &room, position));
    let scene = Scene {
        objects,
        sky_dome,
        ground_elevation: doc.ground_elevation,
    };
    Ok(ViewModel { scene, room, viewpoint })
}

/// Room center in plan, 1.2 m above the lowest floor vertex.
fn default_position(room: &RoomModel) -> Vec3 {
    let verts = room.shell.iter().flat_map(|o| o.mesh.vertices.iter().copied());
    let (mut lo, mut hi) = (
        Vec3::new(f64::MAX, f64::MAX, f64::MAX),
        Vec3::new(f64::MIN, f64::MIN, f64::MIN),
    );
    let mut any = false;
    for v in verts {
        lo = lo.min(v);
        hi = hi.max(v);
        any = true;
    }
    if !any {
        return Vec3::new(0.0, 0.0, DEFAULT_EYE_HEIGHT);
    }
    let floor_z = room
        .shell
        .iter()
        .filter(|o| o.category == ElementCategory::Floor)
        .flat_map(|o| o.mesh.vertices.iter().map(|v| v.z))
        .fold(f64::INFINITY, f64::min);
    let base = if floor_z.is_finite() { floor_z } else { lo.z };
    Vec3::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0, base + DEFAULT_EYE_HEIGHT)
}

fn synthesize_sky(objects: &[SceneObject], room: &RoomModel, center: Vec3) -> SkyDome {
    SkyDome {
        center,
        radius: MIN_SKY_RADIUS.max(2.0 * bounding_radius(objects, room, center)),
    }
}

fn bounding_radius(objects: &[SceneObject], room: &RoomModel, center: Vec3) -> f64 {
    objects
        .iter()
        .filter(|o| o.category != ElementCategory::Sky)
        .chain(room.shell.iter())
        .flat_map(|o| o.mesh.vertices.iter())
        .chain(room.windows.iter().flat_map(|w| w.vertices.iter()))
        .map(|&v| (v - center).length())
        .fold(0.0, f64::max)
}

impl ViewModel {
    /// Serializes back to the scene file format. The sky dome is always written
    /// out so a re-parse reproduces this model exactly.
    pub fn to_json(&self) -> String {
        let doc = SceneDocument {
            units: "m".into(),
            objects: self.scene.objects.iter().map(MeshDocument::from).collect(),
            room: RoomDocument {
                shell: self.room.shell.iter().map(MeshDocument::from).collect(),
                windows: self
                    .room
                    .windows
                    .iter()
                    .map(|w| WindowDocument {
                        polygon: w.vertices.clone(),
                    })
                    .collect(),
            },
            viewpoint: ViewpointDocument {
                position: Some(self.viewpoint.position),
                direction: self.viewpoint.direction,
                fov_deg: self.viewpoint.fov_deg,
                aspect: [self.viewpoint.aspect.0, self.viewpoint.aspect.1],
                resolution: [self.viewpoint.resolution.0, self.viewpoint.resolution.1],
                sky_condition: self.viewpoint.sky_condition,
                floor_height: self.viewpoint.floor_height,
            },
            sky_dome: Some(self.scene.sky_dome),
            ground_elevation: self.scene.ground_elevation,
        };
        serde_json::to_string_pretty(&doc).expect("scene document serializes")
    }
}

// ---------------------------------------------------------------------------
// Validation

/// Checks every geometric and semantic invariant; an empty report means valid.
pub fn validate_scene(scene: &Scene, room: &RoomModel, viewpoint: &ViewpointSpec) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut sky_objects = 0;
    for (i, obj) in scene.objects.iter().enumerate() {
        let label = obj.label(i, "objects");
        if !obj.category.is_view() {
            report.push(
                "room-label-in-context",
                &label,
                format!("category `{}` is only valid inside the room", obj.category),
            );
        }
        if obj.category == ElementCategory::Sky {
            sky_objects += 1;
        }
        check_mesh(&mut report, &label, &obj.mesh);
    }
    if sky_objects > 1 {
        report.push(
            "multiple-sky",
            "objects",
            format!("{sky_objects} sky objects; at most one dome is allowed"),
        );
    }

    for (i, obj) in room.shell.iter().enumerate() {
        let label = obj.label(i, "room.shell");
        if !matches!(
            obj.category,
            ElementCategory::Wall | ElementCategory::Floor | ElementCategory::Ceiling
        ) {
            report.push(
                "bad-shell-label",
                &label,
                format!("shell surfaces must be wall, floor or ceiling, got `{}`", obj.category),
            );
        }
        check_mesh(&mut report, &label, &obj.mesh);
    }

    let walls: Vec<Triangle> = room
        .shell
        .iter()
        .filter(|o| o.category == ElementCategory::Wall)
        .flat_map(|o| valid_triangles(&o.mesh))
        .collect();
    for (i, w) in room.windows.iter().enumerate() {
        let label = format!("room.windows[{i}]");
        if w.vertices.len() < 3 || w.vertices.iter().any(|v| !v.is_finite()) {
            report.push("degenerate-window", &label, "a window needs at least 3 finite vertices");
            continue;
        }
        let area = w.area();
        let Some(normal) = polygon_normal(&w.vertices).filter(|_| area > DEGENERATE_AREA) else {
            report.push("degenerate-window", &label, format!("area {area:e} m²"));
            continue;
        };
        let c = w.vertices.iter().fold(Vec3::ZERO, |acc, &v| acc + v) / w.vertices.len() as f64;
        let off = w
            .vertices
            .iter()
            .map(|&v| (v - c).dot(normal).abs())
            .fold(0.0, f64::max);
        if off > WINDOW_PLANARITY_TOLERANCE {
            report.push(
                "window-not-planar",
                &label,
                format!("vertex {off:e} m off the window plane"),
            );
        }
        let far = w
            .vertices
            .iter()
            .map(|&v| {
                walls
                    .iter()
                    .map(|t| (t.closest_point(v) - v).length())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        if far > WINDOW_WALL_TOLERANCE + 1e-12 {
            report.push(
                "window-off-wall",
                &label,
                if walls.is_empty() {
                    "room has no wall surfaces".to_string()
                } else {
                    format!("vertex {far:.4} m from the nearest wall")
                },
            );
        }
    }

    check_viewpoint(&mut report, viewpoint);
    if viewpoint.position.is_finite() && !viewpoint_inside_room(room, viewpoint.position) {
        report.push(
            "viewpoint-outside-room",
            "viewpoint",
            "some rays from the viewpoint escape without meeting the room shell",
        );
    }

    let needed = bounding_radius(&scene.objects, room, scene.sky_dome.center);
    if !(scene.sky_dome.radius.is_finite() && scene.sky_dome.radius >= needed) {
        report.push(
            "sky-dome-too-small",
            "sky_dome",
            format!(
                "radius {} m does not enclose geometry reaching {needed:.3} m",
                scene.sky_dome.radius
            ),
        );
    }
    if let Some(z) = scene.ground_elevation {
        if !z.is_finite() {
            report.push("bad-ground-elevation", "ground_elevation", "must be finite");
        }
    }
    report
}

fn valid_triangles(mesh: &Mesh) -> impl Iterator<Item = Triangle> + '_ {
    mesh.triangles
        .iter()
        .filter(|t| t.iter().all(|&i| i < mesh.vertices.len()))
        .map(|&[a, b, c]| Triangle::new(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]))
}

fn check_mesh(report: &mut ValidationReport, label: &str, mesh: &Mesh) {
    if let Some(i) = mesh.vertices.iter().position(|v| !v.is_finite()) {
        report.push("non-finite-vertex", label, format!("vertex {i}"));
    }
    for (i, tri) in mesh.triangles.iter().enumerate() {
        if tri.iter().any(|&v| v >= mesh.vertices.len()) {
            report.push(
                "index-out-of-range",
                label,
                format!("triangle {i} references a vertex beyond {}", mesh.vertices.len()),
            );
            continue;
        }
        let area = mesh.triangle(i).area();
        if area.is_nan() || area <= DEGENERATE_AREA {
            report.push(
                "degenerate-triangle",
                label,
                format!("triangle {i} has area {area:e} m²"),
            );
        }
    }
}

fn check_viewpoint(report: &mut ValidationReport, vp: &ViewpointSpec) {
    if !vp.position.is_finite() {
        report.push("bad-position", "viewpoint", "position must be finite");
    }
    if (vp.direction.length() - 1.0).abs() > 1e-9 {
        report.push("bad-direction", "viewpoint", "direction must be a unit vector");
    }
    if !(vp.fov_deg > 0.0 && vp.fov_deg < 180.0) {
        report.push(
            "bad-fov",
            "viewpoint",
            format!("fov_deg {} outside (0, 180)", vp.fov_deg),
        );
    }
    if vp.resolution.0 < 2 || vp.resolution.1 < 2 {
        report.push(
            "bad-resolution",
            "viewpoint",
            format!("resolution {}x{} below 2x2", vp.resolution.0, vp.resolution.1),
        );
    }
    if vp.aspect.0 == 0 || vp.aspect.1 == 0 {
        report.push("bad-aspect", "viewpoint", "aspect terms must be positive");
    }
    if let Some(h) = vp.floor_height {
        if !h.is_finite() {
            report.push("bad-floor-height", "viewpoint", "floor_height must be finite");
        }
    }
}

/// A point is inside the room when rays in all 26 lattice directions meet a
/// shell surface or a window.
fn viewpoint_inside_room(room: &RoomModel, p: Vec3) -> bool {
    let mut tris: Vec<Triangle> = room.shell.iter().flat_map(|o| valid_triangles(&o.mesh)).collect();
    for w in &room.windows {
        for [a, b, c] in crate::geometry::triangulate_polygon(&w.vertices) {
            tris.push(Triangle::new(w.vertices[a], w.vertices[b], w.vertices[c]));
        }
    }
    if tris.is_empty() {
        return false;
    }
    let mut dirs = Vec::with_capacity(26);
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                if (x, y, z) != (0, 0, 0) {
                    // Slight skew keeps rays off shared triangle edges.
                    let d = Vec3::new(x as f64 + 1e-3, y as f64 + 2e-3, z as f64 + 3e-3);
                    dirs.push(d.normalized().unwrap());
                }
            }
        }
    }
    dirs.iter().all(|&d| {
        let ray = Ray::new(p, d);
        tris.iter().any(|t| t.intersect(&ray, 1e-9, f64::INFINITY).is_some())
    })
}

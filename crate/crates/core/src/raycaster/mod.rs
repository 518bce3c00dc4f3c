//! Two-stage ray casting and window-view feature extraction.
//!
//! Stage one classifies every pixel ray by the nearest room surface it meets
//! (wall, floor, ceiling or window). Stage two continues each window ray past
//! the window into the labeled context, recording the category it lands on
//! and its distance from the viewpoint. The sky dome closes the scene, so
//! every window ray ends somewhere.

mod features;
mod grid;

pub use features::{
    CategoryDistances, CategoryRatios, ViewFeatures, ZoneRatios, ABSENT_DISTANCE, FEATURE_COUNT, FEATURE_NAMES,
};
pub use grid::{camera_basis, RayGrid, Zone};

use crate::bvh::Bvh;
use crate::exec::Execution;
use crate::geometry::{polygon_normal, triangulate_polygon, Ray, Triangle, Vec3};
use crate::scene::{
    window_metrics, ElementCategory, RoomModel, Scene, ViewModel, ViewpointSpec, WINDOW_WALL_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RayError {
    #[error("ray through pixel ({}, {}) left the room without hitting any surface; the room model leaks", .pixel.0, .pixel.1)]
    EscapedRay { pixel: (u32, u32) },
    #[error("no ground surface below the viewpoint; supply a floor height override")]
    NoGroundFound,
}

/// Which room surface a pixel ray meets first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoomSurface {
    Wall,
    Floor,
    Ceiling,
    Window,
}

/// Stage-two outcome for a window ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextHit {
    pub category: ElementCategory,
    /// Meters from the viewpoint.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRecord {
    pub pixel: (u32, u32),
    pub surface: RoomSurface,
    /// Distance to the room surface along the ray.
    pub room_distance: f64,
    /// Present exactly for window rays.
    pub context: Option<ContextHit>,
}

/// All per-pixel records of one cast, in row-major pixel order.
#[derive(Debug, Clone, PartialEq)]
pub struct CastResult {
    pub grid: RayGrid,
    pub records: Vec<HitRecord>,
}

impl CastResult {
    pub fn window_rays(&self) -> usize {
        self.records.iter().filter(|r| r.surface == RoomSurface::Window).count()
    }

    /// Window rays over all rays.
    pub fn window_ratio(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.window_rays() as f64 / self.records.len() as f64
        }
    }
}

/// Room shell and windows prepared for stage-one queries.
pub struct RoomIndex {
    shell: Bvh,
    shell_surface: Vec<RoomSurface>,
    windows: Bvh,
    window_normal: Vec<Vec3>,
}

impl RoomIndex {
    pub fn new(room: &RoomModel) -> RoomIndex {
        let mut shell_tris = Vec::new();
        let mut shell_surface = Vec::new();
        for obj in &room.shell {
            let surface = match obj.category {
                ElementCategory::Floor => RoomSurface::Floor,
                ElementCategory::Ceiling => RoomSurface::Ceiling,
                _ => RoomSurface::Wall,
            };
            for t in obj.mesh.iter_triangles() {
                shell_tris.push(t);
                shell_surface.push(surface);
            }
        }
        let mut window_tris = Vec::new();
        let mut window_normal = Vec::new();
        for w in &room.windows {
            let Some(n) = polygon_normal(&w.vertices) else {
                continue;
            };
            for [a, b, c] in triangulate_polygon(&w.vertices) {
                window_tris.push(Triangle::new(w.vertices[a], w.vertices[b], w.vertices[c]));
                window_normal.push(n);
            }
        }
        RoomIndex {
            shell: Bvh::build(shell_tris),
            shell_surface,
            windows: Bvh::build(window_tris),
            window_normal,
        }
    }

    /// Nearest room surface. A window wins over a wall it lies on as long as
    /// it is no more than the coplanarity tolerance behind it.
    pub fn classify(&self, ray: &Ray) -> Option<(RoomSurface, f64)> {
        let shell = self.shell.nearest(ray, 0.0, f64::INFINITY);
        let window = self.windows.nearest(ray, 0.0, f64::INFINITY);
        match (window, shell) {
            (Some(w), s) => {
                let cos = self.window_normal[w.index].dot(ray.dir).abs().max(0.01);
                let slack = WINDOW_WALL_TOLERANCE / cos;
                match s {
                    Some(s) if w.t > s.t + slack => Some((self.shell_surface[s.index], s.t)),
                    _ => Some((RoomSurface::Window, w.t)),
                }
            }
            (None, Some(s)) => Some((self.shell_surface[s.index], s.t)),
            (None, None) => None,
        }
    }
}

/// Context meshes prepared for stage-two queries.
pub struct ContextIndex {
    bvh: Bvh,
    category: Vec<ElementCategory>,
    ground: Bvh,
    scene_dome: crate::scene::SkyDome,
}

impl ContextIndex {
    pub fn new(scene: &Scene) -> ContextIndex {
        let mut tris = Vec::new();
        let mut category = Vec::new();
        let mut ground = Vec::new();
        for obj in &scene.objects {
            for t in obj.mesh.iter_triangles() {
                tris.push(t);
                category.push(obj.category);
                if obj.category.is_ground() {
                    ground.push(t);
                }
            }
        }
        ContextIndex {
            bvh: Bvh::build(tris),
            category,
            ground: Bvh::build(ground),
            scene_dome: scene.sky_dome,
        }
    }

    /// Continues a ray from `t_start` (the window crossing) into the context.
    /// The returned distance is measured from the ray origin.
    pub fn trace(&self, ray: &Ray, t_start: f64) -> ContextHit {
        match self.bvh.nearest(ray, t_start, f64::INFINITY) {
            Some(hit) => ContextHit {
                category: self.category[hit.index],
                distance: hit.t,
            },
            None => ContextHit {
                category: ElementCategory::Sky,
                distance: self.scene_dome.exit_distance(ray).unwrap_or(self.scene_dome.radius),
            },
        }
    }

    /// Vertical drop to the nearest ground-category surface below `p`.
    pub fn ground_drop(&self, p: Vec3) -> Option<f64> {
        self.ground
            .nearest(&Ray::new(p, -Vec3::Z), 0.0, f64::INFINITY)
            .map(|h| h.t)
    }
}

/// Prebuilt acceleration structures for one scene file; cast any number of
/// viewpoints against it.
pub struct Raycaster<'a> {
    model: &'a ViewModel,
    room: RoomIndex,
    context: ContextIndex,
}

impl<'a> Raycaster<'a> {
    pub fn new(model: &'a ViewModel) -> Self {
        Raycaster {
            model,
            room: RoomIndex::new(&model.room),
            context: ContextIndex::new(&model.scene),
        }
    }

    /// Stage one only.
    pub fn stage1(&self, vp: &ViewpointSpec, exec: Execution) -> Result<CastResult, RayError> {
        let grid = RayGrid::new(vp);
        let records = exec.map_range(grid.len(), |idx| {
            let ray = grid.ray(idx);
            let pixel = grid.pixel(idx);
            self.room
                .classify(&ray)
                .map(|(surface, t)| HitRecord {
                    pixel,
                    surface,
                    room_distance: t,
                    context: None,
                })
                .ok_or(RayError::EscapedRay { pixel })
        });
        let records = records.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(CastResult { grid, records })
    }

    /// Stage two: fills `context` for every window ray of a stage-one result.
    pub fn stage2(&self, cast: &mut CastResult, exec: Execution) {
        let grid = &cast.grid;
        let records = &cast.records;
        let hits = exec.map_range(records.len(), |idx| {
            let r = &records[idx];
            (r.surface == RoomSurface::Window).then(|| self.context.trace(&grid.ray(idx), r.room_distance))
        });
        for (r, h) in cast.records.iter_mut().zip(hits) {
            r.context = h;
        }
    }

    /// Both stages.
    pub fn cast(&self, vp: &ViewpointSpec, exec: Execution) -> Result<CastResult, RayError> {
        let mut cast = self.stage1(vp, exec)?;
        self.stage2(&mut cast, exec);
        Ok(cast)
    }

    pub fn floor_height(&self, vp: &ViewpointSpec) -> Result<f64, RayError> {
        if let Some(h) = vp.floor_height {
            return Ok(h);
        }
        if let Some(z) = self.model.scene.ground_elevation {
            return Ok(vp.position.z - z);
        }
        self.context.ground_drop(vp.position).ok_or(RayError::NoGroundFound)
    }

    /// All 23 variables for a viewpoint.
    pub fn features(&self, vp: &ViewpointSpec, exec: Execution) -> Result<ViewFeatures, RayError> {
        let cast = self.cast(vp, exec)?;
        let floor_height = self.floor_height(vp)?;
        Ok(assemble_features(&cast, &self.model.room, vp, floor_height))
    }
}

/// Extracts the 23 window-view variables for the model's own viewpoint.
pub fn extract_features(model: &ViewModel) -> Result<ViewFeatures, RayError> {
    extract_features_with(model, Execution::default())
}

pub fn extract_features_with(model: &ViewModel, exec: Execution) -> Result<ViewFeatures, RayError> {
    Raycaster::new(model).features(&model.viewpoint, exec)
}

/// Floor height: override, then ground elevation, then a downward cast
/// against ground-category meshes.
pub fn floor_height(vp: &ViewpointSpec, scene: &Scene) -> Result<f64, RayError> {
    if let Some(h) = vp.floor_height {
        return Ok(h);
    }
    if let Some(z) = scene.ground_elevation {
        return Ok(vp.position.z - z);
    }
    ContextIndex::new(scene)
        .ground_drop(vp.position)
        .ok_or(RayError::NoGroundFound)
}

fn assemble_features(cast: &CastResult, room: &RoomModel, vp: &ViewpointSpec, floor_height: f64) -> ViewFeatures {
    let wm = window_metrics(room);
    let zones = zone_ratios(cast);

    let mut counts = [0usize; 8];
    let mut distances: [Vec<f64>; 8] = Default::default();
    for hit in cast.records.iter().filter_map(|r| r.context) {
        let k = hit
            .category
            .view_index()
            .expect("context categories are view categories");
        counts[k] += 1;
        distances[k].push(hit.distance);
    }
    let window_rays: usize = counts.iter().sum();
    let mut ratios = [0.0; 8];
    if window_rays > 0 {
        for (r, &c) in ratios.iter_mut().zip(&counts) {
            *r = c as f64 / window_rays as f64;
        }
    }
    let mut dist = |c: ElementCategory| perceived_distance(&mut distances[c.view_index().unwrap()]);
    let distances = CategoryDistances {
        building: dist(ElementCategory::Building),
        equipment: dist(ElementCategory::Equipment),
        tree: dist(ElementCategory::Tree),
        ground_vegetation: dist(ElementCategory::GroundVegetation),
        water: dist(ElementCategory::Water),
        dynamic: dist(ElementCategory::Dynamic),
    };

    ViewFeatures {
        window_count: wm.count as u32,
        window_area: wm.area,
        zones,
        ratios: CategoryRatios::from_array(ratios),
        distances,
        element_count: ratios.iter().filter(|&&r| r > 0.0).count() as u32,
        floor_height,
        sky_condition: vp.sky_condition,
    }
}

/// Mean of the closest `ceil(0.3 n)` distances (at least one). `None` for an
/// empty set. Reorders the slice.
pub fn perceived_distance(distances: &mut [f64]) -> Option<f64> {
    let n = distances.len();
    if n == 0 {
        return None;
    }
    let k = ((3 * n).div_ceil(10)).max(1);
    if k < n {
        distances.select_nth_unstable_by(k - 1, f64::total_cmp);
    }
    let head = &mut distances[..k];
    // Sum in ascending order so the result does not depend on selection order.
    head.sort_unstable_by(f64::total_cmp);
    Some(head.iter().sum::<f64>() / k as f64)
}

/// Window rays per rule-of-thirds zone over all rays in that zone.
pub fn zone_ratios(cast: &CastResult) -> ZoneRatios {
    let (w, h) = (cast.grid.width, cast.grid.height);
    let mut window = [0usize; 4];
    let mut total = [0usize; 4];
    for r in &cast.records {
        let z = Zone::of(r.pixel.0, r.pixel.1, w, h).index();
        total[z] += 1;
        if r.surface == RoomSurface::Window {
            window[z] += 1;
        }
    }
    let ratio = |k: usize| {
        if total[k] == 0 {
            0.0
        } else {
            window[k] as f64 / total[k] as f64
        }
    };
    ZoneRatios {
        z1: ratio(0),
        z2: ratio(1),
        z3: ratio(2),
        z4: ratio(3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Mesh, SceneObject, SkyCondition, SkyDome, WindowPolygon};

    fn quad(category: ElementCategory, a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> SceneObject {
        SceneObject {
            name: None,
            category,
            mesh: Mesh {
                vertices: vec![a, b, c, d],
                triangles: vec![[0, 1, 2], [0, 2, 3]],
            },
        }
    }

    /// Box room x∈[-2,2], y∈[-2,2], z∈[0,3]; viewpoint (0,0,1.2) facing +y.
    fn box_room(windows: Vec<WindowPolygon>) -> RoomModel {
        let p = Vec3::new;
        let wall = ElementCategory::Wall;
        RoomModel {
            shell: vec![
                quad(wall, p(-2., 2., 0.), p(2., 2., 0.), p(2., 2., 3.), p(-2., 2., 3.)),
                quad(wall, p(-2., -2., 0.), p(2., -2., 0.), p(2., -2., 3.), p(-2., -2., 3.)),
                quad(wall, p(-2., -2., 0.), p(-2., 2., 0.), p(-2., 2., 3.), p(-2., -2., 3.)),
                quad(wall, p(2., -2., 0.), p(2., 2., 0.), p(2., 2., 3.), p(2., -2., 3.)),
                quad(
                    ElementCategory::Floor,
                    p(-2., -2., 0.),
                    p(2., -2., 0.),
                    p(2., 2., 0.),
                    p(-2., 2., 0.),
                ),
                quad(
                    ElementCategory::Ceiling,
                    p(-2., -2., 3.),
                    p(2., -2., 3.),
                    p(2., 2., 3.),
                    p(-2., 2., 3.),
                ),
            ],
            windows,
        }
    }

    /// Window on the y = 2 wall spanning image-plane rectangle [u0,u1]x[v0,v1]
    /// as seen from (0,0,1.2).
    fn plane_window(u0: f64, u1: f64, v0: f64, v1: f64) -> WindowPolygon {
        let (d, eye) = (2.0, 1.2);
        WindowPolygon {
            vertices: vec![
                Vec3::new(u0 * d, d, eye + v0 * d),
                Vec3::new(u1 * d, d, eye + v0 * d),
                Vec3::new(u1 * d, d, eye + v1 * d),
                Vec3::new(u0 * d, d, eye + v1 * d),
            ],
        }
    }

    fn viewpoint(fov: f64, res: (u32, u32)) -> ViewpointSpec {
        ViewpointSpec {
            position: Vec3::new(0.0, 0.0, 1.2),
            direction: Vec3::Y,
            fov_deg: fov,
            aspect: (3, 2),
            resolution: res,
            sky_condition: SkyCondition::Overcast,
            floor_height: Some(3.0),
        }
    }

    fn model(objects: Vec<SceneObject>, windows: Vec<WindowPolygon>, vp: ViewpointSpec) -> ViewModel {
        ViewModel {
            scene: Scene {
                objects,
                sky_dome: SkyDome {
                    center: vp.position,
                    radius: 50_000.0,
                },
                ground_elevation: None,
            },
            room: box_room(windows),
            viewpoint: vp,
        }
    }

    fn frame(fov: f64) -> (f64, f64) {
        let hw = (fov.to_radians() / 2.0).tan();
        (hw, hw * 2.0 / 3.0)
    }

    #[test]
    fn window_covering_frustum_gives_ratio_one() {
        let (hw, hh) = frame(40.0);
        let vp = viewpoint(40.0, (60, 40));
        let m = model(
            vec![],
            vec![plane_window(-hw * 1.2, hw * 1.2, -hh * 1.2, hh * 1.2)],
            vp.clone(),
        );
        let rc = Raycaster::new(&m);
        let cast = rc.cast(&vp, Execution::Sequential).unwrap();
        assert_eq!(cast.window_ratio(), 1.0);
        let z = zone_ratios(&cast);
        assert_eq!(z.as_array(), [1.0; 4]);
        let f = rc.features(&vp, Execution::Sequential).unwrap();
        assert_eq!(f.ratios.sky, 1.0);
        assert_eq!(f.element_count, 1);
    }

    #[test]
    fn no_window_room() {
        let vp = viewpoint(70.0, (30, 20));
        let m = model(vec![], vec![], vp.clone());
        let f = extract_features(&m).unwrap();
        assert_eq!(f.window_count, 0);
        assert_eq!(f.ratios.as_array(), [0.0; 8]);
        assert_eq!(f.zones.as_array(), [0.0; 4]);
        assert_eq!(f.element_count, 0);
        assert!(f.distances.as_array().iter().all(Option::is_none));
        assert_eq!(f.floor_height, 3.0);
    }

    #[test]
    fn leaky_room_reports_escaped_ray() {
        let vp = viewpoint(70.0, (30, 20));
        let mut m = model(vec![], vec![], vp);
        m.room.shell.remove(0); // front wall
        assert!(matches!(extract_features(&m), Err(RayError::EscapedRay { .. })));
    }

    #[test]
    fn middle_center_window_lights_only_z1() {
        let (hw, hh) = frame(40.0);
        // Exactly the middle third in both directions.
        let w = plane_window(-hw / 3.0, hw / 3.0, -hh / 3.0, hh / 3.0);
        let vp = viewpoint(40.0, (366, 244));
        let m = model(vec![], vec![w], vp.clone());
        let cast = Raycaster::new(&m).stage1(&vp, Execution::default()).unwrap();
        let z = zone_ratios(&cast);
        let tol = 2.0 / 366.0;
        assert!((z.z1 - 1.0).abs() <= tol, "{z:?}");
        assert!(z.z2 <= tol && z.z3 <= tol && z.z4 <= tol, "{z:?}");
    }

    #[test]
    fn building_plane_behind_whole_window() {
        // Narrow frustum so every ray is within 1e-3 of the plane distance.
        let fov = 4.0;
        let (hw, hh) = frame(fov);
        let wall = quad(
            ElementCategory::Building,
            Vec3::new(-50.0, 10.0, -50.0),
            Vec3::new(50.0, 10.0, -50.0),
            Vec3::new(50.0, 10.0, 50.0),
            Vec3::new(-50.0, 10.0, 50.0),
        );
        let vp = viewpoint(fov, (60, 40));
        let m = model(
            vec![wall],
            vec![plane_window(-hw * 2.0, hw * 2.0, -hh * 2.0, hh * 2.0)],
            vp,
        );
        let f = extract_features(&m).unwrap();
        assert_eq!(f.ratios.building, 1.0);
        assert!((f.distances.building.unwrap() - 10.0).abs() < 0.01);
        assert_eq!(f.element_count, 1);
    }

    #[test]
    fn context_inside_the_room_is_ignored() {
        // An object between viewpoint and window must not register.
        let (hw, hh) = frame(40.0);
        let blocker = quad(
            ElementCategory::Tree,
            Vec3::new(-1.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 3.0),
            Vec3::new(-1.0, 1.0, 3.0),
        );
        let vp = viewpoint(40.0, (30, 20));
        let m = model(
            vec![blocker],
            vec![plane_window(-hw * 1.2, hw * 1.2, -hh * 1.2, hh * 1.2)],
            vp,
        );
        let f = extract_features(&m).unwrap();
        assert_eq!(f.ratios.sky, 1.0);
        assert_eq!(f.ratios.tree, 0.0);
    }

    #[test]
    fn floor_height_sources() {
        let p = Vec3::new;
        let pavement = quad(
            ElementCategory::ArtificialGround,
            p(-9., -9., -3.2),
            p(9., -9., -3.2),
            p(9., 9., -3.2),
            p(-9., 9., -3.2),
        );
        let mut vp = viewpoint(70.0, (4, 4));
        vp.position = p(0.0, 0.0, 1.2);
        vp.floor_height = Some(12.0);
        let mut scene = Scene {
            objects: vec![pavement],
            sky_dome: SkyDome {
                center: vp.position,
                radius: 5e4,
            },
            ground_elevation: None,
        };
        assert_eq!(floor_height(&vp, &scene).unwrap(), 12.0);
        vp.floor_height = None;
        assert!((floor_height(&vp, &scene).unwrap() - 4.4).abs() < 1e-12);
        scene.objects.clear();
        assert_eq!(floor_height(&vp, &scene), Err(RayError::NoGroundFound));
        scene.ground_elevation = Some(-1.0);
        assert!((floor_height(&vp, &scene).unwrap() - 2.2).abs() < 1e-12);
    }

    #[test]
    fn perceived_distance_cases() {
        assert_eq!(perceived_distance(&mut []), None);
        assert_eq!(perceived_distance(&mut [7.48]), Some(7.48));
        let mut ten: Vec<f64> = (1..=10).rev().map(|k| k as f64 * 10.0).collect();
        assert_eq!(perceived_distance(&mut ten), Some(20.0));
        let mut same = vec![33.67; 500];
        assert!((perceived_distance(&mut same).unwrap() - 33.67).abs() < 1e-9);
    }

    #[test]
    fn thread_count_does_not_change_features() {
        let (hw, hh) = frame(60.0);
        let p = Vec3::new;
        let objs = vec![
            quad(
                ElementCategory::Building,
                p(0., 12., -5.),
                p(8., 12., -5.),
                p(8., 12., 9.),
                p(0., 12., 9.),
            ),
            quad(
                ElementCategory::Tree,
                p(-6., 9., -1.),
                p(-1., 9., -1.),
                p(-1., 9., 4.),
                p(-6., 9., 4.),
            ),
        ];
        let vp = viewpoint(60.0, (120, 80));
        let m = model(objs, vec![plane_window(-hw * 0.8, hw * 0.9, -hh * 0.7, hh * 0.6)], vp);
        let a = extract_features_with(&m, Execution::Sequential).unwrap();
        let b = extract_features_with(&m, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.ratios.building > 0.0 && a.ratios.tree > 0.0 && a.ratios.sky > 0.0);
    }
}

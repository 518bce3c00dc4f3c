use crate::geometry::{Ray, Vec3};
use crate::scene::ViewpointSpec;

/// Pinhole camera sampling one ray through each pixel center.
///
/// Pixels are row-major with row 0 at the top of the frame. The image plane
/// sits at unit distance along the view direction; `half_width` and
/// `half_height` are the tangents of the half field-of-view angles.
#[derive(Debug, Clone, PartialEq)]
pub struct RayGrid {
    pub width: u32,
    pub height: u32,
    pub origin: Vec3,
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    pub half_width: f64,
    pub half_height: f64,
}

impl RayGrid {
    pub fn new(vp: &ViewpointSpec) -> RayGrid {
        let forward = vp.direction;
        let (right, up) = camera_basis(forward);
        let half_width = (vp.fov_deg.to_radians() / 2.0).tan();
        let half_height = half_width * vp.aspect.1 as f64 / vp.aspect.0 as f64;
        RayGrid {
            width: vp.resolution.0,
            height: vp.resolution.1,
            origin: vp.position,
            forward,
            right,
            up,
            half_width,
            half_height,
        }
    }

    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel(&self, index: usize) -> (u32, u32) {
        let w = self.width as usize;
        ((index % w) as u32, (index / w) as u32)
    }

    /// Image-plane coordinates of a pixel center; `u` grows to the right,
    /// `v` grows upward.
    pub fn plane_coords(&self, i: u32, j: u32) -> (f64, f64) {
        let u = ((i as f64 + 0.5) / self.width as f64 * 2.0 - 1.0) * self.half_width;
        let v = (1.0 - (j as f64 + 0.5) / self.height as f64 * 2.0) * self.half_height;
        (u, v)
    }

    pub fn ray(&self, index: usize) -> Ray {
        let (i, j) = self.pixel(index);
        let (u, v) = self.plane_coords(i, j);
        let d = self.forward + self.right * u + self.up * v;
        Ray::new(self.origin, d.normalized().expect("finite frustum direction"))
    }
}

/// Right and up vectors for a camera looking along `forward`, with world +z as
/// the up reference (world +y when looking straight up or down).
pub fn camera_basis(forward: Vec3) -> (Vec3, Vec3) {
    let reference = if forward.cross(Vec3::Z).length() < 1e-9 {
        Vec3::Y
    } else {
        Vec3::Z
    };
    let right = forward.cross(reference).normalized().expect("non-parallel reference");
    let up = right.cross(forward);
    (right, up)
}

/// Rule-of-thirds zone of a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    /// Middle row, center column.
    MiddleCenter,
    /// Middle row, left or right column.
    MiddleSide,
    Top,
    Bottom,
}

impl Zone {
    pub fn of(i: u32, j: u32, width: u32, height: u32) -> Zone {
        match (third(j, height), third(i, width)) {
            (0, _) => Zone::Top,
            (2, _) => Zone::Bottom,
            (_, 1) => Zone::MiddleCenter,
            _ => Zone::MiddleSide,
        }
    }

    /// Z1..Z4 slot.
    pub fn index(self) -> usize {
        match self {
            Zone::MiddleCenter => 0,
            Zone::MiddleSide => 1,
            Zone::Top => 2,
            Zone::Bottom => 3,
        }
    }
}

/// Which third of `n` the center of cell `k` falls into.
fn third(k: u32, n: u32) -> u8 {
    let c = 3 * (2 * k as u64 + 1);
    let n = n as u64;
    if c < 2 * n {
        0
    } else if c < 4 * n {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::SkyCondition;

    fn vp(res: (u32, u32)) -> ViewpointSpec {
        ViewpointSpec {
            position: Vec3::new(1.0, 2.0, 3.0),
            direction: Vec3::Y,
            fov_deg: 70.0,
            aspect: (3, 2),
            resolution: res,
            sky_condition: SkyCondition::Clear,
            floor_height: None,
        }
    }

    #[test]
    fn grid_has_unit_rays_and_expected_count() {
        let g = RayGrid::new(&vp((366, 244)));
        assert_eq!(g.len(), 366 * 244);
        for idx in [0, 1, 365, 366, 44_000, g.len() - 1] {
            let r = g.ray(idx);
            assert!((r.dir.length() - 1.0).abs() < 1e-12);
            assert_eq!(r.origin, Vec3::new(1.0, 2.0, 3.0));
        }
    }

    #[test]
    fn corner_rays_span_the_frustum() {
        let g = RayGrid::new(&vp((2, 2)));
        // Pixel (0, 0) is top-left: negative x (right is +x for a +y view), positive z.
        let d = g.ray(0).dir;
        assert!(d.x < 0.0 && d.z > 0.0);
        let d = g.ray(3).dir;
        assert!(d.x > 0.0 && d.z < 0.0);
        let h = (35f64).to_radians().tan();
        let (u, v) = g.plane_coords(1, 0);
        assert!((u - h / 2.0).abs() < 1e-12);
        assert!((v - h / 3.0).abs() < 1e-12);
    }

    #[test]
    fn basis_is_orthonormal_for_oblique_and_vertical_views() {
        for f in [Vec3::Y, Vec3::new(1.0, 1.0, 0.3).normalized().unwrap(), -Vec3::Z] {
            let (r, u) = camera_basis(f);
            assert!(r.dot(f).abs() < 1e-12 && u.dot(f).abs() < 1e-12 && r.dot(u).abs() < 1e-12);
            assert!((r.length() - 1.0).abs() < 1e-12 && (u.length() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn thirds_partition() {
        let counts = |n: u32| {
            let mut c = [0; 3];
            for k in 0..n {
                c[third(k, n) as usize] += 1;
            }
            c
        };
        assert_eq!(counts(366), [122, 122, 122]);
        assert_eq!(counts(9), [3, 3, 3]);
        assert_eq!(counts(244).iter().sum::<i32>(), 244);
    }
}

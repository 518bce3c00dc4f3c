//! Small linear-algebra and intersection primitives used by the scene model
//! and the ray caster. Everything is `f64`, meters, z-up.

use std::ops::{Add, Div, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Returns `None` for (near) zero vectors.
    pub fn normalized(self) -> Option<Vec3> {
        let len = self.length();
        if len > 1e-300 && len.is_finite() {
            Some(self / len)
        } else {
            None
        }
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, axis: usize) -> &f64 {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis {axis} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit direction.
    pub dir: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, dir: Vec3) -> Self {
        Ray { origin, dir }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub a: Vec3,
    pub b: Vec3,
    pub c: Vec3,
}

impl Triangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Triangle { a, b, c }
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.b - self.a).cross(self.c - self.a).length()
    }

    pub fn centroid(&self) -> Vec3 {
        (self.a + self.b + self.c) / 3.0
    }

    pub fn bounds(&self) -> Aabb {
        Aabb {
            min: self.a.min(self.b).min(self.c),
            max: self.a.max(self.b).max(self.c),
        }
    }

    /// Möller–Trumbore. Returns the ray parameter of the hit when it lies in
    /// `[t_min, t_max]`. Edges are inclusive.
    #[inline]
    pub fn intersect(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<f64> {
        let e1 = self.b - self.a;
        let e2 = self.c - self.a;
        let p = ray.dir.cross(e2);
        let det = e1.dot(p);
        if det.abs() < 1e-14 {
            return None;
        }
        let inv = 1.0 / det;
        let s = ray.origin - self.a;
        let u = s.dot(p) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = s.cross(e1);
        let v = ray.dir.dot(q) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let t = e2.dot(q) * inv;
        if t >= t_min && t <= t_max {
            Some(t)
        } else {
            None
        }
    }

    /// Closest point on the triangle to `p` (Ericson, Real-Time Collision Detection 5.1.5).
    pub fn closest_point(&self, p: Vec3) -> Vec3 {
        let (a, b, c) = (self.a, self.b, self.c);
        let ab = b - a;
        let ac = c - a;
        let ap = p - a;
        let d1 = ab.dot(ap);
        let d2 = ac.dot(ap);
        if d1 <= 0.0 && d2 <= 0.0 {
            return a;
        }
        let bp = p - b;
        let d3 = ab.dot(bp);
        let d4 = ac.dot(bp);
        if d3 >= 0.0 && d4 <= d3 {
            return b;
        }
        let vc = d1 * d4 - d3 * d2;
        if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
            return a + ab * (d1 / (d1 - d3));
        }
        let cp = p - c;
        let d5 = ab.dot(cp);
        let d6 = ac.dot(cp);
        if d6 >= 0.0 && d5 <= d6 {
            return c;
        }
        let vb = d5 * d2 - d1 * d6;
        if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
            return a + ac * (d2 / (d2 - d6));
        }
        let va = d3 * d6 - d5 * d4;
        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
            return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
        }
        let denom = 1.0 / (va + vb + vc);
        a + ab * (vb * denom) + ac * (vc * denom)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    pub fn union(self, o: Aabb) -> Aabb {
        Aabb {
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }

    pub fn grow(self, p: Vec3) -> Aabb {
        Aabb {
            min: self.min.min(p),
            max: self.max.max(p),
        }
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn largest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    /// Expands the box by a relative-plus-absolute margin so that slab-test
    /// rounding can never reject a ray that hits an enclosed triangle.
    pub fn padded(self) -> Aabb {
        let e = self.extent();
        let scale = e.x.abs().max(e.y.abs()).max(e.z.abs());
        let mag = self
            .min
            .x
            .abs()
            .max(self.min.y.abs())
            .max(self.min.z.abs())
            .max(self.max.x.abs())
            .max(self.max.y.abs())
            .max(self.max.z.abs());
        let pad = 1e-9 * (scale + mag) + 1e-12;
        let d = Vec3::new(pad, pad, pad);
        Aabb {
            min: self.min - d,
            max: self.max + d,
        }
    }

    /// Slab test; returns the entry parameter when the ray overlaps the box
    /// within `[t_min, t_max]`.
    #[inline]
    pub fn hit(&self, origin: Vec3, inv_dir: Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut lo = t_min;
        let mut hi = t_max;
        for axis in 0..3 {
            let t0 = (self.min[axis] - origin[axis]) * inv_dir[axis];
            let t1 = (self.max[axis] - origin[axis]) * inv_dir[axis];
            let (near, far) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            // f64::max/min drop NaN (0 * inf for axis-parallel rays on a slab plane).
            lo = lo.max(near);
            hi = hi.min(far);
            if lo > hi {
                return None;
            }
        }
        Some(lo)
    }
}

/// Area of a planar polygon by fan triangulation from its first vertex
/// (the 3D shoelace form). Valid for concave polygons too.
pub fn polygon_area(vertices: &[Vec3]) -> f64 {
    polygon_vector_area(vertices).length() * 0.5
}

/// Twice the vector area of the polygon; its direction is the polygon normal.
pub fn polygon_vector_area(vertices: &[Vec3]) -> Vec3 {
    if vertices.len() < 3 {
        return Vec3::ZERO;
    }
    let origin = vertices[0];
    vertices
        .windows(2)
        .skip(1)
        .fold(Vec3::ZERO, |acc, w| acc + (w[0] - origin).cross(w[1] - origin))
}

/// Unit normal of a polygon, `None` when degenerate.
pub fn polygon_normal(vertices: &[Vec3]) -> Option<Vec3> {
    polygon_vector_area(vertices).normalized()
}

/// Ear-clipping triangulation of a simple planar polygon. Returns index
/// triples into `vertices`. Collinear runs are tolerated.
pub fn triangulate_polygon(vertices: &[Vec3]) -> Vec<[usize; 3]> {
    let n = vertices.len();
    if n < 3 {
        return Vec::new();
    }
    let normal = match polygon_normal(vertices) {
        Some(n) => n,
        None => return Vec::new(),
    };
    // Project onto the dominant plane, keeping orientation counter-clockwise.
    let drop = if normal.x.abs() >= normal.y.abs() && normal.x.abs() >= normal.z.abs() {
        0
    } else if normal.y.abs() >= normal.z.abs() {
        1
    } else {
        2
    };
    let sign = normal[drop].signum();
    let project = |p: Vec3| -> (f64, f64) {
        match drop {
            0 => (p.y * sign, p.z),
            1 => (p.z * sign, p.x),
            _ => (p.x * sign, p.y),
        }
    };
    let pts: Vec<(f64, f64)> = vertices.iter().map(|&v| project(v)).collect();
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let inside = |p: (f64, f64), a, b, c| cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0;

    let mut remaining: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n - 2);
    let mut guard = 0;
    while remaining.len() > 3 && guard < n * n {
        guard += 1;
        let m = remaining.len();
        let mut clipped = false;
        for k in 0..m {
            let (ip, ic, inx) = (remaining[(k + m - 1) % m], remaining[k], remaining[(k + 1) % m]);
            let (a, b, c) = (pts[ip], pts[ic], pts[inx]);
            let turn = cross(a, b, c);
            if turn < 0.0 {
                continue;
            }
            if turn == 0.0 {
                // Collinear vertex: drop it without emitting a triangle.
                remaining.remove(k);
                clipped = true;
                break;
            }
            let blocked = remaining
                .iter()
                .filter(|&&j| j != ip && j != ic && j != inx)
                .any(|&j| inside(pts[j], a, b, c) && pts[j] != a && pts[j] != b && pts[j] != c);
            if blocked {
                continue;
            }
            out.push([ip, ic, inx]);
            remaining.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            // Not simple (or numerically messy); fall back to a fan.
            break;
        }
    }
    if remaining.len() == 3 {
        let (a, b, c) = (pts[remaining[0]], pts[remaining[1]], pts[remaining[2]]);
        if cross(a, b, c) != 0.0 {
            out.push([remaining[0], remaining[1], remaining[2]]);
        }
    } else if remaining.len() > 3 {
        for k in 1..remaining.len() - 1 {
            out.push([remaining[0], remaining[k], remaining[k + 1]]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: f64, h: f64) -> Vec<Vec3> {
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(w, 0.0, 0.0),
            Vec3::new(w, 0.0, h),
            Vec3::new(0.0, 0.0, h),
        ]
    }

    #[test]
    fn rectangle_area() {
        assert!((polygon_area(&rect(1.5, 2.0)) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn concave_polygon_triangulates_to_its_area() {
        // L shape in the xz plane, area 3.
        let l = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 2.0),
            Vec3::new(0.0, 0.0, 2.0),
        ];
        let tris = triangulate_polygon(&l);
        assert_eq!(tris.len(), 4);
        let sum: f64 = tris
            .iter()
            .map(|t| Triangle::new(l[t[0]], l[t[1]], l[t[2]]).area())
            .sum();
        assert!((sum - 3.0).abs() < 1e-12);
        assert!((polygon_area(&l) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_hit_and_miss() {
        let tri = Triangle::new(
            Vec3::new(-1.0, 5.0, -1.0),
            Vec3::new(1.0, 5.0, -1.0),
            Vec3::new(0.0, 5.0, 1.0),
        );
        let ray = Ray::new(Vec3::ZERO, Vec3::Y);
        assert_eq!(tri.intersect(&ray, 0.0, f64::INFINITY), Some(5.0));
        assert_eq!(tri.intersect(&ray, 0.0, 4.0), None);
        let miss = Ray::new(Vec3::new(3.0, 0.0, 0.0), Vec3::Y);
        assert_eq!(tri.intersect(&miss, 0.0, f64::INFINITY), None);
    }

    #[test]
    fn closest_point_regions() {
        let tri = Triangle::new(Vec3::ZERO, Vec3::X, Vec3::Y);
        assert!((tri.closest_point(Vec3::new(0.2, 0.2, 3.0)) - Vec3::new(0.2, 0.2, 0.0)).length() < 1e-12);
        assert_eq!(tri.closest_point(Vec3::new(-1.0, -1.0, 0.0)), Vec3::ZERO);
        let p = tri.closest_point(Vec3::new(1.0, 1.0, 0.0));
        assert!((p - Vec3::new(0.5, 0.5, 0.0)).length() < 1e-12);
    }

    #[test]
    fn axis_parallel_ray_through_box() {
        let b = Aabb {
            min: Vec3::new(-1.0, -1.0, -1.0),
            max: Vec3::new(1.0, 1.0, 1.0),
        };
        let dir = Vec3::new(0.0, 0.0, -1.0);
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        assert!(b.hit(Vec3::new(0.0, 0.0, 5.0), inv, 0.0, f64::INFINITY).is_some());
        assert!(b.hit(Vec3::new(2.0, 0.0, 5.0), inv, 0.0, f64::INFINITY).is_none());
    }
}

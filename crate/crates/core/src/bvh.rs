//! Bounding volume hierarchy over triangles.
//!
//! Nearest-hit queries return exactly what a linear scan over all triangles
//! would return: the smallest ray parameter, ties broken by the lowest
//! triangle index. Traversal only prunes boxes whose entry point is strictly
//! beyond the current best hit, so equal-distance candidates are still seen.

use crate::geometry::{Aabb, Ray, Triangle, Vec3};

const LEAF_SIZE: usize = 4;

/// Nearest intersection along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    /// Index of the triangle in the order it was handed to [`Bvh::build`].
    pub index: usize,
}

impl Hit {
    #[inline]
    fn beats(&self, other: &Option<Hit>) -> bool {
        match other {
            None => true,
            Some(o) => self.t < o.t || (self.t == o.t && self.index < o.index),
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: first slot in `order`. Interior: index of the left child; the
    /// right child is stored in `right`.
    start: u32,
    right: u32,
    /// Zero for interior nodes.
    count: u32,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    triangles: Vec<Triangle>,
}

impl Bvh {
    pub fn build(triangles: Vec<Triangle>) -> Bvh {
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: (0..triangles.len() as u32).collect(),
            triangles,
        };
        if bvh.triangles.is_empty() {
            return bvh;
        }
        let centroids: Vec<Vec3> = bvh.triangles.iter().map(Triangle::centroid).collect();
        let n = bvh.triangles.len();
        bvh.nodes.reserve(2 * n / LEAF_SIZE + 1);
        bvh.build_node(&centroids, 0, n);
        bvh
    }

    fn build_node(&mut self, centroids: &[Vec3], start: usize, end: usize) -> u32 {
        let bounds = self.order[start..end]
            .iter()
            .fold(Aabb::EMPTY, |b, &i| b.union(self.triangles[i as usize].bounds()))
            .padded();
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            bounds,
            start: start as u32,
            right: 0,
            count: (end - start) as u32,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let cbounds = self.order[start..end]
            .iter()
            .fold(Aabb::EMPTY, |b, &i| b.grow(centroids[i as usize]));
        let axis = cbounds.largest_axis();
        if cbounds.extent()[axis] <= 0.0 {
            // All centroids coincide; splitting cannot separate them.
            return id;
        }
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a as usize][axis]
                .total_cmp(&centroids[b as usize][axis])
                .then(a.cmp(&b))
        });
        let left = self.build_node(centroids, start, mid);
        let right = self.build_node(centroids, mid, end);
        let node = &mut self.nodes[id as usize];
        node.start = left;
        node.right = right;
        node.count = 0;
        id
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, index: usize) -> &Triangle {
        &self.triangles[index]
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// Nearest hit with `t` in `[t_min, t_max]`.
    pub fn nearest(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z);
        let mut best: Option<Hit> = None;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            let limit = best.map_or(t_max, |h| h.t);
            if node.bounds.hit(ray.origin, inv, t_min, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                for &tri in &self.order[s..s + node.count as usize] {
                    let tri = tri as usize;
                    if let Some(t) = self.triangles[tri].intersect(ray, t_min, limit.min(t_max)) {
                        let hit = Hit { t, index: tri };
                        if hit.beats(&best) {
                            best = Some(hit);
                        }
                    }
                }
            } else {
                let (l, r) = (node.start, node.right);
                let tl = self.nodes[l as usize].bounds.hit(ray.origin, inv, t_min, limit);
                let tr = self.nodes[r as usize].bounds.hit(ray.origin, inv, t_min, limit);
                match (tl, tr) {
                    (Some(a), Some(b)) => {
                        // Visit the nearer child first.
                        if a <= b {
                            stack.push(r);
                            stack.push(l);
                        } else {
                            stack.push(l);
                            stack.push(r);
                        }
                    }
                    (Some(_), None) => stack.push(l),
                    (None, Some(_)) => stack.push(r),
                    (None, None) => {}
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scan(tris: &[Triangle], ray: &Ray) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        for (i, t) in tris.iter().enumerate() {
            if let Some(d) = t.intersect(ray, 0.0, f64::INFINITY) {
                if best.is_none_or(|b| d < b.t) {
                    best = Some(Hit { t: d, index: i });
                }
            }
        }
        best
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let l = v.length();
            if l > 0.1 && l <= 1.0 {
                return v / l;
            }
        }
    }

    #[test]
    fn empty_index_never_hits() {
        let bvh = Bvh::build(Vec::new());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let ray = Ray::new(Vec3::ZERO, random_unit(&mut rng));
            assert!(bvh.nearest(&ray, 0.0, f64::INFINITY).is_none());
        }
    }

    #[test]
    fn single_triangle_matches_direct_test() {
        let tri = Triangle::new(
            Vec3::new(-2.0, 3.0, -1.0),
            Vec3::new(2.0, 3.5, -1.0),
            Vec3::new(0.0, 2.5, 2.0),
        );
        let bvh = Bvh::build(vec![tri]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut hits = 0;
        for _ in 0..1000 {
            let ray = Ray::new(Vec3::ZERO, random_unit(&mut rng));
            let direct = tri.intersect(&ray, 0.0, f64::INFINITY).map(|t| Hit { t, index: 0 });
            let got = bvh.nearest(&ray, 0.0, f64::INFINITY);
            assert_eq!(got, direct);
            hits += got.is_some() as usize;
        }
        assert!(hits > 0);
    }

    #[test]
    fn coincident_triangles_resolve_to_lowest_index() {
        let tri = Triangle::new(
            Vec3::new(-1.0, 4.0, -1.0),
            Vec3::new(1.0, 4.0, -1.0),
            Vec3::new(0.0, 4.0, 1.0),
        );
        let tris: Vec<Triangle> = std::iter::repeat_n(tri, 9).collect();
        let bvh = Bvh::build(tris);
        let hit = bvh.nearest(&Ray::new(Vec3::ZERO, Vec3::Y), 0.0, f64::INFINITY).unwrap();
        assert_eq!(hit.index, 0);
        assert_eq!(hit.t, 4.0);
    }

    #[test]
    fn random_soup_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let tris: Vec<Triangle> = (0..2000)
            .map(|_| {
                let c = Vec3::new(
                    rng.random_range(-20.0..20.0),
                    rng.random_range(-20.0..20.0),
                    rng.random_range(-20.0..20.0),
                );
                let mut p = || c + random_unit(&mut rng) * rng.random_range(0.2..2.0);
                Triangle::new(p(), p(), p())
            })
            .collect();
        let bvh = Bvh::build(tris.clone());
        for _ in 0..2000 {
            let o = Vec3::new(
                rng.random_range(-25.0..25.0),
                rng.random_range(-25.0..25.0),
                rng.random_range(-25.0..25.0),
            );
            let ray = Ray::new(o, random_unit(&mut rng));
            assert_eq!(bvh.nearest(&ray, 0.0, f64::INFINITY), scan(&tris, &ray));
        }
    }
}

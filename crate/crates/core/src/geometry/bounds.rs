use serde::{Deserialize, Serialize};

use crate::scene::{Point3, PointSet};

/// Axis-aligned bounding box, `min <= max` on every axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    /// Box spanned by two opposite corners given in any order.
    pub fn from_corners(a: Point3, b: Point3) -> Self {
        Self {
            min: a.min(b),
            max: a.max(b),
        }
    }

    pub fn extents(&self) -> [f64; 3] {
        [
            self.max.x - self.min.x,
            self.max.y - self.min.y,
            self.max.z - self.min.z,
        ]
    }

    pub fn volume(&self) -> f64 {
        let [dx, dy, dz] = self.extents();
        dx * dy * dz
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point3) -> bool {
        (0..3).all(|k| self.min.component(k) <= p.component(k) && p.component(k) <= self.max.component(k))
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && (0..3).all(|k| self.min.component(k) <= self.max.component(k))
    }
}

/// Componentwise min/max over all points.
pub fn aabb(ps: &PointSet) -> Aabb {
    let first = ps.points()[0];
    let (min, max) = ps.iter().fold((first, first), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    Aabb { min, max }
}

pub fn aabb_volume(b: &Aabb) -> f64 {
    b.volume()
}

/// Arithmetic mean of the points. Uses Neumaier-compensated sums so large
/// clouds far from the origin keep full precision.
pub fn centroid(ps: &PointSet) -> Point3 {
    let mut acc = [Compensated::default(); 3];
    for p in ps {
        acc[0].add(p.x);
        acc[1].add(p.y);
        acc[2].add(p.z);
    }
    let n = ps.len() as f64;
    Point3::new(acc[0].value() / n, acc[1].value() / n, acc[2].value() / n)
}

#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ps(points: Vec<[f64; 3]>) -> PointSet {
        PointSet::new(points.into_iter().map(Point3::from).collect()).unwrap()
    }

    fn unit_cube() -> PointSet {
        let mut v = Vec::new();
        for b in 0..8u8 {
            v.push([(b & 1) as f64, ((b >> 1) & 1) as f64, ((b >> 2) & 1) as f64]);
        }
        ps(v)
    }

    fn random_cloud(n: usize, seed: u64) -> PointSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ps((0..n)
            .map(|_| {
                [
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(0.0..3.0),
                ]
            })
            .collect())
    }

    #[test]
    fn unit_cube_centroid_and_box() {
        let c = unit_cube();
        assert_eq!(centroid(&c), Point3::new(0.5, 0.5, 0.5));
        let b = aabb(&c);
        assert_eq!(b.min, Point3::ORIGIN);
        assert_eq!(b.max, Point3::new(1.0, 1.0, 1.0));
        assert_eq!(aabb_volume(&b), 1.0);
    }

    #[test]
    fn single_point() {
        let p = ps(vec![[0.3, -1.2, 7.0]]);
        assert_eq!(centroid(&p), Point3::new(0.3, -1.2, 7.0));
        assert_eq!(aabb(&p).volume(), 0.0);
    }

    #[test]
    fn coplanar_points_have_zero_volume() {
        let p = ps(vec![[0.0, 0.0, 0.3], [1.0, 2.0, 0.3], [-1.0, 0.5, 0.3]]);
        let b = aabb(&p);
        assert_eq!(b.min.z, 0.3);
        assert_eq!(b.max.z, 0.3);
        assert_eq!(aabb_volume(&b), 0.0);
    }

    #[test]
    fn volume_products() {
        let b = Aabb::from_corners(Point3::ORIGIN, Point3::new(1.0, 2.0, 3.0));
        assert_eq!(aabb_volume(&b), 6.0);
        let bed = Aabb::from_corners(Point3::ORIGIN, Point3::new(1.98, 2.32, 0.83));
        assert!((aabb_volume(&bed) - 3.812688).abs() < 1e-12);
    }

    #[test]
    fn centroid_matches_naive_resummation() {
        let cloud = random_cloud(1000, 17);
        let n = cloud.len() as f64;
        let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
        for p in &cloud {
            sx += p.x;
            sy += p.y;
            sz += p.z;
        }
        let naive = Point3::new(sx / n, sy / n, sz / n);
        let c = centroid(&cloud);
        for k in 0..3 {
            let (a, b) = (c.component(k), naive.component(k));
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "axis {k}: {a} vs {b}");
        }
    }

    #[test]
    fn aabb_matches_brute_force_scan() {
        let cloud = random_cloud(500, 23);
        let b = aabb(&cloud);
        for k in 0..3 {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in &cloud {
                let v = p.component(k);
                if v < lo {
                    lo = v;
                }
                if v > hi {
                    hi = v;
                }
            }
            assert_eq!(b.min.component(k), lo);
            assert_eq!(b.max.component(k), hi);
        }
        assert!(cloud.iter().all(|p| b.contains(*p)));
    }
}

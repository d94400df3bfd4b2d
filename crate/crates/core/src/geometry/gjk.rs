//! Minimum distance between the convex hulls of two point sets.
//!
//! The support function of a finite point set equals the support function of
//! its hull, so the distance is found by GJK-style iteration on the Minkowski
//! difference `A - B` without ever building a hull mesh. Points, segments and
//! planar polygons need no special handling.
//!
//! The sub-problem "closest point of a simplex with at most four vertices to
//! the origin" is solved by enumerating every face of the simplex, projecting
//! the origin onto the face's affine hull and keeping the closest projection
//! with non-negative barycentric weights. Degenerate faces produce a singular
//! Gram system and are skipped; one of their sub-faces always covers them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bounds::aabb;
use crate::scene::{Point3, PointSet};

/// Relative tolerance used when callers do not supply one; scaled by the
/// diagonal of the union bounding box of both sets.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("hull distance did not converge after {iterations} iterations (bound gap {gap:e} m)")]
    NotConverged { iterations: usize, gap: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
}

/// Weight of one Minkowski-difference vertex `a[a_index] - b[b_index]` in the
/// final simplex. Weights sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportWeight {
    pub a_index: usize,
    pub b_index: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullDistanceResult {
    pub distance: f64,
    /// Closest point in `conv(a)`.
    pub witness_a: Point3,
    /// Closest point in `conv(b)`.
    pub witness_b: Point3,
    pub converged: bool,
    pub iterations: usize,
    /// Convex combination that produced the witnesses.
    pub support: Vec<SupportWeight>,
}

#[derive(Debug, Clone, Copy)]
struct Vertex {
    w: Point3,
    ia: usize,
    ib: usize,
}

/// [`hull_distance`] with [`DEFAULT_TOLERANCE`].
pub fn hull_distance_default(a: &PointSet, b: &PointSet) -> Result<HullDistanceResult, GeometryError> {
    hull_distance(a, b, DEFAULT_TOLERANCE)
}

/// Distance between `conv(a)` and `conv(b)`; zero when the hulls touch or
/// overlap (no penetration depth).
///
/// `tol` is relative to the diagonal of the bounding box of `a ∪ b`. The
/// iteration stops once the gap between the upper bound `|v|` and the dual
/// lower bound `v·w / |v|` falls below `tol · diagonal`. The iteration cap is
/// `10·(|a| + |b|) + 100`; hitting it is reported as
/// [`GeometryError::NotConverged`] rather than returning an approximation.
pub fn hull_distance(a: &PointSet, b: &PointSet, tol: f64) -> Result<HullDistanceResult, GeometryError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(GeometryError::InvalidTolerance(tol));
    }
    let pa = a.points();
    let pb = b.points();
    let diag = aabb(a).union(&aabb(b)).diagonal();
    let abs_tol = tol * diag;
    let cap = 10 * (pa.len() + pb.len()) + 100;

    let mut simplex = vec![Vertex {
        w: pa[0] - pb[0],
        ia: 0,
        ib: 0,
    }];
    let mut weights = vec![1.0];
    let mut v = simplex[0].w;

    for iter in 1..=cap {
        let vnorm = v.norm();
        if vnorm <= abs_tol {
            return Ok(finish(pa, pb, &simplex, &weights, iter, true, true));
        }
        // Support of A - B in direction -v.
        let ia = argmax(pa, -v);
        let ib = argmax(pb, v);
        let w = pa[ia] - pb[ib];
        let gap = vnorm - v.dot(w) / vnorm;
        if gap <= abs_tol || simplex.iter().any(|s| s.ia == ia && s.ib == ib) {
            return Ok(finish(pa, pb, &simplex, &weights, iter, false, true));
        }
        simplex.push(Vertex { w, ia, ib });
        let (next_simplex, next_weights, next_v) = closest_on_simplex(&simplex);
        if next_simplex.len() == 4 {
            // Origin strictly inside a full-dimensional tetrahedron.
            return Ok(finish(pa, pb, &next_simplex, &next_weights, iter, true, true));
        }
        if next_v.norm_squared() >= v.norm_squared() {
            // No progress in floating point while the bound gap is still open.
            return Err(GeometryError::NotConverged { iterations: iter, gap });
        }
        simplex = next_simplex;
        weights = next_weights;
        v = next_v;
    }
    let vnorm = v.norm();
    let ia = argmax(pa, -v);
    let ib = argmax(pb, v);
    let gap = if vnorm > 0.0 {
        vnorm - v.dot(pa[ia] - pb[ib]) / vnorm
    } else {
        0.0
    };
    Err(GeometryError::NotConverged { iterations: cap, gap })
}

fn argmax(points: &[Point3], dir: Point3) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = p.dot(dir);
        if d > best_val {
            best_val = d;
            best = i;
        }
    }
    best
}

fn finish(
    pa: &[Point3],
    pb: &[Point3],
    simplex: &[Vertex],
    weights: &[f64],
    iterations: usize,
    touching: bool,
    converged: bool,
) -> HullDistanceResult {
    let mut witness_a = Point3::ORIGIN;
    let mut witness_b = Point3::ORIGIN;
    let mut support = Vec::with_capacity(simplex.len());
    for (vtx, &wt) in simplex.iter().zip(weights) {
        witness_a = witness_a + pa[vtx.ia] * wt;
        witness_b = witness_b + pb[vtx.ib] * wt;
        support.push(SupportWeight {
            a_index: vtx.ia,
            b_index: vtx.ib,
            weight: wt,
        });
    }
    let distance = if touching { 0.0 } else { witness_a.distance(witness_b) };
    HullDistanceResult {
        distance,
        witness_a,
        witness_b,
        converged,
        iterations,
        support,
    }
}

/// Closest point of `conv(simplex)` to the origin, returned with the
/// vertices that carry positive weight and their weights.
fn closest_on_simplex(simplex: &[Vertex]) -> (Vec<Vertex>, Vec<f64>, Point3) {
    let n = simplex.len();
    debug_assert!((1..=4).contains(&n));
    let mut best: Option<(f64, Vec<usize>, Vec<f64>, Point3)> = None;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let pts: Vec<Point3> = idx.iter().map(|&i| simplex[i].w).collect();
        let Some(lambda) = affine_projection(&pts) else {
            continue;
        };
        if lambda.iter().any(|&l| l < 0.0) {
            continue;
        }
        let p = pts
            .iter()
            .zip(&lambda)
            .fold(Point3::ORIGIN, |acc, (&q, &l)| acc + q * l);
        let d2 = p.norm_squared();
        let better = match &best {
            None => true,
            Some((bd, bidx, ..)) => d2 < *bd || (d2 == *bd && idx.len() < bidx.len()),
        };
        if better {
            best = Some((d2, idx, lambda, p));
        }
    }
    // Every single vertex is a valid face, so `best` is always set.
    let (_, idx, lambda, p) = best.expect("vertex faces are always feasible");
    let mut verts = Vec::with_capacity(idx.len());
    let mut weights = Vec::with_capacity(idx.len());
    for (&i, &l) in idx.iter().zip(&lambda) {
        if l > 0.0 {
            verts.push(simplex[i]);
            weights.push(l);
        }
    }
    if verts.is_empty() {
        verts.push(simplex[idx[0]]);
        weights.push(1.0);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    (verts, weights, p)
}

/// Barycentric coordinates of the origin's projection onto the affine hull of
/// `pts`, or `None` when the points are affinely dependent.
fn affine_projection(pts: &[Point3]) -> Option<Vec<f64>> {
    let k = pts.len() - 1;
    if k == 0 {
        return Some(vec![1.0]);
    }
    let base = pts[0];
    let edges: Vec<Point3> = pts[1..].iter().map(|&p| p - base).collect();
    // Gram system G mu = -E^T base.
    let mut m = [[0.0f64; 4]; 3];
    let mut scale = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            m[i][j] = edges[i].dot(edges[j]);
        }
        m[i][k] = -edges[i].dot(base);
        scale = scale.max(m[i][i]);
    }
    if scale == 0.0 {
        return None;
    }
    let eps = scale * 1e-12;
    // Gaussian elimination with partial pivoting.
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))
            .unwrap();
        if m[piv][col].abs() <= eps {
            return None;
        }
        m.swap(col, piv);
        for r in col + 1..k {
            let f = m[r][col] / m[col][col];
            for c in col..=k {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut mu = [0.0f64; 3];
    for r in (0..k).rev() {
        let mut acc = m[r][k];
        for c in r + 1..k {
            acc -= m[r][c] * mu[c];
        }
        mu[r] = acc / m[r][r];
    }
    let mut lambda = Vec::with_capacity(k + 1);
    lambda.push(1.0 - mu[..k].iter().sum::<f64>());
    lambda.extend_from_slice(&mu[..k]);
    Some(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(points: &[[f64; 3]]) -> PointSet {
        PointSet::new(points.iter().map(|&p| Point3::from(p)).collect()).unwrap()
    }

    fn cube_at(cx: f64) -> PointSet {
        let mut v = Vec::new();
        for b in 0..8u8 {
            v.push([
                cx - 0.5 + (b & 1) as f64,
                -0.5 + ((b >> 1) & 1) as f64,
                -0.5 + ((b >> 2) & 1) as f64,
            ]);
        }
        ps(&v)
    }

    #[test]
    fn identical_sets_are_at_zero() {
        let c = cube_at(0.0);
        let r = hull_distance_default(&c, &c).unwrap();
        assert_eq!(r.distance, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn unit_cubes_two_apart() {
        let r = hull_distance_default(&cube_at(0.0), &cube_at(2.0)).unwrap();
        assert!((r.distance - 1.0).abs() < 1e-9, "{}", r.distance);
        assert!((r.witness_a.x - 0.5).abs() < 1e-9);
        assert!((r.witness_b.x - 1.5).abs() < 1e-9);
    }

    #[test]
    fn single_points() {
        let r = hull_distance_default(&ps(&[[0.0, 0.0, 0.0]]), &ps(&[[3.0, 4.0, 0.0]])).unwrap();
        assert!((r.distance - 5.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_single_points() {
        let p = ps(&[[1.0, 1.0, 1.0]]);
        let r = hull_distance_default(&p, &p).unwrap();
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn point_to_segment_interior() {
        let seg = ps(&[[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let pt = ps(&[[0.25, 2.0, 0.0]]);
        let r = hull_distance_default(&seg, &pt).unwrap();
        assert!((r.distance - 2.0).abs() < 1e-12);
        assert!((r.witness_a.x - 0.25).abs() < 1e-12);
    }

    #[test]
    fn crossing_segments_touch() {
        let s1 = ps(&[[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let s2 = ps(&[[0.0, -1.0, 0.0], [0.0, 1.0, 0.0]]);
        let r = hull_distance_default(&s1, &s2).unwrap();
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn weights_form_convex_combination() {
        let a = ps(&[[0.0, 0.0, 0.0], [1.0, 0.2, 0.0], [0.3, 1.0, 0.1], [0.2, 0.1, 1.0]]);
        let b = ps(&[[2.0, 2.0, 2.0], [2.5, 1.0, 1.7], [1.5, 2.2, 3.0]]);
        let r = hull_distance_default(&a, &b).unwrap();
        let total: f64 = r.support.iter().map(|s| s.weight).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(r.support.iter().all(|s| s.weight >= -1e-12));
        assert!((r.witness_a.distance(r.witness_b) - r.distance).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let c = cube_at(0.0);
        assert_eq!(
            hull_distance(&c, &c, 0.0).unwrap_err(),
            GeometryError::InvalidTolerance(0.0)
        );
    }

    #[test]
    fn affine_projection_of_segment() {
        let l = affine_projection(&[Point3::new(-1.0, 1.0, 0.0), Point3::new(3.0, 1.0, 0.0)]).unwrap();
        assert!((l[0] - 0.75).abs() < 1e-15 && (l[1] - 0.25).abs() < 1e-15);
        assert!(affine_projection(&[Point3::new(1.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)]).is_none());
    }
}

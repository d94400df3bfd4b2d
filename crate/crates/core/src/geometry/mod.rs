//! Geometry kernel: centroids, axis-aligned bounding boxes and convex-hull
//! distances between point sets.

mod bounds;
mod gjk;

pub use bounds::{aabb, aabb_volume, centroid, Aabb};
pub use gjk::{
    hull_distance, hull_distance_default, GeometryError, HullDistanceResult, SupportWeight, DEFAULT_TOLERANCE,
};

//! Numerical ground truth extraction and question-answer dataset tooling for
//! annotated 3D indoor scenes.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`scene`] ingests labeled point clouds (neutral JSON, ScanNet-style
//!    triplets, or seeded synthetic layouts).
//! 2. [`ngt`] computes per-instance centroids, bounding boxes and volumes plus
//!    pairwise convex-hull distances using the [`geometry`] kernel.
//! 3. [`qa`] turns those tables into balanced fact-validation and numerical
//!    inference records; [`rewrite`] converts short-answer questions into
//!    multiple-choice and yes/no form through a text-generation service.
//! 4. [`eval`] scores model predictions with exact-match accuracy and
//!    threshold accuracy.
//!
//! [`cli`] wires the stages into the `numina` command-line tool.

pub mod cli;
pub mod eval;
pub mod geometry;
pub mod jsonl;
pub mod ngt;
pub mod qa;
pub mod rewrite;
pub mod scene;
pub mod seed;

pub use geometry::{aabb, aabb_volume, centroid, hull_distance, Aabb, HullDistanceResult};
pub use ngt::{extract_ngt, LabelFilter, NgtTable};
pub use qa::{Category, QaRecord, Task};
pub use scene::{Instance, Point3, PointSet, Scene};

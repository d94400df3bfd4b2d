//! Scene and instance data model plus ingestion.
//!
//! Every type here validates its invariants on construction and is immutable
//! afterwards: points are finite, point sets are non-empty, labels are
//! non-empty lowercase strings and instance ids are unique per scene.

mod io;
mod point;
mod scannet;
pub mod synthetic;

use std::collections::BTreeSet;
use std::path::PathBuf;
use thiserror::Error;

pub use io::{load_scene, parse_scene, scene_to_json, write_scene};
pub use point::{Point3, PointSet};
pub use scannet::{import_scannet_style, parse_ply_vertices};
pub use synthetic::{generate_synthetic_scene, AnalyticTruth, ShapeSpec, SyntheticSpec};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("{path}: cannot read file: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed file: {detail}")]
    MalformedFile { path: PathBuf, detail: String },
    #[error("{path}: schema violation at {element}: {detail}")]
    SchemaViolation {
        path: PathBuf,
        element: String,
        detail: String,
    },
    #[error("inconsistent scan triplet: {0}")]
    InconsistentTriplet(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

/// Violation of a structural invariant, independent of where the data came from.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("label is empty")]
    EmptyLabel,
    #[error("scene has no instances")]
    NoInstances,
    #[error("duplicate instance_id {0:?}")]
    DuplicateInstanceId(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    instance_id: String,
    label: String,
    points: PointSet,
}

impl Instance {
    /// Builds an instance; the label is lowercased.
    pub fn new(instance_id: impl Into<String>, label: &str, points: PointSet) -> Result<Self, InvariantError> {
        let label = label.to_lowercase();
        if label.trim().is_empty() {
            return Err(InvariantError::EmptyLabel);
        }
        Ok(Self {
            instance_id: instance_id.into(),
            label,
            points,
        })
    }

    pub fn instance_id(&self) -> &str {
        &self.instance_id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    scene_id: String,
    instances: Vec<Instance>,
}

impl Scene {
    pub fn new(scene_id: impl Into<String>, instances: Vec<Instance>) -> Result<Self, InvariantError> {
        if instances.is_empty() {
            return Err(InvariantError::NoInstances);
        }
        let mut seen = BTreeSet::new();
        for inst in &instances {
            if !seen.insert(inst.instance_id.as_str()) {
                return Err(InvariantError::DuplicateInstanceId(inst.instance_id.clone()));
            }
        }
        Ok(Self {
            scene_id: scene_id.into(),
            instances,
        })
    }

    pub fn scene_id(&self) -> &str {
        &self.scene_id
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, instance_id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.instance_id == instance_id)
    }
}

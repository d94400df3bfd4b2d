//! Per-scene numerical ground truth (NGT): instance geometry, pairwise hull
//! distances and label counts.
//!
//! File format:
//! `{"scene_id", "instances": [InstanceNgt...], "pairs": [{"a","b","distance"}...], "skipped_pairs": [{"a","b"}...]}`.
//! Label counts are derived from `instances` when a file is read.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::geometry::{aabb, centroid, hull_distance, Aabb};
use crate::scene::{Point3, Scene};

#[derive(Debug, Error)]
pub enum NgtError {
    #[error("scene {0}: no instance survives label filtering")]
    EmptyAfterFilter(String),
    #[error("{path}: cannot access file: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed file: {detail}")]
    MalformedFile { path: PathBuf, detail: String },
    #[error("{path}: schema violation: {detail}")]
    SchemaViolation { path: PathBuf, detail: String },
}

/// Labels excluded from extraction because they carry no information.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelFilter {
    excluded: BTreeSet<String>,
}

impl Default for LabelFilter {
    fn default() -> Self {
        Self::new(["item", "object"])
    }
}

impl LabelFilter {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            excluded: labels.into_iter().map(|s| s.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn excludes(&self, label: &str) -> bool {
        self.excluded.contains(label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceNgt {
    pub instance_id: String,
    pub label: String,
    pub centroid: Point3,
    pub aabb: Aabb,
    pub dims: [f64; 3],
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub a: String,
    pub b: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NgtFile {
    scene_id: String,
    instances: Vec<InstanceNgt>,
    pairs: Vec<PairDistance>,
    skipped_pairs: Vec<SkippedPair>,
}

/// Numerical ground truth for one scene. Instances are sorted by id and each
/// unordered pair is keyed as `(smaller_id, larger_id)`, so the table does not
/// depend on the instance order of the source scene.
#[derive(Debug, Clone, PartialEq)]
pub struct NgtTable {
    scene_id: String,
    instances: Vec<InstanceNgt>,
    pair_distances: BTreeMap<(String, String), f64>,
    skipped_pairs: BTreeSet<(String, String)>,
    label_counts: BTreeMap<String, usize>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl NgtTable {
    pub fn scene_id(&self) -> &str {
        &self.scene_id
    }

    pub fn instances(&self) -> &[InstanceNgt] {
        &self.instances
    }

    pub fn instance(&self, instance_id: &str) -> Option<&InstanceNgt> {
        self.instances
            .binary_search_by(|i| i.instance_id.as_str().cmp(instance_id))
            .ok()
            .map(|k| &self.instances[k])
    }

    /// Distance for an unordered pair; `None` for unknown or skipped pairs.
    pub fn distance(&self, a: &str, b: &str) -> Option<f64> {
        self.pair_distances.get(&pair_key(a, b)).copied()
    }

    pub fn pair_distances(&self) -> &BTreeMap<(String, String), f64> {
        &self.pair_distances
    }

    pub fn skipped_pairs(&self) -> &BTreeSet<(String, String)> {
        &self.skipped_pairs
    }

    pub fn label_counts(&self) -> &BTreeMap<String, usize> {
        &self.label_counts
    }

    /// Labels that occur exactly once, with their instance.
    pub fn unique_referents(&self) -> Vec<&InstanceNgt> {
        self.instances
            .iter()
            .filter(|i| self.label_counts.get(&i.label) == Some(&1))
            .collect()
    }

    fn from_parts(
        scene_id: String,
        mut instances: Vec<InstanceNgt>,
        pair_distances: BTreeMap<(String, String), f64>,
        skipped_pairs: BTreeSet<(String, String)>,
    ) -> Self {
        instances.sort_by(|x, y| x.instance_id.cmp(&y.instance_id));
        let mut label_counts = BTreeMap::new();
        for inst in &instances {
            *label_counts.entry(inst.label.clone()).or_insert(0) += 1;
        }
        Self {
            scene_id,
            instances,
            pair_distances,
            skipped_pairs,
            label_counts,
        }
    }

    pub fn to_json(&self) -> String {
        let file = NgtFile {
            scene_id: self.scene_id.clone(),
            instances: self.instances.clone(),
            pairs: self
                .pair_distances
                .iter()
                .map(|((a, b), &distance)| PairDistance {
                    a: a.clone(),
                    b: b.clone(),
                    distance,
                })
                .collect(),
            skipped_pairs: self
                .skipped_pairs
                .iter()
                .map(|(a, b)| SkippedPair {
                    a: a.clone(),
                    b: b.clone(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("ngt serializes")
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self, NgtError> {
        use serde_json::error::Category;
        let file: NgtFile = serde_json::from_str(text).map_err(|e| match e.classify() {
            Category::Data => NgtError::SchemaViolation {
                path: origin.to_path_buf(),
                detail: e.to_string(),
            },
            _ => NgtError::MalformedFile {
                path: origin.to_path_buf(),
                detail: e.to_string(),
            },
        })?;
        let schema = |detail: String| NgtError::SchemaViolation {
            path: origin.to_path_buf(),
            detail,
        };
        let mut ids = BTreeSet::new();
        for inst in &file.instances {
            if !ids.insert(inst.instance_id.clone()) {
                return Err(schema(format!("duplicate instance_id {:?}", inst.instance_id)));
            }
            if inst.label.is_empty() || !inst.aabb.is_valid() || !inst.volume.is_finite() {
                return Err(schema(format!("invalid instance {:?}", inst.instance_id)));
            }
        }
        if ids.is_empty() {
            return Err(schema("no instances".into()));
        }
        let mut seen = BTreeSet::new();
        let mut pair_distances = BTreeMap::new();
        let mut check_pair = |a: &str, b: &str| -> Result<(String, String), NgtError> {
            if a == b || !ids.contains(a) || !ids.contains(b) {
                return Err(schema(format!(
                    "pair ({a:?}, {b:?}) does not name two distinct instances"
                )));
            }
            let key = pair_key(a, b);
            if !seen.insert(key.clone()) {
                return Err(schema(format!("pair ({a:?}, {b:?}) listed twice")));
            }
            Ok(key)
        };
        for p in &file.pairs {
            let key = check_pair(&p.a, &p.b)?;
            if !(p.distance.is_finite() && p.distance >= 0.0) {
                return Err(schema(format!("pair ({:?}, {:?}) has invalid distance", p.a, p.b)));
            }
            pair_distances.insert(key, p.distance);
        }
        let mut skipped = BTreeSet::new();
        for p in &file.skipped_pairs {
            skipped.insert(check_pair(&p.a, &p.b)?);
        }
        let n = ids.len();
        if seen.len() != n * (n - 1) / 2 {
            return Err(schema(format!(
                "pairs and skipped_pairs cover {} of {} instance pairs",
                seen.len(),
                n * (n - 1) / 2
            )));
        }
        Ok(Self::from_parts(file.scene_id, file.instances, pair_distances, skipped))
    }
}

pub fn write_ngt(table: &NgtTable, path: &Path) -> Result<(), NgtError> {
    fs::write(path, table.to_json()).map_err(|source| NgtError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_ngt(path: &Path) -> Result<NgtTable, NgtError> {
    let text = fs::read_to_string(path).map_err(|source| NgtError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    NgtTable::from_json(&text, path)
}

/// Builds the NGT table for all instances whose label passes `filter`.
///
/// Pair distances are computed eagerly and in parallel; assembly is keyed by
/// sorted id pair so the result does not depend on worker count. Pairs whose
/// distance solver fails to converge land in the skip list.
pub fn extract_ngt(scene: &Scene, filter: &LabelFilter, tol: f64) -> Result<NgtTable, NgtError> {
    let mut kept: Vec<_> = scene
        .instances()
        .iter()
        .filter(|i| !filter.excludes(i.label()))
        .collect();
    if kept.is_empty() {
        return Err(NgtError::EmptyAfterFilter(scene.scene_id().to_string()));
    }
    kept.sort_by(|x, y| x.instance_id().cmp(y.instance_id()));

    let instances: Vec<InstanceNgt> = kept
        .iter()
        .map(|inst| {
            let bbox = aabb(inst.points());
            InstanceNgt {
                instance_id: inst.instance_id().to_string(),
                label: inst.label().to_string(),
                centroid: centroid(inst.points()),
                aabb: bbox,
                dims: bbox.extents(),
                volume: bbox.volume(),
            }
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..kept.len())
        .flat_map(|i| (i + 1..kept.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<_> = pairs
        .par_iter()
        .map(|&(i, j)| hull_distance(kept[i].points(), kept[j].points(), tol))
        .collect();

    let mut pair_distances = BTreeMap::new();
    let mut skipped = BTreeSet::new();
    for (&(i, j), res) in pairs.iter().zip(results) {
        let key = pair_key(kept[i].instance_id(), kept[j].instance_id());
        match res {
            Ok(r) => {
                pair_distances.insert(key, r.distance);
            }
            Err(e) => {
                tracing::warn!(
                    scene = scene.scene_id(),
                    a = %key.0,
                    b = %key.1,
                    error = %e,
                    "pair skipped"
                );
                skipped.insert(key);
            }
        }
    }
    Ok(NgtTable::from_parts(
        scene.scene_id().to_string(),
        instances,
        pair_distances,
        skipped,
    ))
}

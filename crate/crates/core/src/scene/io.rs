//! Neutral scene JSON:
//! `{"scene_id": str, "instances": [{"instance_id": str, "label": str, "points": [[x,y,z], ...]}]}`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::{Instance, Point3, PointSet, Scene, SceneError};

#[derive(Serialize, Deserialize)]
struct SceneFile {
    scene_id: String,
    instances: Vec<InstanceFile>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    instance_id: String,
    label: String,
    points: Vec<Point3>,
}

pub fn load_scene(path: &Path) -> Result<Scene, SceneError> {
    let text = fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scene(&text, path)
}

/// Parses scene JSON; `origin` is only used in error messages.
pub fn parse_scene(text: &str, origin: &Path) -> Result<Scene, SceneError> {
    let file: SceneFile = serde_json::from_str(text).map_err(|e| json_error(e, origin))?;
    let schema = |element: String, detail: &str| SceneError::SchemaViolation {
        path: origin.to_path_buf(),
        element,
        detail: detail.to_string(),
    };
    if file.instances.is_empty() {
        return Err(schema("instances".into(), "scene has no instances"));
    }
    let mut seen = BTreeSet::new();
    let mut instances = Vec::with_capacity(file.instances.len());
    for (idx, raw) in file.instances.into_iter().enumerate() {
        let element = format!("instances[{idx}] (instance_id {:?})", raw.instance_id);
        if !seen.insert(raw.instance_id.clone()) {
            return Err(schema(element, "duplicate instance_id"));
        }
        let points = PointSet::new(raw.points).map_err(|e| schema(element.clone(), &e.to_string()))?;
        let inst = Instance::new(raw.instance_id, &raw.label, points).map_err(|e| schema(element, &e.to_string()))?;
        instances.push(inst);
    }
    Scene::new(file.scene_id, instances).map_err(|e| schema("scene".into(), &e.to_string()))
}

pub(crate) fn json_error(e: serde_json::Error, origin: &Path) -> SceneError {
    use serde_json::error::Category;
    match e.classify() {
        Category::Data => SceneError::SchemaViolation {
            path: origin.to_path_buf(),
            element: format!("line {} column {}", e.line(), e.column()),
            detail: e.to_string(),
        },
        Category::Io | Category::Syntax | Category::Eof => SceneError::MalformedFile {
            path: origin.to_path_buf(),
            detail: e.to_string(),
        },
    }
}

pub fn scene_to_json(scene: &Scene) -> String {
    let file = SceneFile {
        scene_id: scene.scene_id().to_string(),
        instances: scene
            .instances()
            .iter()
            .map(|i| InstanceFile {
                instance_id: i.instance_id().to_string(),
                label: i.label().to_string(),
                points: i.points().points().to_vec(),
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("scene serializes")
}

pub fn write_scene(scene: &Scene, path: &Path) -> Result<(), SceneError> {
    fs::write(path, scene_to_json(scene)).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })
}

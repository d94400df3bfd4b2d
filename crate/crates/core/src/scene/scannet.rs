//! ScanNet-style triplet import: mesh vertices (PLY), a per-vertex segment id
//! list (`segIndices`) and aggregation groups (`segGroups`) that map segment
//! ids to an object id and label.

use serde::Deserialize;
use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use super::io::json_error;
use super::{Instance, Point3, PointSet, Scene, SceneError};

#[derive(Deserialize)]
struct SegmentationFile {
    #[serde(rename = "segIndices")]
    seg_indices: Vec<i64>,
}

#[derive(Deserialize)]
struct AggregationFile {
    #[serde(rename = "sceneId", default)]
    scene_id: Option<String>,
    #[serde(rename = "segGroups")]
    seg_groups: Vec<SegGroup>,
}

#[derive(Deserialize)]
struct SegGroup {
    #[serde(rename = "objectId")]
    object_id: i64,
    label: String,
    segments: Vec<i64>,
}

/// Joins the triplet into a [`Scene`] with one instance per aggregation group.
///
/// Vertices whose segment belongs to no group are dropped. A segment claimed
/// by two groups, or referenced by a group but absent from the segmentation,
/// makes the triplet inconsistent.
pub fn import_scannet_style(
    ply_path: &Path,
    aggregation_path: &Path,
    segmentation_path: &Path,
) -> Result<Scene, SceneError> {
    let read = |p: &Path| {
        fs::read(p).map_err(|source| SceneError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let vertices = parse_ply_vertices(&read(ply_path)?).map_err(|detail| SceneError::MalformedFile {
        path: ply_path.to_path_buf(),
        detail,
    })?;
    let seg: SegmentationFile =
        serde_json::from_slice(&read(segmentation_path)?).map_err(|e| json_error(e, segmentation_path))?;
    let agg: AggregationFile =
        serde_json::from_slice(&read(aggregation_path)?).map_err(|e| json_error(e, aggregation_path))?;

    if seg.seg_indices.len() != vertices.len() {
        return Err(SceneError::InconsistentTriplet(format!(
            "mesh has {} vertices but segmentation lists {} segment ids",
            vertices.len(),
            seg.seg_indices.len()
        )));
    }

    let mut vertices_by_segment: HashMap<i64, Vec<usize>> = HashMap::new();
    for (v, &s) in seg.seg_indices.iter().enumerate() {
        vertices_by_segment.entry(s).or_default().push(v);
    }

    let mut owner: BTreeMap<i64, i64> = BTreeMap::new();
    let mut instances = Vec::with_capacity(agg.seg_groups.len());
    for group in &agg.seg_groups {
        let mut idx: Vec<usize> = Vec::new();
        for &s in &group.segments {
            if let Some(prev) = owner.insert(s, group.object_id) {
                return Err(SceneError::InconsistentTriplet(format!(
                    "segment {s} claimed by objects {prev} and {}",
                    group.object_id
                )));
            }
            let verts = vertices_by_segment.get(&s).ok_or_else(|| {
                SceneError::InconsistentTriplet(format!(
                    "object {} references segment {s} absent from segmentation",
                    group.object_id
                ))
            })?;
            idx.extend_from_slice(verts);
        }
        // Keep mesh order within an instance.
        idx.sort_unstable();
        let points = idx.iter().map(|&v| vertices[v]).collect();
        let element = format!("segGroups objectId {}", group.object_id);
        let schema = |detail: String| SceneError::SchemaViolation {
            path: aggregation_path.to_path_buf(),
            element: element.clone(),
            detail,
        };
        let points = PointSet::new(points).map_err(|e| schema(e.to_string()))?;
        let inst =
            Instance::new(group.object_id.to_string(), &group.label, points).map_err(|e| schema(e.to_string()))?;
        instances.push(inst);
    }

    let scene_id = agg
        .scene_id
        .map(|s| s.strip_prefix("scannet.").map(str::to_string).unwrap_or(s))
        .unwrap_or_else(|| {
            ply_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
    Scene::new(scene_id, instances).map_err(|e| SceneError::SchemaViolation {
        path: aggregation_path.to_path_buf(),
        element: "segGroups".into(),
        detail: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    Ascii,
    BinaryLe,
    BinaryBe,
}

#[derive(Debug, Clone, Copy)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

/// Extracts `x, y, z` of the `vertex` element from an ASCII or binary PLY file.
/// Other elements and properties are skipped.
pub fn parse_ply_vertices(bytes: &[u8]) -> Result<Vec<Point3>, String> {
    let (format, elements, body_start) = parse_header(bytes)?;
    let body = &bytes[body_start..];
    match format {
        Format::Ascii => read_ascii(body, &elements),
        Format::BinaryLe | Format::BinaryBe => read_binary(body, &elements, format == Format::BinaryLe),
    }
}

fn parse_header(bytes: &[u8]) -> Result<(Format, Vec<Element>, usize), String> {
    let mut pos = 0;
    let mut next_line = || -> Option<String> {
        if pos >= bytes.len() {
            return None;
        }
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(bytes.len(), |e| pos + e);
        let line = String::from_utf8_lossy(&bytes[pos..end])
            .trim_end_matches('\r')
            .to_string();
        pos = (end + 1).min(bytes.len());
        Some(line)
    };
    if next_line().as_deref() != Some("ply") {
        return Err("missing 'ply' magic".into());
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = next_line().ok_or("header not terminated by end_header")?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["end_header"] => break,
            ["format", f, _version] => {
                format = Some(match *f {
                    "ascii" => Format::Ascii,
                    "binary_little_endian" => Format::BinaryLe,
                    "binary_big_endian" => Format::BinaryBe,
                    other => return Err(format!("unsupported format {other}")),
                })
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| format!("bad element count {count:?}"))?,
                props: Vec::new(),
            }),
            ["property", "list", count, item, _name] => {
                let el = elements.last_mut().ok_or("property before element")?;
                el.props.push(Property::List {
                    count: Scalar::parse(count).ok_or(format!("bad type {count}"))?,
                    item: Scalar::parse(item).ok_or(format!("bad type {item}"))?,
                });
            }
            ["property", ty, name] => {
                let el = elements.last_mut().ok_or("property before element")?;
                el.props.push(Property::Scalar {
                    name: name.to_string(),
                    ty: Scalar::parse(ty).ok_or(format!("bad type {ty}"))?,
                });
            }
            _ => return Err(format!("unrecognized header line {line:?}")),
        }
    }
    let format = format.ok_or("missing format line")?;
    let vertex = elements
        .iter()
        .find(|e| e.name == "vertex")
        .ok_or("no vertex element")?;
    for axis in ["x", "y", "z"] {
        if !vertex
            .props
            .iter()
            .any(|p| matches!(p, Property::Scalar { name, .. } if name == axis))
        {
            return Err(format!("vertex element lacks property {axis}"));
        }
    }
    Ok((format, elements, pos))
}

fn axis_of(name: &str) -> Option<usize> {
    match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => None,
    }
}

fn read_ascii(body: &[u8], elements: &[Element]) -> Result<Vec<Point3>, String> {
    let text = String::from_utf8_lossy(body);
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut out = Vec::new();
    for el in elements {
        for row in 0..el.count {
            let line = lines
                .next()
                .ok_or_else(|| format!("element {} truncated at row {row}", el.name))?;
            if el.name != "vertex" {
                continue;
            }
            let mut toks = line.split_whitespace();
            let mut xyz = [0.0f64; 3];
            for prop in &el.props {
                match prop {
                    Property::Scalar { name, .. } => {
                        let tok = toks.next().ok_or_else(|| format!("vertex row {row} too short"))?;
                        if let Some(a) = axis_of(name) {
                            xyz[a] = tok
                                .parse()
                                .map_err(|_| format!("vertex row {row}: bad number {tok:?}"))?;
                        }
                    }
                    Property::List { .. } => {
                        let n: usize = toks
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| format!("vertex row {row}: bad list count"))?;
                        for _ in 0..n {
                            toks.next();
                        }
                    }
                }
            }
            out.push(finite(xyz, row)?);
        }
        if el.name == "vertex" {
            return Ok(out);
        }
    }
    Ok(out)
}

fn finite(xyz: [f64; 3], row: usize) -> Result<Point3, String> {
    let p = Point3::from(xyz);
    if p.is_finite() {
        Ok(p)
    } else {
        Err(format!("vertex {row} has a non-finite coordinate"))
    }
}

fn read_binary(body: &[u8], elements: &[Element], little: bool) -> Result<Vec<Point3>, String> {
    let mut cur = 0usize;
    let mut take = |n: usize| -> Result<&[u8], String> {
        let s = body.get(cur..cur + n).ok_or("binary body truncated")?;
        cur += n;
        Ok(s)
    };
    let mut out = Vec::new();
    for el in elements {
        for row in 0..el.count {
            let mut xyz = [0.0f64; 3];
            for prop in &el.props {
                match prop {
                    Property::Scalar { name, ty } => {
                        let raw = take(ty.size())?;
                        if el.name == "vertex" {
                            if let Some(a) = axis_of(name) {
                                xyz[a] = decode(raw, *ty, little);
                            }
                        }
                    }
                    Property::List { count, item } => {
                        let n = decode(take(count.size())?, *count, little);
                        if n < 0.0 {
                            return Err("negative list length".into());
                        }
                        take(n as usize * item.size())?;
                    }
                }
            }
            if el.name == "vertex" {
                out.push(finite(xyz, row)?);
            }
        }
        if el.name == "vertex" {
            return Ok(out);
        }
    }
    Ok(out)
}

fn decode(raw: &[u8], ty: Scalar, little: bool) -> f64 {
    macro_rules! num {
        ($t:ty) => {{
            let arr = raw.try_into().expect("sized slice");
            (if little {
                <$t>::from_le_bytes(arr)
            } else {
                <$t>::from_be_bytes(arr)
            }) as f64
        }};
    }
    match ty {
        Scalar::I8 => raw[0] as i8 as f64,
        Scalar::U8 => raw[0] as f64,
        Scalar::I16 => num!(i16),
        Scalar::U16 => num!(u16),
        Scalar::I32 => num!(i32),
        Scalar::U32 => num!(u32),
        Scalar::F32 => num!(f32),
        Scalar::F64 => num!(f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_ply_with_faces_and_colors() {
        let ply = b"ply\nformat ascii 1.0\ncomment test\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0 255\n1 0.5 2 10\n-1 -2 -3 0\n3 0 1 2\n";
        let v = parse_ply_vertices(ply).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[1], Point3::new(1.0, 0.5, 2.0));
    }

    #[test]
    fn binary_le_ply_after_leading_element() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement camera 1\nproperty list uchar float k\nelement vertex 2\nproperty double x\nproperty float y\nproperty float z\nproperty uchar alpha\nend_header\n".to_vec();
        bytes.push(2);
        bytes.extend(1.0f32.to_le_bytes());
        bytes.extend(2.0f32.to_le_bytes());
        for (x, y, z) in [(0.25f64, 1.5f32, -2.0f32), (3.0, 4.0, 5.0)] {
            bytes.extend(x.to_le_bytes());
            bytes.extend(y.to_le_bytes());
            bytes.extend(z.to_le_bytes());
            bytes.push(255);
        }
        let v = parse_ply_vertices(&bytes).unwrap();
        assert_eq!(v, vec![Point3::new(0.25, 1.5, -2.0), Point3::new(3.0, 4.0, 5.0)]);
    }

    #[test]
    fn truncated_binary_is_error() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n".to_vec();
        bytes.extend([0u8; 12]);
        assert!(parse_ply_vertices(&bytes).unwrap_err().contains("truncated"));
    }

    #[test]
    fn missing_axis_is_error() {
        let ply = b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n0 0\n";
        assert!(parse_ply_vertices(ply).is_err());
    }
}

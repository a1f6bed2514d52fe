/*
  Copyright 2026 The a3kit Authors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{Isometry3, Translation3, Unit, UnitQuaternion, Vector3};
use roxmltree::{Document, Node};

use super::mesh::{box_mesh, cylinder_mesh, CYLINDER_SEGMENTS};
use super::{JointKind, JointLimits, JointSpec, KinematicTree, LinkSpec, MeshRef, MeshSource, UrdfError};

/// Parses a URDF document. Relative mesh paths are kept as written.
pub fn parse_urdf(document_text: &str) -> Result<KinematicTree, UrdfError> {
    parse_urdf_with_base(document_text, None)
}

/// Parses a URDF file, resolving mesh paths against its directory.
pub fn parse_urdf_file(path: impl AsRef<Path>) -> Result<KinematicTree, UrdfError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| UrdfError::Mesh {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_urdf_with_base(&text, path.parent())
}

pub fn parse_urdf_with_base(document_text: &str, base_dir: Option<&Path>) -> Result<KinematicTree, UrdfError> {
    let doc = Document::parse(document_text).map_err(|e| {
        let pos = e.pos();
        UrdfError::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let robot = doc.root_element();
    if robot.tag_name().name() != "robot" {
        return Err(at(&doc, robot, format!("root element is <{}>, expected <robot>", robot.tag_name().name())));
    }

    let mut warnings = Vec::new();
    let mut links = Vec::new();
    let mut joints = Vec::new();
    for node in robot.children().filter(Node::is_element) {
        match node.tag_name().name() {
            "link" => links.push(parse_link(&doc, node, base_dir, &mut warnings)?),
            "joint" => joints.push(parse_joint(&doc, node, &mut warnings)?),
            "transmission" => warnings.push(format!("ignored <transmission> at line {}", line_of(&doc, node))),
            "material" | "gazebo" => {}
            other => warnings.push(format!("ignored <{other}> at line {}", line_of(&doc, node))),
        }
    }

    KinematicTree::new(robot.attribute("name").unwrap_or_default(), links, joints, warnings)
}

fn parse_link(
    doc: &Document,
    node: Node,
    base_dir: Option<&Path>,
    warnings: &mut Vec<String>,
) -> Result<LinkSpec, UrdfError> {
    let name = required_attr(doc, node, "name")?.to_owned();
    let visuals: Vec<Node> = node.children().filter(|c| c.has_tag_name("visual")).collect();
    // Links without visuals fall back to their collision shapes.
    let shapes = if visuals.is_empty() {
        node.children().filter(|c| c.has_tag_name("collision")).collect()
    } else {
        visuals
    };

    let mut mesh_refs = Vec::new();
    for shape in shapes {
        let local = match child(shape, "origin") {
            Some(origin) => parse_origin(doc, origin)?,
            None => Isometry3::identity(),
        };
        let Some(geometry) = child(shape, "geometry") else {
            continue;
        };
        let Some(kind) = geometry.children().find(Node::is_element) else {
            continue;
        };
        let ones = Vector3::new(1.0, 1.0, 1.0);
        match kind.tag_name().name() {
            "mesh" => {
                let filename = required_attr(doc, kind, "filename")?;
                let scale = match kind.attribute("scale") {
                    Some(s) => parse_vec3(doc, kind, s)?,
                    None => ones,
                };
                mesh_refs.push(MeshRef {
                    source: MeshSource::File(resolve_mesh_path(filename, base_dir)),
                    scale,
                    local,
                });
            }
            "box" => {
                let size = parse_vec3(doc, kind, required_attr(doc, kind, "size")?)?;
                if size.iter().any(|&s| s < 0.0) {
                    return Err(at(doc, kind, "box size must be non-negative"));
                }
                mesh_refs.push(MeshRef {
                    source: MeshSource::Inline(Arc::new(box_mesh(size))),
                    scale: ones,
                    local,
                });
            }
            "cylinder" => {
                let radius = parse_f64(doc, kind, required_attr(doc, kind, "radius")?)?;
                let length = parse_f64(doc, kind, required_attr(doc, kind, "length")?)?;
                mesh_refs.push(MeshRef {
                    source: MeshSource::Inline(Arc::new(cylinder_mesh(radius, length, CYLINDER_SEGMENTS))),
                    scale: ones,
                    local,
                });
            }
            other => warnings.push(format!(
                "link `{name}`: unsupported geometry <{other}> at line {} ignored",
                line_of(doc, kind)
            )),
        }
    }
    Ok(LinkSpec { name, mesh_refs })
}

fn parse_joint(doc: &Document, node: Node, warnings: &mut Vec<String>) -> Result<JointSpec, UrdfError> {
    let name = required_attr(doc, node, "name")?.to_owned();
    let kind = match required_attr(doc, node, "type")? {
        "revolute" => JointKind::Revolute,
        "prismatic" => JointKind::Prismatic,
        "continuous" => JointKind::Continuous,
        "fixed" => JointKind::Fixed,
        other => return Err(at(doc, node, format!("joint `{name}` has unsupported type `{other}`"))),
    };
    let link_of = |tag: &str| -> Result<String, UrdfError> {
        let element = child(node, tag).ok_or_else(|| at(doc, node, format!("joint `{name}` has no <{tag}>")))?;
        Ok(required_attr(doc, element, "link")?.to_owned())
    };
    let parent_link = link_of("parent")?;
    let child_link = link_of("child")?;

    let origin = match child(node, "origin") {
        Some(origin) => parse_origin(doc, origin)?,
        None => Isometry3::identity(),
    };
    let axis_raw = match child(node, "axis").and_then(|a| a.attribute("xyz").map(|s| (a, s))) {
        Some((element, xyz)) => parse_vec3(doc, element, xyz)?,
        None => Vector3::x(),
    };
    let axis_local = if kind == JointKind::Fixed {
        Unit::try_new(axis_raw, 1e-12).unwrap_or(Vector3::x_axis())
    } else {
        Unit::try_new(axis_raw, 1e-12)
            .ok_or_else(|| UrdfError::Validation(format!("joint `{name}` has a zero-length axis")))?
    };

    let limits = match (kind, child(node, "limit")) {
        (JointKind::Revolute | JointKind::Prismatic, Some(limit)) => {
            let read = |key: &str| match limit.attribute(key) {
                Some(s) => parse_f64(doc, limit, s),
                None => Ok(0.0),
            };
            Some(JointLimits {
                lower: read("lower")?,
                upper: read("upper")?,
            })
        }
        _ => None,
    };
    if child(node, "mimic").is_some() {
        warnings.push(format!("joint `{name}`: <mimic> ignored"));
    }

    Ok(JointSpec {
        name,
        kind,
        axis_local,
        origin,
        limits,
        parent_link,
        child_link,
    })
}

fn resolve_mesh_path(filename: &str, base_dir: Option<&Path>) -> PathBuf {
    let relative = if let Some(rest) = filename.strip_prefix("package://") {
        // Drop the package name; meshes are looked up next to the URDF.
        rest.split_once('/').map_or(rest, |(_, tail)| tail)
    } else {
        filename.strip_prefix("file://").unwrap_or(filename)
    };
    let path = Path::new(relative);
    match base_dir {
        Some(base) if path.is_relative() => base.join(path),
        _ => path.to_path_buf(),
    }
}

fn parse_origin(doc: &Document, node: Node) -> Result<Isometry3<f64>, UrdfError> {
    let xyz = match node.attribute("xyz") {
        Some(s) => parse_vec3(doc, node, s)?,
        None => Vector3::zeros(),
    };
    let rpy = match node.attribute("rpy") {
        Some(s) => parse_vec3(doc, node, s)?,
        None => Vector3::zeros(),
    };
    Ok(Isometry3::from_parts(
        Translation3::from(xyz),
        UnitQuaternion::from_euler_angles(rpy.x, rpy.y, rpy.z),
    ))
}

fn parse_vec3(doc: &Document, node: Node, text: &str) -> Result<Vector3<f64>, UrdfError> {
    let values = text
        .split_whitespace()
        .map(|t| parse_f64(doc, node, t))
        .collect::<Result<Vec<_>, _>>()?;
    match values.as_slice() {
        [x, y, z] => Ok(Vector3::new(*x, *y, *z)),
        _ => Err(at(doc, node, format!("expected three numbers, got `{text}`"))),
    }
}

fn parse_f64(doc: &Document, node: Node, text: &str) -> Result<f64, UrdfError> {
    match text.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(at(doc, node, format!("`{text}` is not a finite number"))),
    }
}

fn required_attr<'a>(doc: &Document, node: Node<'a, '_>, key: &str) -> Result<&'a str, UrdfError> {
    node.attribute(key)
        .ok_or_else(|| at(doc, node, format!("<{}> is missing attribute `{key}`", node.tag_name().name())))
}

fn child<'a, 'input>(node: Node<'a, 'input>, tag: &str) -> Option<Node<'a, 'input>> {
    node.children().find(|c| c.has_tag_name(tag))
}

fn line_of(doc: &Document, node: Node) -> u32 {
    doc.text_pos_at(node.range().start).row
}

fn at(doc: &Document, node: Node, message: impl Into<String>) -> UrdfError {
    let pos = doc.text_pos_at(node.range().start);
    UrdfError::Validation(format!("{} (line {}, column {})", message.into(), pos.row, pos.col))
}

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
//! URDF articulated-object model.
//!
//! Only the parts of URDF that feed articulation geometry are kept: links with
//! their visual geometry and joints with their screw axis, origin and limits.
//! Inertial data, materials, transmissions and mimic tags are dropped
//! (the latter two with a warning).

mod kinematics;
mod mesh;
mod parse;
mod sampling;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::{Isometry3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kinematics::{
    forward_kinematics, forward_kinematics_with_base, joint_motion, middle_joint_values, JointConfig, LinkPoses,
};
pub use mesh::{box_mesh, cylinder_mesh, load_mesh_file, TriMesh};
pub use parse::{parse_urdf, parse_urdf_file, parse_urdf_with_base};
pub use sampling::{sample_link_points, sample_surface, SurfacePoints, DEFAULT_SAMPLES_PER_LINK};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UrdfError {
    #[error("malformed XML at {line}:{column}: {message}")]
    Xml {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("invalid kinematic structure: {0}")]
    Structure(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("joint configuration: {0}")]
    Config(String),
    #[error("link geometry: {0}")]
    Geometry(String),
    #[error("mesh {path}: {message}")]
    Mesh { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
    Continuous,
    Fixed,
}

/// The two articulation families every movable joint is folded into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Articulation {
    Revolute,
    Prismatic,
}

impl Articulation {
    pub fn as_str(self) -> &'static str {
        match self {
            Articulation::Revolute => "revolute",
            Articulation::Prismatic => "prismatic",
        }
    }
}

impl std::fmt::Display for Articulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl JointKind {
    pub fn articulation(self) -> Option<Articulation> {
        match self {
            JointKind::Revolute | JointKind::Continuous => Some(Articulation::Revolute),
            JointKind::Prismatic => Some(Articulation::Prismatic),
            JointKind::Fixed => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub lower: f64,
    pub upper: f64,
}

impl JointLimits {
    pub fn middle(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn span(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.lower, self.upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub name: String,
    pub kind: JointKind,
    /// Unit axis in the joint frame.
    pub axis_local: Unit<Vector3<f64>>,
    /// Parent link frame to joint frame.
    pub origin: Isometry3<f64>,
    pub limits: Option<JointLimits>,
    pub parent_link: String,
    pub child_link: String,
}

impl JointSpec {
    /// Range the joint can actually travel. Continuous joints are given
    /// one full turn, `(-pi, pi)`.
    pub fn travel_range(&self) -> Option<JointLimits> {
        match self.kind {
            JointKind::Fixed => None,
            JointKind::Continuous => Some(JointLimits {
                lower: -std::f64::consts::PI,
                upper: std::f64::consts::PI,
            }),
            JointKind::Revolute | JointKind::Prismatic => self.limits,
        }
    }

    /// Non-fixed with nonzero travel.
    pub fn is_movable(&self) -> bool {
        self.travel_range().is_some_and(|r| r.span() > 0.0)
    }
}

/// Where a link's triangle mesh comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    /// Box and cylinder primitives, tessellated at load.
    Inline(Arc<TriMesh>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshRef {
    pub source: MeshSource,
    pub scale: Vector3<f64>,
    /// Link frame to mesh frame.
    pub local: Isometry3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub name: String,
    pub mesh_refs: Vec<MeshRef>,
}

impl LinkSpec {
    pub fn has_geometry(&self) -> bool {
        !self.mesh_refs.is_empty()
    }

    /// All of the link's meshes merged into one, in the link frame.
    pub fn mesh(&self) -> Result<TriMesh, UrdfError> {
        let mut merged = TriMesh::default();
        for mesh_ref in &self.mesh_refs {
            let part = match &mesh_ref.source {
                MeshSource::File(path) => load_mesh_file(path)?,
                MeshSource::Inline(mesh) => (**mesh).clone(),
            };
            merged.append(&part.transformed(&mesh_ref.local, &mesh_ref.scale));
        }
        Ok(merged)
    }
}

/// Parsed articulated object.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicTree {
    pub name: String,
    pub links: Vec<LinkSpec>,
    pub joints: Vec<JointSpec>,
    pub root: String,
    /// Elements that were read but ignored.
    pub warnings: Vec<String>,
    link_index: HashMap<String, usize>,
    parent_joint: HashMap<String, usize>,
    /// Joint indices, parents before children.
    joint_order: Vec<usize>,
}

impl KinematicTree {
    /// Validates the link/joint graph and builds the lookup tables.
    pub fn new(
        name: impl Into<String>,
        links: Vec<LinkSpec>,
        joints: Vec<JointSpec>,
        warnings: Vec<String>,
    ) -> Result<Self, UrdfError> {
        let mut link_index = HashMap::with_capacity(links.len());
        for (i, link) in links.iter().enumerate() {
            if link_index.insert(link.name.clone(), i).is_some() {
                return Err(UrdfError::Structure(format!("duplicate link `{}`", link.name)));
            }
        }
        if links.is_empty() {
            return Err(UrdfError::Structure("no links".into()));
        }

        let mut parent_joint = HashMap::with_capacity(joints.len());
        let mut joint_names = HashMap::with_capacity(joints.len());
        for (i, joint) in joints.iter().enumerate() {
            if joint_names.insert(joint.name.as_str(), i).is_some() {
                return Err(UrdfError::Structure(format!("duplicate joint `{}`", joint.name)));
            }
            for end in [&joint.parent_link, &joint.child_link] {
                if !link_index.contains_key(end) {
                    return Err(UrdfError::Structure(format!(
                        "joint `{}` references unknown link `{end}`",
                        joint.name
                    )));
                }
            }
            if joint.parent_link == joint.child_link {
                return Err(UrdfError::Structure(format!("joint `{}` connects a link to itself", joint.name)));
            }
            if parent_joint.insert(joint.child_link.clone(), i).is_some() {
                return Err(UrdfError::Structure(format!(
                    "link `{}` has more than one parent joint",
                    joint.child_link
                )));
            }
            validate_joint(joint)?;
        }

        let roots: Vec<&LinkSpec> = links
            .iter()
            .filter(|l| !parent_joint.contains_key(&l.name))
            .collect();
        let root = match roots.as_slice() {
            [root] => root.name.clone(),
            [] => return Err(UrdfError::Structure("joint graph has a cycle (no root link)".into())),
            many => {
                let names: Vec<&str> = many.iter().map(|l| l.name.as_str()).collect();
                return Err(UrdfError::Structure(format!("multiple root links: {}", names.join(", "))));
            }
        };

        // Breadth-first from the root; anything unreached sits on a cycle.
        let mut children: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, joint) in joints.iter().enumerate() {
            children.entry(joint.parent_link.as_str()).or_default().push(i);
        }
        let mut joint_order = Vec::with_capacity(joints.len());
        let mut frontier = vec![root.as_str()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for link in frontier {
                for &j in children.get(link).map(Vec::as_slice).unwrap_or_default() {
                    joint_order.push(j);
                    next.push(joints[j].child_link.as_str());
                }
            }
            frontier = next;
        }
        if joint_order.len() != joints.len() {
            return Err(UrdfError::Structure("joint graph has a cycle".into()));
        }

        Ok(Self {
            name: name.into(),
            links,
            joints,
            root,
            warnings,
            link_index,
            parent_joint,
            joint_order,
        })
    }

    pub fn link(&self, name: &str) -> Option<&LinkSpec> {
        self.link_index.get(name).map(|&i| &self.links[i])
    }

    pub fn joint(&self, name: &str) -> Option<&JointSpec> {
        self.joints.iter().find(|j| j.name == name)
    }

    pub fn parent_joint(&self, link: &str) -> Option<&JointSpec> {
        self.parent_joint.get(link).map(|&i| &self.joints[i])
    }

    /// Joints ordered so that every joint comes after the joint of its parent link.
    pub fn joints_topological(&self) -> impl Iterator<Item = &JointSpec> {
        self.joint_order.iter().map(|&i| &self.joints[i])
    }

    /// Links whose parent joint can move.
    pub fn movable_links(&self) -> impl Iterator<Item = (&LinkSpec, &JointSpec)> {
        self.links.iter().filter_map(|link| {
            let joint = self.parent_joint(&link.name)?;
            joint.is_movable().then_some((link, joint))
        })
    }
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN limits must fail
fn validate_joint(joint: &JointSpec) -> Result<(), UrdfError> {
    if joint.kind != JointKind::Fixed && (joint.axis_local.norm() - 1.0).abs() > 1e-9 {
        return Err(UrdfError::Validation(format!("joint `{}` axis is not unit length", joint.name)));
    }
    match (joint.kind, joint.limits) {
        (JointKind::Revolute | JointKind::Prismatic, None) => Err(UrdfError::Validation(format!(
            "joint `{}` of type {:?} has no <limit>",
            joint.name, joint.kind
        ))),
        (_, Some(limits)) if !(limits.lower <= limits.upper) => Err(UrdfError::Validation(format!(
            "joint `{}` has lower limit {} above upper limit {}",
            joint.name, limits.lower, limits.upper
        ))),
        (JointKind::Continuous, Some(_)) => Err(UrdfError::Validation(format!(
            "continuous joint `{}` must not carry position limits",
            joint.name
        ))),
        _ => Ok(()),
    }
}

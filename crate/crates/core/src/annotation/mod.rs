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
//! Per-view articulation triads: a box, an axis and a semantic label for
//! every visible movable link.
//!
//! Boxes are fitted in the link frame (so they ride rigidly with the link)
//! and mapped into the world. The axis of a revolute link lies on the joint
//! axis; the axis of a prismatic link runs along the slide direction through
//! the link's surface centroid. Both are centered on the projection of the
//! centroid onto the axis line and span the box along z.

mod geometry;
mod obb;
mod visibility;

use nalgebra::{Isometry3, Point3};
use serde::{Deserialize, Serialize};

pub use geometry::{ArticulatedObject, LinkGeometry, ObjectGeometry};
pub use obb::{
    compute_box, compute_box_about, projected_footprint, AxisSegment, OrientedBox3D, MIN_HALF_EXTENT, VERTEX_SIGNS,
};
pub use visibility::{compute_visibility, visible_movable_links, LinkVisibility, DEFAULT_MIN_VISIBILITY, ZBUFFER_SIZE};

use crate::camera::{normalize_point, project_camera_point, CameraIntrinsics, CameraPose, DepthRange, NormalizedPoint3};
use crate::error::{Error, Result};
use crate::skills::{select_actions, semantic_name, LinkState, Skill, SkillRuleTable};
use crate::urdf::{forward_kinematics_with_base, Articulation, JointConfig, KinematicTree, LinkPoses};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticLabel {
    pub joint_kind: Articulation,
    pub link_name: String,
    pub actions: Vec<Skill>,
}

/// The normalized (box, axis, label) annotation of one link in one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triad {
    pub link: String,
    pub box_norm: [NormalizedPoint3<f64>; 8],
    pub axis_norm: [NormalizedPoint3<f64>; 2],
    pub label: SemanticLabel,
    pub visibility: f64,
}

/// A triad plus the world-frame geometry it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkAnnotation {
    pub triad: Triad,
    pub joint: String,
    pub joint_value: f64,
    pub state: LinkState,
    pub box_world: OrientedBox3D<f64>,
    pub axis_world: AxisSegment<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewCamera {
    pub intrinsics: CameraIntrinsics<f64>,
    pub pose: CameraPose<f64>,
}

impl ViewCamera {
    pub fn normalize(&self, range: &DepthRange<f64>, p_world: &Point3<f64>) -> NormalizedPoint3<f64> {
        let proj = project_camera_point(&self.intrinsics, &self.pose.world_to_camera(p_world));
        normalize_point(&self.intrinsics, range, proj.u_px, proj.v_px, proj.depth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnotationOptions {
    pub min_visibility: f64,
    pub zbuffer_size: usize,
}

impl Default for AnnotationOptions {
    fn default() -> Self {
        Self {
            min_visibility: DEFAULT_MIN_VISIBILITY,
            zbuffer_size: ZBUFFER_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedView {
    pub depth_range: DepthRange<f64>,
    pub annotations: Vec<LinkAnnotation>,
    pub visibility: Vec<LinkVisibility>,
}

impl AnnotatedView {
    pub fn triads(&self) -> Vec<Triad> {
        self.annotations.iter().map(|a| a.triad.clone()).collect()
    }
}

/// Along-axis half extent below which a part counts as flat.
pub const FLAT_AXIS_EXTENT: f64 = 1e-3;

/// Half length of the axis segment: the box's along-axis half extent, or
/// the long footprint half extent for flat parts so the segment direction
/// survives coordinate quantization.
pub fn axis_half_length(bbox: &OrientedBox3D<f64>) -> f64 {
    let h = bbox.half_extents;
    if h.z < FLAT_AXIS_EXTENT {
        h.x.max(h.z)
    } else {
        h.z
    }
}

/// Axis segment of a movable link in the world frame.
pub fn compute_axis(
    tree: &KinematicTree,
    poses: &LinkPoses,
    link: &str,
    centroid_world: &Point3<f64>,
    half_length: f64,
) -> Result<AxisSegment<f64>> {
    let joint = tree
        .parent_joint(link)
        .ok_or_else(|| Error::NotMovable(link.to_owned()))?;
    let kind = joint
        .kind
        .articulation()
        .ok_or_else(|| Error::NotMovable(link.to_owned()))?;
    let parent_pose = poses
        .get(&joint.parent_link)
        .ok_or_else(|| Error::Config(format!("no pose for link `{}`", joint.parent_link)))?;
    let joint_frame = parent_pose * joint.origin;
    let direction = joint_frame.rotation * joint.axis_local;
    let anchor = Point3::from(joint_frame.translation.vector);
    let foot = match kind {
        Articulation::Revolute => anchor + direction.into_inner() * (centroid_world - anchor).dot(&direction),
        Articulation::Prismatic => *centroid_world,
    };
    let offset = direction.into_inner() * half_length;
    Ok(AxisSegment::new(foot - offset, foot + offset, kind)?)
}

/// World-frame box and axis of a movable link at the given link poses.
///
/// The box is fitted in the link frame, so it moves rigidly with the link.
pub fn fit_link(
    object: &ArticulatedObject,
    poses: &LinkPoses,
    link: &str,
) -> Result<(OrientedBox3D<f64>, AxisSegment<f64>)> {
    let joint = object
        .tree
        .parent_joint(link)
        .filter(|j| j.is_movable())
        .ok_or_else(|| Error::NotMovable(link.to_owned()))?;
    let lg = object
        .geometry
        .link(link)
        .ok_or_else(|| Error::NotMovable(format!("{link} has no geometry")))?;
    let link_pose = poses
        .get(link)
        .ok_or_else(|| Error::Config(format!("no pose for link `{link}`")))?;
    let box_local = compute_box_about(&lg.fitting_points(), &joint.axis_local, &lg.centroid)?;
    let axis = compute_axis(&object.tree, poses, link, &(link_pose * lg.centroid), axis_half_length(&box_local))?;
    Ok((box_local.transformed(link_pose), axis))
}

/// Annotates one view of `object` with its root at the identity.
pub fn annotate_view(
    object: &ArticulatedObject,
    config: &JointConfig,
    camera: &ViewCamera,
    rules: &SkillRuleTable,
) -> Result<AnnotatedView> {
    annotate_view_at(object, &Isometry3::identity(), config, camera, rules, &AnnotationOptions::default())
}

pub fn annotate_view_at(
    object: &ArticulatedObject,
    base: &Isometry3<f64>,
    config: &JointConfig,
    camera: &ViewCamera,
    rules: &SkillRuleTable,
    options: &AnnotationOptions,
) -> Result<AnnotatedView> {
    let tree = &object.tree;
    let poses = forward_kinematics_with_base(tree, config, base)?;

    let depth_range = DepthRange::from_depths(
        object
            .geometry
            .world_samples(&poses)
            .iter()
            .map(|(_, p)| camera.pose.world_to_camera(p).z),
    )?;
    let visibility = compute_visibility(&object.geometry, &poses, &camera.intrinsics, &camera.pose, options.zbuffer_size);

    let mut annotations = Vec::new();
    for (link, fraction) in visible_movable_links(tree, &visibility, options.min_visibility) {
        let joint = tree.parent_joint(&link).expect("movable links have a parent joint");
        let kind = joint.kind.articulation().expect("movable joints articulate");
        let (box_world, axis_world) = fit_link(object, &poses, &link)?;

        let value = config.get(&joint.name).unwrap_or_default();
        let range = joint.travel_range().expect("movable joints have a range");
        let state = LinkState::from_travel(value, range.lower, range.upper);
        let link_name = semantic_name(&link);
        let actions = select_actions(rules, &object.category, &link_name, kind, state);

        let triad = Triad {
            link: link.clone(),
            box_norm: box_world.vertices().map(|v| camera.normalize(&depth_range, &v)),
            axis_norm: [axis_world.p0, axis_world.p1].map(|p| camera.normalize(&depth_range, &p)),
            label: SemanticLabel {
                joint_kind: kind,
                link_name,
                actions,
            },
            visibility: fraction,
        };
        annotations.push(LinkAnnotation {
            triad,
            joint: joint.name.clone(),
            joint_value: value,
            state,
            box_world,
            axis_world,
        });
    }

    Ok(AnnotatedView {
        depth_range,
        annotations,
        visibility,
    })
}

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
use std::collections::BTreeMap;

use nalgebra::{Isometry3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::{JointKind, JointSpec, KinematicTree, UrdfError};

/// World pose of every link, keyed by link name.
pub type LinkPoses = BTreeMap<String, Isometry3<f64>>;

/// Joint positions keyed by joint name (radians or meters).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointConfig {
    pub values: BTreeMap<String, f64>,
}

impl JointConfig {
    pub fn get(&self, joint: &str) -> Option<f64> {
        self.values.get(joint).copied()
    }

    pub fn set(&mut self, joint: impl Into<String>, value: f64) {
        self.values.insert(joint.into(), value);
    }

    pub fn with(mut self, joint: impl Into<String>, value: f64) -> Self {
        self.set(joint, value);
        self
    }

    /// Checks every value against its joint's limits.
    pub fn validate(&self, tree: &KinematicTree) -> Result<(), UrdfError> {
        for (name, &value) in &self.values {
            let joint = tree
                .joint(name)
                .ok_or_else(|| UrdfError::Config(format!("unknown joint `{name}`")))?;
            if let Some(limits) = joint.limits {
                if value < limits.lower || value > limits.upper {
                    return Err(UrdfError::Config(format!(
                        "joint `{name}` value {value} outside [{}, {}]",
                        limits.lower, limits.upper
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Rigid motion a joint contributes at `value`, expressed in the joint frame.
pub fn joint_motion(joint: &JointSpec, value: f64) -> Isometry3<f64> {
    match joint.kind {
        JointKind::Revolute | JointKind::Continuous => Isometry3::from_parts(
            Translation3::identity(),
            UnitQuaternion::from_axis_angle(&joint.axis_local, value),
        ),
        JointKind::Prismatic => Isometry3::from_parts(
            Translation3::from(joint.axis_local.into_inner() * value),
            UnitQuaternion::identity(),
        ),
        JointKind::Fixed => Isometry3::identity(),
    }
}

pub fn forward_kinematics(tree: &KinematicTree, config: &JointConfig) -> Result<LinkPoses, UrdfError> {
    forward_kinematics_with_base(tree, config, &Isometry3::identity())
}

/// Forward kinematics with the root link placed at `base`.
pub fn forward_kinematics_with_base(
    tree: &KinematicTree,
    config: &JointConfig,
    base: &Isometry3<f64>,
) -> Result<LinkPoses, UrdfError> {
    let mut poses = LinkPoses::new();
    poses.insert(tree.root.clone(), *base);
    for joint in tree.joints_topological() {
        let value = match joint.kind {
            JointKind::Fixed => 0.0,
            _ => config
                .get(&joint.name)
                .ok_or_else(|| UrdfError::Config(format!("no value for joint `{}`", joint.name)))?,
        };
        let parent = poses[&joint.parent_link];
        poses.insert(joint.child_link.clone(), parent * joint.origin * joint_motion(joint, value));
    }
    Ok(poses)
}

/// Every limited joint at the middle of its range; continuous joints at 0.
pub fn middle_joint_values(tree: &KinematicTree) -> JointConfig {
    let values = tree
        .joints
        .iter()
        .filter_map(|joint| match (joint.kind, joint.limits) {
            (JointKind::Fixed, _) => None,
            (JointKind::Continuous, _) => Some((joint.name.clone(), 0.0)),
            (_, Some(limits)) => Some((joint.name.clone(), limits.middle())),
            (_, None) => Some((joint.name.clone(), 0.0)),
        })
        .collect();
    JointConfig { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::urdf::parse_urdf;
    use approx::assert_relative_eq;
    use nalgebra::{Point3, Vector3};
    use proptest::prelude::*;

    fn one_joint(kind: &str, axis: &str, origin: &str, limit: &str) -> KinematicTree {
        parse_urdf(&format!(
            r#"<robot name="r"><link name="base"/><link name="child"/>
  <joint name="j" type="{kind}"><parent link="base"/><child link="child"/>
    <origin {origin}/><axis xyz="{axis}"/>{limit}</joint></robot>"#
        ))
        .unwrap()
    }

    const LIMIT: &str = r#"<limit lower="-3" upper="3" effort="1" velocity="1"/>"#;

    #[test]
    fn revolute_quarter_turn() {
        let tree = one_joint("revolute", "0 0 1", r#"xyz="0 0 0""#, LIMIT);
        let poses = forward_kinematics(&tree, &JointConfig::default().with("j", std::f64::consts::FRAC_PI_2)).unwrap();
        let p = poses["child"] * Point3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(p, Point3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn prismatic_translation() {
        let tree = one_joint("prismatic", "1 0 0", r#"xyz="0.1 0.2 0.3" rpy="0 0 0""#, LIMIT);
        let zero = forward_kinematics(&tree, &JointConfig::default().with("j", 0.0)).unwrap()["child"];
        let moved = forward_kinematics(&tree, &JointConfig::default().with("j", 0.3)).unwrap()["child"];
        assert_relative_eq!(moved.translation.vector - zero.translation.vector, Vector3::new(0.3, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn zero_values_compose_static_origins() {
        let tree = one_joint("revolute", "0 1 0", r#"xyz="1 2 3" rpy="0.1 0.2 0.3""#, LIMIT);
        let poses = forward_kinematics(&tree, &JointConfig::default().with("j", 0.0)).unwrap();
        assert_relative_eq!(poses["child"].to_homogeneous(), tree.joints[0].origin.to_homogeneous(), epsilon = 1e-15);
    }

    #[test]
    fn missing_value_is_config_error() {
        let tree = one_joint("revolute", "0 0 1", r#"xyz="0 0 0""#, LIMIT);
        assert!(matches!(forward_kinematics(&tree, &JointConfig::default()), Err(UrdfError::Config(_))));
    }

    #[test]
    #[allow(clippy::approx_constant)] // limits as written in URDF files
    fn middle_values() {
        let door = one_joint("revolute", "0 0 1", r#"xyz="0 0 0""#, r#"<limit lower="0" upper="1.5708"/>"#);
        assert_relative_eq!(middle_joint_values(&door).get("j").unwrap(), 0.7854);
        let sym = one_joint("prismatic", "1 0 0", r#"xyz="0 0 0""#, r#"<limit lower="-0.2" upper="0.2"/>"#);
        assert_eq!(middle_joint_values(&sym).get("j"), Some(0.0));
        let spin = one_joint("continuous", "0 0 1", r#"xyz="0 0 0""#, "");
        assert_eq!(middle_joint_values(&spin).get("j"), Some(0.0));
    }

    proptest! {
        #[test]
        fn chaining_post_composes_joint_motion(
            kind in prop::sample::select(vec!["revolute", "prismatic"]),
            ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in 0.2..1.0f64,
            rpy in prop::array::uniform3(-3.0..3.0f64),
            q in -1.0..1.0f64, dq in -1.0..1.0f64,
        ) {
            let origin = format!(r#"xyz="0.3 -0.2 0.5" rpy="{} {} {}""#, rpy[0], rpy[1], rpy[2]);
            let tree = one_joint(kind, &format!("{ax} {ay} {az}"), &origin, LIMIT);
            let at = |v: f64| forward_kinematics(&tree, &JointConfig::default().with("j", v)).unwrap()["child"];
            let composed = at(q) * joint_motion(&tree.joints[0], dq);
            let dev = (at(q + dq).to_homogeneous() - composed.to_homogeneous()).abs().max();
            prop_assert!(dev <= 1e-9, "deviation {dev}");
        }
    }
}

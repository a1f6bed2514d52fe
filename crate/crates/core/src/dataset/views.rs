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
//! Randomized views of an articulated object.

use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{ArticulatedObject, ViewCamera};
use crate::camera::{look_at, CameraIntrinsics};
use crate::error::Result;
use crate::seeds::{derive_seed, derive_seed_str};
use crate::urdf::{forward_kinematics, JointConfig};

pub const DEFAULT_VIEWS_PER_OBJECT: usize = 40;

/// Camera placement ranges, relative to the object's bounding sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewSampling {
    pub radius_factor: (f64, f64),
    pub elevation_deg: (f64, f64),
}

impl Default for ViewSampling {
    fn default() -> Self {
        Self {
            radius_factor: (1.5, 3.0),
            elevation_deg: (-15.0, 60.0),
        }
    }
}

/// Lighting for an external renderer; not used by the toolkit itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lighting {
    pub seed: u64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub intensity: f64,
    pub ambient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewSpec {
    pub object_id: String,
    pub index: usize,
    pub seed: u64,
    pub camera: ViewCamera,
    pub joints: JointConfig,
    pub lighting: Lighting,
    pub image_ref: Option<String>,
    pub augmented_image_ref: Option<String>,
}

impl ViewSpec {
    pub fn default_image_ref(object_id: &str, index: usize) -> String {
        format!("images/{object_id}/view_{index:03}.png")
    }
}

/// Seed of view `index` of `object_id`; independent of how many views are drawn.
pub fn view_seed(master_seed: u64, object_id: &str, index: usize) -> u64 {
    derive_seed(derive_seed_str(master_seed, object_id), index as u64)
}

/// Joint values drawn uniformly within each movable joint's travel range.
pub fn random_joint_config<R: Rng>(object: &ArticulatedObject, rng: &mut R) -> JointConfig {
    let mut config = JointConfig::default();
    for joint in object.tree.joints_topological() {
        if let Some(range) = joint.travel_range() {
            let value = if range.span() > 0.0 {
                rng.gen_range(range.lower..=range.upper)
            } else {
                range.lower
            };
            config.set(joint.name.clone(), value);
        }
    }
    config
}

/// Camera on a sphere around the object posed at `joints`, plus lighting.
pub fn place_camera<R: Rng>(
    object: &ArticulatedObject,
    joints: &JointConfig,
    rng: &mut R,
    intrinsics: &CameraIntrinsics<f64>,
    sampling: &ViewSampling,
) -> Result<(ViewCamera, Lighting)> {
    // Sphere of the posed object, so the camera clears moved parts too.
    let poses = forward_kinematics(&object.tree, joints)?;
    let (center, radius) = object.geometry.bounding_sphere(&poses);
    let radius = radius.max(1e-3);

    let r = radius * rng.gen_range(sampling.radius_factor.0..=sampling.radius_factor.1);
    let elevation = rng
        .gen_range(sampling.elevation_deg.0..=sampling.elevation_deg.1)
        .to_radians();
    let azimuth = rng.gen_range(0.0..2.0 * PI);
    let offset = Vector3::new(
        elevation.cos() * azimuth.cos(),
        elevation.cos() * azimuth.sin(),
        elevation.sin(),
    );
    let eye: Point3<f64> = center + offset * r;
    let pose = look_at(&eye, &center, &Vector3::z())?;

    let lighting = Lighting {
        seed: rng.gen(),
        azimuth_deg: rng.gen_range(0.0..360.0),
        elevation_deg: rng.gen_range(15.0..75.0),
        intensity: rng.gen_range(0.6..1.4),
        ambient: rng.gen_range(0.1..0.4),
    };
    let camera = ViewCamera {
        intrinsics: *intrinsics,
        pose,
    };
    Ok((camera, lighting))
}

pub fn sample_view(
    object: &ArticulatedObject,
    index: usize,
    master_seed: u64,
    intrinsics: &CameraIntrinsics<f64>,
    sampling: &ViewSampling,
) -> Result<ViewSpec> {
    let seed = view_seed(master_seed, &object.id, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let joints = random_joint_config(object, &mut rng);
    let (camera, lighting) = place_camera(object, &joints, &mut rng, intrinsics, sampling)?;
    Ok(ViewSpec {
        object_id: object.id.clone(),
        index,
        seed,
        camera,
        joints,
        lighting,
        image_ref: Some(ViewSpec::default_image_ref(&object.id, index)),
        augmented_image_ref: None,
    })
}

pub fn sample_views(
    object: &ArticulatedObject,
    n_views: usize,
    master_seed: u64,
    intrinsics: &CameraIntrinsics<f64>,
) -> Result<Vec<ViewSpec>> {
    let sampling = ViewSampling::default();
    (0..n_views)
        .map(|i| sample_view(object, i, master_seed, intrinsics, &sampling))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::urdf::parse_urdf;

    fn object(urdf: &str) -> ArticulatedObject {
        ArticulatedObject::new("probe", "Probe", parse_urdf(urdf).unwrap(), 256, 0).unwrap()
    }

    fn hinged(size: &str) -> ArticulatedObject {
        object(&format!(
            r#"<robot name="r">
  <link name="base"><visual><geometry><box size="{size}"/></geometry></visual></link>
  <link name="lid"><visual><geometry><box size="0.2 0.2 0.02"/></geometry></visual></link>
  <joint name="hinge" type="revolute"><parent link="base"/><child link="lid"/>
    <origin xyz="0 0 0.3"/><axis xyz="0 1 0"/><limit lower="0" upper="1.2"/></joint>
</robot>"#
        ))
    }

    #[test]
    fn forty_distinct_reproducible_views() {
        let obj = hinged("0.5 0.5 0.5");
        let intr = CameraIntrinsics::default();
        let a = sample_views(&obj, DEFAULT_VIEWS_PER_OBJECT, 9, &intr).unwrap();
        let b = sample_views(&obj, DEFAULT_VIEWS_PER_OBJECT, 9, &intr).unwrap();
        assert_eq!(a.len(), 40);
        assert_eq!(a, b);
        for i in 0..a.len() {
            for j in 0..i {
                assert_ne!(a[i].camera.pose.eye(), a[j].camera.pose.eye());
            }
        }
        // View i does not depend on how many views are drawn.
        assert_eq!(sample_views(&obj, 1, 9, &intr).unwrap()[0], a[0]);
        assert_ne!(sample_views(&obj, 1, 10, &intr).unwrap()[0], a[0]);
    }

    #[test]
    fn cameras_respect_ranges_even_for_flat_objects() {
        let obj = hinged("1 1 0.001");
        let intr = CameraIntrinsics::default();
        let sampling = ViewSampling::default();
        for seed in 0..100 {
            let spec = sample_view(&obj, 0, seed, &intr, &sampling).unwrap();
            let value = spec.joints.get("hinge").unwrap();
            assert!((0.0..=1.2).contains(&value));
            let poses = forward_kinematics(&obj.tree, &spec.joints).unwrap();
            let (center, radius) = obj.geometry.bounding_sphere(&poses);
            let offset = spec.camera.pose.eye() - center;
            let elevation = (offset.z / offset.norm()).asin().to_degrees();
            assert!(elevation >= sampling.elevation_deg.0 - 1e-9 && elevation <= sampling.elevation_deg.1 + 1e-9);
            let ratio = offset.norm() / radius;
            assert!(ratio >= sampling.radius_factor.0 - 1e-9 && ratio <= sampling.radius_factor.1 + 1e-9);
        }
    }
}

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
use std::collections::HashMap;
use std::path::Path;

use nalgebra::{Point3, Vector3};

use crate::seeds::derive_seed_str;
use crate::urdf::{
    forward_kinematics, middle_joint_values, parse_urdf_file, sample_surface, KinematicTree, LinkPoses, TriMesh,
    UrdfError, DEFAULT_SAMPLES_PER_LINK,
};

/// Mesh, surface samples and surface centroid of one link, all in the link frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGeometry {
    pub link: String,
    pub mesh: TriMesh,
    pub samples: Vec<Point3<f64>>,
    pub centroid: Point3<f64>,
}

impl LinkGeometry {
    /// Surface samples plus mesh vertices; the vertices pin the exact extent.
    pub fn fitting_points(&self) -> Vec<Point3<f64>> {
        let mut pts = self.samples.clone();
        pts.extend_from_slice(&self.mesh.vertices);
        pts
    }
}

/// Geometry of every link that has triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectGeometry {
    pub links: Vec<LinkGeometry>,
    index: HashMap<String, usize>,
}

impl ObjectGeometry {
    pub fn build(tree: &KinematicTree, samples_per_link: usize, seed: u64) -> Result<Self, UrdfError> {
        let mut links = Vec::new();
        for spec in tree.links.iter().filter(|l| l.has_geometry()) {
            let mesh = spec.mesh()?;
            let Some(centroid) = mesh.surface_centroid() else {
                continue;
            };
            let samples = sample_surface(&mesh, samples_per_link, derive_seed_str(seed, &spec.name))?;
            links.push(LinkGeometry {
                link: spec.name.clone(),
                mesh,
                samples,
                centroid,
            });
        }
        let index = links.iter().enumerate().map(|(i, l)| (l.link.clone(), i)).collect();
        Ok(Self { links, index })
    }

    pub fn link(&self, name: &str) -> Option<&LinkGeometry> {
        self.index.get(name).map(|&i| &self.links[i])
    }

    /// All samples in world coordinates, with the index of their link.
    pub fn world_samples(&self, poses: &LinkPoses) -> Vec<(usize, Point3<f64>)> {
        self.links
            .iter()
            .enumerate()
            .flat_map(|(i, lg)| {
                let pose = poses[&lg.link];
                lg.samples.iter().map(move |p| (i, pose * p))
            })
            .collect()
    }

    /// Center and radius of a sphere around all samples at `poses`.
    pub fn bounding_sphere(&self, poses: &LinkPoses) -> (Point3<f64>, f64) {
        let pts = self.world_samples(poses);
        if pts.is_empty() {
            return (Point3::origin(), 0.0);
        }
        let center = Point3::from(pts.iter().fold(Vector3::zeros(), |acc, (_, p)| acc + p.coords) / pts.len() as f64);
        let radius = pts.iter().map(|(_, p)| (p - center).norm()).fold(0.0, f64::max);
        (center, radius)
    }
}

/// A parsed object together with its sampled geometry and category.
#[derive(Debug, Clone)]
pub struct ArticulatedObject {
    pub id: String,
    pub category: String,
    pub tree: KinematicTree,
    pub geometry: ObjectGeometry,
}

impl ArticulatedObject {
    pub fn new(
        id: impl Into<String>,
        category: impl Into<String>,
        tree: KinematicTree,
        samples_per_link: usize,
        seed: u64,
    ) -> Result<Self, UrdfError> {
        let id = id.into();
        let geometry = ObjectGeometry::build(&tree, samples_per_link, derive_seed_str(seed, &id))?;
        Ok(Self {
            id,
            category: category.into(),
            tree,
            geometry,
        })
    }

    pub fn from_urdf_file(path: &Path, category: impl Into<String>, seed: u64) -> Result<Self, UrdfError> {
        let tree = parse_urdf_file(path)?;
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("object")
            .to_owned();
        Self::new(id, category, tree, DEFAULT_SAMPLES_PER_LINK, seed)
    }

    /// Bounding sphere at the middle configuration.
    pub fn bounding_sphere(&self) -> (Point3<f64>, f64) {
        let config = middle_joint_values(&self.tree);
        match forward_kinematics(&self.tree, &config) {
            Ok(poses) => self.geometry.bounding_sphere(&poses),
            Err(_) => (Point3::origin(), 0.0),
        }
    }
}

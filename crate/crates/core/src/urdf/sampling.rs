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
use nalgebra::Point3;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{KinematicTree, TriMesh, UrdfError};

pub const DEFAULT_SAMPLES_PER_LINK: usize = 2048;

/// Surface samples of one link, in the link frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoints {
    pub link: String,
    pub points_local: Vec<Point3<f64>>,
    pub seed: u64,
}

/// Area-weighted uniform samples over the mesh surface.
pub fn sample_surface(mesh: &TriMesh, count: usize, seed: u64) -> Result<Vec<Point3<f64>>, UrdfError> {
    let areas: Vec<f64> = (0..mesh.triangles.len()).map(|i| mesh.triangle_area(i)).collect();
    let picker = WeightedIndex::new(&areas)
        .map_err(|e| UrdfError::Geometry(format!("mesh has no sampleable area: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let [a, b, c] = mesh.triangle(picker.sample(&mut rng));
            let s = rng.gen::<f64>().sqrt();
            let t = rng.gen::<f64>();
            Point3::from(a.coords * (1.0 - s) + b.coords * (s * (1.0 - t)) + c.coords * (s * t))
        })
        .collect())
}

pub fn sample_link_points(
    tree: &KinematicTree,
    link: &str,
    count: usize,
    seed: u64,
) -> Result<SurfacePoints, UrdfError> {
    let spec = tree
        .link(link)
        .ok_or_else(|| UrdfError::Geometry(format!("unknown link `{link}`")))?;
    let mesh = spec.mesh()?;
    if mesh.is_empty() {
        return Err(UrdfError::Geometry(format!("link `{link}` has no triangles")));
    }
    Ok(SurfacePoints {
        link: link.to_owned(),
        points_local: sample_surface(&mesh, count, seed)?,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::urdf::box_mesh;
    use nalgebra::Vector3;

    /// Which of the six unit-cube faces a surface point lies on.
    fn face_of(p: &Point3<f64>) -> usize {
        (0..3)
            .find_map(|k| {
                if (p[k] - 0.5).abs() < 1e-9 {
                    Some(2 * k)
                } else if (p[k] + 0.5).abs() < 1e-9 {
                    Some(2 * k + 1)
                } else {
                    None
                }
            })
            .expect("point on the cube surface")
    }

    fn census(points: &[Point3<f64>]) -> [usize; 6] {
        let mut counts = [0; 6];
        for p in points {
            counts[face_of(p)] += 1;
        }
        counts
    }

    fn within_four_sigma(counts: &[usize; 6], n: usize) {
        let (p, n) = (1.0 / 6.0, n as f64);
        let sigma = (n * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((*c as f64 - n * p).abs() <= 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn cube_faces_get_area_proportional_counts() {
        let cube = box_mesh(Vector3::new(1.0, 1.0, 1.0));
        let points = sample_surface(&cube, 2048, 3).unwrap();
        assert_eq!(points.len(), 2048);
        within_four_sigma(&census(&points), 2048);
    }

    #[test]
    fn triangle_order_does_not_change_the_distribution() {
        let mut cube = box_mesh(Vector3::new(1.0, 1.0, 1.0));
        cube.triangles.reverse();
        cube.triangles.rotate_left(5);
        within_four_sigma(&census(&sample_surface(&cube, 2048, 3).unwrap()), 2048);
    }

    #[test]
    fn single_sample_lies_on_a_triangle() {
        let cube = box_mesh(Vector3::new(1.0, 1.0, 1.0));
        let p = sample_surface(&cube, 1, 9).unwrap()[0];
        assert!(p.iter().all(|c| c.abs() <= 0.5 + 1e-12));
        face_of(&p);
    }

    #[test]
    fn deterministic_per_seed() {
        let cube = box_mesh(Vector3::new(0.3, 0.2, 0.1));
        assert_eq!(sample_surface(&cube, 100, 5).unwrap(), sample_surface(&cube, 100, 5).unwrap());
        assert_ne!(sample_surface(&cube, 100, 5).unwrap(), sample_surface(&cube, 100, 6).unwrap());
    }

    #[test]
    fn link_without_geometry_is_an_error() {
        let tree = crate::urdf::parse_urdf(r#"<robot name="r"><link name="base"/></robot>"#).unwrap();
        assert!(matches!(sample_link_points(&tree, "base", 10, 0), Err(UrdfError::Geometry(_))));
    }
}

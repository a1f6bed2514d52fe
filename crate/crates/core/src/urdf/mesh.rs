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
use std::path::Path;

use nalgebra::{Isometry3, Point3, Vector3};

use super::UrdfError;

pub(crate) const CYLINDER_SEGMENTS: usize = 32;

/// Indexed triangle mesh.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Self {
        Self { vertices, triangles }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, index: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[index];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, index: usize) -> f64 {
        let [a, b, c] = self.triangle(index);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    /// Area-weighted centroid of the surface, or `None` for zero area.
    pub fn surface_centroid(&self) -> Option<Point3<f64>> {
        let mut total = 0.0;
        let mut acc = Vector3::zeros();
        for i in 0..self.triangles.len() {
            let area = self.triangle_area(i);
            let [a, b, c] = self.triangle(i);
            acc += area * (a.coords + b.coords + c.coords) / 3.0;
            total += area;
        }
        (total > 0.0).then(|| Point3::from(acc / total))
    }

    /// Scales vertices per axis, then applies `pose`.
    pub fn transformed(&self, pose: &Isometry3<f64>, scale: &Vector3<f64>) -> TriMesh {
        let vertices = self
            .vertices
            .iter()
            .map(|v| pose * Point3::from(v.coords.component_mul(scale)))
            .collect();
        TriMesh {
            vertices,
            triangles: self.triangles.clone(),
        }
    }

    pub fn append(&mut self, other: &TriMesh) {
        let offset = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + offset)));
    }

    /// Unsigned distance from `p` to the closest point on the surface.
    pub fn distance_to(&self, p: &Point3<f64>) -> f64 {
        (0..self.triangles.len())
            .map(|i| {
                let [a, b, c] = self.triangle(i);
                (closest_point_on_triangle(p, &a, &b, &c) - p).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub(crate) fn closest_point_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Point3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Axis-aligned box centered at the origin, 12 outward-facing triangles.
pub fn box_mesh(size: Vector3<f64>) -> TriMesh {
    let h = size / 2.0;
    let vertices = (0..8)
        .map(|i| {
            Point3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            )
        })
        .collect();
    let triangles = vec![
        [0, 2, 3], [0, 3, 1], // -z
        [4, 5, 7], [4, 7, 6], // +z
        [0, 1, 5], [0, 5, 4], // -y
        [2, 6, 7], [2, 7, 3], // +y
        [0, 4, 6], [0, 6, 2], // -x
        [1, 3, 7], [1, 7, 5], // +x
    ];
    TriMesh::new(vertices, triangles)
}

/// Closed cylinder along z centered at the origin.
pub fn cylinder_mesh(radius: f64, length: f64, segments: usize) -> TriMesh {
    let segments = segments.max(3);
    let half = length / 2.0;
    let mut vertices = Vec::with_capacity(2 * segments + 2);
    for z in [-half, half] {
        for k in 0..segments {
            let theta = std::f64::consts::TAU * k as f64 / segments as f64;
            vertices.push(Point3::new(radius * theta.cos(), radius * theta.sin(), z));
        }
    }
    let bottom_center = vertices.len() as u32;
    vertices.push(Point3::new(0.0, 0.0, -half));
    let top_center = bottom_center + 1;
    vertices.push(Point3::new(0.0, 0.0, half));

    let n = segments as u32;
    let mut triangles = Vec::with_capacity(4 * segments);
    for k in 0..n {
        let next = (k + 1) % n;
        triangles.push([k, next, n + next]);
        triangles.push([k, n + next, n + k]);
        triangles.push([bottom_center, next, k]);
        triangles.push([top_center, n + k, n + next]);
    }
    TriMesh::new(vertices, triangles)
}

/// Loads an OBJ or STL (ASCII or binary) file.
pub fn load_mesh_file(path: &Path) -> Result<TriMesh, UrdfError> {
    let mesh_error = |message: String| UrdfError::Mesh {
        path: path.to_path_buf(),
        message,
    };
    let extension = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match extension.as_str() {
        "obj" => {
            let options = tobj::LoadOptions {
                triangulate: true,
                single_index: true,
                ..Default::default()
            };
            let (models, _materials) = tobj::load_obj(path, &options).map_err(|e| mesh_error(e.to_string()))?;
            let mut mesh = TriMesh::default();
            for model in models {
                let m = model.mesh;
                let vertices = m
                    .positions
                    .chunks_exact(3)
                    .map(|p| Point3::new(p[0] as f64, p[1] as f64, p[2] as f64))
                    .collect();
                let triangles = m.indices.chunks_exact(3).map(|t| [t[0], t[1], t[2]]).collect();
                mesh.append(&TriMesh::new(vertices, triangles));
            }
            Ok(mesh)
        }
        "stl" => {
            let mut file = std::fs::File::open(path).map_err(|e| mesh_error(e.to_string()))?;
            let stl = stl_io::read_stl(&mut file).map_err(|e| mesh_error(e.to_string()))?;
            let vertices = stl
                .vertices
                .iter()
                .map(|v| Point3::new(v[0] as f64, v[1] as f64, v[2] as f64))
                .collect();
            let triangles = stl
                .faces
                .iter()
                .map(|f| f.vertices.map(|i| i as u32))
                .collect();
            Ok(TriMesh::new(vertices, triangles))
        }
        other => Err(mesh_error(format!("unsupported mesh format `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn box_is_closed_and_outward() {
        let mesh = box_mesh(Vector3::new(1.0, 2.0, 3.0));
        assert_relative_eq!(mesh.area(), 2.0 * (2.0 + 3.0 + 6.0), epsilon = 1e-12);
        // Signed volume via the divergence theorem is positive for outward winding.
        let volume: f64 = (0..mesh.triangles.len())
            .map(|i| {
                let [a, b, c] = mesh.triangle(i);
                a.coords.dot(&b.coords.cross(&c.coords)) / 6.0
            })
            .sum();
        assert_relative_eq!(volume, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn cylinder_area_approaches_analytic() {
        let mesh = cylinder_mesh(0.5, 2.0, 256);
        let exact = std::f64::consts::TAU * 0.5 * 2.0 + 2.0 * std::f64::consts::PI * 0.25;
        assert_relative_eq!(mesh.area(), exact, max_relative = 1e-3);
    }

    #[test]
    fn closest_point_regions() {
        let a = Point3::origin();
        let b = Point3::new(1.0, 0.0, 0.0);
        let c = Point3::new(0.0, 1.0, 0.0);
        let inside = closest_point_on_triangle(&Point3::new(0.2, 0.2, 1.0), &a, &b, &c);
        assert_relative_eq!(inside, Point3::new(0.2, 0.2, 0.0));
        let vertex = closest_point_on_triangle(&Point3::new(-1.0, -1.0, 0.0), &a, &b, &c);
        assert_relative_eq!(vertex, a);
        let edge = closest_point_on_triangle(&Point3::new(1.0, 1.0, 0.0), &a, &b, &c);
        assert_relative_eq!(edge, Point3::new(0.5, 0.5, 0.0));
    }
}

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
//! Renderer-free visibility: a coarse depth buffer rasterized from the link
//! meshes (plus the sample points themselves) and a per-sample depth test.

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::geometry::ObjectGeometry;
use crate::camera::{project_camera_point, CameraIntrinsics, CameraPose};
use crate::urdf::{KinematicTree, LinkPoses};

pub const ZBUFFER_SIZE: usize = 240;
pub const DEFAULT_MIN_VISIBILITY: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkVisibility {
    pub link: String,
    pub fraction: f64,
    /// One flag per surface sample of the link.
    #[serde(skip)]
    pub visible: Vec<bool>,
}

struct DepthGrid {
    width: usize,
    height: usize,
    /// Pixels to grid cells.
    scale_u: f64,
    scale_v: f64,
    depth: Vec<f64>,
    /// Depth change per cell step of the surface that won each cell.
    slope: Vec<f64>,
}

impl DepthGrid {
    fn new(intr: &CameraIntrinsics<f64>, size: usize) -> Self {
        let width = size.max(1);
        let height = ((size as f64 * intr.height as f64 / intr.width as f64).round() as usize).max(1);
        Self {
            width,
            height,
            scale_u: width as f64 / intr.width as f64,
            scale_v: height as f64 / intr.height as f64,
            depth: vec![f64::INFINITY; width * height],
            slope: vec![0.0; width * height],
        }
    }

    fn cell(&self, u_px: f64, v_px: f64) -> Option<usize> {
        let gx = u_px * self.scale_u;
        let gy = v_px * self.scale_v;
        if !(gx >= 0.0 && gy >= 0.0) {
            return None;
        }
        let (i, j) = (gx as usize, gy as usize);
        (i < self.width && j < self.height).then_some(j * self.width + i)
    }

    fn splat_point(&mut self, u_px: f64, v_px: f64, depth: f64) {
        if let Some(c) = self.cell(u_px, v_px) {
            self.depth[c] = self.depth[c].min(depth);
        }
    }

    /// Vertices as (u_px, v_px, depth); depth interpolated as 1/z in screen space.
    fn rasterize(&mut self, tri: [(f64, f64, f64); 3]) {
        let g = tri.map(|(u, v, z)| (u * self.scale_u, v * self.scale_v, z));
        let edge = |a: (f64, f64, f64), b: (f64, f64, f64), p: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        let area = edge(g[0], g[1], (g[2].0, g[2].1));
        if area.abs() < 1e-12 {
            return;
        }
        let min_x = g.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor().max(0.0);
        let max_x = g.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).ceil().min(self.width as f64);
        let min_y = g.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor().max(0.0);
        let max_y = g.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil().min(self.height as f64);
        if min_x >= max_x || min_y >= max_y {
            return;
        }
        // 1/z is affine in screen space; these are its per-cell derivatives.
        let dl = |a: (f64, f64, f64), b: (f64, f64, f64)| (-(b.1 - a.1) / area, (b.0 - a.0) / area);
        let (d0, d1, d2) = (dl(g[1], g[2]), dl(g[2], g[0]), dl(g[0], g[1]));
        let dinv_dx = d0.0 / g[0].2 + d1.0 / g[1].2 + d2.0 / g[2].2;
        let dinv_dy = d0.1 / g[0].2 + d1.1 / g[1].2 + d2.1 / g[2].2;
        for j in min_y as usize..max_y as usize {
            for i in min_x as usize..max_x as usize {
                let p = (i as f64 + 0.5, j as f64 + 0.5);
                let l0 = edge(g[1], g[2], p) / area;
                let l1 = edge(g[2], g[0], p) / area;
                let l2 = edge(g[0], g[1], p) / area;
                if l0 < -1e-9 || l1 < -1e-9 || l2 < -1e-9 {
                    continue;
                }
                let inv = l0 / g[0].2 + l1 / g[1].2 + l2 / g[2].2;
                let c = j * self.width + i;
                let z = 1.0 / inv;
                if z < self.depth[c] {
                    self.depth[c] = z;
                    self.slope[c] = (dinv_dx.abs() + dinv_dy.abs()) * z * z;
                }
            }
        }
    }
}

/// Fraction of each link's samples that are in front of the camera, inside
/// the image and not hidden behind any other surface of the object.
pub fn compute_visibility(
    geometry: &ObjectGeometry,
    poses: &LinkPoses,
    intr: &CameraIntrinsics<f64>,
    camera: &CameraPose<f64>,
    grid_size: usize,
) -> Vec<LinkVisibility> {
    let mut grid = DepthGrid::new(intr, grid_size);
    let to_cam = |pose: &nalgebra::Isometry3<f64>, p: &Point3<f64>| camera.world_to_camera(&(pose * p));

    let mut projected = Vec::with_capacity(geometry.links.len());
    for lg in &geometry.links {
        let pose = poses[&lg.link];
        let verts: Vec<_> = lg
            .mesh
            .vertices
            .iter()
            .map(|v| project_camera_point(intr, &to_cam(&pose, v)))
            .collect();
        for t in &lg.mesh.triangles {
            let [a, b, c] = t.map(|i| verts[i as usize]);
            if a.in_front && b.in_front && c.in_front {
                grid.rasterize([(a.u_px, a.v_px, a.depth), (b.u_px, b.v_px, b.depth), (c.u_px, c.v_px, c.depth)]);
            }
        }
        let samples: Vec<_> = lg
            .samples
            .iter()
            .map(|p| project_camera_point(intr, &to_cam(&pose, p)))
            .collect();
        for s in samples.iter().filter(|s| s.in_front) {
            grid.splat_point(s.u_px, s.v_px, s.depth);
        }
        projected.push(samples);
    }

    geometry
        .links
        .iter()
        .zip(projected)
        .map(|(lg, samples)| {
            let visible: Vec<bool> = samples
                .iter()
                .map(|s| {
                    if !s.in_front || !intr.contains_pixel(s.u_px, s.v_px) {
                        return false;
                    }
                    let Some(c) = grid.cell(s.u_px, s.v_px) else {
                        return false;
                    };
                    // A sample may sit anywhere in its cell, so allow the winning
                    // surface's depth change across a cell, plus rounding.
                    let slack = 1.5 * grid.slope[c] + 2e-4 * s.depth + 1e-6;
                    s.depth <= grid.depth[c] + slack
                })
                .collect();
            let fraction = if visible.is_empty() {
                0.0
            } else {
                visible.iter().filter(|&&v| v).count() as f64 / visible.len() as f64
            };
            LinkVisibility {
                link: lg.link.clone(),
                fraction,
                visible,
            }
        })
        .collect()
}

/// Movable links whose visibility reaches `v_min`, in link declaration order.
pub fn visible_movable_links(
    tree: &KinematicTree,
    visibility: &[LinkVisibility],
    v_min: f64,
) -> Vec<(String, f64)> {
    tree.movable_links()
        .filter_map(|(link, _)| {
            let vis = visibility.iter().find(|v| v.link == link.name)?;
            (vis.fraction >= v_min).then(|| (link.name.clone(), vis.fraction))
        })
        .collect()
}

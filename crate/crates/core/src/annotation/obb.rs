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
//! Articulation-aligned 3D boxes and axis segments.

use nalgebra::{Isometry3, Point2, Point3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::rect::{min_area_rect, Rect2D};
use crate::scalar::Real;
use crate::urdf::Articulation;

/// Half extents below this (meters) are raised to it, so thin parts still
/// produce a proper box.
pub const MIN_HALF_EXTENT: f64 = 1e-4;

/// Sign pattern of the eight vertices over the (x, y, z) box axes.
pub const VERTEX_SIGNS: [[i8; 3]; 8] = [
    [-1, -1, -1],
    [1, -1, -1],
    [1, 1, -1],
    [-1, 1, -1],
    [-1, -1, 1],
    [1, -1, 1],
    [1, 1, 1],
    [-1, 1, 1],
];

/// Articulation axis as a finite segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSegment<T: Real> {
    pub p0: Point3<T>,
    pub p1: Point3<T>,
    pub kind: Articulation,
}

impl<T: Real> AxisSegment<T> {
    pub fn new(p0: Point3<T>, p1: Point3<T>, kind: Articulation) -> Result<Self, GeometryError> {
        if (p1 - p0).norm() <= T::default_epsilon() {
            return Err(GeometryError::Degenerate("axis endpoints coincide".into()));
        }
        Ok(Self { p0, p1, kind })
    }

    pub fn direction(&self) -> Unit<Vector3<T>> {
        Unit::new_normalize(self.p1 - self.p0)
    }

    pub fn midpoint(&self) -> Point3<T> {
        nalgebra::center(&self.p0, &self.p1)
    }

    pub fn half_length(&self) -> T {
        (self.p1 - self.p0).norm() * T::lit(0.5)
    }

    /// Orthogonal projection of `p` onto the infinite axis line.
    pub fn project_onto_line(&self, p: &Point3<T>) -> Point3<T> {
        let d = self.direction();
        self.p0 + d.into_inner() * (p - self.p0).dot(&d)
    }

    pub fn distance_to_line(&self, p: &Point3<T>) -> T {
        (p - self.project_onto_line(p)).norm()
    }

    pub fn transformed(&self, pose: &Isometry3<T>) -> Self {
        Self {
            p0: pose * self.p0,
            p1: pose * self.p1,
            kind: self.kind,
        }
    }
}

/// Box whose z axis follows the articulation axis and whose x axis follows the
/// long edge of the minimal footprint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox3D<T: Real> {
    pub center: Point3<T>,
    /// Right-handed orthonormal x, y, z axes.
    pub axes: [Vector3<T>; 3],
    pub half_extents: Vector3<T>,
}

impl<T: Real> OrientedBox3D<T> {
    pub fn vertices(&self) -> [Point3<T>; 8] {
        VERTEX_SIGNS.map(|signs| {
            let mut p = self.center;
            for (k, sign) in signs.iter().enumerate() {
                p += self.axes[k] * (self.half_extents[k] * T::lit(*sign as f64));
            }
            p
        })
    }

    /// Membership with every half extent grown by `inflate`.
    pub fn contains(&self, p: &Point3<T>, inflate: T) -> bool {
        let d = p - self.center;
        (0..3).all(|k| d.dot(&self.axes[k]).abs() <= self.half_extents[k] + inflate)
    }

    pub fn volume(&self) -> T {
        T::lit(8.0) * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    pub fn transformed(&self, pose: &Isometry3<T>) -> Self {
        Self {
            center: pose * self.center,
            axes: self.axes.map(|a| pose.rotation * a),
            half_extents: self.half_extents,
        }
    }

    /// Rebuilds a box from eight vertices in the canonical sign order.
    ///
    /// Edge vectors are averaged per axis and orthonormalized with the z axis
    /// kept first. Fails when any edge collapses.
    pub fn from_vertices(vertices: &[Point3<T>; 8]) -> Result<Self, GeometryError> {
        let quarter = T::lit(0.25);
        let center = Point3::from(
            vertices.iter().fold(Vector3::zeros(), |acc, v| acc + v.coords) * T::lit(0.125),
        );
        let edge = |pairs: [(usize, usize); 4]| {
            pairs
                .iter()
                .fold(Vector3::zeros(), |acc, &(lo, hi)| acc + (vertices[hi] - vertices[lo]))
                * quarter
        };
        let ex = edge([(0, 1), (3, 2), (4, 5), (7, 6)]);
        let ey = edge([(0, 3), (1, 2), (4, 7), (5, 6)]);
        let ez = edge([(0, 4), (1, 5), (2, 6), (3, 7)]);
        let tiny = T::lit(1e-12);
        let z = Unit::try_new(ez, tiny).ok_or_else(|| GeometryError::Degenerate("box has no z extent".into()))?;
        let x = Unit::try_new(ex - z.into_inner() * ex.dot(&z), tiny)
            .ok_or_else(|| GeometryError::Degenerate("box has no x extent".into()))?;
        let y = z.cross(&x);
        if ey.dot(&y).abs() <= tiny {
            return Err(GeometryError::Degenerate("box has no y extent".into()));
        }
        let half = T::lit(0.5);
        Ok(Self {
            center,
            axes: [x.into_inner(), y, z.into_inner()],
            half_extents: Vector3::new(
                ex.dot(&x).abs() * half,
                ey.dot(&y).abs() * half,
                ez.norm() * half,
            ),
        })
    }
}

/// Two unit vectors spanning the plane orthogonal to `axis`.
pub(crate) fn plane_basis<T: Real>(axis: &Unit<Vector3<T>>) -> (Vector3<T>, Vector3<T>) {
    let helper = if axis.x.abs() < T::lit(0.9) { Vector3::x() } else { Vector3::y() };
    let u = (helper - axis.into_inner() * helper.dot(axis)).normalize();
    let w = axis.cross(&u);
    (u, w)
}

/// Minimal footprint of the points projected along `axis`.
pub fn projected_footprint<T: Real>(points: &[Point3<T>], axis: &Unit<Vector3<T>>) -> Result<Rect2D<T>, GeometryError> {
    let (u, w) = plane_basis(axis);
    let flat: Vec<Point2<T>> = points.iter().map(|p| Point2::new(p.coords.dot(&u), p.coords.dot(&w))).collect();
    min_area_rect(&flat)
}

/// Fits the box around `center`: z along `axis`, x along the long edge of the
/// projected footprint, and each half extent the largest distance of any
/// point from `center` along that box axis.
pub fn compute_box_about<T: Real>(
    points: &[Point3<T>],
    axis: &Unit<Vector3<T>>,
    center: &Point3<T>,
) -> Result<OrientedBox3D<T>, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::Domain("cannot fit a box to zero points".into()));
    }
    let footprint = projected_footprint(points, axis)?;
    let (u, w) = plane_basis(axis);
    let (s, c) = footprint.angle.sin_cos();
    let x = u * c + w * s;
    let z = axis.into_inner();
    let y = z.cross(&x);
    let axes = [x, y, z];
    let floor = T::lit(MIN_HALF_EXTENT);
    let mut half_extents = Vector3::repeat(floor);
    for p in points {
        let d = p - center;
        for k in 0..3 {
            half_extents[k] = half_extents[k].max(d.dot(&axes[k]).abs());
        }
    }
    Ok(OrientedBox3D {
        center: *center,
        axes,
        half_extents,
    })
}

/// [`compute_box_about`] centered at the mean of the points.
pub fn compute_box<T: Real>(points: &[Point3<T>], axis: &AxisSegment<T>) -> Result<OrientedBox3D<T>, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::Domain("cannot fit a box to zero points".into()));
    }
    let n = T::from_usize(points.len()).unwrap_or_else(T::one);
    let center = Point3::from(points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n);
    compute_box_about(points, &axis.direction(), &center)
}

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
//! Rotate / Slide / Scroll end-effector trajectories from a triad.
//!
//! Waypoint 0 sits at the contact point. Slide translates along the axis,
//! Rotate swings the whole grip frame rigidly about the axis line, and
//! Scroll keeps the position and spins the grip about the axis.

use nalgebra::{Isometry3, Point3, Rotation3, Translation3, Unit, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{AxisSegment, OrientedBox3D, SemanticLabel};
use crate::error::{Error, GeometryError, Result};
use crate::scalar::Real;
use crate::skills::contains_phrase;
use crate::urdf::Articulation;

/// Link names (whole words) that call for Scroll instead of Rotate.
pub const SCROLL_LEXICON: [&str; 4] = ["cap", "bottle cap", "scroll button", "knob"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Rotate,
    Slide,
    Scroll,
}

impl PrimitiveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PrimitiveKind::Rotate => "rotate",
            PrimitiveKind::Slide => "slide",
            PrimitiveKind::Scroll => "scroll",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Direction::Forward => T::one(),
            Direction::Backward => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspPose<T: Real> {
    pub position: Point3<T>,
    pub orientation: UnitQuaternion<T>,
    pub score: Option<T>,
}

impl<T: Real> GraspPose<T> {
    pub fn new(position: Point3<T>, orientation: UnitQuaternion<T>) -> Self {
        Self {
            position,
            orientation,
            score: None,
        }
    }

    pub fn to_isometry(&self) -> Isometry3<T> {
        Isometry3::from_parts(Translation3::from(self.position.coords), self.orientation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T: Real> {
    pub waypoints: Vec<Isometry3<T>>,
    pub contact: Point3<T>,
    pub kind: PrimitiveKind,
    pub direction: Direction,
}

impl<T: Real> Trajectory<T> {
    pub fn positions(&self) -> Vec<Point3<T>> {
        self.waypoints.iter().map(|w| Point3::from(w.translation.vector)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanParams<T: Real> {
    pub arc_deg: T,
    pub slide_m: T,
    pub n_waypoints: usize,
}

impl<T: Real> Default for PlanParams<T> {
    fn default() -> Self {
        Self {
            arc_deg: T::lit(30.0),
            slide_m: T::lit(DEFAULT_MAX_SLIDE),
            n_waypoints: 16,
        }
    }
}

pub const DEFAULT_MAX_SLIDE: f64 = 0.1;

/// `min(cap, half the travel left on the tighter side of value)`.
pub fn slide_distance(value: f64, lower: f64, upper: f64, cap: f64) -> f64 {
    let remaining = (upper - value).min(value - lower).max(0.0);
    cap.min(0.5 * remaining)
}

/// Pure function of the label; the lexicon match is case-insensitive.
pub fn select_primitive(label: &SemanticLabel) -> PrimitiveKind {
    match label.joint_kind {
        Articulation::Prismatic => PrimitiveKind::Slide,
        Articulation::Revolute => {
            if SCROLL_LEXICON.iter().any(|w| contains_phrase(&label.link_name, w)) {
                PrimitiveKind::Scroll
            } else {
                PrimitiveKind::Rotate
            }
        }
    }
}

/// A surface point inside `bbox` to grasp.
///
/// Rotate and Slide pick uniformly (seeded); Scroll takes the point nearest
/// the axis line, first index on ties.
pub fn choose_contact(
    bbox: &OrientedBox3D<f64>,
    surface: &[Point3<f64>],
    kind: PrimitiveKind,
    axis: &AxisSegment<f64>,
    seed: u64,
) -> Result<Point3<f64>> {
    choose_contact_within(bbox, surface, kind, axis, seed, 1e-6)
}

/// `choose_contact` with the box grown by `inflate` (m), e.g. to absorb
/// the quantization of a box read back from text.
pub fn choose_contact_within(
    bbox: &OrientedBox3D<f64>,
    surface: &[Point3<f64>],
    kind: PrimitiveKind,
    axis: &AxisSegment<f64>,
    seed: u64,
    inflate: f64,
) -> Result<Point3<f64>> {
    let inside: Vec<&Point3<f64>> = surface.iter().filter(|p| bbox.contains(p, inflate)).collect();
    if inside.is_empty() {
        return Err(Error::Contact("no surface point inside the bounding box".into()));
    }
    let chosen = match kind {
        PrimitiveKind::Scroll => inside
            .iter()
            .min_by(|a, b| axis.distance_to_line(a).total_cmp(&axis.distance_to_line(b)))
            .expect("non-empty"),
        PrimitiveKind::Rotate | PrimitiveKind::Slide => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            &inside[rng.gen_range(0..inside.len())]
        }
    };
    Ok(**chosen)
}

/// Default grip orientation at `contact`: the approach (tool z) points
/// along the axis for Slide and Scroll, and towards the axis line for Rotate.
pub fn approach_orientation<T: Real>(kind: PrimitiveKind, contact: &Point3<T>, axis: &AxisSegment<T>) -> UnitQuaternion<T> {
    let dir = axis.direction().into_inner();
    let approach = match kind {
        PrimitiveKind::Rotate => {
            let inward = axis.project_onto_line(contact) - contact;
            if inward.norm() > T::lit(1e-9) {
                inward
            } else {
                -dir
            }
        }
        PrimitiveKind::Slide | PrimitiveKind::Scroll => -dir,
    };
    let z = approach.normalize();
    let helper = if z.x.abs() < T::lit(0.9) { Vector3::x() } else { Vector3::y() };
    let x = helper.cross(&z).normalize();
    let y = z.cross(&x);
    let rot = Rotation3::from_basis_unchecked(&[x, y, z]);
    UnitQuaternion::from_rotation_matrix(&rot)
}

pub fn plan_trajectory<T: Real>(
    kind: PrimitiveKind,
    contact: &Point3<T>,
    axis: &AxisSegment<T>,
    params: &PlanParams<T>,
    direction: Direction,
) -> Result<Trajectory<T>, GeometryError> {
    let grasp = GraspPose::new(*contact, approach_orientation(kind, contact, axis));
    plan_from_grasp(kind, &grasp, axis, params, direction)
}

/// Same as `plan_trajectory` with a caller-supplied grasp.
pub fn plan_from_grasp<T: Real>(
    kind: PrimitiveKind,
    grasp: &GraspPose<T>,
    axis: &AxisSegment<T>,
    params: &PlanParams<T>,
    direction: Direction,
) -> Result<Trajectory<T>, GeometryError> {
    let n = params.n_waypoints;
    if n < 2 {
        return Err(GeometryError::Domain(format!("need at least 2 waypoints, got {n}")));
    }
    let dir: Unit<Vector3<T>> = axis.direction();
    let contact = grasp.position;
    let sign = direction.sign::<T>();
    let start = grasp.to_isometry();
    let last = T::lit((n - 1) as f64);
    let arc = params.arc_deg * T::pi() / T::lit(180.0) * sign;

    if kind == PrimitiveKind::Rotate && axis.distance_to_line(&contact) < T::lit(1e-6) {
        return Err(GeometryError::Degenerate(
            "contact lies on the rotation axis; use Scroll".into(),
        ));
    }

    let waypoints = (0..n)
        .map(|i| {
            let t = T::lit(i as f64) / last;
            match kind {
                PrimitiveKind::Slide => {
                    Translation3::from(dir.into_inner() * (params.slide_m * sign * t)) * start
                }
                PrimitiveKind::Rotate => {
                    let pivot = axis.project_onto_line(&contact);
                    let spin = UnitQuaternion::from_axis_angle(&dir, arc * t);
                    rotate_about_point(&start, &pivot, &spin)
                }
                PrimitiveKind::Scroll => {
                    let spin = UnitQuaternion::from_axis_angle(&dir, arc * t);
                    Isometry3::from_parts(start.translation, spin * start.rotation)
                }
            }
        })
        .collect();

    Ok(Trajectory {
        waypoints,
        contact,
        kind,
        direction,
    })
}

fn rotate_about_point<T: Real>(pose: &Isometry3<T>, pivot: &Point3<T>, spin: &UnitQuaternion<T>) -> Isometry3<T> {
    let to_pivot = Translation3::from(pivot.coords);
    let from_pivot = Translation3::from(-pivot.coords);
    to_pivot * Isometry3::from_parts(Translation3::identity(), *spin) * from_pivot * pose
}

/// JSON export for robot executors: 4x4 row-major poses plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryExport {
    pub kind: PrimitiveKind,
    pub direction: Direction,
    pub contact: [f64; 3],
    pub waypoints: Vec<[[f64; 4]; 4]>,
}

impl From<&Trajectory<f64>> for TrajectoryExport {
    fn from(t: &Trajectory<f64>) -> Self {
        TrajectoryExport {
            kind: t.kind,
            direction: t.direction,
            contact: [t.contact.x, t.contact.y, t.contact.z],
            waypoints: t
                .waypoints
                .iter()
                .map(|w| {
                    let m = w.to_homogeneous();
                    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
                })
                .collect(),
        }
    }
}

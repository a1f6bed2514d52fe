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
//! Quasi-static one-joint simulator with a suction-style point attachment.
//!
//! Each waypoint moves the grasped joint to the admissible value that brings
//! the attached anchor closest to the waypoint. If the anchor still ends up
//! farther than `detach_eps` from the waypoint, the grip is lost.

mod eval;

use nalgebra::{Isometry3, Point3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub use eval::{
    eval_prompt, evaluate, write_episodes_csv, CategoryStats, EpisodeRecord, EvalReport, EVAL_PROMPT_PREFIX,
};

use crate::annotation::ArticulatedObject;
use crate::error::{Error, Result};
use crate::primitives::{Direction, PlanParams, Trajectory, DEFAULT_MAX_SLIDE};
use crate::scalar::Real;
use crate::urdf::{forward_kinematics, joint_motion, JointConfig, JointKind, JointLimits, LinkPoses, TriMesh};

/// Below this anchor-to-axis distance (m) a revolute step follows the grip's
/// twist about the axis instead of the anchor's swing. Covers knobs and caps
/// grasped anywhere on their face.
pub const TWIST_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Success needs joint displacement strictly above this (native units).
    pub sigma: f64,
    /// Anchor-to-waypoint distance (m) at which the grip is lost.
    pub detach_eps: f64,
    pub attempts: usize,
    /// Max contact distance (m) from the target link's surface.
    pub attach_tol: f64,
    pub plan: PlanParams<f64>,
    /// Upper bound on slide length (m).
    pub max_slide: f64,
    /// Camera draws per episode before giving up on finding a visible part.
    pub view_retries: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            sigma: 0.01,
            detach_eps: 0.02,
            attempts: 2,
            attach_tol: 0.005,
            plan: PlanParams::default(),
            max_slide: DEFAULT_MAX_SLIDE,
            view_retries: 8,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("sigma", self.sigma)?;
        positive("detach_eps", self.detach_eps)?;
        positive("attach_tol", self.attach_tol)?;
        positive("max_slide", self.max_slide)?;
        if self.attempts == 0 || self.plan.n_waypoints < 2 {
            return Err(Error::Config("need at least one attempt and two waypoints".into()));
        }
        Ok(())
    }
}

/// `d` exceeds `sigma`; equality is a failure.
pub fn is_success(d: f64, sigma: f64) -> bool {
    d > sigma
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    NoContact,
    Detached,
    WrongDirection,
    Degenerate,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::NoContact => "no_contact",
            FailureKind::Detached => "detached",
            FailureKind::WrongDirection => "wrong_direction",
            FailureKind::Degenerate => "degenerate",
        }
    }
}

/// Closed-form prismatic update: projection of the pull onto the slide axis.
pub fn prismatic_delta<T: Real>(anchor: &Point3<T>, waypoint: &Point3<T>, dir: &Unit<Vector3<T>>) -> T {
    (waypoint - anchor).dot(dir)
}

/// Closed-form revolute update: signed angle from the anchor to the
/// waypoint, both projected onto the plane normal to the axis.
/// `None` when either projection is (numerically) on the axis.
pub fn revolute_delta<T: Real>(
    anchor: &Point3<T>,
    waypoint: &Point3<T>,
    axis_point: &Point3<T>,
    dir: &Unit<Vector3<T>>,
) -> Option<T> {
    let flat = |p: &Point3<T>| {
        let v = p - axis_point;
        v - dir.into_inner() * v.dot(dir)
    };
    let (a, w) = (flat(anchor), flat(waypoint));
    let tiny = T::lit(1e-12);
    if a.norm() < tiny || w.norm() < tiny {
        return None;
    }
    Some(dir.dot(&a.cross(&w)).atan2(a.dot(&w)))
}

/// Twist angle of `rotation` about `dir` (swing-twist split), in `(-pi, pi]`.
pub fn twist_angle<T: Real>(rotation: &UnitQuaternion<T>, dir: &Unit<Vector3<T>>) -> T {
    let q = rotation.quaternion();
    let along = q.imag().dot(dir);
    let mut angle = T::lit(2.0) * along.atan2(q.w);
    if angle > T::pi() {
        angle -= T::two_pi();
    } else if angle <= -T::pi() {
        angle += T::two_pi();
    }
    angle
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    if w <= -std::f64::consts::PI {
        w + std::f64::consts::TAU
    } else {
        w
    }
}

/// One movable joint with everything above it frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    pub link: String,
    pub joint: String,
    pub kind: JointKind,
    /// World pose of the joint frame at zero joint value.
    pub frame: Isometry3<f64>,
    pub axis_local: Unit<Vector3<f64>>,
    pub limits: Option<JointLimits>,
    motion_spec: crate::urdf::JointSpec,
}

impl JointModel {
    pub fn new(object: &ArticulatedObject, poses: &LinkPoses, link: &str) -> Result<Self> {
        let tree = &object.tree;
        let joint = tree
            .parent_joint(link)
            .filter(|j| j.kind != JointKind::Fixed)
            .ok_or_else(|| Error::NotMovable(link.to_owned()))?;
        let parent = poses
            .get(&joint.parent_link)
            .ok_or_else(|| Error::Config(format!("no pose for link `{}`", joint.parent_link)))?;
        Ok(Self {
            link: link.to_owned(),
            joint: joint.name.clone(),
            kind: joint.kind,
            frame: parent * joint.origin,
            axis_local: joint.axis_local,
            limits: joint.limits,
            motion_spec: joint.clone(),
        })
    }

    pub fn link_pose(&self, q: f64) -> Isometry3<f64> {
        self.frame * joint_motion(&self.motion_spec, q)
    }

    pub fn axis_world(&self) -> Unit<Vector3<f64>> {
        self.frame.rotation * self.axis_local
    }

    pub fn axis_point(&self) -> Point3<f64> {
        Point3::from(self.frame.translation.vector)
    }

    /// Admissible value closest (in motion) to the unconstrained `target`.
    pub fn constrain(&self, target: f64, current: f64) -> f64 {
        match (self.kind, self.limits) {
            (JointKind::Continuous, _) | (_, None) => target,
            (JointKind::Prismatic, Some(l)) => l.clamp(target),
            (_, Some(l)) => {
                // Any turn-equivalent of the target inside the limits wins.
                let inside = (-2..=2)
                    .map(|k| target + k as f64 * std::f64::consts::TAU)
                    .filter(|t| *t >= l.lower && *t <= l.upper)
                    .min_by(|a, b| (a - current).abs().total_cmp(&(b - current).abs()));
                inside.unwrap_or_else(|| {
                    let gap = |bound: f64| wrap_angle(target - bound).abs();
                    if gap(l.lower) <= gap(l.upper) {
                        l.lower
                    } else {
                        l.upper
                    }
                })
            }
        }
    }
}

/// The grasp: a point and grip orientation frozen in the link frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentState {
    pub link: String,
    pub anchor_local: Point3<f64>,
    pub grip_local: UnitQuaternion<f64>,
    pub q: f64,
}

impl AttachmentState {
    pub fn anchor_world(&self, model: &JointModel) -> Point3<f64> {
        model.link_pose(self.q) * self.anchor_local
    }
}

/// Binds `contact` to the link if it lies within `tol` of the link mesh.
pub fn attach(
    model: &JointModel,
    mesh_local: &TriMesh,
    q: f64,
    contact: &Point3<f64>,
    grip: &UnitQuaternion<f64>,
    tol: f64,
) -> std::result::Result<AttachmentState, FailureKind> {
    let pose = model.link_pose(q);
    let anchor_local = pose.inverse_transform_point(contact);
    if mesh_local.distance_to(&anchor_local) > tol {
        return Err(FailureKind::NoContact);
    }
    Ok(AttachmentState {
        link: model.link.clone(),
        anchor_local,
        grip_local: pose.rotation.inverse() * grip,
        q,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub q: f64,
    pub residual: f64,
    pub detached: bool,
}

/// Moves the joint towards `waypoint`. On detachment `q` is left unchanged.
pub fn step(model: &JointModel, state: &AttachmentState, waypoint: &Isometry3<f64>, cfg: &EvalConfig) -> StepOutcome {
    let target = Point3::from(waypoint.translation.vector);
    let anchor = state.anchor_world(model);
    let dir = model.axis_world();
    let delta = match model.kind {
        JointKind::Prismatic => prismatic_delta(&anchor, &target, &dir),
        JointKind::Fixed => 0.0,
        JointKind::Revolute | JointKind::Continuous => {
            let radius = {
                let v = anchor - model.axis_point();
                (v - dir.into_inner() * v.dot(&dir)).norm()
            };
            let swing = revolute_delta(&anchor, &target, &model.axis_point(), &dir);
            match swing {
                Some(d) if radius >= TWIST_RADIUS => d,
                _ => {
                    let grip_world = model.link_pose(state.q).rotation * state.grip_local;
                    twist_angle(&(waypoint.rotation * grip_world.inverse()), &dir)
                }
            }
        }
    };
    let q_new = model.constrain(state.q + delta, state.q);
    let residual = (model.link_pose(q_new) * state.anchor_local - target).norm();
    if residual > cfg.detach_eps {
        StepOutcome {
            q: state.q,
            residual,
            detached: true,
        }
    } else {
        StepOutcome {
            q: q_new,
            residual,
            detached: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptResult {
    pub direction: Direction,
    pub d: f64,
    pub steps: usize,
    pub detached: bool,
    pub failure: Option<FailureKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub d: f64,
    pub success: bool,
    pub attempt_results: Vec<AttemptResult>,
    pub failure: Option<FailureKind>,
}

impl EpisodeResult {
    pub fn failed(kind: FailureKind) -> Self {
        Self {
            d: 0.0,
            success: false,
            attempt_results: Vec::new(),
            failure: Some(kind),
        }
    }
}

/// An object posed at a base configuration; only the targeted joint moves.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    pub object: &'a ArticulatedObject,
    pub config: JointConfig,
    poses: LinkPoses,
}

impl<'a> Simulator<'a> {
    pub fn new(object: &'a ArticulatedObject, config: JointConfig) -> Result<Self> {
        let poses = forward_kinematics(&object.tree, &config)?;
        Ok(Self { object, config, poses })
    }

    pub fn poses(&self) -> &LinkPoses {
        &self.poses
    }

    pub fn joint_model(&self, link: &str) -> Result<JointModel> {
        JointModel::new(self.object, &self.poses, link)
    }

    pub fn initial_value(&self, model: &JointModel) -> f64 {
        self.config.get(&model.joint).unwrap_or_default()
    }

    /// Runs up to `cfg.attempts` trajectories, each from the initial value.
    pub fn run_episode(&self, link: &str, trajectories: &[Trajectory<f64>], cfg: &EvalConfig) -> Result<EpisodeResult> {
        if trajectories.is_empty() {
            return Ok(EpisodeResult::failed(FailureKind::Degenerate));
        }
        let model = self.joint_model(link)?;
        let mesh = &self
            .object
            .geometry
            .link(link)
            .ok_or_else(|| Error::NotMovable(format!("{link} has no geometry")))?
            .mesh;
        let q_init = self.initial_value(&model);

        let attempts: Vec<AttemptResult> = trajectories
            .iter()
            .take(cfg.attempts)
            .map(|traj| run_attempt(&model, mesh, q_init, traj, cfg))
            .collect();
        let d = attempts.iter().map(|a| a.d).fold(0.0, f64::max);
        let success = is_success(d, cfg.sigma);
        let failure = (!success).then(|| {
            if attempts.iter().all(|a| a.failure == Some(FailureKind::NoContact)) {
                FailureKind::NoContact
            } else if attempts.iter().any(|a| a.detached) {
                FailureKind::Detached
            } else {
                FailureKind::WrongDirection
            }
        });
        Ok(EpisodeResult {
            d,
            success,
            attempt_results: attempts,
            failure,
        })
    }
}

fn run_attempt(model: &JointModel, mesh: &TriMesh, q_init: f64, traj: &Trajectory<f64>, cfg: &EvalConfig) -> AttemptResult {
    let Some(first) = traj.waypoints.first() else {
        return AttemptResult {
            direction: traj.direction,
            d: 0.0,
            steps: 0,
            detached: false,
            failure: Some(FailureKind::Degenerate),
        };
    };
    let mut state = match attach(model, mesh, q_init, &traj.contact, &first.rotation, cfg.attach_tol) {
        Ok(s) => s,
        Err(kind) => {
            return AttemptResult {
                direction: traj.direction,
                d: 0.0,
                steps: 0,
                detached: false,
                failure: Some(kind),
            }
        }
    };
    let mut steps = 0;
    let mut detached = false;
    for waypoint in &traj.waypoints[1..] {
        let out = step(model, &state, waypoint, cfg);
        if out.detached {
            detached = true;
            break;
        }
        state.q = out.q;
        steps += 1;
    }
    let d = (state.q - q_init).abs();
    AttemptResult {
        direction: traj.direction,
        d,
        steps,
        detached,
        failure: if is_success(d, cfg.sigma) {
            None
        } else if detached {
            Some(FailureKind::Detached)
        } else {
            Some(FailureKind::WrongDirection)
        },
    }
}

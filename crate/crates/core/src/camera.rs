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
//! Pinhole camera model and the normalized image/depth coordinates used by
//! the triad text format.
//!
//! Conventions: right-handed camera frame, +z into the scene, +u right and
//! +v down in the image. A [`CameraPose`] maps world points into this frame.

use nalgebra::{Isometry3, Matrix3, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::scalar::Real;

/// Points at or closer than this depth (meters) count as behind the camera.
pub const BEHIND_CAMERA_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics<T: Real> {
    pub width: u32,
    pub height: u32,
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
}

impl<T: Real> CameraIntrinsics<T> {
    pub fn new(width: u32, height: u32, fx: T, fy: T, cx: T, cy: T) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::Domain("image size must be positive".into()));
        }
        if fx <= T::zero() || fy <= T::zero() {
            return Err(GeometryError::Domain("focal lengths must be positive".into()));
        }
        Ok(Self { width, height, fx, fy, cx, cy })
    }

    /// 960x960 image, 1000 px focal length, centered principal point.
    pub fn simulation_default() -> Self {
        Self {
            width: 960,
            height: 960,
            fx: T::lit(1000.0),
            fy: T::lit(1000.0),
            cx: T::lit(480.0),
            cy: T::lit(480.0),
        }
    }

    /// Same camera at a different resolution (all pixel quantities scaled).
    pub fn scaled(&self, factor: T) -> Self {
        let scale = |n: u32| (T::from_u32(n).unwrap_or_else(T::zero) * factor).round().to_u32().unwrap_or(0);
        Self {
            width: scale(self.width),
            height: scale(self.height),
            fx: self.fx * factor,
            fy: self.fy * factor,
            cx: self.cx * factor,
            cy: self.cy * factor,
        }
    }

    pub fn contains_pixel(&self, u_px: T, v_px: T) -> bool {
        let w = T::from_u32(self.width).unwrap_or_else(T::zero);
        let h = T::from_u32(self.height).unwrap_or_else(T::zero);
        u_px >= T::zero() && v_px >= T::zero() && u_px <= w && v_px <= h
    }
}

impl Default for CameraIntrinsics<f64> {
    fn default() -> Self {
        Self::simulation_default()
    }
}

/// World-to-camera rigid transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose<T: Real> {
    pub rotation: Rotation3<T>,
    pub translation: Vector3<T>,
}

impl<T: Real> CameraPose<T> {
    /// Checks that `rotation` is orthonormal with determinant +1.
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self, GeometryError> {
        let tol = orthonormal_tolerance::<T>();
        let gram = rotation.transpose() * rotation - Matrix3::identity();
        if gram.abs().max() > tol || (rotation.determinant() - T::one()).abs() > tol {
            return Err(GeometryError::Domain("camera rotation is not a proper rotation".into()));
        }
        Ok(Self {
            rotation: Rotation3::from_matrix_unchecked(rotation),
            translation,
        })
    }

    pub fn from_isometry(world_to_camera: &Isometry3<T>) -> Self {
        Self {
            rotation: world_to_camera.rotation.to_rotation_matrix(),
            translation: world_to_camera.translation.vector,
        }
    }

    pub fn to_isometry(&self) -> Isometry3<T> {
        Isometry3::from_parts(
            Translation3::from(self.translation),
            UnitQuaternion::from_rotation_matrix(&self.rotation),
        )
    }

    pub fn world_to_camera(&self, p: &Point3<T>) -> Point3<T> {
        self.rotation * p + self.translation
    }

    pub fn camera_to_world(&self, p: &Point3<T>) -> Point3<T> {
        self.rotation.inverse() * (p - self.translation)
    }

    /// Camera center in world coordinates.
    pub fn eye(&self) -> Point3<T> {
        self.camera_to_world(&Point3::origin())
    }

    /// Row-major 4x4 world-to-camera matrix.
    pub fn matrix_row_major(&self) -> [[T; 4]; 4] {
        let r = self.rotation.matrix();
        let t = &self.translation;
        let mut out = [[T::zero(); 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = r[(i, j)];
            }
            out[i][3] = t[i];
        }
        out[3][3] = T::one();
        out
    }
}

fn orthonormal_tolerance<T: Real>() -> T {
    T::lit(1e-9).max(T::default_epsilon() * T::lit(64.0))
}

/// Pose of a camera at `eye` looking at `target`, with `up` pointing roughly
/// towards image top.
pub fn look_at<T: Real>(eye: &Point3<T>, target: &Point3<T>, up: &Vector3<T>) -> Result<CameraPose<T>, GeometryError> {
    let forward = target - eye;
    let distance = forward.norm();
    if distance <= T::default_epsilon() {
        return Err(GeometryError::Degenerate("eye and target coincide".into()));
    }
    let z = forward / distance;
    let right = z.cross(up);
    let right_norm = right.norm();
    if right_norm <= T::lit(1e-9) * up.norm().max(T::one()) {
        return Err(GeometryError::Degenerate("up vector is parallel to the view direction".into()));
    }
    let x = right / right_norm;
    let y = z.cross(&x);
    let rotation = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    let rotation = Rotation3::from_matrix_unchecked(rotation);
    let translation = -(rotation * eye.coords);
    Ok(CameraPose { rotation, translation })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint<T: Real> {
    pub u_px: T,
    pub v_px: T,
    /// Camera-frame z, meters.
    pub depth: T,
    pub in_front: bool,
}

pub fn project_camera_point<T: Real>(intr: &CameraIntrinsics<T>, p_cam: &Point3<T>) -> ProjectedPoint<T> {
    let depth = p_cam.z;
    let in_front = depth > T::lit(BEHIND_CAMERA_EPS);
    let (u_px, v_px) = if in_front {
        (intr.fx * p_cam.x / depth + intr.cx, intr.fy * p_cam.y / depth + intr.cy)
    } else {
        (T::zero(), T::zero())
    };
    ProjectedPoint { u_px, v_px, depth, in_front }
}

pub fn project_points<T: Real>(
    intr: &CameraIntrinsics<T>,
    pose: &CameraPose<T>,
    pts_world: &[Point3<T>],
) -> Vec<ProjectedPoint<T>> {
    pts_world
        .iter()
        .map(|p| project_camera_point(intr, &pose.world_to_camera(p)))
        .collect()
}

/// Camera-frame depth interval used to normalize z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthRange<T: Real> {
    pub z_min: T,
    pub z_max: T,
}

impl<T: Real> DepthRange<T> {
    // Negated comparisons so NaN is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(z_min: T, z_max: T) -> Result<Self, GeometryError> {
        if !(z_min > T::zero()) {
            return Err(GeometryError::Domain("z_min must be positive".into()));
        }
        if !(z_max > z_min) {
            return Err(GeometryError::Degenerate("depth range is empty (z_max <= z_min)".into()));
        }
        Ok(Self { z_min, z_max })
    }

    /// Tightest range around the given depths.
    pub fn from_depths(depths: impl IntoIterator<Item = T>) -> Result<Self, GeometryError> {
        let mut lo = T::max_value().unwrap_or_else(T::one);
        let mut hi = T::min_value().unwrap_or_else(T::zero);
        for d in depths {
            lo = lo.min(d);
            hi = hi.max(d);
        }
        Self::new(lo, hi)
    }

    pub fn span(&self) -> T {
        self.z_max - self.z_min
    }
}

/// Image position divided by image size, depth mapped onto the range; all in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPoint3<T: Real> {
    pub u: T,
    pub v: T,
    pub z: T,
}

impl<T: Real> NormalizedPoint3<T> {
    pub fn new(u: T, v: T, z: T) -> Self {
        Self { u, v, z }
    }

    pub fn clamped(self) -> Self {
        let c = |x: T| x.max(T::zero()).min(T::one());
        Self::new(c(self.u), c(self.v), c(self.z))
    }

    pub fn to_array(self) -> [T; 3] {
        [self.u, self.v, self.z]
    }

    pub fn from_array([u, v, z]: [T; 3]) -> Self {
        Self { u, v, z }
    }
}

pub fn normalize_point<T: Real>(
    intr: &CameraIntrinsics<T>,
    range: &DepthRange<T>,
    u_px: T,
    v_px: T,
    depth_m: T,
) -> NormalizedPoint3<T> {
    let w = T::from_u32(intr.width).unwrap_or_else(T::one);
    let h = T::from_u32(intr.height).unwrap_or_else(T::one);
    NormalizedPoint3::new(u_px / w, v_px / h, (depth_m - range.z_min) / range.span()).clamped()
}

pub fn denormalize_depth<T: Real>(range: &DepthRange<T>, z_norm: T) -> Result<T, GeometryError> {
    if !(z_norm >= T::zero() && z_norm <= T::one()) {
        return Err(GeometryError::Domain(format!(
            "normalized depth {} outside [0, 1]",
            z_norm.to_f64_lossy()
        )));
    }
    Ok(range.z_min + z_norm * range.span())
}

/// Inverse of projection + normalization: a normalized point back to world space.
pub fn unproject_normalized<T: Real>(
    intr: &CameraIntrinsics<T>,
    pose: &CameraPose<T>,
    range: &DepthRange<T>,
    point: &NormalizedPoint3<T>,
) -> Result<Point3<T>, GeometryError> {
    let depth = denormalize_depth(range, point.z)?;
    let w = T::from_u32(intr.width).unwrap_or_else(T::one);
    let h = T::from_u32(intr.height).unwrap_or_else(T::one);
    let u_px = point.u * w;
    let v_px = point.v * h;
    let p_cam = Point3::new((u_px - intr.cx) * depth / intr.fx, (v_px - intr.cy) * depth / intr.fy, depth);
    Ok(pose.camera_to_world(&p_cam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity_pose() -> CameraPose<f64> {
        CameraPose::new(Matrix3::identity(), Vector3::zeros()).unwrap()
    }

    #[test]
    fn on_axis_look_at_hits_principal_point() {
        let pose = look_at(&Point3::new(0.0, 0.0, -2.0), &Point3::origin(), &Vector3::y()).unwrap();
        let intr = CameraIntrinsics::simulation_default();
        let p = project_points(&intr, &pose, &[Point3::origin()])[0];
        assert_relative_eq!(p.u_px, 480.0, epsilon = 1e-12);
        assert_relative_eq!(p.v_px, 480.0, epsilon = 1e-12);
        assert_relative_eq!(p.depth, 2.0, epsilon = 1e-12);
        // World up lands in the upper half of the image.
        let above = project_points(&intr, &pose, &[Point3::new(0.0, 0.1, 0.0)])[0];
        assert!(above.v_px < 480.0);
    }

    #[test]
    fn look_at_rejects_degenerate_inputs() {
        let eye = Point3::new(1.0, 2.0, 3.0);
        assert!(matches!(look_at(&eye, &eye, &Vector3::z()), Err(GeometryError::Degenerate(_))));
        assert!(matches!(
            look_at(&Point3::new(0.0, 0.0, 2.0), &Point3::origin(), &Vector3::z()),
            Err(GeometryError::Degenerate(_))
        ));
    }

    #[test]
    fn look_at_is_orthonormal_on_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let dir: Vector3<f64> = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if dir.norm() < 1e-3 || dir.normalize().z.abs() > 0.999 {
                continue;
            }
            let eye = Point3::from(dir.normalize() * 2.0);
            let pose = look_at(&eye, &Point3::origin(), &Vector3::z()).unwrap();
            let r: &Matrix3<f64> = pose.rotation.matrix();
            let gram = r.transpose() * r - Matrix3::identity();
            assert!(gram.abs().max() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
            assert_relative_eq!(pose.eye(), eye, epsilon = 1e-12);
        }
    }

    #[test]
    fn pinhole_examples() {
        let intr = CameraIntrinsics::simulation_default();
        let pose = identity_pose();
        let pts = [Point3::new(0.0, 0.0, 1.0), Point3::new(0.48, 0.0, 1.0), Point3::new(0.0, 0.0, -1.0)];
        let proj = project_points(&intr, &pose, &pts);
        assert_eq!((proj[0].u_px, proj[0].v_px, proj[0].depth), (480.0, 480.0, 1.0));
        assert_relative_eq!(proj[1].u_px, 960.0, epsilon = 1e-9);
        assert!(proj[0].in_front && proj[1].in_front);
        assert!(!proj[2].in_front);
    }

    #[test]
    fn normalization_examples() {
        let intr = CameraIntrinsics::simulation_default();
        let range = DepthRange::new(0.5, 1.5).unwrap();
        assert_relative_eq!(normalize_point(&intr, &range, 0.0, 0.0, 1.0).z, 0.5);
        assert_eq!(normalize_point(&intr, &range, 0.0, 0.0, 0.5).z, 0.0);
        assert_eq!(normalize_point(&intr, &range, 0.0, 0.0, 1.5).z, 1.0);
        assert_eq!(normalize_point(&intr, &range, 960.0, 0.0, 1.0).u, 1.0);
        // Off-image and out-of-range values clamp.
        let off = normalize_point(&intr, &range, -30.0, 2000.0, 3.0);
        assert_eq!((off.u, off.v, off.z), (0.0, 1.0, 1.0));
        assert!(matches!(DepthRange::new(1.0, 1.0), Err(GeometryError::Degenerate(_))));
        assert!(DepthRange::new(0.0, 1.0).is_err());
    }

    #[test]
    fn denormalize_examples() {
        let range = DepthRange::new(0.5, 1.5).unwrap();
        assert_relative_eq!(denormalize_depth(&range, 0.5).unwrap(), 1.0);
        assert_eq!(denormalize_depth(&range, 1.0).unwrap(), 1.5);
        assert!(matches!(denormalize_depth(&range, 1.2), Err(GeometryError::Domain(_))));
        assert!(denormalize_depth(&range, -0.01).is_err());
    }

    #[test]
    fn depth_round_trip() {
        let intr = CameraIntrinsics::simulation_default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let z_min: f64 = rng.gen_range(0.1..3.0);
            let range = DepthRange::new(z_min, z_min + rng.gen_range(0.01..4.0)).unwrap();
            let depth: f64 = rng.gen_range(range.z_min..=range.z_max);
            let z = normalize_point(&intr, &range, 0.0, 0.0, depth).z;
            assert!((denormalize_depth(&range, z).unwrap() - depth).abs() <= 1e-12);
        }
    }

    #[test]
    fn normalization_invariant_under_resolution_scaling() {
        let intr = CameraIntrinsics::<f64>::simulation_default();
        let doubled = intr.scaled(2.0);
        let range = DepthRange::new(0.5, 3.0).unwrap();
        let pose = look_at(&Point3::new(1.0, -2.0, 0.7), &Point3::origin(), &Vector3::z()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = Point3::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
            let a = project_points(&intr, &pose, &[p])[0];
            let b = project_points(&doubled, &pose, &[p])[0];
            let na = normalize_point(&intr, &range, a.u_px, a.v_px, a.depth);
            let nb = normalize_point(&doubled, &range, b.u_px, b.v_px, b.depth);
            assert!((na.u - nb.u).abs() <= 1e-12 && (na.v - nb.v).abs() <= 1e-12);
        }
    }

    #[test]
    fn unproject_inverts_projection() {
        let intr = CameraIntrinsics::simulation_default();
        let pose = look_at(&Point3::new(2.0, 1.0, 1.0), &Point3::origin(), &Vector3::z()).unwrap();
        let range = DepthRange::new(1.0, 4.0).unwrap();
        let p = Point3::new(0.1, -0.2, 0.05);
        let q = project_points(&intr, &pose, &[p])[0];
        let n = normalize_point(&intr, &range, q.u_px, q.v_px, q.depth);
        assert_relative_eq!(unproject_normalized(&intr, &pose, &range, &n).unwrap(), p, epsilon = 1e-12);
    }

    #[test]
    fn runs_in_single_precision() {
        let pose = look_at(&Point3::new(0.0f32, 0.0, -2.0), &Point3::origin(), &Vector3::y()).unwrap();
        let intr = CameraIntrinsics::<f32>::simulation_default();
        let p = project_points(&intr, &pose, &[Point3::origin()])[0];
        assert!((p.u_px - 480.0).abs() < 1e-4);
    }
}

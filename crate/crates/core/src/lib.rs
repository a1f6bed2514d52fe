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
//! Articulated-object annotation, instruction data and primitive-based
//! manipulation evaluation.

pub mod annotation;
pub mod camera;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod model_io;
pub mod primitives;
pub mod rect;
pub mod scalar;
pub mod seeds;
pub mod sim;
pub mod skills;
pub mod urdf;

pub use error::{Error, GeometryError, Result};
pub use scalar::Real;

pub type CameraIntrinsics = camera::CameraIntrinsics<f64>;
pub type CameraPose = camera::CameraPose<f64>;
pub type DepthRange = camera::DepthRange<f64>;
pub type NormalizedPoint3 = camera::NormalizedPoint3<f64>;
pub type Rect2D = rect::Rect2D<f64>;
pub type OrientedBox3D = annotation::OrientedBox3D<f64>;
pub type AxisSegment = annotation::AxisSegment<f64>;

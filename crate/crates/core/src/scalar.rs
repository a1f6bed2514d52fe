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
//! Scalar abstraction shared by the geometry kernels.

use nalgebra as na;

/// Floating point types the geometry kernels can run on (`f32`, `f64`).
pub trait Real:
    na::RealField + Copy + num_traits::FromPrimitive + num_traits::ToPrimitive + Default
{
    /// Lossy conversion from an `f64` literal.
    fn lit(value: f64) -> Self {
        na::convert(value)
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

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
//! Annotation geometry against the analytic fixture sidecars.

use a3kit::annotation::fit_link;
use a3kit::fixtures::{fixture_object, load_fixture, FIXTURE_NAMES};
use a3kit::urdf::forward_kinematics;
use nalgebra::{Point3, Vector3};

const TOL: f64 = 1e-3;

fn v(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

/// Largest distance of `b0`, `b1` from the line through `a0`, `a1`, and
/// the angle between the two directions.
fn line_gap(a0: Point3<f64>, a1: Point3<f64>, b0: Point3<f64>, b1: Point3<f64>) -> (f64, f64) {
    let da = (a1 - a0).normalize();
    let db = (b1 - b0).normalize();
    let off_line = |p: Point3<f64>| {
        let off = p - a0;
        (off - da * off.dot(&da)).norm()
    };
    (off_line(b0).max(off_line(b1)), da.dot(&db).clamp(-1.0, 1.0).acos())
}

#[test]
fn fitted_geometry_matches_sidecars_at_canonical_configurations() {
    for name in FIXTURE_NAMES {
        let (_, fixture) = load_fixture(name).unwrap();
        let object = fixture_object(name, 0).unwrap();
        for config in &fixture.expected.configurations {
            let poses = forward_kinematics(&object.tree, &config.joints).unwrap();
            for want in &config.triads {
                let ctx = format!("{name} / {} @ {}", want.link, config.fraction);
                let (bbox, axis) = fit_link(&object, &poses, &want.link).unwrap();

                assert!((bbox.center.coords - v(want.center)).norm() < TOL, "{ctx}: center {:?}", bbox.center);
                let z_angle = bbox.axes[2].dot(&v(want.axis_z)).clamp(-1.0, 1.0).acos();
                assert!(z_angle < TOL, "{ctx}: z axis off by {z_angle}");
                if let Some(x) = want.axis_x {
                    let x_angle = bbox.axes[0].dot(&v(x)).abs().clamp(-1.0, 1.0).acos();
                    assert!(x_angle < TOL, "{ctx}: x axis off by {x_angle}");
                }
                for k in 0..3 {
                    assert!(
                        (bbox.half_extents[k] - want.half_extents[k]).abs() < TOL,
                        "{ctx}: half extents {:?} vs {:?}",
                        bbox.half_extents,
                        want.half_extents
                    );
                }
                let (gap, angle) = line_gap(
                    Point3::from(want.axis_p0),
                    Point3::from(want.axis_p1),
                    axis.p0,
                    axis.p1,
                );
                assert!(gap < TOL && angle < TOL, "{ctx}: axis line gap {gap}, angle {angle}");
                assert!((axis.p0 - Point3::from(want.axis_p0)).norm() < TOL, "{ctx}: axis p0 {:?}", axis.p0);
                assert!((axis.p1 - Point3::from(want.axis_p1)).norm() < TOL, "{ctx}: axis p1 {:?}", axis.p1);
            }
        }
    }
}

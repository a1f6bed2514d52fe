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
//! Minimum-area enclosing rectangle via rotating calipers over the convex hull.

use std::cmp::Ordering;

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::scalar::Real;

/// Oriented rectangle in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect2D<T: Real> {
    pub center: Point2<T>,
    /// `(long, short)` half extents.
    pub half_extents: Vector2<T>,
    /// Angle of the long edge against +x, in `[0, pi)`.
    pub angle: T,
    /// Input had rank < 2 (single point or collinear).
    pub degenerate: bool,
}

impl<T: Real> Rect2D<T> {
    pub fn area(&self) -> T {
        T::lit(4.0) * self.half_extents.x * self.half_extents.y
    }

    /// Unit vectors along the long and short edges.
    pub fn axes(&self) -> (Vector2<T>, Vector2<T>) {
        let (s, c) = self.angle.sin_cos();
        (Vector2::new(c, s), Vector2::new(-s, c))
    }

    pub fn contains(&self, p: &Point2<T>, eps: T) -> bool {
        let (long, short) = self.axes();
        let d = p - self.center;
        d.dot(&long).abs() <= self.half_extents.x + eps && d.dot(&short).abs() <= self.half_extents.y + eps
    }

    /// Corners, counter-clockwise starting at (-long, -short).
    pub fn corners(&self) -> [Point2<T>; 4] {
        let (long, short) = self.axes();
        let a = long * self.half_extents.x;
        let b = short * self.half_extents.y;
        [
            self.center - a - b,
            self.center + a - b,
            self.center + a + b,
            self.center - a + b,
        ]
    }
}

fn cross<T: Real>(o: &Point2<T>, a: &Point2<T>, b: &Point2<T>) -> T {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull in counter-clockwise order without collinear vertices
/// (Andrew's monotone chain). Duplicates collapse to one vertex.
pub fn convex_hull<T: Real>(points: &[Point2<T>]) -> Vec<Point2<T>> {
    let mut pts: Vec<Point2<T>> = points.to_vec();
    pts.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap_or(Ordering::Equal)
            .then(a.y.partial_cmp(&b.y).unwrap_or(Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2<T>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2<T>>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= T::zero() {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        // All points collinear: keep the two extremes.
        hull.truncate(2);
    }
    hull
}

fn angle_mod_pi<T: Real>(v: &Vector2<T>) -> T {
    let mut a = v.y.atan2(v.x);
    if a < T::zero() {
        a += T::pi();
    }
    if a >= T::pi() {
        a -= T::pi();
    }
    a
}

/// Smallest-area rectangle enclosing all points.
///
/// Ties (e.g. squares) resolve to the smallest long-edge angle.
pub fn min_area_rect<T: Real>(points: &[Point2<T>]) -> Result<Rect2D<T>, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::Domain("min_area_rect needs at least one point".into()));
    }
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(GeometryError::Domain("non-finite point".into()));
    }
    let hull = convex_hull(points);
    match hull.as_slice() {
        [p] => {
            return Ok(Rect2D {
                center: *p,
                half_extents: Vector2::zeros(),
                angle: T::zero(),
                degenerate: true,
            })
        }
        [a, b] => {
            let d = b - a;
            return Ok(Rect2D {
                center: a + d * T::lit(0.5),
                half_extents: Vector2::new(d.norm() * T::lit(0.5), T::zero()),
                angle: angle_mod_pi(&d),
                degenerate: true,
            });
        }
        _ => {}
    }

    let rel_tol = T::lit(1e-9);
    let mut best: Option<Rect2D<T>> = None;
    for i in 0..hull.len() {
        let edge = hull[(i + 1) % hull.len()] - hull[i];
        let e = edge.normalize();
        let n = Vector2::new(-e.y, e.x);
        let (mut e_lo, mut e_hi, mut n_lo, mut n_hi) = (T::max_value().unwrap(), T::min_value().unwrap(), T::max_value().unwrap(), T::min_value().unwrap());
        for p in &hull {
            let pe = p.coords.dot(&e);
            let pn = p.coords.dot(&n);
            e_lo = e_lo.min(pe);
            e_hi = e_hi.max(pe);
            n_lo = n_lo.min(pn);
            n_hi = n_hi.max(pn);
        }
        let half = T::lit(0.5);
        let (a, b) = ((e_hi - e_lo) * half, (n_hi - n_lo) * half);
        let center = Point2::from(e * ((e_hi + e_lo) * half) + n * ((n_hi + n_lo) * half));
        let scale = a.max(b);
        let (half_extents, angle) = if (a - b).abs() <= rel_tol * scale {
            (Vector2::new(a, b), angle_mod_pi(&e).min(angle_mod_pi(&n)))
        } else if a > b {
            (Vector2::new(a, b), angle_mod_pi(&e))
        } else {
            (Vector2::new(b, a), angle_mod_pi(&n))
        };
        let candidate = Rect2D {
            center,
            half_extents,
            angle,
            degenerate: false,
        };
        best = match best {
            None => Some(candidate),
            Some(current) => {
                let (ca, cb) = (candidate.area(), current.area());
                let tie = (ca - cb).abs() <= rel_tol * cb.max(ca);
                if (!tie && ca < cb) || (tie && candidate.angle < current.angle) {
                    Some(candidate)
                } else {
                    Some(current)
                }
            }
        };
    }
    Ok(best.expect("hull has at least three vertices"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn square() -> Vec<Point2<f64>> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn aligned_square() {
        let r = min_area_rect(&square()).unwrap();
        assert_relative_eq!(r.center, Point2::new(0.5, 0.5), epsilon = 1e-12);
        assert_relative_eq!(r.half_extents, Vector2::new(0.5, 0.5), epsilon = 1e-12);
        assert_relative_eq!(r.area(), 1.0, epsilon = 1e-12);
        assert_eq!(r.angle, 0.0);
        assert!(!r.degenerate);
    }

    #[test]
    fn rotated_square_breaks_tie_at_smallest_angle() {
        let (s, c) = FRAC_PI_4.sin_cos();
        let pts: Vec<_> = square()
            .iter()
            .map(|p| Point2::new(c * p.x - s * p.y, s * p.x + c * p.y))
            .collect();
        let r = min_area_rect(&pts).unwrap();
        assert_relative_eq!(r.area(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.angle, FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts: Vec<_> = (0..5).map(|i| Point2::new(i as f64 * 0.5, 1.0)).collect();
        let r = min_area_rect(&pts).unwrap();
        assert!(r.degenerate);
        assert_relative_eq!(r.half_extents, Vector2::new(1.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(r.center, Point2::new(1.0, 1.0), epsilon = 1e-12);
        assert_eq!(r.angle, 0.0);

        let single = min_area_rect(&[Point2::new(3.0, 4.0)]).unwrap();
        assert!(single.degenerate);
        assert_eq!(single.area(), 0.0);
    }

    #[test]
    fn empty_input_is_a_domain_error() {
        assert!(matches!(min_area_rect::<f64>(&[]), Err(GeometryError::Domain(_))));
    }

    #[test]
    fn long_edge_is_x() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 3.0),
            Point2::new(1.0, 3.0),
            Point2::new(1.0, 0.0),
        ];
        let r = min_area_rect(&pts).unwrap();
        assert_relative_eq!(r.half_extents, Vector2::new(1.5, 0.5), epsilon = 1e-12);
        assert_relative_eq!(r.angle, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let mut pts = square();
        pts.push(Point2::new(0.5, 0.5));
        pts.push(Point2::new(0.5, 0.0));
        pts.push(Point2::new(1.0, 1.0));
        assert_eq!(convex_hull(&pts).len(), 4);
    }

    #[test]
    fn single_precision() {
        let pts: Vec<Point2<f32>> = square().iter().map(|p| Point2::new(p.x as f32, p.y as f32)).collect();
        let r = min_area_rect(&pts).unwrap();
        assert!((r.area() - 1.0).abs() < 1e-6);
    }

    proptest::proptest! {
        #[test]
        fn never_worse_than_axis_aligned_and_contains_all(
            pts in proptest::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 3..200)
        ) {
            let points: Vec<Point2<f64>> = pts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
            let rect = min_area_rect(&points).unwrap();
            let (lo, hi) = points.iter().fold(
                (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
                |(lo, hi), p| (lo.inf(p), hi.sup(p)),
            );
            let aabb = (hi.x - lo.x) * (hi.y - lo.y);
            proptest::prop_assert!(rect.area() <= aabb + 1e-9);
            proptest::prop_assert!(rect.half_extents.x >= rect.half_extents.y);
            for p in &points {
                proptest::prop_assert!(rect.contains(p, 1e-9));
            }
        }
    }
}

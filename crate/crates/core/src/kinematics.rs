//! Internal joint angles from keypoint triples.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::pose::{joint_triples, ExerciseKind, PoseFrame};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("degenerate joint geometry: zero-length limb vector")]
pub struct DegenerateGeometry;

/// Internal angle at a joint, in degrees, always within `[0, 180]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct JointAngle(f64);

impl JointAngle {
    /// Clamps into `[0, 180]`. Returns `None` for NaN.
    pub fn from_degrees(degrees: f64) -> Option<Self> {
        if degrees.is_nan() {
            None
        } else {
            Some(Self(degrees.clamp(0.0, 180.0)))
        }
    }

    pub fn degrees(self) -> f64 {
        self.0
    }
}

impl fmt::Display for JointAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.0)
    }
}

/// How the left and right joint angles combine into one exercise angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SideAggregation {
    #[default]
    Mean,
    Left,
    Right,
}

impl SideAggregation {
    pub fn name(&self) -> &'static str {
        match self {
            SideAggregation::Mean => "mean",
            SideAggregation::Left => "left",
            SideAggregation::Right => "right",
        }
    }
}

impl FromStr for SideAggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(SideAggregation::Mean),
            "left" => Ok(SideAggregation::Left),
            "right" => Ok(SideAggregation::Right),
            _ => Err(format!(
                "unknown side aggregation `{s}` (expected mean, left or right)"
            )),
        }
    }
}

/// Angle at `vertex` between the vectors to `a` and `c`, via the cosine
/// rule. The cosine is clamped to `[-1, 1]` before `acos`.
pub fn internal_angle(
    a: [f64; 2],
    vertex: [f64; 2],
    c: [f64; 2],
) -> Result<JointAngle, DegenerateGeometry> {
    let u = [a[0] - vertex[0], a[1] - vertex[1]];
    let v = [c[0] - vertex[0], c[1] - vertex[1]];
    let nu = u[0].hypot(u[1]);
    let nv = v[0].hypot(v[1]);
    if !(nu > 0.0 && nv > 0.0) || !nu.is_finite() || !nv.is_finite() {
        return Err(DegenerateGeometry);
    }
    let cos = ((u[0] * v[0] + u[1] * v[1]) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(JointAngle(cos.acos().to_degrees()))
}

/// Per-side internal angles for an exercise, right side first.
pub fn side_angles(
    frame: &PoseFrame,
    exercise: ExerciseKind,
) -> Result<Vec<JointAngle>, DegenerateGeometry> {
    joint_triples(exercise)
        .iter()
        .map(|t| {
            internal_angle(
                frame.keypoints[t.first].position(),
                frame.keypoints[t.vertex].position(),
                frame.keypoints[t.last].position(),
            )
        })
        .collect()
}

/// Exercise angle with the default (mean) side aggregation.
pub fn exercise_angle(
    frame: &PoseFrame,
    exercise: ExerciseKind,
) -> Result<JointAngle, DegenerateGeometry> {
    exercise_angle_with(frame, exercise, SideAggregation::Mean)
}

pub fn exercise_angle_with(
    frame: &PoseFrame,
    exercise: ExerciseKind,
    sides: SideAggregation,
) -> Result<JointAngle, DegenerateGeometry> {
    let angles = side_angles(frame, exercise)?;
    let degrees = match sides {
        SideAggregation::Right => angles[0].0,
        SideAggregation::Left => angles[1].0,
        SideAggregation::Mean => angles.iter().map(|a| a.0).sum::<f64>() / angles.len() as f64,
    };
    Ok(JointAngle(degrees))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::{Keypoint, KEYPOINT_COUNT};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent route: absolute difference of the two vector headings.
    fn atan2_oracle(a: [f64; 2], vertex: [f64; 2], c: [f64; 2]) -> f64 {
        let h1 = (a[1] - vertex[1]).atan2(a[0] - vertex[0]);
        let h2 = (c[1] - vertex[1]).atan2(c[0] - vertex[0]);
        let mut d = (h1 - h2).abs();
        if d > std::f64::consts::PI {
            d = 2.0 * std::f64::consts::PI - d;
        }
        d.to_degrees()
    }

    #[test]
    fn collinear_is_straight() {
        let a = internal_angle([0.0, 0.0], [1.0, 0.0], [2.0, 0.0]).unwrap();
        assert_eq!(a.degrees(), 180.0);
    }

    #[test]
    fn perpendicular_is_right_angle() {
        let a = internal_angle([0.0, 1.0], [0.0, 0.0], [1.0, 0.0]).unwrap();
        assert!((a.degrees() - 90.0).abs() < 1e-12);
    }

    #[test]
    fn zero_length_vector_is_degenerate() {
        assert_eq!(
            internal_angle([1.0, 1.0], [1.0, 1.0], [2.0, 0.0]),
            Err(DegenerateGeometry)
        );
        assert_eq!(
            internal_angle([0.0, 1.0], [3.0, 3.0], [3.0, 3.0]),
            Err(DegenerateGeometry)
        );
    }

    #[test]
    fn matches_atan2_oracle_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 10_000 {
            let p = |rng: &mut ChaCha8Rng| {
                [
                    rng.random_range(-500.0..500.0),
                    rng.random_range(-500.0..500.0),
                ]
            };
            let (a, v, c) = (p(&mut rng), p(&mut rng), p(&mut rng));
            // Keep away from near-coincident points where acos loses precision.
            let short = |q: [f64; 2]| (q[0] - v[0]).hypot(q[1] - v[1]) < 1.0;
            if short(a) || short(c) {
                continue;
            }
            let got = internal_angle(a, v, c).unwrap().degrees();
            let want = atan2_oracle(a, v, c);
            // acos is ill-conditioned near 0 and 180 degrees.
            let tol = if !(0.5..=179.5).contains(&want) {
                1e-5
            } else {
                1e-9
            };
            assert!(
                (got - want).abs() < tol,
                "{a:?} {v:?} {c:?}: {got} vs {want}"
            );
            checked += 1;
        }
    }

    fn frame_with_sides(right: f64, left: f64) -> PoseFrame {
        let mut kps = [Keypoint::new(0.0, 0.0, 1.0); KEYPOINT_COUNT];
        let mut place = |first: usize, vertex: usize, last: usize, deg: f64, x0: f64| {
            let r = deg.to_radians();
            kps[vertex] = Keypoint::new(x0, 0.0, 1.0);
            kps[last] = Keypoint::new(x0, 100.0, 1.0);
            kps[first] = Keypoint::new(x0 - 100.0 * r.sin(), 100.0 * r.cos(), 1.0);
        };
        place(24, 26, 28, right, 0.0);
        place(23, 25, 27, left, 50.0);
        PoseFrame::new(0.0, kps)
    }

    #[test]
    fn identical_sides_give_that_angle() {
        let frame = frame_with_sides(140.0, 140.0);
        let a = exercise_angle(&frame, ExerciseKind::Squat).unwrap();
        assert!((a.degrees() - 140.0).abs() < 1e-9);
    }

    #[test]
    fn mean_of_two_sides() {
        let frame = frame_with_sides(130.0, 150.0);
        let a = exercise_angle(&frame, ExerciseKind::Squat).unwrap();
        assert!((a.degrees() - 140.0).abs() < 1e-9);
        let r = exercise_angle_with(&frame, ExerciseKind::Squat, SideAggregation::Right).unwrap();
        let l = exercise_angle_with(&frame, ExerciseKind::Squat, SideAggregation::Left).unwrap();
        assert!((r.degrees() - 130.0).abs() < 1e-9);
        assert!((l.degrees() - 150.0).abs() < 1e-9);
    }

    fn point() -> impl Strategy<Value = [f64; 2]> {
        [-1000.0..1000.0f64, -1000.0..1000.0f64]
    }

    proptest! {
        #[test]
        fn rigid_and_scale_invariant(a in point(), v in point(), c in point(),
                                     tx in -1e3..1e3f64, ty in -1e3..1e3f64,
                                     rot in 0.0..std::f64::consts::TAU, scale in 0.01..100.0f64) {
            let far = |q: [f64; 2]| (q[0] - v[0]).hypot(q[1] - v[1]) > 1.0;
            prop_assume!(far(a) && far(c));
            let base = internal_angle(a, v, c).unwrap().degrees();
            let (s, co) = rot.sin_cos();
            let map = |q: [f64; 2]| [scale * (co * q[0] - s * q[1]) + tx, scale * (s * q[0] + co * q[1]) + ty];
            let moved = internal_angle(map(a), map(v), map(c)).unwrap().degrees();
            // acos amplifies rounding near the ends of its range
            let tol = if !(1.0..=179.0).contains(&base) { 1e-3 } else { 1e-6 };
            prop_assert!((base - moved).abs() < tol, "{} vs {}", base, moved);
        }

        #[test]
        fn symmetric_in_outer_points(a in point(), v in point(), c in point()) {
            prop_assume!(a != v && c != v);
            let x = internal_angle(a, v, c).unwrap();
            let y = internal_angle(c, v, a).unwrap();
            prop_assert_eq!(x, y);
        }

        #[test]
        fn always_within_range(a in point(), v in point(), t in -2.0..3.0f64, eps in -1e-9..1e-9f64) {
            // Near-collinear third point.
            let c = [v[0] + t * (a[0] - v[0]) + eps, v[1] + t * (a[1] - v[1]) - eps];
            if let Ok(angle) = internal_angle(a, v, c) {
                prop_assert!((0.0..=180.0).contains(&angle.degrees()));
            }
        }
    }
}

#![allow(dead_code)]

use repcount_core::synth::skeleton;
use repcount_core::{replay, ExerciseKind, GrayFrame, Keypoint, PoseFrame, RepSession, StepOutput};

/// Fully confident pose whose tracked joints all sit at `degrees`.
pub fn pose_at(kind: ExerciseKind, degrees: f64, t: f64) -> PoseFrame {
    PoseFrame::new(
        t,
        skeleton(kind, degrees).map(|p| Keypoint::new(p[0], p[1], 1.0)),
    )
}

pub fn run(
    kind: ExerciseKind,
    poses: &[PoseFrame],
    frames: &[GrayFrame],
) -> (u32, Vec<StepOutput>) {
    let mut session = RepSession::with_defaults(kind);
    let mut steps = Vec::new();
    replay(&mut session, poses, frames, |_, out| {
        steps.push(out.clone())
    })
    .expect("replay");
    (session.count(), steps)
}

/// Smooth analytic texture, so sub-pixel shifts have an exact answer.
pub fn texture(x: f64, y: f64) -> f64 {
    128.0
        + 40.0 * (0.31 * x + 0.17 * y).sin()
        + 30.0 * (0.13 * x - 0.37 * y).sin()
        + 25.0 * (0.23 * x).cos() * (0.19 * y).sin()
}

/// Frame showing the texture translated by `shift` pixels.
pub fn shifted_frame(width: usize, height: usize, shift: [f64; 2], t: f64) -> GrayFrame {
    let pixels = (0..height)
        .flat_map(|y| {
            (0..width).map(move |x| {
                texture(x as f64 - shift[0], y as f64 - shift[1])
                    .round()
                    .clamp(0.0, 255.0) as u8
            })
        })
        .collect();
    GrayFrame::new(width, height, pixels, t).unwrap()
}

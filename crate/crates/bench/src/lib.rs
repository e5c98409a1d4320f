//! Shared inputs for the criterion benchmarks.

use repcount_core::synth::{gen_frame_sequence, gen_pose_trace, MotionProfile, RenderConfig};
use repcount_core::{ExerciseKind, GrayFrame, PoseFrame};

/// A noisy squat trace of `reps` repetitions at 30 frames/s.
pub fn pose_trace(reps: u32) -> Vec<PoseFrame> {
    let mut profile = MotionProfile::new(ExerciseKind::Squat, reps, 2.0);
    profile.noise_sigma = 2.0;
    profile.dropout_rate = 0.05;
    gen_pose_trace(&profile, 1).expect("valid profile").frames
}

/// Rendered 320x240 squat frames whose subject moves at `speed` px/frame.
pub fn frame_sequence(reps: u32, speed: f64) -> Vec<GrayFrame> {
    let profile = MotionProfile::new(ExerciseKind::Squat, reps, 1.5);
    let render = RenderConfig {
        travel_px: RenderConfig::travel_for_speed(&profile, speed),
        ..RenderConfig::default()
    };
    gen_frame_sequence(&profile, &render, 1)
        .expect("valid render")
        .frames
}

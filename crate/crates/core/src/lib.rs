//! Repetition counting for squats, push-ups and pull-ups from pose
//! keypoints, with a sparse optical-flow fallback for frames where the
//! pose detector is not confident.
//!
//! The usual entry point is [`RepSession`]: feed it one pose frame (and,
//! optionally, the matching pair of grayscale video frames) per step and
//! read the running count from the returned [`StepOutput`].

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod engine;
pub mod flow;
pub mod kinematics;
pub mod metrics;
pub mod phase;
pub mod pose;
pub mod synth;

pub use config::{ConfigError, Settings};
pub use engine::{
    replay, transition, EngineConfig, EngineError, ExerciseMoment, PhaseSource, RepSession,
    StepOutput,
};
pub use flow::{
    FlowConfig, FlowDirection, FlowError, FlowTracker, GrayFrame, MovementAxis, TrackedPoint,
};
pub use kinematics::{exercise_angle, internal_angle, JointAngle, SideAggregation};
pub use metrics::{aggregate, MetricsReport, TrialRecord};
pub use phase::{classify, MajorityWindow, MovementPhase, ThresholdBand};
pub use pose::{ExerciseKind, Keypoint, PoseFrame, TraceError, KEYPOINT_COUNT};

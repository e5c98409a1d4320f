use super::{
    lk_step, seed_features, FlowConfig, FlowDirection, FlowError, GrayFrame, MovementAxis,
    TrackedPoint,
};
use crate::phase::{MajorityWindow, MovementPhase};

pub type DirectionWindow = MajorityWindow<FlowDirection>;

/// Majority sign of the axis displacement over points that moved at
/// least `movement_threshold`. Ties and empty sets are `Stationary`.
pub fn aggregate_direction(points: &[TrackedPoint], config: &FlowConfig) -> FlowDirection {
    let axis = match config.axis {
        MovementAxis::Vertical => 1,
        MovementAxis::Horizontal => 0,
    };
    let (mut negative, mut positive) = (0usize, 0usize);
    for p in points.iter().filter(|p| p.valid) {
        let d = p.displacement[axis];
        if d.abs() < config.movement_threshold {
            continue;
        }
        if d < 0.0 {
            negative += 1;
        } else {
            positive += 1;
        }
    }
    use std::cmp::Ordering::*;
    match (negative.cmp(&positive), config.axis) {
        (Equal, _) => FlowDirection::Stationary,
        (Greater, MovementAxis::Vertical) => FlowDirection::Up,
        (Less, MovementAxis::Vertical) => FlowDirection::Down,
        (Greater, MovementAxis::Horizontal) => FlowDirection::Left,
        (Less, MovementAxis::Horizontal) => FlowDirection::Right,
    }
}

pub fn smooth_direction(window: &mut DirectionWindow, dir: FlowDirection) -> FlowDirection {
    window.push(dir)
}

/// Flow-to-phase conversion for a vertical exercise.
///
/// Combinations outside the table keep the previous phase.
pub fn flow_to_phase(
    current: FlowDirection,
    previous: FlowDirection,
    previous_phase: MovementPhase,
) -> MovementPhase {
    use FlowDirection::*;
    use MovementPhase::*;
    match (current, previous, previous_phase) {
        (Up, Stationary, Bottom) => Intermediate,
        (Up, Up, _) => Intermediate,
        (Down, Stationary, Top) => Intermediate,
        (Down, Down, _) => Intermediate,
        (Stationary, Stationary, Bottom) => Bottom,
        (Stationary, Down, Intermediate) => Bottom,
        (Stationary, Stationary, Top) => Top,
        (Stationary, Up, Intermediate) => Top,
        _ => previous_phase,
    }
}

/// Result of one tracker update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowUpdate {
    pub raw: FlowDirection,
    pub smoothed: FlowDirection,
    pub phase: MovementPhase,
    /// Valid points after tracking.
    pub tracked: usize,
    /// Mean axis displacement over valid points (0 when none).
    pub mean_axis_displacement: f64,
}

/// Per-session flow state: tracked points, direction window and the
/// previous smoothed direction.
#[derive(Debug, Clone)]
pub struct FlowTracker {
    config: FlowConfig,
    points: Vec<TrackedPoint>,
    frames_since_seed: usize,
    window: DirectionWindow,
    previous: FlowDirection,
}

impl FlowTracker {
    pub fn new(config: FlowConfig) -> Self {
        let window = DirectionWindow::new(config.smoothing_capacity);
        Self {
            config,
            points: Vec::new(),
            frames_since_seed: 0,
            window,
            previous: FlowDirection::Stationary,
        }
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    pub fn points(&self) -> &[TrackedPoint] {
        &self.points
    }

    /// Forget all tracking state, e.g. after frames were skipped.
    pub fn reset(&mut self) {
        self.points.clear();
        self.frames_since_seed = 0;
        self.window.clear();
        self.previous = FlowDirection::Stationary;
    }

    pub fn update(
        &mut self,
        prev: &GrayFrame,
        cur: &GrayFrame,
        previous_phase: MovementPhase,
    ) -> Result<FlowUpdate, FlowError> {
        prev.same_size(cur)?;
        if self.points.is_empty() || self.frames_since_seed >= self.config.reseed_interval {
            self.points = seed_features(prev, &self.config);
            self.frames_since_seed = 0;
        }
        let tracked = lk_step(prev, cur, &self.points, &self.config)?;
        let raw = aggregate_direction(&tracked, &self.config);
        let axis = match self.config.axis {
            MovementAxis::Vertical => 1,
            MovementAxis::Horizontal => 0,
        };
        self.points = tracked.into_iter().filter(|p| p.valid).collect();
        self.frames_since_seed += 1;
        let mean_axis_displacement = if self.points.is_empty() {
            0.0
        } else {
            self.points
                .iter()
                .map(|p| p.displacement[axis])
                .sum::<f64>()
                / self.points.len() as f64
        };

        let smoothed = smooth_direction(&mut self.window, raw);
        let phase = flow_to_phase(smoothed, self.previous, previous_phase);
        self.previous = smoothed;
        Ok(FlowUpdate {
            raw,
            smoothed,
            phase,
            tracked: self.points.len(),
            mean_axis_displacement,
        })
    }
}

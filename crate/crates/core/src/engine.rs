//! Per-frame pipeline: source arbitration between pose and optical flow,
//! pause handling, the rep state machine and the counter.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::flow::{FlowConfig, FlowError, FlowTracker, GrayFrame};
use crate::kinematics::{exercise_angle_with, SideAggregation};
use crate::phase::{classify, InvalidBand, MovementPhase, PhaseWindow, ThresholdBand};
use crate::pose::{confidence_gate, joint_triples, ExerciseKind, PoseFrame};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("step called with neither a pose nor a frame pair")]
    NoInput,
    #[error("timestamp {now} precedes previous step at {previous}")]
    TimeReversed { now: f64, previous: f64 },
    #[error("non-finite timestamp {0}")]
    BadTimestamp(f64),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("invalid engine config: {0}")]
    Config(String),
}

impl From<InvalidBand> for EngineError {
    fn from(e: InvalidBand) -> Self {
        EngineError::Config(e.to_string())
    }
}

/// Position within one repetition cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExerciseMoment {
    TopHold,
    Descending,
    BottomHold,
    Ascending,
}

impl ExerciseMoment {
    pub const ALL: [ExerciseMoment; 4] = [
        ExerciseMoment::TopHold,
        ExerciseMoment::Descending,
        ExerciseMoment::BottomHold,
        ExerciseMoment::Ascending,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExerciseMoment::TopHold => "top_hold",
            ExerciseMoment::Descending => "descending",
            ExerciseMoment::BottomHold => "bottom_hold",
            ExerciseMoment::Ascending => "ascending",
        }
    }

    /// Index in the cycle, `TopHold` = 0.
    pub fn cycle_position(&self) -> u8 {
        match self {
            ExerciseMoment::TopHold => 0,
            ExerciseMoment::Descending => 1,
            ExerciseMoment::BottomHold => 2,
            ExerciseMoment::Ascending => 3,
        }
    }

    /// Moment a fresh session starts in: the hold matching the band's
    /// rest phase.
    pub fn initial(band: &ThresholdBand) -> Self {
        match band.rest_phase() {
            MovementPhase::Bottom => ExerciseMoment::BottomHold,
            _ => ExerciseMoment::TopHold,
        }
    }
}

impl fmt::Display for ExerciseMoment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExerciseMoment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExerciseMoment::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown moment `{s}`"))
    }
}

/// Forward-only cycle. Returns the next moment and whether a repetition
/// completed; any non-matching input leaves the moment unchanged.
pub fn transition(moment: ExerciseMoment, phase: MovementPhase) -> (ExerciseMoment, bool) {
    use ExerciseMoment::*;
    use MovementPhase::*;
    match (moment, phase) {
        (TopHold, Intermediate) => (Descending, false),
        (Descending, Bottom) => (BottomHold, false),
        (BottomHold, Intermediate) => (Ascending, false),
        (Ascending, Top) => (TopHold, true),
        (m, _) => (m, false),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseSource {
    Pose,
    Flow,
    None,
}

impl PhaseSource {
    pub fn name(&self) -> &'static str {
        match self {
            PhaseSource::Pose => "pose",
            PhaseSource::Flow => "flow",
            PhaseSource::None => "none",
        }
    }
}

impl FromStr for PhaseSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pose" => Ok(PhaseSource::Pose),
            "flow" => Ok(PhaseSource::Flow),
            "none" => Ok(PhaseSource::None),
            _ => Err(format!("unknown source `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub confidence_threshold: f64,
    /// Seconds of insufficient pose confidence before transitions pause.
    pub pause_timeout: f64,
    pub threshold_band: ThresholdBand,
    pub phase_window_capacity: usize,
    pub sides: SideAggregation,
    pub flow: FlowConfig,
}

impl EngineConfig {
    pub fn for_exercise(exercise: ExerciseKind) -> Self {
        Self {
            confidence_threshold: 0.75,
            pause_timeout: 1.5,
            threshold_band: ThresholdBand::for_exercise(exercise),
            phase_window_capacity: 1,
            sides: SideAggregation::Mean,
            flow: FlowConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            return Err(EngineError::Config(format!(
                "confidence_threshold {} outside [0, 1]",
                self.confidence_threshold
            )));
        }
        if !(self.pause_timeout > 0.0) {
            return Err(EngineError::Config(format!(
                "pause_timeout {} must be > 0",
                self.pause_timeout
            )));
        }
        if self.phase_window_capacity < 1 {
            return Err(EngineError::Config(
                "phase_window_capacity must be >= 1".into(),
            ));
        }
        let b = &self.threshold_band;
        ThresholdBand::new(b.lower(), b.upper(), b.inverted())?;
        self.flow.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub timestamp: f64,
    pub source: PhaseSource,
    /// Exercise angle in degrees, when the pose path produced the phase.
    pub angle: Option<f64>,
    /// Phase before smoothing (pose path) or the flow table output.
    pub raw_phase: Option<MovementPhase>,
    pub phase: MovementPhase,
    pub moment: ExerciseMoment,
    pub count: u32,
    pub paused: bool,
    /// A repetition completed on this step.
    pub counted: bool,
}

pub const DEBUG_HEADER: &str = "#t\tsource\tangle\traw_phase\tphase\tmoment\tcount\tpaused";

impl StepOutput {
    /// One tab-separated debug-log line (see [`DEBUG_HEADER`]).
    pub fn debug_line(&self) -> String {
        let angle = self
            .angle
            .map_or_else(|| "-".to_string(), |a| format!("{a:.3}"));
        let raw = self.raw_phase.map_or("-", |p| p.name());
        format!(
            "{:.6}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.timestamp,
            self.source.name(),
            angle,
            raw,
            self.phase,
            self.moment,
            self.count,
            u8::from(self.paused)
        )
    }

    /// Parses a line written by [`StepOutput::debug_line`]. `counted` is
    /// not recorded in the log and comes back `false`.
    pub fn parse_debug_line(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 8 {
            return Err(format!("expected 8 fields, found {}", fields.len()));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number `{s}`"));
        Ok(StepOutput {
            timestamp: num(fields[0])?,
            source: fields[1].parse()?,
            angle: if fields[2] == "-" {
                None
            } else {
                Some(num(fields[2])?)
            },
            raw_phase: if fields[3] == "-" {
                None
            } else {
                Some(fields[3].parse()?)
            },
            phase: fields[4].parse()?,
            moment: fields[5].parse()?,
            count: fields[6]
                .parse()
                .map_err(|_| format!("bad count `{}`", fields[6]))?,
            paused: match fields[7] {
                "0" => false,
                "1" => true,
                other => return Err(format!("bad paused flag `{other}`")),
            },
            counted: false,
        })
    }
}

/// Mutable state of one exercise run.
#[derive(Debug, Clone)]
pub struct RepSession {
    exercise: ExerciseKind,
    config: EngineConfig,
    moment: ExerciseMoment,
    count: u32,
    phase: MovementPhase,
    phase_window: PhaseWindow,
    flow: FlowTracker,
    last_confident: Option<f64>,
    last_now: Option<f64>,
    /// An insufficient pose detection was seen since the last confident one.
    low_confidence: bool,
    paused: bool,
}

impl RepSession {
    pub fn new(exercise: ExerciseKind, config: EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let band = config.threshold_band;
        Ok(Self {
            exercise,
            moment: ExerciseMoment::initial(&band),
            count: 0,
            phase: band.rest_phase(),
            phase_window: PhaseWindow::new(config.phase_window_capacity),
            flow: FlowTracker::new(config.flow.clone()),
            last_confident: None,
            last_now: None,
            low_confidence: false,
            paused: false,
            config,
        })
    }

    pub fn with_defaults(exercise: ExerciseKind) -> Self {
        Self::new(exercise, EngineConfig::for_exercise(exercise)).expect("default config is valid")
    }

    pub fn exercise(&self) -> ExerciseKind {
        self.exercise
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn moment(&self) -> ExerciseMoment {
        self.moment
    }

    pub fn phase(&self) -> MovementPhase {
        self.phase
    }

    pub fn paused(&self) -> bool {
        self.paused
    }

    pub fn last_confident(&self) -> Option<f64> {
        self.last_confident
    }

    pub fn reset(&mut self) {
        let band = self.config.threshold_band;
        self.moment = ExerciseMoment::initial(&band);
        self.count = 0;
        self.phase = band.rest_phase();
        self.phase_window.clear();
        self.flow.reset();
        self.last_confident = None;
        self.last_now = None;
        self.low_confidence = false;
        self.paused = false;
    }

    fn confident_angle(&self, pose: &PoseFrame) -> Option<f64> {
        let triples = joint_triples(self.exercise);
        if !confidence_gate(pose, triples, self.config.confidence_threshold).is_confident() {
            return None;
        }
        // Degenerate limb geometry is treated like a low-confidence frame.
        exercise_angle_with(pose, self.exercise, self.config.sides)
            .ok()
            .map(|a| a.degrees())
    }

    /// Processes one frame.
    ///
    /// A confident pose always wins; otherwise the frame pair (previous,
    /// current) drives the optical-flow path. Once pose confidence has been
    /// insufficient for longer than `pause_timeout`, transitions freeze
    /// until a confident pose arrives, at which point smoothing windows are
    /// cleared and the moment is kept. Steps without a pose detection do
    /// not advance the pause clock.
    pub fn step(
        &mut self,
        pose: Option<&PoseFrame>,
        frames: Option<(&GrayFrame, &GrayFrame)>,
        now: f64,
    ) -> Result<StepOutput, EngineError> {
        if pose.is_none() && frames.is_none() {
            return Err(EngineError::NoInput);
        }
        if !now.is_finite() {
            return Err(EngineError::BadTimestamp(now));
        }
        if let Some(previous) = self.last_now {
            if now < previous {
                return Err(EngineError::TimeReversed { now, previous });
            }
        }
        if let Some((prev, cur)) = frames {
            prev.same_size(cur)?;
        }
        self.last_now = Some(now);
        let last_confident = *self.last_confident.get_or_insert(now);

        let angle = match pose {
            Some(p) => {
                let a = self.confident_angle(p);
                if a.is_none() {
                    self.low_confidence = true;
                }
                a
            }
            None => None,
        };

        let mut source = PhaseSource::None;
        let mut raw_phase = None;
        let mut new_phase = None;
        if let Some(degrees) = angle {
            if self.paused {
                self.phase_window.clear();
            }
            self.flow.reset();
            self.last_confident = Some(now);
            self.low_confidence = false;
            self.paused = false;
            let raw = classify(
                crate::kinematics::JointAngle::from_degrees(degrees).expect("finite angle"),
                &self.config.threshold_band,
            );
            raw_phase = Some(raw);
            new_phase = Some(self.phase_window.push(raw));
            source = PhaseSource::Pose;
        } else {
            self.paused = self.low_confidence && now - last_confident > self.config.pause_timeout;
            if let Some((prev, cur)) = frames {
                let update = self.flow.update(prev, cur, self.phase)?;
                raw_phase = Some(update.phase);
                new_phase = Some(update.phase);
                source = PhaseSource::Flow;
            }
        }

        let mut counted = false;
        if let Some(phase) = new_phase {
            self.phase = phase;
            if !self.paused {
                let (next, done) = transition(self.moment, phase);
                self.moment = next;
                if done {
                    self.count += 1;
                    counted = true;
                }
            }
        }

        Ok(StepOutput {
            timestamp: now,
            source,
            angle,
            raw_phase,
            phase: self.phase,
            moment: self.moment,
            count: self.count,
            paused: self.paused,
            counted,
        })
    }
}

/// Drives a session over a pose trace and/or a frame sequence, aligned
/// by index. Frame `i` pairs with frame `i - 1`; step time is the pose
/// timestamp when present, otherwise the frame timestamp. Indices with
/// neither input (the first frame of a flow-only run) are skipped.
pub fn replay<F>(
    session: &mut RepSession,
    poses: &[PoseFrame],
    frames: &[GrayFrame],
    mut on_step: F,
) -> Result<(), EngineError>
where
    F: FnMut(usize, &StepOutput),
{
    let n = poses.len().max(frames.len());
    for i in 0..n {
        let pose = poses.get(i);
        let pair = if i > 0 {
            frames.get(i - 1).zip(frames.get(i))
        } else {
            None
        };
        if pose.is_none() && pair.is_none() {
            continue;
        }
        let now = pose.map_or_else(
            || pair.map(|(_, c)| c.timestamp).unwrap_or_default(),
            |p| p.timestamp,
        );
        let out = session.step(pose, pair, now)?;
        on_step(i, &out);
    }
    Ok(())
}

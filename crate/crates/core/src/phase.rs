//! Angle thresholding into movement phases, and categorical smoothing.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::kinematics::JointAngle;
use crate::pose::ExerciseKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MovementPhase {
    Top,
    Intermediate,
    Bottom,
}

impl MovementPhase {
    pub const ALL: [MovementPhase; 3] = [
        MovementPhase::Top,
        MovementPhase::Intermediate,
        MovementPhase::Bottom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MovementPhase::Top => "top",
            MovementPhase::Intermediate => "intermediate",
            MovementPhase::Bottom => "bottom",
        }
    }
}

impl fmt::Display for MovementPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MovementPhase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "top" => Ok(MovementPhase::Top),
            "intermediate" => Ok(MovementPhase::Intermediate),
            "bottom" => Ok(MovementPhase::Bottom),
            _ => Err(format!("unknown movement phase `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid threshold band [{lower}, {upper}]: need 0 < lower < upper < 180")]
pub struct InvalidBand {
    pub lower: f64,
    pub upper: f64,
}

/// Lower/upper threshold angles for one exercise.
///
/// An inverted band maps small angles to `Top` (pull-ups, where the
/// contracted arm is the top of the movement).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdBand {
    lower: f64,
    upper: f64,
    inverted: bool,
}

impl ThresholdBand {
    pub fn new(lower: f64, upper: f64, inverted: bool) -> Result<Self, InvalidBand> {
        if lower > 0.0 && lower < upper && upper < 180.0 {
            Ok(Self {
                lower,
                upper,
                inverted,
            })
        } else {
            Err(InvalidBand { lower, upper })
        }
    }

    /// Default thresholds: squats and push-ups 130/150, pull-ups 100/150
    /// (inverted).
    pub fn for_exercise(exercise: ExerciseKind) -> Self {
        match exercise {
            ExerciseKind::Squat | ExerciseKind::PushUp => Self {
                lower: 130.0,
                upper: 150.0,
                inverted: false,
            },
            ExerciseKind::PullUp => Self {
                lower: 100.0,
                upper: 150.0,
                inverted: true,
            },
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn inverted(&self) -> bool {
        self.inverted
    }

    /// Phase the subject starts in: the extended position.
    pub fn rest_phase(&self) -> MovementPhase {
        if self.inverted {
            MovementPhase::Bottom
        } else {
            MovementPhase::Top
        }
    }
}

/// Boundary angles are `Intermediate`.
pub fn classify(angle: JointAngle, band: &ThresholdBand) -> MovementPhase {
    let theta = angle.degrees();
    let (below, above) = if band.inverted {
        (MovementPhase::Top, MovementPhase::Bottom)
    } else {
        (MovementPhase::Bottom, MovementPhase::Top)
    };
    if theta < band.lower {
        below
    } else if theta > band.upper {
        above
    } else {
        MovementPhase::Intermediate
    }
}

/// Fixed-capacity window reporting the majority value, ties going to
/// whichever tied value was pushed most recently.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorityWindow<T> {
    capacity: usize,
    entries: VecDeque<T>,
}

impl<T: Copy + Eq> MajorityWindow<T> {
    /// Panics when `capacity` is zero.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "window capacity must be at least 1");
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.entries.iter()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Pushes `value`, evicting the oldest entry at capacity, and returns
    /// the smoothed value.
    pub fn push(&mut self, value: T) -> T {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(value);
        self.majority().expect("window is non-empty after a push")
    }

    pub fn majority(&self) -> Option<T> {
        // Walk newest to oldest so the first value reaching the best count
        // is also the most recent among ties.
        let mut best: Option<(T, usize)> = None;
        for (i, &candidate) in self.entries.iter().enumerate().rev() {
            if self.entries.iter().skip(i + 1).any(|&e| e == candidate) {
                continue;
            }
            let count = self.entries.iter().filter(|&&e| e == candidate).count();
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((candidate, count));
            }
        }
        best.map(|(v, _)| v)
    }
}

pub type PhaseWindow = MajorityWindow<MovementPhase>;

pub fn smooth(window: &mut PhaseWindow, phase: MovementPhase) -> MovementPhase {
    window.push(phase)
}

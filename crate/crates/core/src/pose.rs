//! Pose-detection output contract and trace I/O.
//!
//! A pose trace is UTF-8 JSON lines, one detection per line:
//!
//! ```text
//! {"t":0.0,"kp":[[x,y,c],[x,y,c], ... 33 entries ...]}
//! ```
//!
//! `t` is seconds, `x`/`y` are image pixels (origin top-left) and `c` is
//! the per-point confidence in `[0, 1]`. Blank lines are ignored.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of keypoints emitted by the pose model per detection.
pub const KEYPOINT_COUNT: usize = 33;

/// Named indices into the 33-point body topology.
pub mod landmark {
    pub const NOSE: usize = 0;
    pub const LEFT_EYE_INNER: usize = 1;
    pub const LEFT_EYE: usize = 2;
    pub const LEFT_EYE_OUTER: usize = 3;
    pub const RIGHT_EYE_INNER: usize = 4;
    pub const RIGHT_EYE: usize = 5;
    pub const RIGHT_EYE_OUTER: usize = 6;
    pub const LEFT_EAR: usize = 7;
    pub const RIGHT_EAR: usize = 8;
    pub const MOUTH_LEFT: usize = 9;
    pub const MOUTH_RIGHT: usize = 10;
    pub const LEFT_SHOULDER: usize = 11;
    pub const RIGHT_SHOULDER: usize = 12;
    pub const LEFT_ELBOW: usize = 13;
    pub const RIGHT_ELBOW: usize = 14;
    pub const LEFT_WRIST: usize = 15;
    pub const RIGHT_WRIST: usize = 16;
    pub const LEFT_PINKY: usize = 17;
    pub const RIGHT_PINKY: usize = 18;
    pub const LEFT_INDEX: usize = 19;
    pub const RIGHT_INDEX: usize = 20;
    pub const LEFT_THUMB: usize = 21;
    pub const RIGHT_THUMB: usize = 22;
    pub const LEFT_HIP: usize = 23;
    pub const RIGHT_HIP: usize = 24;
    pub const LEFT_KNEE: usize = 25;
    pub const RIGHT_KNEE: usize = 26;
    pub const LEFT_ANKLE: usize = 27;
    pub const RIGHT_ANKLE: usize = 28;
    pub const LEFT_HEEL: usize = 29;
    pub const RIGHT_HEEL: usize = 30;
    pub const LEFT_FOOT_INDEX: usize = 31;
    pub const RIGHT_FOOT_INDEX: usize = 32;
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {reason}")]
    Schema { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, confidence: f64) -> Self {
        Self { x, y, confidence }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    fn validate(&self) -> Result<(), String> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(format!("non-finite coordinate ({}, {})", self.x, self.y));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(format!("confidence {} outside [0, 1]", self.confidence));
        }
        Ok(())
    }
}

/// One timestamped detection of all 33 keypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseFrame {
    pub timestamp: f64,
    pub keypoints: [Keypoint; KEYPOINT_COUNT],
}

impl PoseFrame {
    pub fn new(timestamp: f64, keypoints: [Keypoint; KEYPOINT_COUNT]) -> Self {
        Self {
            timestamp,
            keypoints,
        }
    }

    pub fn keypoint(&self, index: usize) -> &Keypoint {
        &self.keypoints[index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExerciseKind {
    Squat,
    PushUp,
    PullUp,
}

impl ExerciseKind {
    pub const ALL: [ExerciseKind; 3] = [
        ExerciseKind::Squat,
        ExerciseKind::PushUp,
        ExerciseKind::PullUp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExerciseKind::Squat => "squat",
            ExerciseKind::PushUp => "pushup",
            ExerciseKind::PullUp => "pullup",
        }
    }
}

impl fmt::Display for ExerciseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExerciseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "squat" | "squats" => Ok(ExerciseKind::Squat),
            "pushup" | "pushups" => Ok(ExerciseKind::PushUp),
            "pullup" | "pullups" => Ok(ExerciseKind::PullUp),
            _ => Err(format!(
                "unknown exercise `{s}` (expected squat, pushup or pullup)"
            )),
        }
    }
}

/// Three keypoints whose internal angle is measured at `vertex`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointTriple {
    pub first: usize,
    pub vertex: usize,
    pub last: usize,
}

impl JointTriple {
    /// Panics if the indices are not three distinct values in `0..33`.
    pub const fn new(first: usize, vertex: usize, last: usize) -> Self {
        assert!(first < KEYPOINT_COUNT && vertex < KEYPOINT_COUNT && last < KEYPOINT_COUNT);
        assert!(first != vertex && vertex != last && first != last);
        Self {
            first,
            vertex,
            last,
        }
    }

    pub fn indices(&self) -> [usize; 3] {
        [self.first, self.vertex, self.last]
    }
}

const SQUAT_TRIPLES: [JointTriple; 2] = [
    JointTriple::new(
        landmark::RIGHT_HIP,
        landmark::RIGHT_KNEE,
        landmark::RIGHT_ANKLE,
    ),
    JointTriple::new(
        landmark::LEFT_HIP,
        landmark::LEFT_KNEE,
        landmark::LEFT_ANKLE,
    ),
];

const ARM_TRIPLES: [JointTriple; 2] = [
    JointTriple::new(
        landmark::RIGHT_SHOULDER,
        landmark::RIGHT_ELBOW,
        landmark::RIGHT_WRIST,
    ),
    JointTriple::new(
        landmark::LEFT_SHOULDER,
        landmark::LEFT_ELBOW,
        landmark::LEFT_WRIST,
    ),
];

/// Joint triples tracked for an exercise, right side first.
///
/// Squats use hip-knee-ankle; push-ups and pull-ups use
/// shoulder-elbow-wrist.
pub fn joint_triples(exercise: ExerciseKind) -> &'static [JointTriple] {
    match exercise {
        ExerciseKind::Squat => &SQUAT_TRIPLES,
        ExerciseKind::PushUp | ExerciseKind::PullUp => &ARM_TRIPLES,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateResult {
    /// Keypoints of every triple, in triple order (first, vertex, last).
    Confident(Vec<Keypoint>),
    Insufficient,
}

impl GateResult {
    pub fn is_confident(&self) -> bool {
        matches!(self, GateResult::Confident(_))
    }
}

/// All-or-nothing confidence check over every keypoint referenced by
/// `triples`.
pub fn confidence_gate(frame: &PoseFrame, triples: &[JointTriple], threshold: f64) -> GateResult {
    let mut selected = Vec::with_capacity(triples.len() * 3);
    for triple in triples {
        for index in triple.indices() {
            let kp = frame.keypoints[index];
            if kp.confidence < threshold {
                return GateResult::Insufficient;
            }
            selected.push(kp);
        }
    }
    GateResult::Confident(selected)
}

#[derive(Serialize, Deserialize)]
struct TraceRecord {
    t: f64,
    kp: Vec<[f64; 3]>,
}

fn frame_from_record(record: TraceRecord, line: usize) -> Result<PoseFrame, TraceError> {
    let schema = |reason: String| TraceError::Schema { line, reason };
    if !record.t.is_finite() {
        return Err(schema(format!("non-finite timestamp {}", record.t)));
    }
    if record.kp.len() != KEYPOINT_COUNT {
        return Err(schema(format!(
            "expected {KEYPOINT_COUNT} keypoints, found {}",
            record.kp.len()
        )));
    }
    let mut keypoints = [Keypoint::new(0.0, 0.0, 0.0); KEYPOINT_COUNT];
    for (i, [x, y, c]) in record.kp.into_iter().enumerate() {
        let kp = Keypoint::new(x, y, c);
        kp.validate()
            .map_err(|r| schema(format!("keypoint {i}: {r}")))?;
        keypoints[i] = kp;
    }
    Ok(PoseFrame::new(record.t, keypoints))
}

/// Parses a single trace line. `line` is only used for error reporting.
pub fn parse_trace_line(text: &str, line: usize) -> Result<PoseFrame, TraceError> {
    let record: TraceRecord =
        serde_json::from_str(text).map_err(|source| TraceError::Parse { line, source })?;
    frame_from_record(record, line)
}

/// Iterator over the frames of a pose trace.
pub struct TraceReader<R> {
    reader: R,
    line: usize,
    last_timestamp: f64,
    buf: String,
}

impl<R: BufRead> TraceReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            reader,
            line: 0,
            last_timestamp: f64::NEG_INFINITY,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for TraceReader<R> {
    type Item = Result<PoseFrame, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line += 1;
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            let frame = match parse_trace_line(text, self.line) {
                Ok(frame) => frame,
                Err(e) => return Some(Err(e)),
            };
            if frame.timestamp < self.last_timestamp {
                return Some(Err(TraceError::Schema {
                    line: self.line,
                    reason: format!(
                        "timestamp {} precedes previous timestamp {}",
                        frame.timestamp, self.last_timestamp
                    ),
                }));
            }
            self.last_timestamp = frame.timestamp;
            return Some(Ok(frame));
        }
    }
}

pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<PoseFrame>, TraceError> {
    TraceReader::new(reader).collect()
}

/// Serializes one frame as a single trace line (without the newline).
pub fn trace_line(frame: &PoseFrame) -> String {
    let record = TraceRecord {
        t: frame.timestamp,
        kp: frame
            .keypoints
            .iter()
            .map(|k| [k.x, k.y, k.confidence])
            .collect(),
    };
    serde_json::to_string(&record).expect("finite trace record always serializes")
}

pub fn write_trace<W: Write>(mut writer: W, frames: &[PoseFrame]) -> std::io::Result<()> {
    for frame in frames {
        writeln!(writer, "{}", trace_line(frame))?;
    }
    writer.flush()
}

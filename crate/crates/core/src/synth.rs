//! Synthetic exercise data with exact ground truth, plus an independent
//! brute-force repetition counter for differential testing.
//!
//! Joint angles follow a trapezoid: a hold at the extended angle, then per
//! repetition a linear ramp to the contracted angle, a hold there, a ramp
//! back and a hold at the extended angle. Each hold lasts
//! `hold_fraction * period`.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::flow::GrayFrame;
use crate::phase::ThresholdBand;
use crate::pose::{
    joint_triples, landmark as lm, ExerciseKind, Keypoint, PoseFrame, KEYPOINT_COUNT,
};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid motion profile: {0}")]
    Profile(String),
    #[error("invalid render settings: {0}")]
    Render(String),
}

/// Segment length used for every synthetic limb, in pixels.
pub const LIMB_PX: f64 = 220.0;

/// Margin beyond the thresholds the angle range must clear.
pub const THRESHOLD_MARGIN_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceProfile {
    /// Nominal confidence of the tracked limb keypoints.
    pub base: f64,
    /// Per-frame confidence jitter: limb points get `base - dip_rate * U(0,1)`.
    pub dip_rate: f64,
}

impl Default for ConfidenceProfile {
    fn default() -> Self {
        Self {
            base: 0.95,
            dip_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionProfile {
    pub exercise: ExerciseKind,
    pub reps: u32,
    /// Seconds per repetition.
    pub period: f64,
    /// Contracted joint angle, degrees.
    pub angle_min: f64,
    /// Extended joint angle, degrees.
    pub angle_max: f64,
    /// Fraction of the period held at each extreme, in `[0, 0.4]`.
    pub hold_fraction: f64,
    pub fps: f64,
    /// Isotropic Gaussian keypoint noise, pixels.
    pub noise_sigma: f64,
    /// Per-frame probability that one limb keypoint drops to low confidence.
    pub dropout_rate: f64,
    pub confidence: ConfidenceProfile,
}

impl MotionProfile {
    /// Clean profile with angle ranges comfortably outside the default
    /// thresholds.
    pub fn new(exercise: ExerciseKind, reps: u32, period: f64) -> Self {
        let (angle_min, angle_max) = match exercise {
            ExerciseKind::Squat => (90.0, 172.0),
            ExerciseKind::PushUp => (85.0, 170.0),
            ExerciseKind::PullUp => (60.0, 170.0),
        };
        Self {
            exercise,
            reps,
            period,
            angle_min,
            angle_max,
            hold_fraction: 0.2,
            fps: 30.0,
            noise_sigma: 0.0,
            dropout_rate: 0.0,
            confidence: ConfidenceProfile::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let err = |m: String| Err(SynthError::Profile(m));
        let band = ThresholdBand::for_exercise(self.exercise);
        if !(self.angle_min < band.lower() - THRESHOLD_MARGIN_DEG) {
            return err(format!(
                "angle_min {} must be below {} (lower threshold - {THRESHOLD_MARGIN_DEG})",
                self.angle_min,
                band.lower() - THRESHOLD_MARGIN_DEG
            ));
        }
        if !(self.angle_max > band.upper() + THRESHOLD_MARGIN_DEG) {
            return err(format!(
                "angle_max {} must exceed {} (upper threshold + {THRESHOLD_MARGIN_DEG})",
                self.angle_max,
                band.upper() + THRESHOLD_MARGIN_DEG
            ));
        }
        if !(self.angle_min > 0.0 && self.angle_max <= 180.0) {
            return err("angles must lie in (0, 180]".into());
        }
        if !(self.period >= 0.5) || !self.period.is_finite() {
            return err(format!("period {} must be >= 0.5 s", self.period));
        }
        if !(self.fps >= 10.0) || !self.fps.is_finite() {
            return err(format!("fps {} must be >= 10", self.fps));
        }
        if !(0.0..=0.4).contains(&self.hold_fraction) {
            return err(format!(
                "hold_fraction {} outside [0, 0.4]",
                self.hold_fraction
            ));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return err(format!("noise_sigma {} must be >= 0", self.noise_sigma));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return err(format!("dropout_rate {} outside [0, 1)", self.dropout_rate));
        }
        let c = self.confidence;
        if !(c.base > 0.0 && c.base <= 1.0 && c.dip_rate >= 0.0 && c.dip_rate <= c.base) {
            return err(format!("confidence profile {c:?} invalid"));
        }
        Ok(())
    }

    fn ramp_seconds(&self) -> f64 {
        0.5 * (1.0 - 2.0 * self.hold_fraction) * self.period
    }

    pub fn duration(&self) -> f64 {
        self.hold_fraction * self.period + self.reps as f64 * self.period
    }

    pub fn frame_count(&self) -> usize {
        (self.duration() * self.fps).floor() as usize + 1
    }

    /// How far into the movement the subject is at `t`: 0 extended,
    /// 1 fully contracted.
    pub fn excursion_at(&self, t: f64) -> f64 {
        let hold = self.hold_fraction * self.period;
        let ramp = self.ramp_seconds();
        let t = t - hold;
        if t <= 0.0 || t >= self.reps as f64 * self.period {
            return 0.0;
        }
        let u = t.rem_euclid(self.period);
        if u < ramp {
            u / ramp
        } else if u < ramp + hold {
            1.0
        } else if u < 2.0 * ramp + hold {
            1.0 - (u - ramp - hold) / ramp
        } else {
            0.0
        }
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        self.angle_max - (self.angle_max - self.angle_min) * self.excursion_at(t)
    }
}

fn add(p: [f64; 2], d: [f64; 2]) -> [f64; 2] {
    [p[0] + d[0], p[1] + d[1]]
}

/// Noise-free body layout whose tracked joints sit at `degrees`.
///
/// Squats and push-ups are side views with the camera on the subject's
/// right; pull-ups are a front view hanging from a bar.
pub fn skeleton(exercise: ExerciseKind, degrees: f64) -> [[f64; 2]; KEYPOINT_COUNT] {
    let r = degrees.to_radians();
    let (s, c) = r.sin_cos();
    let mut p = [[0.0; 2]; KEYPOINT_COUNT];
    let head = |p: &mut [[f64; 2]; KEYPOINT_COUNT], nose: [f64; 2], facing: f64| {
        p[lm::NOSE] = nose;
        p[lm::LEFT_EYE_INNER] = add(nose, [-6.0 * facing, -14.0]);
        p[lm::LEFT_EYE] = add(nose, [-10.0 * facing, -15.0]);
        p[lm::LEFT_EYE_OUTER] = add(nose, [-14.0 * facing, -15.0]);
        p[lm::RIGHT_EYE_INNER] = add(nose, [6.0 * facing, -14.0]);
        p[lm::RIGHT_EYE] = add(nose, [10.0 * facing, -15.0]);
        p[lm::RIGHT_EYE_OUTER] = add(nose, [14.0 * facing, -15.0]);
        p[lm::LEFT_EAR] = add(nose, [-30.0 * facing, -8.0]);
        p[lm::RIGHT_EAR] = add(nose, [30.0 * facing, -8.0]);
        p[lm::MOUTH_LEFT] = add(nose, [-8.0 * facing, 18.0]);
        p[lm::MOUTH_RIGHT] = add(nose, [8.0 * facing, 18.0]);
    };
    let hands = |p: &mut [[f64; 2]; KEYPOINT_COUNT]| {
        for (wrist, pinky, index, thumb) in [
            (
                lm::LEFT_WRIST,
                lm::LEFT_PINKY,
                lm::LEFT_INDEX,
                lm::LEFT_THUMB,
            ),
            (
                lm::RIGHT_WRIST,
                lm::RIGHT_PINKY,
                lm::RIGHT_INDEX,
                lm::RIGHT_THUMB,
            ),
        ] {
            let w = p[wrist];
            p[pinky] = add(w, [6.0, 22.0]);
            p[index] = add(w, [14.0, 24.0]);
            p[thumb] = add(w, [16.0, 10.0]);
        }
    };
    let feet = |p: &mut [[f64; 2]; KEYPOINT_COUNT], forward: f64| {
        for (ankle, heel, toe) in [
            (lm::LEFT_ANKLE, lm::LEFT_HEEL, lm::LEFT_FOOT_INDEX),
            (lm::RIGHT_ANKLE, lm::RIGHT_HEEL, lm::RIGHT_FOOT_INDEX),
        ] {
            let a = p[ankle];
            p[heel] = add(a, [-24.0 * forward, 14.0]);
            p[toe] = add(a, [70.0 * forward, 18.0]);
        }
    };

    match exercise {
        ExerciseKind::Squat => {
            // Shin vertical, thigh rotating about the knee.
            for (hip, knee, ankle, shift) in [
                (lm::RIGHT_HIP, lm::RIGHT_KNEE, lm::RIGHT_ANKLE, [0.0, 0.0]),
                (lm::LEFT_HIP, lm::LEFT_KNEE, lm::LEFT_ANKLE, [14.0, -8.0]),
            ] {
                p[ankle] = add([600.0, 1700.0], shift);
                p[knee] = add(p[ankle], [0.0, -LIMB_PX]);
                p[hip] = add(p[knee], [-LIMB_PX * s, LIMB_PX * c]);
            }
            let lean = (0.5 * (180.0 - degrees)).to_radians();
            let torso = [260.0 * lean.sin(), -260.0 * lean.cos()];
            p[lm::RIGHT_SHOULDER] = add(p[lm::RIGHT_HIP], torso);
            p[lm::LEFT_SHOULDER] = add(p[lm::LEFT_HIP], torso);
            for (shoulder, elbow, wrist) in [
                (lm::RIGHT_SHOULDER, lm::RIGHT_ELBOW, lm::RIGHT_WRIST),
                (lm::LEFT_SHOULDER, lm::LEFT_ELBOW, lm::LEFT_WRIST),
            ] {
                p[elbow] = add(p[shoulder], [150.0, 20.0]);
                p[wrist] = add(p[elbow], [140.0, 0.0]);
            }
            let nose = add(p[lm::RIGHT_SHOULDER], [40.0, -110.0]);
            head(&mut p, nose, 0.3);
            feet(&mut p, 1.0);
        }
        ExerciseKind::PushUp => {
            // Forearm vertical from the floor, upper arm rotating at the elbow.
            for (shoulder, elbow, wrist, shift) in [
                (
                    lm::RIGHT_SHOULDER,
                    lm::RIGHT_ELBOW,
                    lm::RIGHT_WRIST,
                    [0.0, 0.0],
                ),
                (
                    lm::LEFT_SHOULDER,
                    lm::LEFT_ELBOW,
                    lm::LEFT_WRIST,
                    [12.0, -8.0],
                ),
            ] {
                p[wrist] = add([1300.0, 1500.0], shift);
                p[elbow] = add(p[wrist], [0.0, -LIMB_PX]);
                p[shoulder] = add(p[elbow], [-LIMB_PX * s, LIMB_PX * c]);
            }
            for (shoulder, hip, knee, ankle, shift) in [
                (
                    lm::RIGHT_SHOULDER,
                    lm::RIGHT_HIP,
                    lm::RIGHT_KNEE,
                    lm::RIGHT_ANKLE,
                    [0.0, 0.0],
                ),
                (
                    lm::LEFT_SHOULDER,
                    lm::LEFT_HIP,
                    lm::LEFT_KNEE,
                    lm::LEFT_ANKLE,
                    [12.0, -8.0],
                ),
            ] {
                p[ankle] = add([300.0, 1480.0], shift);
                let sh = p[shoulder];
                let a = p[ankle];
                p[hip] = [sh[0] + 0.45 * (a[0] - sh[0]), sh[1] + 0.45 * (a[1] - sh[1])];
                p[knee] = [sh[0] + 0.72 * (a[0] - sh[0]), sh[1] + 0.72 * (a[1] - sh[1])];
            }
            let nose = add(p[lm::RIGHT_SHOULDER], [120.0, -30.0]);
            head(&mut p, nose, 0.3);
            feet(&mut p, -0.3);
        }
        ExerciseKind::PullUp => {
            // Hands fixed on the bar, arms mirrored about the body centre.
            for (shoulder, elbow, wrist, side) in [
                (lm::RIGHT_SHOULDER, lm::RIGHT_ELBOW, lm::RIGHT_WRIST, -1.0),
                (lm::LEFT_SHOULDER, lm::LEFT_ELBOW, lm::LEFT_WRIST, 1.0),
            ] {
                p[wrist] = [540.0 + side * 260.0, 300.0];
                p[elbow] = add(p[wrist], [0.0, LIMB_PX]);
                p[shoulder] = add(p[elbow], [-side * LIMB_PX * s, -LIMB_PX * c]);
            }
            let mid_shoulder = [
                0.5 * (p[lm::LEFT_SHOULDER][0] + p[lm::RIGHT_SHOULDER][0]),
                0.5 * (p[lm::LEFT_SHOULDER][1] + p[lm::RIGHT_SHOULDER][1]),
            ];
            for (hip, knee, ankle, side) in [
                (lm::RIGHT_HIP, lm::RIGHT_KNEE, lm::RIGHT_ANKLE, -1.0),
                (lm::LEFT_HIP, lm::LEFT_KNEE, lm::LEFT_ANKLE, 1.0),
            ] {
                p[hip] = add(mid_shoulder, [side * 70.0, 300.0]);
                p[knee] = add(p[hip], [side * 10.0, 230.0]);
                p[ankle] = add(p[knee], [side * 5.0, 230.0]);
            }
            head(&mut p, add(mid_shoulder, [0.0, -120.0]), 1.0);
            hands(&mut p);
            feet(&mut p, 0.2);
            return p;
        }
    }
    hands(&mut p);
    p
}

/// Synthetic pose trace with its true repetition count.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTrace {
    pub frames: Vec<PoseFrame>,
    pub ground_truth: u32,
}

/// Confidence given to keypoints knocked out by dropout is drawn from this
/// range, below any sensible gate.
const DROPPED_CONFIDENCE: std::ops::Range<f64> = 0.05..0.5;

pub fn gen_pose_trace(profile: &MotionProfile, seed: u64) -> Result<SyntheticTrace, SynthError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, profile.noise_sigma).expect("sigma validated");
    let limb: Vec<usize> = joint_triples(profile.exercise)
        .iter()
        .flat_map(|t| t.indices())
        .collect();
    let conf = profile.confidence;

    let frames = (0..profile.frame_count())
        .map(|i| {
            let t = i as f64 / profile.fps;
            let clean = skeleton(profile.exercise, profile.angle_at(t));
            let mut keypoints = [Keypoint::new(0.0, 0.0, 1.0); KEYPOINT_COUNT];
            for (k, pos) in keypoints.iter_mut().zip(clean) {
                let (nx, ny) = if profile.noise_sigma > 0.0 {
                    (noise.sample(&mut rng), noise.sample(&mut rng))
                } else {
                    (0.0, 0.0)
                };
                *k = Keypoint::new(pos[0] + nx, pos[1] + ny, 1.0);
            }
            for &idx in &limb {
                let jitter: f64 = rng.random();
                keypoints[idx].confidence = (conf.base - conf.dip_rate * jitter).clamp(0.0, 1.0);
            }
            if rng.random::<f64>() < profile.dropout_rate {
                let victim = limb[rng.random_range(0..limb.len())];
                keypoints[victim].confidence = rng.random_range(DROPPED_CONFIDENCE);
            }
            PoseFrame::new(t, keypoints)
        })
        .collect();
    Ok(SyntheticTrace {
        frames,
        ground_truth: profile.reps,
    })
}

/// Sets every tracked limb keypoint to `confidence` for frames with
/// `start <= t < end`.
pub fn apply_confidence_dropout(
    frames: &mut [PoseFrame],
    exercise: ExerciseKind,
    start: f64,
    end: f64,
    confidence: f64,
) {
    let limb: Vec<usize> = joint_triples(exercise)
        .iter()
        .flat_map(|t| t.indices())
        .collect();
    for f in frames
        .iter_mut()
        .filter(|f| f.timestamp >= start && f.timestamp < end)
    {
        for &i in &limb {
            f.keypoints[i].confidence = confidence;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub width: usize,
    pub height: usize,
    /// Vertical distance between the extended and contracted positions.
    pub travel_px: f64,
    pub subject_width: usize,
    pub subject_height: usize,
    /// Lattice spacing of the subject's value-noise texture.
    pub texture_cell: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            travel_px: 100.0,
            subject_width: 120,
            subject_height: 100,
            texture_cell: 10.0,
        }
    }
}

impl RenderConfig {
    /// Travel that makes the ramps of `profile` move at `px_per_frame`.
    pub fn travel_for_speed(profile: &MotionProfile, px_per_frame: f64) -> f64 {
        px_per_frame * profile.ramp_seconds() * profile.fps
    }
}

/// Rendered frame sequence with per-frame ground-truth displacement
/// (`displacements[i]` is the subject motion from frame `i - 1` to `i`;
/// entry 0 is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<GrayFrame>,
    pub displacements: Vec<[f64; 2]>,
    pub ground_truth: u32,
}

struct ValueNoise {
    cols: usize,
    lattice: Vec<f64>,
    cell: f64,
}

impl ValueNoise {
    fn new(width: f64, height: f64, cell: f64, rng: &mut ChaCha8Rng) -> Self {
        let cols = (width / cell).ceil() as usize + 3;
        let rows = (height / cell).ceil() as usize + 3;
        let lattice = (0..cols * rows)
            .map(|_| rng.random_range(30.0..225.0))
            .collect();
        Self {
            cols,
            lattice,
            cell,
        }
    }

    fn sample(&self, u: f64, v: f64) -> f64 {
        let gx = u / self.cell + 1.0;
        let gy = v / self.cell + 1.0;
        let (x0, y0) = (gx.floor().max(0.0) as usize, gy.floor().max(0.0) as usize);
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (fx, fy) = (smooth(gx - x0 as f64), smooth(gy - y0 as f64));
        let at = |x: usize, y: usize| self.lattice[y * self.cols + x];
        let top = at(x0, y0) + (at(x0 + 1, y0) - at(x0, y0)) * fx;
        let bot = at(x0, y0 + 1) + (at(x0 + 1, y0 + 1) - at(x0, y0 + 1)) * fx;
        top + (bot - top) * fy
    }
}

/// Renders a textured rectangle translating vertically with the
/// profile's trapezoid over a near-flat background. Squats and push-ups
/// move down first; pull-ups move up first.
pub fn gen_frame_sequence(
    profile: &MotionProfile,
    render: &RenderConfig,
    seed: u64,
) -> Result<FrameSequence, SynthError> {
    profile.validate()?;
    let err = |m: String| Err(SynthError::Render(m));
    let (w, h) = (render.width, render.height);
    if w < 16 || h < 16 {
        return err(format!("frame {w}x{h} below 16x16"));
    }
    if render.subject_width > w || render.subject_height as f64 + render.travel_px > h as f64 {
        return err("subject and its travel do not fit in the frame".into());
    }
    if !(render.texture_cell >= 2.0) || !(render.travel_px >= 0.0) {
        return err("texture_cell must be >= 2 and travel_px >= 0".into());
    }
    let peak_speed = render.travel_px / (profile.ramp_seconds() * profile.fps);
    if peak_speed > 0.25 * h as f64 {
        return err(format!(
            "motion of {peak_speed:.1} px/frame exceeds 25% of the frame height"
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sw, sh) = (render.subject_width as f64, render.subject_height as f64);
    let texture = ValueNoise::new(sw, sh, render.texture_cell, &mut rng);
    let sign = match profile.exercise {
        ExerciseKind::PullUp => -1.0,
        _ => 1.0,
    };
    let x0 = ((w as f64 - sw) / 2.0).floor();
    let spare = h as f64 - sh - render.travel_px;
    let y0 = if sign > 0.0 {
        (spare / 2.0).floor()
    } else {
        (spare / 2.0).floor() + render.travel_px
    };
    let offset_at = |t: f64| sign * render.travel_px * profile.excursion_at(t);
    let coverage =
        |u: f64, extent: f64| ((u + 0.5).min(extent) - (u - 0.5).max(0.0)).clamp(0.0, 1.0);

    let n = profile.frame_count();
    let mut frames = Vec::with_capacity(n);
    let mut displacements = Vec::with_capacity(n);
    let mut last_offset = 0.0;
    for i in 0..n {
        let t = i as f64 / profile.fps;
        let offset = offset_at(t);
        displacements.push([0.0, if i == 0 { 0.0 } else { offset - last_offset }]);
        last_offset = offset;
        let top = y0 + offset;
        let mut pixels = Vec::with_capacity(w * h);
        for y in 0..h {
            let v = y as f64 - top;
            let cy = coverage(v, sh);
            for x in 0..w {
                let bg = 60.0 + 10.0 * x as f64 / w as f64;
                let u = x as f64 - x0;
                let cov = cy * coverage(u, sw);
                let value = if cov > 0.0 {
                    let tex = texture.sample(u.clamp(0.0, sw), v.clamp(0.0, sh));
                    cov * tex + (1.0 - cov) * bg
                } else {
                    bg
                };
                pixels.push(value.round().clamp(0.0, 255.0) as u8);
            }
        }
        frames.push(GrayFrame::new(w, h, pixels, t).expect("dimensions checked"));
    }
    Ok(FrameSequence {
        frames,
        displacements,
        ground_truth: profile.reps,
    })
}

/// Reference repetition count from raw angles.
///
/// Each angle is bucketed into `T`/`I`/`B` against the band, then the
/// symbol string is searched for repeated occurrences of the subsequence
/// `T I B I T`, where the closing `T` of one repetition opens the next.
/// The search starts as if the subject was already seen at rest: after
/// the leading `T`, or after `T I B` for inverted bands.
pub fn brute_force_count(angles: &[f64], band: &ThresholdBand) -> u32 {
    let symbols: String = angles
        .iter()
        .map(|&a| {
            let small = a < band.lower();
            let large = a > band.upper();
            match (small, large, band.inverted()) {
                (true, _, false) | (_, true, true) => 'B',
                (true, _, true) | (_, true, false) => 'T',
                _ => 'I',
            }
        })
        .collect();
    const PATTERN: [char; 5] = ['T', 'I', 'B', 'I', 'T'];
    let mut want = if band.inverted() { 3 } else { 1 };
    let mut rest = symbols.as_str();
    let mut count = 0;
    while let Some(i) = rest.find(PATTERN[want]) {
        rest = &rest[i + 1..];
        want += 1;
        if want == PATTERN.len() {
            count += 1;
            want = 1;
        }
    }
    count
}

/// One row of the ground-truth manifest written alongside synthetic data.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub label: String,
    pub profile: MotionProfile,
    pub seed: u64,
    /// Trace path relative to the manifest, if generated.
    pub trace: Option<String>,
    /// Frame directory relative to the manifest, if generated.
    pub frames: Option<String>,
}

pub const MANIFEST_HEADER: &str =
    "label\texercise\treps\tperiod\tangle_min\tangle_max\thold_fraction\tfps\tnoise_sigma\tdropout_rate\tseed\ttrace\tframes";

pub fn write_manifest<W: Write>(mut w: W, rows: &[ManifestRow]) -> std::io::Result<()> {
    writeln!(w, "{MANIFEST_HEADER}")?;
    for r in rows {
        let p = &r.profile;
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.label,
            p.exercise,
            p.reps,
            p.period,
            p.angle_min,
            p.angle_max,
            p.hold_fraction,
            p.fps,
            p.noise_sigma,
            p.dropout_rate,
            r.seed,
            r.trace.as_deref().unwrap_or("-"),
            r.frames.as_deref().unwrap_or("-"),
        )?;
    }
    w.flush()
}

pub fn read_manifest<R: BufRead>(r: R) -> Result<Vec<ManifestRow>, String> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        let lineno = n + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != MANIFEST_HEADER {
                return Err(format!("line {lineno}: unexpected manifest header"));
            }
            saw_header = true;
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 13 {
            return Err(format!(
                "line {lineno}: expected 13 fields, found {}",
                f.len()
            ));
        }
        let num = |i: usize| {
            f[i].parse::<f64>()
                .map_err(|_| format!("line {lineno}: bad number `{}`", f[i]))
        };
        let exercise: ExerciseKind = f[1].parse().map_err(|e| format!("line {lineno}: {e}"))?;
        let mut profile = MotionProfile::new(exercise, 0, 1.0);
        profile.reps = f[2]
            .parse()
            .map_err(|_| format!("line {lineno}: bad reps `{}`", f[2]))?;
        profile.period = num(3)?;
        profile.angle_min = num(4)?;
        profile.angle_max = num(5)?;
        profile.hold_fraction = num(6)?;
        profile.fps = num(7)?;
        profile.noise_sigma = num(8)?;
        profile.dropout_rate = num(9)?;
        let path = |s: &str| (s != "-").then(|| s.to_string());
        rows.push(ManifestRow {
            label: f[0].to_string(),
            profile,
            seed: f[10]
                .parse()
                .map_err(|_| format!("line {lineno}: bad seed `{}`", f[10]))?,
            trace: path(f[11]),
            frames: path(f[12]),
        });
    }
    Ok(rows)
}

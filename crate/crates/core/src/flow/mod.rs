//! Sparse optical-flow fallback: corner seeding, Lucas-Kanade tracking,
//! direction voting and the flow-to-phase conversion table.
//!
//! Image coordinates have their origin at the top-left, so a negative
//! vertical displacement means the tracked content moved up.

mod direction;
mod features;
pub mod io;
mod lk;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use direction::{
    aggregate_direction, flow_to_phase, smooth_direction, DirectionWindow, FlowTracker, FlowUpdate,
};
pub use features::seed_features;
pub use lk::lk_step;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("frame dimensions {width}x{height} below the 16x16 minimum")]
    TooSmall { width: usize, height: usize },
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("frame size mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("invalid flow config: {0}")]
    Config(String),
}

/// 8-bit grayscale frame, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    pub timestamp: f64,
}

impl GrayFrame {
    pub fn new(
        width: usize,
        height: usize,
        pixels: Vec<u8>,
        timestamp: f64,
    ) -> Result<Self, FlowError> {
        if width < 16 || height < 16 {
            return Err(FlowError::TooSmall { width, height });
        }
        if pixels.len() != width * height {
            return Err(FlowError::BufferSize {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
            timestamp,
        })
    }

    pub fn filled(
        width: usize,
        height: usize,
        value: u8,
        timestamp: f64,
    ) -> Result<Self, FlowError> {
        Self::new(width, height, vec![value; width * height], timestamp)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn same_size(&self, other: &GrayFrame) -> Result<(), FlowError> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(FlowError::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ))
        }
    }

    pub(crate) fn to_f32(&self) -> Vec<f32> {
        self.pixels.iter().map(|&p| p as f32).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackedPoint {
    pub position: [f64; 2],
    pub displacement: [f64; 2],
    pub valid: bool,
}

impl TrackedPoint {
    pub fn at(x: f64, y: f64) -> Self {
        Self {
            position: [x, y],
            displacement: [0.0, 0.0],
            valid: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowDirection {
    Up,
    Down,
    Left,
    Right,
    Stationary,
}

impl FlowDirection {
    pub fn name(&self) -> &'static str {
        match self {
            FlowDirection::Up => "up",
            FlowDirection::Down => "down",
            FlowDirection::Left => "left",
            FlowDirection::Right => "right",
            FlowDirection::Stationary => "stationary",
        }
    }
}

impl fmt::Display for FlowDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MovementAxis {
    #[default]
    Vertical,
    Horizontal,
}

impl MovementAxis {
    pub fn name(&self) -> &'static str {
        match self {
            MovementAxis::Vertical => "vertical",
            MovementAxis::Horizontal => "horizontal",
        }
    }
}

impl FromStr for MovementAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vertical" => Ok(MovementAxis::Vertical),
            "horizontal" => Ok(MovementAxis::Horizontal),
            _ => Err(format!(
                "unknown axis `{s}` (expected vertical or horizontal)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    /// Minimum per-frame displacement along the axis, in pixels.
    pub movement_threshold: f64,
    /// Frames between feature re-seeding.
    pub reseed_interval: usize,
    /// Odd side length of the LK patch.
    pub lk_window: usize,
    pub lk_iterations: usize,
    /// Corner threshold on the block-averaged minimum eigenvalue of the
    /// gradient structure tensor.
    pub min_eigen: f64,
    pub axis: MovementAxis,
    pub smoothing_capacity: usize,
    pub max_features: usize,
    /// Non-maximum suppression radius between seeded corners.
    pub min_distance: f64,
    /// Patch-averaged minimum eigenvalue below which LK declares the
    /// gradient matrix singular.
    pub lk_min_eigen: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            movement_threshold: 5.0,
            reseed_interval: 5,
            lk_window: 21,
            lk_iterations: 30,
            min_eigen: 20.0,
            axis: MovementAxis::Vertical,
            smoothing_capacity: 3,
            max_features: 100,
            min_distance: 8.0,
            lk_min_eigen: 1.0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |m: &str| Err(FlowError::Config(m.to_string()));
        if !(self.movement_threshold > 0.0) {
            return bad("movement_threshold must be > 0");
        }
        if self.lk_window < 5 || self.lk_window.is_multiple_of(2) {
            return bad("lk_window must be odd and >= 5");
        }
        if self.reseed_interval < 1 {
            return bad("reseed_interval must be >= 1");
        }
        if self.smoothing_capacity < 1 {
            return bad("smoothing_capacity must be >= 1");
        }
        if self.lk_iterations < 1 {
            return bad("lk_iterations must be >= 1");
        }
        if !(self.min_eigen > 0.0) || !(self.lk_min_eigen > 0.0) {
            return bad("eigenvalue thresholds must be > 0");
        }
        if !(self.min_distance >= 0.0) {
            return bad("min_distance must be >= 0");
        }
        Ok(())
    }
}

/// Central-difference image gradients, in intensity units per pixel.
pub(crate) struct Gradients {
    pub gx: Vec<f32>,
    pub gy: Vec<f32>,
}

pub(crate) fn gradients(img: &[f32], width: usize, height: usize) -> Gradients {
    let mut gx = vec![0.0f32; width * height];
    let mut gy = vec![0.0f32; width * height];
    for y in 0..height {
        let row = y * width;
        for x in 0..width {
            let (l, r) = (x.saturating_sub(1), (x + 1).min(width - 1));
            let (u, d) = (y.saturating_sub(1), (y + 1).min(height - 1));
            gx[row + x] = (img[row + r] - img[row + l]) / (r - l) as f32;
            gy[row + x] = (img[d * width + x] - img[u * width + x]) / (d - u) as f32;
        }
    }
    Gradients { gx, gy }
}

/// Bilinear sample with border clamping.
#[inline]
pub(crate) fn bilinear(img: &[f32], width: usize, height: usize, x: f64, y: f64) -> f32 {
    let x = x.clamp(0.0, (width - 1) as f64);
    let y = y.clamp(0.0, (height - 1) as f64);
    let x0 = (x.floor() as usize).min(width - 2);
    let y0 = (y.floor() as usize).min(height - 2);
    let fx = (x - x0 as f64) as f32;
    let fy = (y - y0 as f64) as f32;
    let i = y0 * width + x0;
    let top = img[i] + (img[i + 1] - img[i]) * fx;
    let bot = img[i + width] + (img[i + width + 1] - img[i + width]) * fx;
    top + (bot - top) * fy
}

/// Smaller eigenvalue of the symmetric matrix `[[a, b], [b, c]]`.
#[inline]
pub(crate) fn min_eigenvalue(a: f64, b: f64, c: f64) -> f64 {
    let half_trace = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    half_trace - (half_diff * half_diff + b * b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_validation() {
        assert!(matches!(
            GrayFrame::filled(15, 20, 0, 0.0),
            Err(FlowError::TooSmall { .. })
        ));
        assert!(matches!(
            GrayFrame::new(16, 16, vec![0; 10], 0.0),
            Err(FlowError::BufferSize {
                expected: 256,
                actual: 10
            })
        ));
        assert!(GrayFrame::filled(16, 16, 7, 0.0).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(FlowConfig::default().validate().is_ok());
        let even = FlowConfig {
            lk_window: 20,
            ..FlowConfig::default()
        };
        assert!(even.validate().is_err());
        let small = FlowConfig {
            lk_window: 3,
            ..FlowConfig::default()
        };
        assert!(small.validate().is_err());
        let zero = FlowConfig {
            movement_threshold: 0.0,
            ..FlowConfig::default()
        };
        assert!(zero.validate().is_err());
        let reseed = FlowConfig {
            reseed_interval: 0,
            ..FlowConfig::default()
        };
        assert!(reseed.validate().is_err());
    }

    #[test]
    fn bilinear_interpolates_ramp() {
        let (w, h) = (16, 16);
        let img: Vec<f32> = (0..w * h)
            .map(|i| (i % w) as f32 * 2.0 + (i / w) as f32)
            .collect();
        let v = bilinear(&img, w, h, 3.25, 4.5);
        assert!((v - (6.5 + 4.5)).abs() < 1e-5);
        // clamped at the far border
        assert_eq!(bilinear(&img, w, h, 100.0, 100.0), img[w * h - 1]);
    }

    #[test]
    fn eigenvalue_of_diagonal() {
        assert_eq!(min_eigenvalue(4.0, 0.0, 9.0), 4.0);
        assert!((min_eigenvalue(2.0, 1.0, 2.0) - 1.0).abs() < 1e-12);
    }
}

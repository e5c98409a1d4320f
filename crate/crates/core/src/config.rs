//! Flat `key = value` configuration covering every exercise.
//!
//! Lines starting with `#` are comments. Unknown keys are rejected so a
//! typo never silently falls back to a default.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::engine::EngineConfig;
use crate::flow::FlowConfig;
use crate::kinematics::SideAggregation;
use crate::phase::ThresholdBand;
use crate::pose::ExerciseKind;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`: {reason}")]
    Value {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub confidence_threshold: f64,
    pub pause_timeout: f64,
    pub phase_window: usize,
    pub side: SideAggregation,
    /// Indexed like [`ExerciseKind::ALL`].
    pub bands: [ThresholdBand; 3],
    pub flow: FlowConfig,
}

impl Default for Settings {
    fn default() -> Self {
        let base = EngineConfig::for_exercise(ExerciseKind::Squat);
        Self {
            confidence_threshold: base.confidence_threshold,
            pause_timeout: base.pause_timeout,
            phase_window: base.phase_window_capacity,
            side: base.sides,
            bands: ExerciseKind::ALL.map(ThresholdBand::for_exercise),
            flow: base.flow,
        }
    }
}

fn band_index(kind: ExerciseKind) -> usize {
    ExerciseKind::ALL.iter().position(|&k| k == kind).unwrap()
}

impl Settings {
    pub fn band(&self, kind: ExerciseKind) -> ThresholdBand {
        self.bands[band_index(kind)]
    }

    pub fn engine_config(&self, kind: ExerciseKind) -> EngineConfig {
        EngineConfig {
            confidence_threshold: self.confidence_threshold,
            pause_timeout: self.pause_timeout,
            threshold_band: self.band(kind),
            phase_window_capacity: self.phase_window,
            sides: self.side,
            flow: self.flow.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for kind in ExerciseKind::ALL {
            self.engine_config(kind)
                .validate()
                .map_err(|e| ConfigError::Invalid(format!("{kind}: {e}")))?;
        }
        Ok(())
    }

    /// Parses a config file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        let mut lows = s.bands.map(|b| b.lower());
        let mut highs = s.bands.map(|b| b.upper());
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            let err = |reason: String| ConfigError::Value {
                line,
                key: key.to_string(),
                value: value.to_string(),
                reason,
            };
            fn get<T: FromStr>(v: &str) -> Result<T, String>
            where
                T::Err: std::fmt::Display,
            {
                v.parse::<T>().map_err(|e| e.to_string())
            }
            match key {
                "confidence_threshold" => s.confidence_threshold = get(value).map_err(err)?,
                "pause_timeout" => s.pause_timeout = get(value).map_err(err)?,
                "phase_window" => s.phase_window = get(value).map_err(err)?,
                "side" => s.side = get(value).map_err(err)?,
                "flow.movement_threshold" => s.flow.movement_threshold = get(value).map_err(err)?,
                "flow.reseed_interval" => s.flow.reseed_interval = get(value).map_err(err)?,
                "flow.lk_window" => s.flow.lk_window = get(value).map_err(err)?,
                "flow.lk_iterations" => s.flow.lk_iterations = get(value).map_err(err)?,
                "flow.min_eigen" => s.flow.min_eigen = get(value).map_err(err)?,
                "flow.lk_min_eigen" => s.flow.lk_min_eigen = get(value).map_err(err)?,
                "flow.axis" => s.flow.axis = get(value).map_err(err)?,
                "flow.smoothing_window" => s.flow.smoothing_capacity = get(value).map_err(err)?,
                "flow.max_features" => s.flow.max_features = get(value).map_err(err)?,
                "flow.min_distance" => s.flow.min_distance = get(value).map_err(err)?,
                _ => {
                    let parsed = key.split_once('.').and_then(|(ex, bound)| {
                        let kind = ExerciseKind::ALL.into_iter().find(|k| k.name() == ex)?;
                        Some((band_index(kind), bound))
                    });
                    match parsed {
                        Some((i, "lower")) => lows[i] = get(value).map_err(err)?,
                        Some((i, "upper")) => highs[i] = get(value).map_err(err)?,
                        _ => {
                            return Err(ConfigError::UnknownKey {
                                line,
                                key: key.to_string(),
                            })
                        }
                    }
                }
            }
        }
        for i in 0..3 {
            s.bands[i] = ThresholdBand::new(lows[i], highs[i], s.bands[i].inverted())
                .map_err(|e| ConfigError::Invalid(format!("{}: {e}", ExerciseKind::ALL[i])))?;
        }
        s.validate()?;
        Ok(s)
    }

    /// Writes every key; `parse(dump())` reproduces `self`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let f = &self.flow;
        let _ = writeln!(out, "confidence_threshold = {}", self.confidence_threshold);
        let _ = writeln!(out, "pause_timeout = {}", self.pause_timeout);
        let _ = writeln!(out, "phase_window = {}", self.phase_window);
        let _ = writeln!(out, "side = {}", self.side.name());
        for kind in ExerciseKind::ALL {
            let b = self.band(kind);
            let _ = writeln!(out, "{}.lower = {}", kind.name(), b.lower());
            let _ = writeln!(out, "{}.upper = {}", kind.name(), b.upper());
        }
        let _ = writeln!(out, "flow.movement_threshold = {}", f.movement_threshold);
        let _ = writeln!(out, "flow.reseed_interval = {}", f.reseed_interval);
        let _ = writeln!(out, "flow.lk_window = {}", f.lk_window);
        let _ = writeln!(out, "flow.lk_iterations = {}", f.lk_iterations);
        let _ = writeln!(out, "flow.min_eigen = {}", f.min_eigen);
        let _ = writeln!(out, "flow.lk_min_eigen = {}", f.lk_min_eigen);
        let _ = writeln!(out, "flow.axis = {}", f.axis.name());
        let _ = writeln!(out, "flow.smoothing_window = {}", f.smoothing_capacity);
        let _ = writeln!(out, "flow.max_features = {}", f.max_features);
        let _ = writeln!(out, "flow.min_distance = {}", f.min_distance);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let s = Settings::default();
        assert_eq!(Settings::parse(&s.dump()).unwrap(), s);
        assert_eq!(Settings::parse("").unwrap(), s);
    }

    #[test]
    fn defaults_match_engine_defaults() {
        let s = Settings::default();
        for kind in ExerciseKind::ALL {
            assert_eq!(s.engine_config(kind), EngineConfig::for_exercise(kind));
        }
    }

    #[test]
    fn overrides_apply() {
        let s = Settings::parse("# tuned\nconfidence_threshold = 0.6\npullup.lower = 90 # tighter\nflow.axis=horizontal\n").unwrap();
        assert_eq!(s.confidence_threshold, 0.6);
        let b = s.band(ExerciseKind::PullUp);
        assert_eq!((b.lower(), b.upper(), b.inverted()), (90.0, 150.0, true));
        assert_eq!(s.flow.axis, crate::flow::MovementAxis::Horizontal);
        assert_eq!(Settings::parse(&s.dump()).unwrap(), s);
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(Settings::parse("a\n"), Err(ConfigError::Syntax { line: 1 }));
        assert!(matches!(
            Settings::parse("\nsquat.middle = 3"),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            Settings::parse("phase_window = x"),
            Err(ConfigError::Value { line: 1, .. })
        ));
        assert!(matches!(
            Settings::parse("squat.lower = 160"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            Settings::parse("confidence_threshold = 2"),
            Err(ConfigError::Invalid(_))
        ));
    }
}

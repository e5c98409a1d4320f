pub mod count;
pub mod eval;
pub mod flow;
pub mod synth;

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use repcount_core::{Settings, SideAggregation};

use crate::{config_err, input_err, Failure};

/// Config file plus per-flag overrides.
#[derive(Debug, clap::Args)]
pub struct ConfigArgs {
    /// Key-value config file; unspecified keys keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub confidence_threshold: Option<f64>,
    /// Seconds of low pose confidence before transitions pause.
    #[arg(long)]
    pub pause_timeout: Option<f64>,
    /// Phase smoothing window length.
    #[arg(long)]
    pub phase_window: Option<usize>,
    /// Which side's joint angle to use: mean, left or right.
    #[arg(long)]
    pub side: Option<SideAggregation>,
    /// Minimum per-frame flow displacement in pixels.
    #[arg(long)]
    pub movement_threshold: Option<f64>,
}

impl ConfigArgs {
    pub fn settings(&self) -> Result<Settings, Failure> {
        let mut s = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))
                    .map_err(input_err)?;
                Settings::parse(&text)
                    .with_context(|| format!("config {}", path.display()))
                    .map_err(config_err)?
            }
            None => Settings::default(),
        };
        if let Some(v) = self.confidence_threshold {
            s.confidence_threshold = v;
        }
        if let Some(v) = self.pause_timeout {
            s.pause_timeout = v;
        }
        if let Some(v) = self.phase_window {
            s.phase_window = v;
        }
        if let Some(v) = self.side {
            s.side = v;
        }
        if let Some(v) = self.movement_threshold {
            s.flow.movement_threshold = v;
        }
        s.validate().map_err(config_err)?;
        Ok(s)
    }
}

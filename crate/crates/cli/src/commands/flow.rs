use std::collections::BTreeMap;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use repcount_core::flow::io::read_frames;
use repcount_core::{FlowTracker, MovementPhase};

use super::ConfigArgs;
use crate::{config_err, input_err, Outcome};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Frame sequence: a directory of PGM files or a raw frame stream.
    #[arg(long)]
    pub frames: PathBuf,
    /// Frame rate of a PGM directory (streams carry their own).
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    /// Phase assumed before the first frame pair.
    #[arg(long, default_value = "top")]
    pub initial_phase: MovementPhase,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Prints one line per frame pair: timestamp, tracked points, mean axis
/// displacement, raw and smoothed direction, and the resulting phase.
pub fn run(args: Args) -> Outcome {
    if !(args.fps > 0.0) {
        return Err(config_err(anyhow!("--fps must be > 0")));
    }
    let settings = args.config.settings()?;
    let frames = read_frames(&args.frames, args.fps)
        .with_context(|| format!("frames {}", args.frames.display()))
        .map_err(input_err)?;
    let mut tracker = FlowTracker::new(settings.flow.clone());
    let mut phase = args.initial_phase;
    let mut directions = BTreeMap::new();
    let mut out = BufWriter::new(io::stdout().lock());
    let write_err = |e: io::Error| input_err(anyhow!(e).context("writing diagnostics"));
    writeln!(out, "#t\ttracked\tmean_disp\traw\tsmoothed\tphase").map_err(write_err)?;
    for pair in frames.windows(2) {
        let update = tracker
            .update(&pair[0], &pair[1], phase)
            .map_err(input_err)?;
        phase = update.phase;
        *directions.entry(update.smoothed.name()).or_insert(0usize) += 1;
        writeln!(
            out,
            "{:.6}\t{}\t{:.3}\t{}\t{}\t{}",
            pair[1].timestamp,
            update.tracked,
            update.mean_axis_displacement,
            update.raw,
            update.smoothed,
            update.phase
        )
        .map_err(write_err)?;
    }
    out.flush().map_err(write_err)?;
    let summary: Vec<String> = directions.iter().map(|(d, n)| format!("{d}={n}")).collect();
    eprintln!(
        "{} frame pairs; smoothed directions: {}",
        frames.len().saturating_sub(1),
        summary.join(" ")
    );
    Ok(())
}

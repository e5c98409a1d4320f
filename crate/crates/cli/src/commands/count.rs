use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use repcount_core::engine::DEBUG_HEADER;
use repcount_core::flow::io::read_frames;
use repcount_core::pose::read_trace;
use repcount_core::synth::read_manifest;
use repcount_core::{replay, ExerciseKind, GrayFrame, PoseFrame, RepSession, Settings};

use super::ConfigArgs;
use crate::{config_err, input_err, Failure, Outcome};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// squat, pushup or pullup.
    #[arg(long, required_unless_present_any = ["dump_config", "manifest"])]
    pub exercise: Option<ExerciseKind>,
    /// Pose trace (JSON lines).
    #[arg(long, conflicts_with = "manifest")]
    pub trace: Option<PathBuf>,
    /// Frame sequence: a directory of PGM files or a raw frame stream.
    #[arg(long, conflicts_with = "manifest")]
    pub frames: Option<PathBuf>,
    /// Frame rate of a PGM directory (streams carry their own).
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    /// Debug log path; with --manifest, a directory receiving one log per label.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report the step at which this many repetitions were reached.
    #[arg(long, conflicts_with = "manifest")]
    pub target_reps: Option<u32>,
    /// Count every row of a synthetic-data manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Where to write `label<TAB>predicted` rows in manifest mode (default stdout).
    #[arg(long, requires = "manifest")]
    pub results: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub dump_config: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(args: Args) -> Outcome {
    let settings = args.config.settings()?;
    if args.dump_config {
        print!("{}", settings.dump());
        return Ok(());
    }
    if let Some(manifest) = &args.manifest {
        return run_manifest(&args, &settings, manifest);
    }
    let exercise = args.exercise.expect("clap enforces --exercise");
    if args.trace.is_none() && args.frames.is_none() {
        return Err(config_err(anyhow!("need --trace and/or --frames")));
    }
    if !(args.fps > 0.0) {
        return Err(config_err(anyhow!("--fps must be > 0")));
    }
    let poses = match &args.trace {
        Some(path) => load_trace(path)?,
        None => Vec::new(),
    };
    let frames = match &args.frames {
        Some(path) => load_frames(path, args.fps)?,
        None => Vec::new(),
    };
    let mut log = open_log(args.out.as_deref())?;
    let summary = count_one(
        exercise,
        &settings,
        &poses,
        &frames,
        log.as_mut(),
        args.target_reps,
    )?;

    println!("count={}", summary.count);
    if let Some(target) = args.target_reps {
        match summary.target_step {
            Some((step, t)) => println!("target_reps={target} reached_at_step={step} t={t:.6}"),
            None => println!("target_reps={target} reached_at_step=-"),
        }
    }
    eprintln!("{}", summary.throughput());
    Ok(())
}

fn load_trace(path: &Path) -> Result<Vec<PoseFrame>, Failure> {
    let file = File::open(path)
        .with_context(|| format!("opening trace {}", path.display()))
        .map_err(input_err)?;
    read_trace(BufReader::new(file))
        .with_context(|| format!("trace {}", path.display()))
        .map_err(input_err)
}

fn load_frames(path: &Path, fps: f64) -> Result<Vec<GrayFrame>, Failure> {
    read_frames(path, fps)
        .with_context(|| format!("frames {}", path.display()))
        .map_err(input_err)
}

fn open_log(path: Option<&Path>) -> Result<Option<BufWriter<File>>, Failure> {
    path.map(|p| {
        File::create(p)
            .with_context(|| format!("creating debug log {}", p.display()))
            .map(BufWriter::new)
            .map_err(input_err)
    })
    .transpose()
}

struct Summary {
    count: u32,
    steps: usize,
    seconds: f64,
    target_step: Option<(usize, f64)>,
}

impl Summary {
    fn throughput(&self) -> String {
        let fps = if self.seconds > 0.0 {
            self.steps as f64 / self.seconds
        } else {
            f64::INFINITY
        };
        format!(
            "processed {} steps in {:.3} s ({fps:.1} frames/s)",
            self.steps, self.seconds
        )
    }
}

fn count_one(
    exercise: ExerciseKind,
    settings: &Settings,
    poses: &[PoseFrame],
    frames: &[GrayFrame],
    mut log: Option<&mut BufWriter<File>>,
    target: Option<u32>,
) -> Result<Summary, Failure> {
    let mut session =
        RepSession::new(exercise, settings.engine_config(exercise)).map_err(config_err)?;
    if let Some(w) = log.as_deref_mut() {
        writeln!(w, "{DEBUG_HEADER}").map_err(input_err)?;
    }
    let mut steps = 0;
    let mut target_step = None;
    let mut write_err: Option<io::Error> = None;
    let start = Instant::now();
    replay(&mut session, poses, frames, |i, out| {
        steps += 1;
        if target_step.is_none() && target.is_some_and(|n| out.count >= n) {
            target_step = Some((i, out.timestamp));
        }
        if let (Some(w), None) = (log.as_deref_mut(), &write_err) {
            if let Err(e) = writeln!(w, "{}", out.debug_line()) {
                write_err = Some(e);
            }
        }
    })
    .context("replay")
    .map_err(input_err)?;
    let seconds = start.elapsed().as_secs_f64();
    if let Some(e) = write_err {
        return Err(input_err(anyhow!(e).context("writing debug log")));
    }
    if let Some(w) = log {
        w.flush().context("writing debug log").map_err(input_err)?;
    }
    Ok(Summary {
        count: session.count(),
        steps,
        seconds,
        target_step,
    })
}

fn run_manifest(args: &Args, settings: &Settings, manifest: &Path) -> Outcome {
    let file = File::open(manifest)
        .with_context(|| format!("opening manifest {}", manifest.display()))
        .map_err(input_err)?;
    let rows = read_manifest(BufReader::new(file))
        .map_err(|e| anyhow!(e).context(format!("manifest {}", manifest.display())))
        .map_err(input_err)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(input_err)?;
    }

    let mut results = String::from("label\tpredicted\n");
    let (mut steps, mut seconds) = (0, 0.0);
    for row in &rows {
        if row.trace.is_none() && row.frames.is_none() {
            return Err(input_err(anyhow!(
                "manifest row `{}` names no trace or frames",
                row.label
            )));
        }
        let poses = match &row.trace {
            Some(rel) => load_trace(&base.join(rel))?,
            None => Vec::new(),
        };
        let frames = match &row.frames {
            Some(rel) => load_frames(&base.join(rel), row.profile.fps)?,
            None => Vec::new(),
        };
        let mut log = open_log(
            args.out
                .as_ref()
                .map(|d| d.join(format!("{}.log", row.label)))
                .as_deref(),
        )?;
        let s = count_one(
            row.profile.exercise,
            settings,
            &poses,
            &frames,
            log.as_mut(),
            None,
        )?;
        steps += s.steps;
        seconds += s.seconds;
        results.push_str(&format!("{}\t{}\n", row.label, s.count));
    }
    match &args.results {
        Some(path) => fs::write(path, &results)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(input_err)?,
        None => print!("{results}"),
    }
    let total = Summary {
        count: 0,
        steps,
        seconds,
        target_step: None,
    };
    eprintln!("{} trials; {}", rows.len(), total.throughput());
    Ok(())
}

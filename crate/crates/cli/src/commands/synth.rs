use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repcount_core::flow::io::write_pgm_dir;
use repcount_core::pose::write_trace;
use repcount_core::synth::{
    gen_frame_sequence, gen_pose_trace, write_manifest, ConfidenceProfile, ManifestRow,
    MotionProfile, RenderConfig,
};
use repcount_core::ExerciseKind;

use crate::{config_err, input_err, Outcome};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub exercise: ExerciseKind,
    #[arg(long, default_value_t = 10)]
    pub reps: u32,
    /// Seconds per repetition.
    #[arg(long, default_value_t = 2.0)]
    pub period: f64,
    /// Contracted joint angle in degrees (exercise default if omitted).
    #[arg(long)]
    pub angle_min: Option<f64>,
    /// Extended joint angle in degrees (exercise default if omitted).
    #[arg(long)]
    pub angle_max: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub hold_fraction: f64,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    /// Gaussian keypoint noise in pixels.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    /// Per-frame probability of one limb keypoint dropping below the gate.
    #[arg(long, default_value_t = 0.0)]
    pub dropout_rate: f64,
    #[arg(long, default_value_t = 0.95)]
    pub confidence_base: f64,
    #[arg(long, default_value_t = 0.1)]
    pub confidence_dip: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for traces, frames and `manifest.tsv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Also render a PGM frame sequence per trial.
    #[arg(long)]
    pub frames: bool,
    /// Skip the pose trace (frames only).
    #[arg(long, requires = "frames")]
    pub no_trace: bool,
    /// Peak subject speed of rendered frames in pixels per frame.
    #[arg(long, default_value_t = 6.0)]
    pub speed: f64,
    /// Number of trials; trial `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    pub batch: u32,
    /// In a batch, draw reps uniformly from `reps..=reps_max`.
    #[arg(long)]
    pub reps_max: Option<u32>,
    /// In a batch, draw the period uniformly from `period..=period_max`.
    #[arg(long)]
    pub period_max: Option<f64>,
}

pub fn run(args: Args) -> Outcome {
    let reps_max = args.reps_max.unwrap_or(args.reps);
    let period_max = args.period_max.unwrap_or(args.period);
    if reps_max < args.reps || !(period_max >= args.period) {
        return Err(config_err(anyhow!(
            "--reps-max/--period-max must not be below --reps/--period"
        )));
    }
    if args.batch == 0 {
        return Err(config_err(anyhow!("--batch must be >= 1")));
    }
    let base = profile(&args, args.reps, args.period);
    base.validate().map_err(config_err)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(input_err)?;
    let mut draws = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows = Vec::with_capacity(args.batch as usize);
    for i in 0..args.batch {
        let seed = args.seed.wrapping_add(i as u64);
        let reps = draws.random_range(args.reps..=reps_max);
        let period = if period_max > args.period {
            draws.random_range(args.period..=period_max)
        } else {
            args.period
        };
        let profile = profile(&args, reps, period);
        let label = format!("{}-{:04}", args.exercise, i);

        let trace = if args.no_trace {
            None
        } else {
            let t = gen_pose_trace(&profile, seed).map_err(config_err)?;
            let name = format!("{label}.jsonl");
            let path = args.out.join(&name);
            let file = File::create(&path)
                .with_context(|| format!("creating {}", path.display()))
                .map_err(input_err)?;
            write_trace(BufWriter::new(file), &t.frames)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(input_err)?;
            Some(name)
        };
        let frames = if args.frames {
            let render = RenderConfig {
                travel_px: RenderConfig::travel_for_speed(&profile, args.speed),
                ..RenderConfig::default()
            };
            let seq = gen_frame_sequence(&profile, &render, seed).map_err(config_err)?;
            let name = format!("{label}.frames");
            write_pgm_dir(&args.out.join(&name), &seq.frames).map_err(input_err)?;
            Some(name)
        } else {
            None
        };
        rows.push(ManifestRow {
            label,
            profile,
            seed,
            trace,
            frames,
        });
    }

    let path = args.out.join("manifest.tsv");
    let file = File::create(&path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(input_err)?;
    write_manifest(BufWriter::new(file), &rows)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(input_err)?;
    println!("wrote {} trials to {}", rows.len(), args.out.display());
    Ok(())
}

fn profile(args: &Args, reps: u32, period: f64) -> MotionProfile {
    let mut p = MotionProfile::new(args.exercise, reps, period);
    if let Some(v) = args.angle_min {
        p.angle_min = v;
    }
    if let Some(v) = args.angle_max {
        p.angle_max = v;
    }
    p.hold_fraction = args.hold_fraction;
    p.fps = args.fps;
    p.noise_sigma = args.noise_sigma;
    p.dropout_rate = args.dropout_rate;
    p.confidence = ConfidenceProfile {
        base: args.confidence_base,
        dip_rate: args.confidence_dip,
    };
    p
}

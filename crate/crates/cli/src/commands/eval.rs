use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use repcount_core::metrics::{
    aggregate_with, join_on_label, render_key_values, render_table, LabeledTable, TrialPrecision,
};
use repcount_core::TrialRecord;

use crate::{config_err, input_err, Failure, Outcome};

const ACTUAL_COLUMNS: &[&str] = &["actual", "reps"];
const PREDICTED_COLUMNS: &[&str] = &["predicted", "count"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Kv,
    Both,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Ground truth: a tab-separated table with `label` and `actual` (or `reps`) columns.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Predictions: `label` and `predicted` (or `count`) columns. Defaults to
    /// the manifest itself, for files carrying both columns.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Truncate each trial's accuracy to this many decimals before averaging.
    #[arg(long)]
    pub trial_decimals: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

fn load(path: &Path) -> Result<LabeledTable, Failure> {
    let file = File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(input_err)?;
    LabeledTable::read(BufReader::new(file))
        .map_err(|e| anyhow!(e).context(path.display().to_string()))
        .map_err(input_err)
}

pub fn run(args: Args) -> Outcome {
    let precision = match args.trial_decimals {
        Some(d) if d > 9 => return Err(config_err(anyhow!("--trial-decimals must be <= 9"))),
        Some(d) => TrialPrecision::Truncated(d),
        None => TrialPrecision::Exact,
    };
    let truth = load(&args.manifest)?;
    let predictions = match &args.results {
        Some(path) => load(path)?,
        None => truth.clone(),
    };
    let ctx = |path: &Path| {
        let shown = path.display().to_string();
        move |e: String| input_err(anyhow!(e).context(shown))
    };
    let actual = truth.counts(ACTUAL_COLUMNS).map_err(ctx(&args.manifest))?;
    let predicted = predictions
        .counts(PREDICTED_COLUMNS)
        .map_err(ctx(args.results.as_deref().unwrap_or(&args.manifest)))?;

    let joined = join_on_label(&actual, &predicted);
    if !joined.missing_prediction.is_empty() || !joined.missing_truth.is_empty() {
        let mut msg = String::from("unmatched labels");
        if !joined.missing_prediction.is_empty() {
            msg.push_str(&format!(
                "; no prediction for: {}",
                joined.missing_prediction.join(", ")
            ));
        }
        if !joined.missing_truth.is_empty() {
            msg.push_str(&format!(
                "; no ground truth for: {}",
                joined.missing_truth.join(", ")
            ));
        }
        return Err(input_err(anyhow!(msg)));
    }

    let groups = group_trials(&truth, joined.trials);
    let mut reports = Vec::new();
    for (name, trials) in &groups {
        let r = aggregate_with(trials, precision)
            .with_context(|| format!("group {name}"))
            .map_err(input_err)?;
        reports.push((name.clone(), r));
    }
    if groups.len() > 1 {
        let all: Vec<TrialRecord> = groups.values().flatten().cloned().collect();
        reports.push((
            "all".to_string(),
            aggregate_with(&all, precision).map_err(input_err)?,
        ));
    }

    if matches!(args.format, Format::Table | Format::Both) {
        print!("{}", render_table(&reports));
    }
    if args.format == Format::Both {
        println!();
    }
    if matches!(args.format, Format::Kv | Format::Both) {
        for (name, r) in &reports {
            print!("{}", render_key_values(name, r));
        }
    }
    Ok(())
}

/// Splits trials by the manifest's `exercise` column when it has one.
fn group_trials(
    truth: &LabeledTable,
    trials: Vec<TrialRecord>,
) -> BTreeMap<String, Vec<TrialRecord>> {
    let mut groups: BTreeMap<String, Vec<TrialRecord>> = BTreeMap::new();
    let exercise_of: BTreeMap<&str, &str> =
        match (truth.column(&["label"]), truth.column(&["exercise"])) {
            (Some(l), Some(e)) => truth
                .rows
                .iter()
                .map(|r| (r[l].as_str(), r[e].as_str()))
                .collect(),
            _ => BTreeMap::new(),
        };
    for t in trials {
        let group = exercise_of
            .get(t.label.as_str())
            .copied()
            .unwrap_or("all")
            .to_string();
        groups.entry(group).or_default().push(t);
    }
    groups
}

//! Counting accuracy, off-by-one accuracy, MAE and their aggregation.
//!
//! Per-trial accuracy is `1 - |actual - predicted| / actual` and is not
//! clamped, so heavy over-counting goes negative. Absolute accuracy pools
//! all trials first: `1 - |sum(actual) - sum(predicted)| / sum(actual)`.

use std::collections::BTreeMap;
use std::io::BufRead;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("trial `{0}` has zero actual repetitions; accuracy is undefined")]
    ZeroActual(String),
    #[error("no trials to aggregate")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub label: String,
    pub actual: u32,
    pub predicted: u32,
}

impl TrialRecord {
    pub fn new(label: impl Into<String>, actual: u32, predicted: u32) -> Self {
        Self {
            label: label.into(),
            actual,
            predicted,
        }
    }

    pub fn abs_diff(&self) -> u32 {
        self.actual.abs_diff(self.predicted)
    }
}

pub fn trial_accuracy(trial: &TrialRecord) -> Result<f64, MetricsError> {
    if trial.actual == 0 {
        return Err(MetricsError::ZeroActual(trial.label.clone()));
    }
    Ok(1.0 - trial.abs_diff() as f64 / trial.actual as f64)
}

pub fn trial_obo(trial: &TrialRecord) -> u32 {
    u32::from(trial.abs_diff() <= 1)
}

/// How per-trial accuracies enter the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrialPrecision {
    #[default]
    Exact,
    /// Truncate each trial's accuracy to this many decimals before
    /// averaging, as hand-tabulated results usually are.
    Truncated(u32),
}

impl TrialPrecision {
    fn apply(self, value: f64) -> f64 {
        match self {
            TrialPrecision::Exact => value,
            TrialPrecision::Truncated(d) => {
                let scale = 10f64.powi(d as i32);
                // nudge so exact decimals like 0.57 are not truncated to 0.56
                ((value * scale) + 1e-9).floor() / scale
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub trials: usize,
    pub mean_accuracy: f64,
    pub mean_obo: f64,
    pub absolute_accuracy: f64,
    pub mae: f64,
    pub total_actual: u64,
    pub total_predicted: u64,
}

pub fn aggregate(trials: &[TrialRecord]) -> Result<MetricsReport, MetricsError> {
    aggregate_with(trials, TrialPrecision::Exact)
}

pub fn aggregate_with(
    trials: &[TrialRecord],
    precision: TrialPrecision,
) -> Result<MetricsReport, MetricsError> {
    if trials.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = trials.len() as f64;
    let mut acc_sum = 0.0;
    let mut err_sum = 0.0;
    let mut obo_sum = 0u32;
    let (mut total_actual, mut total_predicted) = (0u64, 0u64);
    for t in trials {
        let acc = trial_accuracy(t)?;
        acc_sum += precision.apply(acc);
        err_sum += 1.0 - acc;
        obo_sum += trial_obo(t);
        total_actual += t.actual as u64;
        total_predicted += t.predicted as u64;
    }
    Ok(MetricsReport {
        trials: trials.len(),
        mean_accuracy: acc_sum / n,
        mean_obo: obo_sum as f64 / n,
        absolute_accuracy: 1.0
            - total_actual.abs_diff(total_predicted) as f64 / total_actual as f64,
        mae: err_sum / n,
        total_actual,
        total_predicted,
    })
}

fn pct(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

/// Renders reports as an aligned text table, one row per group.
pub fn render_table(rows: &[(String, MetricsReport)]) -> String {
    let header = [
        "Group",
        "Trials",
        "# Actual",
        "# Predicted",
        "Mean Accuracy",
        "Mean OBO",
        "Absolute Accuracy",
        "MAE",
    ];
    let body: Vec<[String; 8]> = rows
        .iter()
        .map(|(name, r)| {
            [
                name.clone(),
                r.trials.to_string(),
                r.total_actual.to_string(),
                r.total_predicted.to_string(),
                pct(r.mean_accuracy),
                pct(r.mean_obo),
                pct(r.absolute_accuracy),
                format!("{:.4}", r.mae),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: &[&str], out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&header, &mut out);
    for row in &body {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&cells, &mut out);
    }
    out
}

/// Machine-readable `key=value` block; keys are prefixed with `prefix.`
/// when `prefix` is non-empty.
pub fn render_key_values(prefix: &str, r: &MetricsReport) -> String {
    let p = if prefix.is_empty() {
        String::new()
    } else {
        format!("{prefix}.")
    };
    format!(
        "{p}trials={}\n{p}actual_total={}\n{p}predicted_total={}\n{p}mean_accuracy={:.6}\n{p}mean_obo={:.6}\n{p}absolute_accuracy={:.6}\n{p}mae={:.6}\n",
        r.trials, r.total_actual, r.total_predicted, r.mean_accuracy, r.mean_obo, r.absolute_accuracy, r.mae
    )
}

/// Parses tab-separated trial lines `label<TAB>actual<TAB>predicted`.
/// Blank lines, `#` comments and a leading `label` header row are skipped.
pub fn read_trials<R: BufRead>(r: R) -> Result<Vec<TrialRecord>, String> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if out.is_empty() && f[0] == "label" {
            continue;
        }
        if f.len() != 3 {
            return Err(format!("line {}: expected label, actual, predicted", n + 1));
        }
        let count = |s: &str| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| format!("line {}: bad count `{s}`", n + 1))
        };
        out.push(TrialRecord::new(f[0], count(f[1])?, count(f[2])?));
    }
    Ok(out)
}

/// A tab-separated table with a header row naming its columns.
#[derive(Debug, Clone, Default)]
pub struct LabeledTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl LabeledTable {
    pub fn read<R: BufRead>(r: R) -> Result<Self, String> {
        let mut table = LabeledTable::default();
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() || (line.starts_with('#') && !table.columns.is_empty()) {
                continue;
            }
            let fields: Vec<String> = line
                .trim_start_matches('#')
                .split('\t')
                .map(|s| s.trim().to_string())
                .collect();
            if table.columns.is_empty() {
                table.columns = fields;
                continue;
            }
            if fields.len() != table.columns.len() {
                return Err(format!(
                    "line {}: expected {} fields, found {}",
                    n + 1,
                    table.columns.len(),
                    fields.len()
                ));
            }
            table.rows.push(fields);
        }
        Ok(table)
    }

    pub fn column(&self, names: &[&str]) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| names.contains(&c.as_str()))
    }

    /// `label -> count` from the named count column.
    pub fn counts(&self, names: &[&str]) -> Result<BTreeMap<String, u32>, String> {
        let label = self.column(&["label"]).ok_or("missing `label` column")?;
        let value = self
            .column(names)
            .ok_or_else(|| format!("missing count column (one of {})", names.join(", ")))?;
        let mut out = BTreeMap::new();
        for row in &self.rows {
            let v = row[value]
                .parse::<u32>()
                .map_err(|_| format!("bad count `{}` for `{}`", row[value], row[label]))?;
            if out.insert(row[label].clone(), v).is_some() {
                return Err(format!("duplicate label `{}`", row[label]));
            }
        }
        Ok(out)
    }
}

/// Trials joined by label, plus labels present on only one side.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Joined {
    pub trials: Vec<TrialRecord>,
    pub missing_prediction: Vec<String>,
    pub missing_truth: Vec<String>,
}

pub fn join_on_label(actual: &BTreeMap<String, u32>, predicted: &BTreeMap<String, u32>) -> Joined {
    let mut joined = Joined::default();
    for (label, &a) in actual {
        match predicted.get(label) {
            Some(&p) => joined.trials.push(TrialRecord::new(label.clone(), a, p)),
            None => joined.missing_prediction.push(label.clone()),
        }
    }
    joined.missing_truth = predicted
        .keys()
        .filter(|k| !actual.contains_key(*k))
        .cloned()
        .collect();
    joined
}

//! CSV outputs of runs and sweeps, and the readers the plotter uses.
//!
//! Every file starts with a `# coopsearch-<kind> v1` schema line followed by a header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::coord::Mode;

use super::sweep::SweepResult;
use super::{ScenarioConfig, SimError, TrialMetrics};

const ENTROPY_SCHEMA: &str = "# coopsearch-entropy v1";
const ENTROPY_HEADER: &str = "step,entropy";
const MODES_SCHEMA: &str = "# coopsearch-modes v1";
const MODES_HEADER: &str = "step,robot,mode";
const TARGETS_SCHEMA: &str = "# coopsearch-targets v1";
const TARGETS_HEADER: &str = "step,true,false";
const ERRORS_SCHEMA: &str = "# coopsearch-errors v1";
const ERRORS_HEADER: &str = "kind,x,y,error";
const SUMMARY_SCHEMA: &str = "# coopsearch-sweep-summary v1";
const SUMMARY_HEADER: &str = "axis,value,trials,final_entropy_mean,final_entropy_std,true_mean,true_std,false_mean,false_std,mean_error_mean,explore_mean,explore_std,checkin_mean,checkin_std,exploit_mean,exploit_std";
const SERIES_SCHEMA: &str = "# coopsearch-sweep-series v1";
const SERIES_HEADER: &str = "value,step,entropy_mean,entropy_std,true_mean,true_std,false_mean,false_std";

/// Aggregate of one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub axis: String,
    pub value: String,
    pub trials: usize,
    pub final_entropy: (f64, f64),
    pub true_targets: (f64, f64),
    pub false_targets: (f64, f64),
    /// Mean over trials of the mean matched error (trials without matches are skipped).
    pub mean_error: f64,
    pub explore: (f64, f64),
    pub checkin: (f64, f64),
    pub exploit: (f64, f64),
}

/// Per-step aggregate of one sweep value: `(mean, std)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub value: String,
    pub step: usize,
    pub entropy: (f64, f64),
    pub true_targets: (f64, f64),
    pub false_targets: (f64, f64),
}

fn write_file(path: &Path, text: &str) -> Result<PathBuf, SimError> {
    fs::write(path, text).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

/// Writes `entropy.csv`, `modes.csv`, `targets.csv`, `errors.csv`, `summary.txt`,
/// `scenario.toml` (all deterministic) and `timing.txt` (wall-clock) into `dir`.
pub fn write_run(dir: &Path, m: &TrialMetrics, config: &ScenarioConfig) -> Result<Vec<PathBuf>, SimError> {
    fs::create_dir_all(dir).map_err(|e| SimError::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();

    let mut s = format!("{ENTROPY_SCHEMA}\n{ENTROPY_HEADER}\n0,{}\n", m.initial_entropy);
    for (t, h) in m.entropy.iter().enumerate() {
        let _ = writeln!(s, "{},{h}", t + 1);
    }
    files.push(write_file(&dir.join("entropy.csv"), &s)?);

    let mut s = format!("{MODES_SCHEMA}\n{MODES_HEADER}\n");
    for (t, modes) in m.modes.iter().enumerate() {
        for (r, mode) in modes.iter().enumerate() {
            let _ = writeln!(s, "{},{r},{mode}", t + 1);
        }
    }
    files.push(write_file(&dir.join("modes.csv"), &s)?);

    let mut s = format!("{TARGETS_SCHEMA}\n{TARGETS_HEADER}\n");
    for (t, (tt, ff)) in m.true_targets.iter().zip(&m.false_targets).enumerate() {
        let _ = writeln!(s, "{},{tt},{ff}", t + 1);
    }
    files.push(write_file(&dir.join("targets.csv"), &s)?);

    let mut s = format!("{ERRORS_SCHEMA}\n{ERRORS_HEADER}\n");
    let mut matched_est = vec![false; m.estimates.len()];
    let mut matched_truth = vec![false; m.targets.len()];
    for (&(e, t), err) in m.final_match.pairs.iter().zip(&m.final_match.errors) {
        matched_est[e] = true;
        matched_truth[t] = true;
        let _ = writeln!(s, "true,{},{},{err}", m.estimates[e].x, m.estimates[e].y);
    }
    for (_, p) in m.estimates.iter().enumerate().filter(|(e, _)| !matched_est[*e]) {
        let _ = writeln!(s, "false,{},{},", p.x, p.y);
    }
    for (_, p) in m.targets.iter().enumerate().filter(|(t, _)| !matched_truth[*t]) {
        let _ = writeln!(s, "missed,{},{},", p.x, p.y);
    }
    files.push(write_file(&dir.join("errors.csv"), &s)?);

    let mut s = String::new();
    let _ = writeln!(s, "seed = {}", m.seed);
    let _ = writeln!(s, "steps = {}", m.steps());
    let _ = writeln!(s, "team_size = {}", m.team_size);
    let _ = writeln!(s, "initial_entropy = {}", m.initial_entropy);
    let _ = writeln!(s, "final_entropy = {}", m.final_entropy());
    let _ = writeln!(s, "true_targets = {}", m.final_true());
    let _ = writeln!(s, "false_targets = {}", m.final_false());
    match m.mean_error() {
        Some(e) => {
            let _ = writeln!(s, "mean_error = {e}");
        }
        None => {
            let _ = writeln!(s, "mean_error = none");
        }
    }
    for mode in Mode::ALL {
        let _ = writeln!(s, "fraction_{mode} = {}", m.mode_fraction(mode));
    }
    let _ = writeln!(s, "messages_generated = {}", m.messages_generated);
    let _ = writeln!(s, "messages_applied = {}", m.messages_applied);
    let _ = writeln!(s, "messages_in_flight = {}", m.messages_in_flight);
    let _ = writeln!(s, "checkins = {}", m.checkins);
    let _ = writeln!(s, "deadline_violations = {}", m.deadline_violations);
    files.push(write_file(&dir.join("summary.txt"), &s)?);

    let mut used = config.clone();
    used.seed = m.seed;
    files.push(write_file(&dir.join("scenario.toml"), &used.to_toml())?);

    files.push(write_file(&dir.join("timing.txt"), &timing_text(&m.mi_timing))?);
    Ok(files)
}

fn timing_text(timing: &std::collections::BTreeMap<usize, super::TimingStat>) -> String {
    let mut s = String::from("# joint planning wall-clock time by coalition size\ncoalition_size,calls,mean_seconds\n");
    for (size, t) in timing {
        let _ = writeln!(s, "{size},{},{:.6e}", t.calls, t.mean_secs());
    }
    s
}

/// Writes `summary.csv`, `series.csv`, and `timing.txt` for a sweep.
pub fn write_sweep(dir: &Path, result: &SweepResult) -> Result<Vec<PathBuf>, SimError> {
    fs::create_dir_all(dir).map_err(|e| SimError::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    let mut s = format!("{SUMMARY_SCHEMA}\n{SUMMARY_HEADER}\n");
    for r in &result.summary {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.axis,
            r.value,
            r.trials,
            r.final_entropy.0,
            r.final_entropy.1,
            r.true_targets.0,
            r.true_targets.1,
            r.false_targets.0,
            r.false_targets.1,
            r.mean_error,
            r.explore.0,
            r.explore.1,
            r.checkin.0,
            r.checkin.1,
            r.exploit.0,
            r.exploit.1
        );
    }
    files.push(write_file(&dir.join("summary.csv"), &s)?);
    let mut s = format!("{SERIES_SCHEMA}\n{SERIES_HEADER}\n");
    for r in &result.series {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.value,
            r.step,
            r.entropy.0,
            r.entropy.1,
            r.true_targets.0,
            r.true_targets.1,
            r.false_targets.0,
            r.false_targets.1
        );
    }
    files.push(write_file(&dir.join("series.csv"), &s)?);
    files.push(write_file(&dir.join("timing.txt"), &timing_text(&result.timing))?);
    Ok(files)
}

/// Data rows of a schema'd CSV file as `(line number, fields)`.
fn read_rows(path: &Path, schema: &str, header: &str) -> Result<Vec<(usize, Vec<String>)>, SimError> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| SimError::Io(format!("{file}: {e}")))?;
    let err = |line: usize, reason: String| SimError::Schema { file: file.clone(), line, reason };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == schema => {}
        Some((_, l)) => return Err(err(1, format!("expected schema line {schema:?}, found {l:?}"))),
        None => return Err(err(1, format!("empty file, expected schema line {schema:?}"))),
    }
    match lines.next() {
        Some((_, l)) if l.trim() == header => {}
        Some((_, l)) => return Err(err(2, format!("expected header {header:?}, found {l:?}"))),
        None => return Err(err(2, format!("missing header {header:?}"))),
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (i, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = l.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != width {
            return Err(err(i + 1, format!("expected {width} fields, found {}", fields.len())));
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, fields: &[String], k: usize, name: &str) -> Result<T, SimError> {
    fields[k].parse().map_err(|_| SimError::Schema {
        file: path.display().to_string(),
        line,
        reason: format!("bad {name} value {:?}", fields[k]),
    })
}

/// `(step, entropy)` pairs.
pub fn read_entropy_csv(path: &Path) -> Result<Vec<(usize, f64)>, SimError> {
    read_rows(path, ENTROPY_SCHEMA, ENTROPY_HEADER)?
        .into_iter()
        .map(|(l, f)| Ok((field(path, l, &f, 0, "step")?, field(path, l, &f, 1, "entropy")?)))
        .collect()
}

/// `(step, robot, mode)` triples.
pub fn read_modes_csv(path: &Path) -> Result<Vec<(usize, usize, Mode)>, SimError> {
    read_rows(path, MODES_SCHEMA, MODES_HEADER)?
        .into_iter()
        .map(|(l, f)| {
            let mode = Mode::parse(&f[2]).ok_or_else(|| SimError::Schema {
                file: path.display().to_string(),
                line: l,
                reason: format!("unknown mode {:?}", f[2]),
            })?;
            Ok((field(path, l, &f, 0, "step")?, field(path, l, &f, 1, "robot")?, mode))
        })
        .collect()
}

/// `(step, true count, false count)` triples.
pub fn read_targets_csv(path: &Path) -> Result<Vec<(usize, usize, usize)>, SimError> {
    read_rows(path, TARGETS_SCHEMA, TARGETS_HEADER)?
        .into_iter()
        .map(|(l, f)| {
            Ok((field(path, l, &f, 0, "step")?, field(path, l, &f, 1, "true")?, field(path, l, &f, 2, "false")?))
        })
        .collect()
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>, SimError> {
    read_rows(path, SUMMARY_SCHEMA, SUMMARY_HEADER)?
        .into_iter()
        .map(|(l, f)| {
            let num = |k: usize, name: &str| field::<f64>(path, l, &f, k, name);
            Ok(SummaryRow {
                axis: f[0].clone(),
                value: f[1].clone(),
                trials: field(path, l, &f, 2, "trials")?,
                final_entropy: (num(3, "final_entropy_mean")?, num(4, "final_entropy_std")?),
                true_targets: (num(5, "true_mean")?, num(6, "true_std")?),
                false_targets: (num(7, "false_mean")?, num(8, "false_std")?),
                mean_error: num(9, "mean_error_mean")?,
                explore: (num(10, "explore_mean")?, num(11, "explore_std")?),
                checkin: (num(12, "checkin_mean")?, num(13, "checkin_std")?),
                exploit: (num(14, "exploit_mean")?, num(15, "exploit_std")?),
            })
        })
        .collect()
}

pub fn read_series_csv(path: &Path) -> Result<Vec<SeriesRow>, SimError> {
    read_rows(path, SERIES_SCHEMA, SERIES_HEADER)?
        .into_iter()
        .map(|(l, f)| {
            let num = |k: usize, name: &str| field::<f64>(path, l, &f, k, name);
            Ok(SeriesRow {
                value: f[0].clone(),
                step: field(path, l, &f, 1, "step")?,
                entropy: (num(2, "entropy_mean")?, num(3, "entropy_std")?),
                true_targets: (num(4, "true_mean")?, num(5, "true_std")?),
                false_targets: (num(6, "false_mean")?, num(7, "false_std")?),
            })
        })
        .collect()
}

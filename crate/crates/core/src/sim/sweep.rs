use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use crate::coord::{Mode, World};
use crate::stats::Running;

use super::output::{SeriesRow, SummaryRow};
use super::{run_trial_in, ScenarioConfig, SimError, TimingStat, TrialMetrics};

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: String,
    pub values: Vec<String>,
    /// `trials[v][k]`: trial `k` (seed `template.seed + k`) at value `v`.
    pub trials: Vec<Vec<TrialMetrics>>,
    pub summary: Vec<SummaryRow>,
    pub series: Vec<SeriesRow>,
    pub timing: BTreeMap<usize, TimingStat>,
}

fn mean_std<I: IntoIterator<Item = f64>>(xs: I) -> (f64, f64) {
    let r: Running = xs.into_iter().collect();
    (r.mean(), r.std_dev())
}

/// Everything that determines the static world; configs with equal keys share one.
fn world_key(c: &ScenarioConfig) -> String {
    format!(
        "{}|{:?}|{}|{}|{:?}|{:?}|{}|{}|{:?}",
        c.map,
        c.base_dir,
        c.node_spacing,
        c.max_step,
        c.sensor,
        c.access_points.positions,
        c.access_points.comm_range,
        c.robot_spacing,
        c.server_spacing
    )
}

/// Runs `trials` seeds for every value of `axis`; trials run in parallel.
pub fn sweep(template: &ScenarioConfig, axis: &str, values: &[String], trials: usize) -> Result<SweepResult, SimError> {
    if values.is_empty() {
        return Err(SimError::Config(vec![super::FieldIssue {
            field: "values".into(),
            reason: "at least one value is required".into(),
        }]));
    }
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let mut c = template.clone();
        c.set_axis(axis, v)?;
        configs.push(c);
    }
    let mut worlds: HashMap<String, Arc<World>> = HashMap::new();
    let mut world_of = Vec::with_capacity(configs.len());
    for c in &configs {
        let key = world_key(c);
        if !worlds.contains_key(&key) {
            worlds.insert(key.clone(), Arc::new(c.build_world()?));
        }
        world_of.push(worlds[&key].clone());
    }

    let jobs: Vec<(usize, usize)> = (0..configs.len()).flat_map(|v| (0..trials).map(move |k| (v, k))).collect();
    let next = AtomicUsize::new(0);
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len()).max(1);
    let mut done: Vec<(usize, Result<TrialMetrics, SimError>)> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let j = next.fetch_add(1, Ordering::Relaxed);
                        let Some(&(v, k)) = jobs.get(j) else { break };
                        let seed = template.seed.wrapping_add(k as u64);
                        out.push((j, run_trial_in(world_of[v].clone(), &configs[v], seed)));
                    }
                    out
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    done.sort_by_key(|(j, _)| *j);

    let mut per_value: Vec<Vec<TrialMetrics>> = vec![Vec::new(); configs.len()];
    for (j, r) in done {
        per_value[jobs[j].0].push(r?);
    }

    let mut summary = Vec::new();
    let mut series = Vec::new();
    let mut timing: BTreeMap<usize, TimingStat> = BTreeMap::new();
    for (v, runs) in per_value.iter().enumerate() {
        let frac = |mode| mean_std(runs.iter().map(|m| m.mode_fraction(mode)));
        let errors: Vec<f64> = runs.iter().filter_map(TrialMetrics::mean_error).collect();
        summary.push(SummaryRow {
            axis: axis.to_string(),
            value: values[v].clone(),
            trials: runs.len(),
            final_entropy: mean_std(runs.iter().map(TrialMetrics::final_entropy)),
            true_targets: mean_std(runs.iter().map(|m| m.final_true() as f64)),
            false_targets: mean_std(runs.iter().map(|m| m.final_false() as f64)),
            mean_error: if errors.is_empty() { f64::NAN } else { errors.iter().sum::<f64>() / errors.len() as f64 },
            explore: frac(Mode::Explore),
            checkin: frac(Mode::CheckIn),
            exploit: frac(Mode::Exploit),
        });
        let steps = runs.iter().map(TrialMetrics::steps).min().unwrap_or(0);
        series.push(SeriesRow {
            value: values[v].clone(),
            step: 0,
            entropy: mean_std(runs.iter().map(|m| m.initial_entropy)),
            true_targets: (0.0, 0.0),
            false_targets: (0.0, 0.0),
        });
        for t in 0..steps {
            series.push(SeriesRow {
                value: values[v].clone(),
                step: t + 1,
                entropy: mean_std(runs.iter().map(|m| m.entropy[t])),
                true_targets: mean_std(runs.iter().map(|m| m.true_targets[t] as f64)),
                false_targets: mean_std(runs.iter().map(|m| m.false_targets[t] as f64)),
            });
        }
        for m in runs {
            for (&size, t) in &m.mi_timing {
                let e = timing.entry(size).or_default();
                e.calls += t.calls;
                e.total_secs += t.total_secs;
            }
        }
    }
    Ok(SweepResult { axis: axis.to_string(), values: values.to_vec(), trials: per_value, summary, series, timing })
}

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::coord::{Mode, Team, World};
use crate::env::Point;
use crate::phd::Phd;

use super::{ScenarioConfig, SimError};

/// Outcome of greedy estimate-to-truth matching.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TargetMatch {
    pub true_count: usize,
    pub false_count: usize,
    /// Error of each matched pair, in the order pairs were matched.
    pub errors: Vec<f64>,
    /// `(estimate index, truth index)` per matched pair.
    pub pairs: Vec<(usize, usize)>,
}

/// Greedy nearest-first matching: repeatedly pair the closest unmatched estimate and
/// true target within `radius`. Unmatched estimates are false targets.
pub fn match_targets(estimates: &[Point], truth: &[Point], radius: f64) -> TargetMatch {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, e) in estimates.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            let d = e.dist(*t);
            if d <= radius {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_e = vec![false; estimates.len()];
    let mut used_t = vec![false; truth.len()];
    let mut out = TargetMatch::default();
    for (d, i, j) in candidates {
        if !used_e[i] && !used_t[j] {
            used_e[i] = true;
            used_t[j] = true;
            out.errors.push(d);
            out.pairs.push((i, j));
        }
    }
    out.true_count = out.pairs.len();
    out.false_count = estimates.len() - out.true_count;
    out
}

/// Accumulated wall-clock time of joint planning calls for one coalition size.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimingStat {
    pub calls: u64,
    pub total_secs: f64,
}

impl TimingStat {
    pub fn mean_secs(&self) -> f64 {
        if self.calls == 0 {
            0.0
        } else {
            self.total_secs / self.calls as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub seed: u64,
    pub team_size: usize,
    /// Server entropy before the first step.
    pub initial_entropy: f64,
    /// Server entropy after each step.
    pub entropy: Vec<f64>,
    /// Mode of every robot at every step.
    pub modes: Vec<Vec<Mode>>,
    pub true_targets: Vec<usize>,
    pub false_targets: Vec<usize>,
    pub targets: Vec<Point>,
    /// Final extracted target locations.
    pub estimates: Vec<Point>,
    pub final_match: TargetMatch,
    pub mi_timing: BTreeMap<usize, TimingStat>,
    pub messages_generated: usize,
    pub messages_applied: usize,
    pub messages_in_flight: usize,
    pub checkins: usize,
    pub deadline_violations: usize,
    pub server_replays: u64,
}

impl TrialMetrics {
    pub fn steps(&self) -> usize {
        self.entropy.len()
    }

    pub fn final_entropy(&self) -> f64 {
        self.entropy.last().copied().unwrap_or(self.initial_entropy)
    }

    pub fn final_true(&self) -> usize {
        self.final_match.true_count
    }

    pub fn final_false(&self) -> usize {
        self.final_match.false_count
    }

    /// Mean error of matched targets; `None` when nothing matched.
    pub fn mean_error(&self) -> Option<f64> {
        let e = &self.final_match.errors;
        (!e.is_empty()).then(|| e.iter().sum::<f64>() / e.len() as f64)
    }

    /// Fraction of robot-steps spent in `mode`.
    pub fn mode_fraction(&self, mode: Mode) -> f64 {
        let total: usize = self.modes.iter().map(Vec::len).sum();
        if total == 0 {
            return 0.0;
        }
        let hits = self.modes.iter().flatten().filter(|m| **m == mode).count();
        hits as f64 / total as f64
    }
}

/// Extracted targets of a server belief.
///
/// Thresholding and clustering run on the belief aggregated to the robot grid (node
/// lattice), so `w_min` is a mass per node cell whatever the server resolution; each
/// location is then the weighted mean of the server particles inside the cluster. A
/// location inside an obstacle is moved onto the nearest particle.
pub fn estimate_targets(belief: &Phd, world: &World, w_min: f64, mass_min: f64) -> Vec<Point> {
    let coarse_grid = &world.robot_grid;
    let Ok(coarse) = belief.downsample_to(coarse_grid) else {
        return belief.extract_targets(w_min, mass_min).locations;
    };
    let est = coarse.extract_targets(w_min, mass_min);
    let mut label = vec![usize::MAX; coarse_grid.len()];
    for (k, members) in est.members.iter().enumerate() {
        for &p in members {
            label[p] = k;
        }
    }
    let fine = belief.grid();
    let k = (coarse_grid.spacing() / fine.spacing()).round() as u32;
    let mut sums = vec![(0.0, 0.0, 0.0); est.len()];
    for (p, &(c, r)) in fine.cells().iter().enumerate() {
        let Some(cp) = coarse_grid.index_at((c / k) as i64, (r / k) as i64) else { continue };
        if label[cp] == usize::MAX {
            continue;
        }
        let w = belief.weight(p);
        let pos = fine.position(p);
        let s = &mut sums[label[cp]];
        s.0 += w;
        s.1 += w * pos.x;
        s.2 += w * pos.y;
    }
    sums.iter()
        .zip(&est.locations)
        .map(|(&(m, sx, sy), &fallback)| {
            let p = if m > 0.0 { Point::new(sx / m, sy / m) } else { fallback };
            if world.map.is_free(p) {
                return p;
            }
            fine.positions().iter().copied().min_by(|a, b| a.dist2(p).total_cmp(&b.dist2(p))).unwrap_or(p)
        })
        .collect()
}

/// Runs one trial of `config` with its own seed.
pub fn run_trial(config: &ScenarioConfig) -> Result<TrialMetrics, SimError> {
    let world = Arc::new(config.build_world()?);
    run_trial_in(world, config, config.seed)
}

/// Runs one trial on a prebuilt world (which must match `config`).
pub fn run_trial_in(world: Arc<World>, config: &ScenarioConfig, seed: u64) -> Result<TrialMetrics, SimError> {
    config.validate()?;
    let targets = config.target_positions(&world, seed)?;
    let starts = config.start_nodes(&world);
    let mut team = Team::new(world.clone(), config.coord_config(), config.lambda0, &starts, seed)?;
    let steps = config.steps as usize;
    let mut m = TrialMetrics {
        seed,
        team_size: config.team_size,
        initial_entropy: team.server().belief().entropy(),
        entropy: Vec::with_capacity(steps),
        modes: Vec::with_capacity(steps),
        true_targets: Vec::with_capacity(steps),
        false_targets: Vec::with_capacity(steps),
        targets: targets.clone(),
        estimates: Vec::new(),
        final_match: TargetMatch::default(),
        mi_timing: BTreeMap::new(),
        messages_generated: 0,
        messages_applied: 0,
        messages_in_flight: 0,
        checkins: 0,
        deadline_violations: 0,
        server_replays: 0,
    };
    let mut estimates = estimate_targets(team.server().belief(), &world, config.w_min, config.mass_min);
    let mut matched = match_targets(&estimates, &targets, config.match_radius);
    let mut entropy = m.initial_entropy;
    for _ in 0..steps {
        let report = team.step(&targets)?;
        if report.server_changed {
            entropy = team.server().belief().entropy();
            estimates = estimate_targets(team.server().belief(), &world, config.w_min, config.mass_min);
            matched = match_targets(&estimates, &targets, config.match_radius);
        }
        m.entropy.push(entropy);
        m.true_targets.push(matched.true_count);
        m.false_targets.push(matched.false_count);
        m.modes.push(report.modes);
        m.checkins += report.checkins.len();
        for (size, d) in report.plan_timings {
            let t = m.mi_timing.entry(size).or_default();
            t.calls += 1;
            t.total_secs += d.as_secs_f64();
        }
    }
    m.estimates = estimates;
    m.final_match = matched;
    m.messages_generated = team.messages_generated();
    m.messages_applied = team.server().applied_messages();
    m.messages_in_flight = team.messages_in_flight();
    m.deadline_violations = team.deadline_violations();
    m.server_replays = team.server().replays();
    if m.messages_applied + m.messages_in_flight != m.messages_generated {
        return Err(SimError::Protocol(format!(
            "{} messages generated but {} applied and {} still held by robots",
            m.messages_generated, m.messages_applied, m.messages_in_flight
        )));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_examples() {
        let t = [Point::new(1.0, 1.0)];
        assert_eq!(match_targets(&[], &t, 1.0), TargetMatch::default());
        let m = match_targets(&[Point::new(1.0, 1.0)], &t, 1.0);
        assert_eq!((m.true_count, m.false_count, m.errors.clone()), (1, 0, vec![0.0]));
        let m = match_targets(&[Point::new(1.5, 1.0), Point::new(1.0, 1.25)], &t, 1.0);
        assert_eq!((m.true_count, m.false_count, m.errors.clone()), (1, 1, vec![0.25]));
        assert_eq!(m.pairs, vec![(1, 0)]);
    }

    #[test]
    fn greedy_takes_closest_pair_first() {
        // e0 is nearest to t0, but t0 is even closer to e1
        let truth = [Point::new(0.0, 0.0), Point::new(1.6, 0.0)];
        let est = [Point::new(0.7, 0.0), Point::new(0.1, 0.0)];
        let m = match_targets(&est, &truth, 1.0);
        assert_eq!(m.pairs, vec![(1, 0), (0, 1)]);
        assert_eq!(m.true_count, 2);
    }

    #[test]
    fn far_estimates_are_false() {
        let m = match_targets(&[Point::new(5.0, 5.0)], &[Point::new(0.0, 0.0)], 1.0);
        assert_eq!((m.true_count, m.false_count), (0, 1));
    }
}

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::info::oracle::{channel_monte_carlo, constant_pd_reference, random_instance};
use crate::info::{BinaryChannelParams, RobotChannel, SeriesConfig};
use crate::phd::oracle::{cardinality_monte_carlo, entropy_monte_carlo};
use crate::stats::McEstimate;

/// Monte Carlo checks are judged at this many standard errors.
const SIGMAS: f64 = 3.0;
/// Terms used for the closed form when it is compared against Monte Carlo, so the
/// series truncation is far below the sampling error.
const REFERENCE_TERMS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub skipped: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    fn exact(&mut self, name: String, value: f64, reference: f64, tol: f64) {
        let err = (value - reference).abs();
        self.checks.push(CheckResult {
            name,
            passed: err <= tol,
            detail: format!("value {value:.12} reference {reference:.12} |diff| {err:.2e} tol {tol:.1e}"),
        });
    }

    fn monte_carlo(&mut self, name: String, closed: f64, mc: McEstimate) {
        let z = mc.z_score(closed);
        self.checks.push(CheckResult {
            name,
            passed: mc.agrees_with(closed, SIGMAS),
            detail: format!("closed {closed:.6} mc {:.6} ± {:.2e} (z = {z:+.2})", mc.mean, mc.std_err),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.skipped {
            return writeln!(f, "validation skipped (budget 0)");
        }
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        writeln!(f, "{} checks, {} failed", self.checks.len(), self.failures())
    }
}

/// Runs the closed-form-versus-oracle suites with `budget` Monte Carlo samples per check.
pub fn validate(budget: usize, seed: u64) -> ValidationReport {
    let mut report = ValidationReport::default();
    if budget == 0 {
        report.skipped = true;
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let series = SeriesConfig::with_terms(REFERENCE_TERMS);

    // normalization of the outcome distribution
    for k in 1..=3usize {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let inst = random_instance(&mut rng, 8, 3.0, 1.0, k);
            let ch = BinaryChannelParams::from_dense(inst.belief.weights(), &inst.pd_fields, inst.mu, series)
                .expect("consistent instance");
            let total: f64 = (0..1usize << k).map(|z| ch.measurement_prob(z)).sum();
            worst = worst.max((total - 1.0).abs());
        }
        report.exact(format!("normalization |C|={k} (100 instances, worst)"), 1.0 + worst, 1.0, 1e-12);
    }

    // binary channel against RFS sampling
    for i in 0..6 {
        let k = 1 + i % 2;
        let inst = random_instance(&mut rng, 8, 3.0, 1.0, k);
        let ch = BinaryChannelParams::from_dense(inst.belief.weights(), &inst.pd_fields, inst.mu, series)
            .expect("consistent instance");
        let mc = channel_monte_carlo(&inst.belief, &inst.pd_fields, inst.mu, budget, &mut rng);
        for z in 0..1usize << k {
            report.monte_carlo(format!("channel #{i} |C|={k} p_b(Z={z:0k$b})"), ch.measurement_prob(z), mc.outcome_probs[z]);
        }
        report.monte_carlo(format!("channel #{i} |C|={k} H[Z]"), ch.entropy(), mc.entropy);
        report.monte_carlo(format!("channel #{i} |C|={k} H[Z|X]"), ch.conditional_entropy(), mc.conditional_entropy);
        report.monte_carlo(format!("channel #{i} |C|={k} I[X;Z]"), ch.mutual_info(), mc.mutual_info);
    }

    // Poisson RFS entropy and cardinality
    for i in 0..3 {
        let inst = random_instance(&mut rng, 8, 3.0, 0.0, 0);
        let mc = entropy_monte_carlo(&inst.belief, budget, &mut rng);
        report.monte_carlo(format!("rfs entropy #{i}"), inst.belief.entropy(), mc);
        let card = cardinality_monte_carlo(&inst.belief, budget, &mut rng);
        report.monte_carlo(format!("rfs cardinality #{i}"), inst.belief.lambda(), card);
    }

    // series truncation against an exact constant-p_d reference
    let default = SeriesConfig::default();
    for i in 0..4 {
        let lambda = rng.random_range(0.1..20.0);
        let pd = rng.random_range(0.001..1.0);
        let mu = rng.random_range(0.0..1.0);
        let robot = RobotChannel::constant(lambda, pd, default);
        let (_, hc, _) = constant_pd_reference(lambda, pd, mu);
        let bound = robot.truncation_bound(mu) + 1e-12;
        report.exact(
            format!("truncated H[Z|X] within bound, constant p_d #{i} (λ={lambda:.2}, p_d={pd:.3}, μ={mu:.2})"),
            robot.conditional_entropy(mu),
            hc,
            bound,
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_budget_is_skipped() {
        let r = validate(0, 1);
        assert!(r.skipped && r.checks.is_empty() && r.passed());
    }
}

//! Monte Carlo and exact reference values for the binary-channel quantities.
//!
//! The estimators sample target sets from the Poisson belief directly and average the
//! conditional outcome distribution given each sample (Rao–Blackwellized), so they
//! share no algebra with the closed forms.

use std::sync::Arc;

use rand::Rng;

use crate::phd::{ParticleGrid, Phd};
use crate::stats::{McEstimate, Running};

use super::binary_entropy;

#[derive(Debug, Clone)]
pub struct ChannelMcReport {
    /// `p_b(Z)` by outcome bitmask.
    pub outcome_probs: Vec<McEstimate>,
    pub entropy: McEstimate,
    pub conditional_entropy: McEstimate,
    pub mutual_info: McEstimate,
}

/// Monte Carlo estimate of the coalition channel.
///
/// `pd_fields[j][p]` is robot `j`'s detection probability for a target at particle `p`.
pub fn channel_monte_carlo<R: Rng + ?Sized>(
    belief: &Phd,
    pd_fields: &[Vec<f64>],
    mu: f64,
    samples: usize,
    rng: &mut R,
) -> ChannelMcReport {
    let k = pd_fields.len();
    let outcomes = 1usize << k;
    let sampler = belief.sampler();
    let mut q = vec![0.0; samples * outcomes];
    let mut hc = Vec::with_capacity(samples);
    let mut p0 = vec![0.0; k];
    for s in 0..samples {
        let idx = sampler.sample_indices(rng);
        for (j, field) in pd_fields.iter().enumerate() {
            p0[j] = (-mu).exp() * idx.iter().map(|&i| 1.0 - field[i]).product::<f64>();
        }
        hc.push(p0.iter().map(|&p| binary_entropy(p)).sum::<f64>());
        let row = &mut q[s * outcomes..(s + 1) * outcomes];
        for (z, slot) in row.iter_mut().enumerate() {
            *slot = (0..k).map(|j| if z >> j & 1 == 1 { 1.0 - p0[j] } else { p0[j] }).product();
        }
    }

    let mut probs: Vec<Running> = vec![Running::default(); outcomes];
    for s in 0..samples {
        for z in 0..outcomes {
            probs[z].push(q[s * outcomes + z]);
        }
    }
    let p_hat: Vec<f64> = probs.iter().map(|r| r.mean()).collect();
    let h_plugin: f64 = p_hat.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
    // Delta method: linearize the plug-in entropy around the estimated probabilities.
    let grad: Vec<f64> = p_hat.iter().map(|&p| if p > 0.0 { -(p.ln() + 1.0) } else { 0.0 }).collect();
    let mut lin_h = Running::default();
    let mut lin_i = Running::default();
    let mut cond = Running::default();
    for s in 0..samples {
        let g: f64 = (0..outcomes).map(|z| grad[z] * q[s * outcomes + z]).sum();
        lin_h.push(g);
        lin_i.push(g - hc[s]);
        cond.push(hc[s]);
    }
    let cond = cond.estimate();
    let n = samples as f64;
    ChannelMcReport {
        outcome_probs: probs.iter().map(|r| r.estimate()).collect(),
        entropy: McEstimate { mean: h_plugin, std_err: lin_h.std_dev() / n.sqrt(), samples },
        mutual_info: McEstimate { mean: h_plugin - cond.mean, std_err: lin_i.std_dev() / n.sqrt(), samples },
        conditional_entropy: cond,
    }
}

/// Exact channel quantities for a constant detection probability, by summing over the
/// Poisson cardinality: returns `(H[Z], H[Z|X], I[X; Z])`.
pub fn constant_pd_reference(lambda: f64, pd: f64, mu: f64) -> (f64, f64, f64) {
    let p0 = (-(lambda * pd + mu)).exp();
    let h = binary_entropy(p0);
    let mut hc = 0.0;
    let mut pmf = (-lambda).exp();
    let limit = (lambda + 40.0 * lambda.sqrt() + 60.0).ceil() as usize;
    let miss = 1.0 - pd;
    let mut given_n = (-mu).exp();
    for n in 0..=limit {
        if n > 0 {
            pmf *= lambda / n as f64;
            given_n *= miss;
        }
        hc += pmf * binary_entropy(given_n);
    }
    (h, hc, h - hc)
}

/// A small random belief with one detection-probability field per robot.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub belief: Phd,
    pub pd_fields: Vec<Vec<f64>>,
    pub mu: f64,
}

/// Draws a belief on at most `max_particles` unit cells with total mass in
/// `(0, max_lambda]`, `robots` detection fields (about a quarter of the entries exactly
/// zero, the rest uniform in `(0, 1]`), and clutter rate `μ ∈ [0, max_mu]`.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_particles: usize,
    max_lambda: f64,
    max_mu: f64,
    robots: usize,
) -> RandomInstance {
    let n = rng.random_range(1..=max_particles.max(1));
    let cells = (0..n as u32).map(|i| (i, 0)).collect();
    let grid = Arc::new(ParticleGrid::from_cells(1.0, cells).expect("distinct cells"));
    let lambda = rng.random_range(0.05..=max_lambda);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total * lambda).collect();
    let belief = Phd::from_weights(grid, weights).expect("positive weights");
    let pd_fields = (0..robots)
        .map(|_| {
            (0..n)
                .map(|_| if rng.random::<f64>() < 0.25 { 0.0 } else { 1.0 - rng.random::<f64>() })
                .collect()
        })
        .collect();
    let mu = rng.random_range(0.0..=max_mu);
    RandomInstance { belief, pd_fields, mu }
}

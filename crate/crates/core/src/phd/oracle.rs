//! Monte Carlo oracles for the Poisson RFS described by a PHD.
//!
//! These sample realizations and evaluate set densities directly; they never touch
//! the closed-form entropy.

use rand::Rng;

use crate::stats::{McEstimate, Running};

use super::Phd;

/// Estimates `H[X] = −E[log p(X)]` with `p(X) = e^{−λ} Π_{x∈X} D(x)`, where `D` is
/// the piecewise-constant density `w_p / cell_area` on the particle cells.
pub fn entropy_monte_carlo<R: Rng + ?Sized>(phd: &Phd, samples: usize, rng: &mut R) -> McEstimate {
    let sampler = phd.sampler();
    let area = phd.grid().cell_area();
    let lambda = phd.lambda();
    let mut acc = Running::default();
    for _ in 0..samples {
        let draw = sampler.sample_indices(rng);
        let log_p = -lambda + draw.iter().map(|&p| (phd.weight(p) / area).ln()).sum::<f64>();
        acc.push(-log_p);
    }
    acc.estimate()
}

/// Estimates the mean cardinality `E|X|`.
pub fn cardinality_monte_carlo<R: Rng + ?Sized>(phd: &Phd, samples: usize, rng: &mut R) -> McEstimate {
    let sampler = phd.sampler();
    (0..samples).map(|_| sampler.sample_indices(rng).len() as f64).collect::<Running>().estimate()
}

/// Total number of sampled points falling on each particle over `samples` draws.
pub fn particle_counts<R: Rng + ?Sized>(phd: &Phd, samples: usize, rng: &mut R) -> Vec<u64> {
    let sampler = phd.sampler();
    let mut counts = vec![0u64; phd.len()];
    for _ in 0..samples {
        for p in sampler.sample_indices(rng) {
            counts[p] += 1;
        }
    }
    counts
}

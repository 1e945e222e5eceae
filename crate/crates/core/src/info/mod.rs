//! Closed-form mutual information between a Poisson RFS belief and binary detection
//! events (`z = 0` for an empty measurement set, `1` otherwise).
//!
//! Everything here works in terms of the *detected mass* `λ − α(S)`, where
//! `α(S) = ∫ Π_{j∈S} p̄_d(x; q_j) D(x) dx`; keeping the difference avoids cancellation
//! when `α` is close to `λ`. Entropies are in nats.

pub mod oracle;
mod server;

use thiserror::Error;

use crate::phd::Phd;
use crate::sensing::Footprint;

pub use server::ServerInfoModel;

/// Number of Taylor terms kept in the conditional-entropy series by default.
pub const DEFAULT_TAYLOR_TERMS: usize = 20;
/// Default cap on coalition size.
pub const DEFAULT_COALITION_CAP: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum InfoError {
    #[error("coalition of {size} robots exceeds the cap of {cap}")]
    CoalitionTooLarge { size: usize, cap: usize },
    #[error("coalition must contain at least one robot")]
    EmptyCoalition,
    #[error("inconsistent channel parameters: {0}")]
    Inconsistent(String),
}

/// How the `log(1 − p₀)` Taylor series in the conditional entropy is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesConfig {
    /// Terms `ℓ = 1..=terms` evaluated exactly.
    pub terms: usize,
    /// Add the exact tail of the series for realizations with no target in the footprint.
    /// Without it the truncation error is `e^{−(λ−α_∞)}/terms` when `μ = 0`.
    pub atom_tail: bool,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { terms: DEFAULT_TAYLOR_TERMS, atom_tail: true }
    }
}

impl SeriesConfig {
    pub fn with_terms(terms: usize) -> Self {
        Self { terms, ..Self::default() }
    }
}

/// Coefficient `c_ℓ` of `(1 − p) log(1 − p) = Σ_ℓ c_ℓ p^ℓ`.
pub fn taylor_coefficient(l: usize) -> f64 {
    match l {
        0 => 0.0,
        1 => -1.0,
        _ => 1.0 / (l as f64 * (l as f64 - 1.0)),
    }
}

/// `Σ_{ℓ > terms} c_ℓ r^ℓ` for `0 ≤ r ≤ 1`.
pub fn series_tail(terms: usize, r: f64) -> f64 {
    let full = if r >= 1.0 { 0.0 } else { (1.0 - r) * (-r).ln_1p() };
    let mut partial = 0.0;
    let mut rl = 1.0;
    for l in 1..=terms {
        rl *= r;
        partial += taylor_coefficient(l) * rl;
    }
    full - partial
}

fn binary_entropy(p: f64) -> f64 {
    let mut h = 0.0;
    if p > 0.0 && p < 1.0 {
        h -= p * p.ln();
        h -= (1.0 - p) * (1.0 - p).ln();
    }
    h
}

/// Per-robot quantities for one pose, from a single sweep over its footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotChannel {
    /// `detected[ℓ−1] = λ − α(j^ℓ) = Σ_p w_p (1 − p̄_d(x_p)^ℓ)`.
    detected: Vec<f64>,
    /// `β = −Σ_p w_p p̄_d log p̄_d ≥ 0`.
    beta: f64,
    /// `lim_ℓ (λ − α(j^ℓ))`: mass on particles with `p_d > 0`.
    detected_limit: f64,
    series: SeriesConfig,
}

impl RobotChannel {
    pub fn from_footprint(belief: &Phd, fp: &Footprint, series: SeriesConfig) -> Self {
        Self::from_pairs(fp.iter().map(|(i, pd)| (belief.weight(i), pd)), series)
    }

    /// Dense form: `pd[p]` is the detection probability of particle `p`.
    pub fn from_dense(weights: &[f64], pd: &[f64], series: SeriesConfig) -> Self {
        Self::from_pairs(weights.iter().copied().zip(pd.iter().copied()), series)
    }

    fn from_pairs(pairs: impl Iterator<Item = (f64, f64)>, series: SeriesConfig) -> Self {
        let terms = series.terms.max(1);
        let mut detected = vec![0.0; terms];
        let mut beta = 0.0;
        let mut limit = 0.0;
        for (w, pd) in pairs {
            if pd <= 0.0 || w <= 0.0 {
                continue;
            }
            let miss = 1.0 - pd;
            limit += w;
            if miss > 0.0 {
                beta -= w * miss * miss.ln();
            }
            let mut power = 1.0;
            for d in detected.iter_mut() {
                power *= miss;
                *d += w * (1.0 - power);
            }
        }
        Self { detected, beta, detected_limit: limit, series }
    }

    /// Constant detection probability `pd` over a belief of mass `lambda`.
    pub fn constant(lambda: f64, pd: f64, series: SeriesConfig) -> Self {
        let terms = series.terms.max(1);
        let miss = 1.0 - pd;
        let detected = (1..=terms).map(|l| lambda * (1.0 - miss.powi(l as i32))).collect();
        let beta = if miss > 0.0 && miss < 1.0 { -lambda * miss * miss.ln() } else { 0.0 };
        let detected_limit = if pd > 0.0 { lambda } else { 0.0 };
        Self { detected, beta, detected_limit, series }
    }

    /// `λ − α(j^ℓ)` for `ℓ ≥ 1`.
    pub fn detected_mass(&self, l: usize) -> f64 {
        self.detected[l - 1]
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn series(&self) -> SeriesConfig {
        self.series
    }

    /// `H[Z_j | X] = e^{−(λ−α(j)+μ)}(μ + β) − Σ_ℓ c_ℓ e^{−(λ−α(j^ℓ)+ℓμ)}`.
    pub fn conditional_entropy(&self, mu: f64) -> f64 {
        let head = (-(self.detected[0] + mu)).exp() * (mu + self.beta);
        let terms = self.series.terms.min(self.detected.len());
        let mut sum = 0.0;
        for l in 1..=terms {
            sum += taylor_coefficient(l) * (-(self.detected[l - 1] + l as f64 * mu)).exp();
        }
        if self.series.atom_tail {
            sum += (-self.detected_limit).exp() * series_tail(terms, (-mu).exp());
        }
        head - sum
    }

    /// Upper bound on `|H_exact − H_series|` for this robot.
    pub fn truncation_bound(&self, mu: f64) -> f64 {
        let terms = self.series.terms.min(self.detected.len()).max(1);
        let last = (-(self.detected[terms - 1] + terms as f64 * mu)).exp();
        let atom = if self.series.atom_tail {
            (-self.detected_limit).exp() * (-(terms as f64) * mu).exp()
        } else {
            0.0
        };
        (last - atom).max(0.0) / terms as f64
    }
}

/// `p_b(Z)` for the outcome bitmask `z` (bit `j` set ⇔ robot `j` detected something),
/// by inclusion–exclusion over subsets of the detecting robots.
///
/// `detected[S] = λ − α(S)` indexed by subset bitmask.
pub fn outcome_prob(mu: f64, detected: &[f64], z: usize) -> f64 {
    let full = detected.len() - 1;
    let c1 = z & full;
    let c0 = full & !c1;
    let mut acc = 0.0;
    let mut s = c1;
    loop {
        let set = c0 | s;
        let term = (-(detected[set] + mu * set.count_ones() as f64)).exp();
        if s.count_ones() % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        if s == 0 {
            break;
        }
        s = (s - 1) & c1;
    }
    acc
}

/// `H[Z_C] = −Σ_Z p_b(Z) log p_b(Z)` over all `2^|C|` outcomes.
pub fn outcome_entropy(mu: f64, detected: &[f64]) -> f64 {
    let mut h = 0.0;
    for z in 0..detected.len() {
        let p = outcome_prob(mu, detected, z);
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h
}

/// Detected masses `λ − α(S)` for every subset of the given sparse footprints.
pub fn detected_by_subset(belief: &Phd, footprints: &[&Footprint]) -> Vec<f64> {
    let k = footprints.len();
    let mut slot = std::collections::HashMap::new();
    let mut miss: Vec<f64> = Vec::new();
    let mut weights = Vec::new();
    for (m, fp) in footprints.iter().enumerate() {
        for (idx, pd) in fp.iter() {
            let s = *slot.entry(idx).or_insert_with(|| {
                weights.push(belief.weight(idx));
                miss.extend(std::iter::repeat_n(1.0, k));
                weights.len() - 1
            });
            miss[s * k + m] = 1.0 - pd;
        }
    }
    let mut detected = vec![0.0; 1 << k];
    accumulate_detected(&weights, &miss, k, &mut detected);
    detected
}

/// `detected[S] += Σ_u w_u (1 − Π_{j∈S} miss[u·k + j])` for every subset mask `S`.
pub fn accumulate_detected(weights: &[f64], miss: &[f64], k: usize, detected: &mut [f64]) {
    let mut prod = vec![1.0; 1 << k];
    for (u, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let row = &miss[u * k..(u + 1) * k];
        for mask in 1..(1usize << k) {
            let low = mask.trailing_zeros() as usize;
            prod[mask] = prod[mask & (mask - 1)] * row[low];
            detected[mask] += w * (1.0 - prod[mask]);
        }
    }
}

/// Binary-channel parameters of a coalition at fixed poses.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryChannelParams {
    lambda: f64,
    mu: f64,
    detected: Vec<f64>,
    robots: Vec<RobotChannel>,
}

impl BinaryChannelParams {
    /// `detected[S] = λ − α(S)` by subset mask; `robots[j]` carries the per-robot series data.
    pub fn new(lambda: f64, mu: f64, detected: Vec<f64>, robots: Vec<RobotChannel>) -> Result<Self, InfoError> {
        if robots.is_empty() {
            return Err(InfoError::EmptyCoalition);
        }
        if detected.len() != 1 << robots.len() {
            return Err(InfoError::Inconsistent(format!(
                "{} subset masses for {} robots",
                detected.len(),
                robots.len()
            )));
        }
        Ok(Self { lambda, mu, detected, robots })
    }

    /// Channel for robots whose footprints over `belief` are given.
    pub fn from_footprints(belief: &Phd, footprints: &[&Footprint], mu: f64, series: SeriesConfig) -> Result<Self, InfoError> {
        let robots = footprints.iter().map(|fp| RobotChannel::from_footprint(belief, fp, series)).collect();
        Self::new(belief.lambda(), mu, detected_by_subset(belief, footprints), robots)
    }

    /// Dense form: `pd_fields[j][p]` is robot `j`'s detection probability at particle `p`.
    pub fn from_dense(weights: &[f64], pd_fields: &[Vec<f64>], mu: f64, series: SeriesConfig) -> Result<Self, InfoError> {
        let k = pd_fields.len();
        let lambda = weights.iter().sum();
        let mut miss = Vec::with_capacity(weights.len() * k);
        for p in 0..weights.len() {
            for field in pd_fields {
                miss.push(1.0 - field[p]);
            }
        }
        let mut detected = vec![0.0; 1 << k];
        accumulate_detected(weights, &miss, k, &mut detected);
        let robots = pd_fields.iter().map(|f| RobotChannel::from_dense(weights, f, series)).collect();
        Self::new(lambda, mu, detected, robots)
    }

    pub fn size(&self) -> usize {
        self.robots.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn robot(&self, j: usize) -> &RobotChannel {
        &self.robots[j]
    }

    /// `α(S)` for subset mask `s`.
    pub fn alpha(&self, s: usize) -> f64 {
        self.lambda - self.detected[s]
    }

    pub fn detected(&self, s: usize) -> f64 {
        self.detected[s]
    }

    /// Probability that every robot in subset `s` returns an empty set:
    /// `e^{−(λ − α(S) + μ|S|)}`.
    pub fn prob_empty(&self, s: usize) -> f64 {
        (-(self.detected[s] + self.mu * s.count_ones() as f64)).exp()
    }

    /// `p_b(Z)` for the outcome bitmask `z`.
    pub fn measurement_prob(&self, z: usize) -> f64 {
        outcome_prob(self.mu, &self.detected, z)
    }

    /// `H[Z_C]`.
    pub fn entropy(&self) -> f64 {
        outcome_entropy(self.mu, &self.detected)
    }

    /// `H[Z_j | X]` for member `j`.
    pub fn conditional_entropy_single(&self, j: usize) -> f64 {
        self.robots[j].conditional_entropy(self.mu)
    }

    /// `H[Z_C | X] = Σ_j H[Z_j | X]`.
    pub fn conditional_entropy(&self) -> f64 {
        (0..self.size()).map(|j| self.conditional_entropy_single(j)).sum()
    }

    /// `I[X; Z_C] = H[Z_C] − H[Z_C | X]`.
    pub fn mutual_info(&self) -> f64 {
        self.entropy() - self.conditional_entropy()
    }

    /// Bound on how far below zero the truncated mutual information may fall.
    pub fn truncation_bound(&self) -> f64 {
        self.robots.iter().map(|r| r.truncation_bound(self.mu)).sum()
    }
}

/// Mutual information of a coalition at the poses whose footprints are given,
/// refusing coalitions above `cap`.
pub fn coalition_mutual_info(
    belief: &Phd,
    footprints: &[&Footprint],
    mu: f64,
    series: SeriesConfig,
    cap: usize,
) -> Result<f64, InfoError> {
    if footprints.len() > cap {
        return Err(InfoError::CoalitionTooLarge { size: footprints.len(), cap });
    }
    Ok(BinaryChannelParams::from_footprints(belief, footprints, mu, series)?.mutual_info())
}

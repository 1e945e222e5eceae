//! Particle-grid PHD belief over static targets.
//!
//! The PHD `D(x) ≈ Σ_p w_p δ(x, x_p)` is stored as fixed particle positions on a
//! lattice plus a weight per particle. Weights are masses (expected target counts);
//! wherever a density is needed the weight is divided by the lattice cell area.

mod extract;
mod grid;
mod io;
pub mod oracle;

use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::env::{EnvironmentMap, Point};
use crate::sensing::{Footprint, MeasurementSet, SensorModel};

pub use extract::TargetEstimate;
pub use grid::ParticleGrid;
pub use io::PHD_SCHEMA;

#[derive(Debug, Error, PartialEq)]
pub enum PhdError {
    #[error("no free cells to place particles on")]
    NoFreeCells,
    #[error("invalid particle grid: {0}")]
    InvalidGrid(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("grids are not aligned: {0}")]
    Misaligned(String),
    #[error("PHD file error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// One realization of the target RFS.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RfsSample {
    pub points: Vec<Point>,
}

/// Weighted stationary particle set.
#[derive(Debug, Clone, PartialEq)]
pub struct Phd {
    grid: Arc<ParticleGrid>,
    weights: Vec<f64>,
    lambda: f64,
}

impl Phd {
    /// Equal weights on every particle of `grid`, summing to `lambda0`.
    pub fn uniform(grid: Arc<ParticleGrid>, lambda0: f64) -> Result<Self, PhdError> {
        if !(lambda0 >= 0.0 && lambda0.is_finite()) {
            return Err(PhdError::InvalidWeights(format!("lambda0 must be nonnegative, got {lambda0}")));
        }
        let w = lambda0 / grid.len() as f64;
        let weights = vec![w; grid.len()];
        Ok(Self::from_parts(grid, weights))
    }

    /// Uniform belief over the free space of `map` on a lattice of the given spacing.
    pub fn init_uniform(map: &EnvironmentMap, grid_spacing: f64, lambda0: f64) -> Result<Self, PhdError> {
        let grid = Arc::new(ParticleGrid::from_map(map, grid_spacing)?);
        Self::uniform(grid, lambda0)
    }

    pub fn from_weights(grid: Arc<ParticleGrid>, weights: Vec<f64>) -> Result<Self, PhdError> {
        if weights.len() != grid.len() {
            return Err(PhdError::InvalidWeights(format!(
                "{} weights for {} particles",
                weights.len(),
                grid.len()
            )));
        }
        if let Some(bad) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(PhdError::InvalidWeights(format!("weight {bad} is not a finite nonnegative number")));
        }
        Ok(Self::from_parts(grid, weights))
    }

    fn from_parts(grid: Arc<ParticleGrid>, weights: Vec<f64>) -> Self {
        let lambda = weights.iter().sum();
        Self { grid, weights, lambda }
    }

    pub fn grid(&self) -> &Arc<ParticleGrid> {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, p: usize) -> f64 {
        self.weights[p]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Expected number of targets, `λ = Σ w_p`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// PHD density at particle `p` (weight over cell area).
    pub fn density(&self, p: usize) -> f64 {
        self.weights[p] / self.grid.cell_area()
    }

    /// Mass of the particles selected by `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(Point) -> bool) -> f64 {
        self.grid.positions().iter().zip(&self.weights).filter(|(p, _)| pred(**p)).map(|(_, w)| *w).sum()
    }

    /// PHD update with measurement set `z` taken at `pose`; returns the posterior belief.
    pub fn update(&self, pose: Point, z: &MeasurementSet, sensor: &SensorModel, map: &EnvironmentMap) -> Phd {
        let fp = sensor.footprint(&self.grid, pose, map);
        let mut out = self.clone();
        out.apply_update(z, &fp, sensor);
        out
    }

    /// In-place PHD update against a precomputed footprint (which must belong to this grid).
    ///
    /// `w_p ← w_p · [1 − p_d(x_p) + Σ_z p_d(x_p) g(z|x_p) / (κ(z) + Σ_q w_q p_d(x_q) g(z|x_q))]`.
    /// Particles outside the footprint have `p_d = 0` and keep their weight.
    pub fn apply_update(&mut self, z: &MeasurementSet, fp: &Footprint, sensor: &SensorModel) {
        if fp.is_empty() {
            return;
        }
        let kappa = if fp.visible_area > 0.0 { sensor.mu / fp.visible_area } else { 0.0 };
        let n = fp.len();
        let mut gain = vec![0.0; n];
        if !z.is_empty() {
            let mut lik = vec![0.0; n];
            for &zp in &z.points {
                let mut denom = kappa;
                for (k, (idx, pd)) in fp.iter().enumerate() {
                    let l = pd * sensor.measurement_likelihood(zp, self.grid.position(idx));
                    lik[k] = l;
                    denom += self.weights[idx] * l;
                }
                if denom > 0.0 {
                    for k in 0..n {
                        gain[k] += lik[k] / denom;
                    }
                }
            }
        }
        let mut delta = 0.0;
        for (k, (idx, pd)) in fp.iter().enumerate() {
            let w = self.weights[idx];
            let nw = w * (1.0 - pd + gain[k]);
            delta += nw - w;
            self.weights[idx] = nw;
        }
        self.lambda += delta;
        if self.lambda < 0.0 {
            self.lambda = self.weights.iter().sum();
        }
    }

    /// Recomputes `λ` from the weights.
    pub fn refresh_lambda(&mut self) {
        self.lambda = self.weights.iter().sum();
    }

    /// Entropy of the Poisson RFS with this PHD, in nats:
    /// `H = λ − Σ_p w_p log(w_p / a)` with `a` the cell area.
    pub fn entropy(&self) -> f64 {
        if self.lambda <= 0.0 {
            return 0.0;
        }
        let area = self.grid.cell_area();
        let mut acc = 0.0;
        for &w in &self.weights {
            if w > 0.0 {
                acc += w * (w / area).ln();
            }
        }
        self.lambda - acc
    }

    /// Sampler for realizations of the Poisson RFS described by this PHD.
    pub fn sampler(&self) -> RfsSampler {
        RfsSampler::new(self)
    }

    /// One RFS draw: `n ~ Poisson(λ)` points, each at particle `p` with probability `w_p/λ`.
    pub fn sample_rfs<R: Rng + ?Sized>(&self, rng: &mut R) -> RfsSample {
        let sampler = self.sampler();
        let points = sampler.sample_indices(rng).into_iter().map(|p| self.grid.position(p)).collect();
        RfsSample { points }
    }

    /// Target estimate by thresholding at `w_min` and clustering 8-connected particles;
    /// clusters with mass above `mass_min` are reported at their weighted mean.
    pub fn extract_targets(&self, w_min: f64, mass_min: f64) -> TargetEstimate {
        extract::extract_targets(self, w_min, mass_min)
    }

    /// Aggregates this (fine) belief onto the lattice of `coarse_template`: each coarse
    /// weight is the sum of fine weights whose positions fall in its cell.
    pub fn downsample(&self, coarse_template: &Phd) -> Result<Phd, PhdError> {
        self.downsample_to(coarse_template.grid())
    }

    pub fn downsample_to(&self, coarse: &Arc<ParticleGrid>) -> Result<Phd, PhdError> {
        if Arc::ptr_eq(coarse, &self.grid) || **coarse == *self.grid {
            return Ok(Self { grid: coarse.clone(), weights: self.weights.clone(), lambda: self.lambda });
        }
        let ratio = coarse.spacing() / self.grid.spacing();
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio {
            return Err(PhdError::Misaligned(format!(
                "coarse spacing {} is not an integer multiple of fine spacing {}",
                coarse.spacing(),
                self.grid.spacing()
            )));
        }
        let k = k as u32;
        let mut weights = vec![0.0; coarse.len()];
        for (p, &(c, r)) in self.grid.cells().iter().enumerate() {
            let w = self.weights[p];
            match coarse.index_at((c / k) as i64, (r / k) as i64) {
                Some(idx) => weights[idx] += w,
                None if w == 0.0 => {}
                None => {
                    return Err(PhdError::Misaligned(format!(
                        "fine particle at {} has no coarse cell",
                        self.grid.position(p)
                    )))
                }
            }
        }
        Ok(Self::from_parts(coarse.clone(), weights))
    }
}

/// Reusable sampler for one belief.
#[derive(Debug, Clone)]
pub struct RfsSampler {
    count: Option<Poisson<f64>>,
    index: Option<WeightedIndex<f64>>,
}

impl RfsSampler {
    pub fn new(phd: &Phd) -> Self {
        if phd.lambda() <= 0.0 {
            return Self { count: None, index: None };
        }
        Self {
            count: Poisson::new(phd.lambda()).ok(),
            index: WeightedIndex::new(phd.weights().iter().copied()).ok(),
        }
    }

    /// Particle indices of one draw (with repetition).
    pub fn sample_indices<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let (Some(count), Some(index)) = (&self.count, &self.index) else {
            return Vec::new();
        };
        let n = count.sample(rng) as usize;
        (0..n).map(|_| index.sample(rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvironmentMap;

    fn grid_of(spacing: f64, cells: &[(u32, u32)]) -> Arc<ParticleGrid> {
        Arc::new(ParticleGrid::from_cells(spacing, cells.to_vec()).unwrap())
    }

    #[test]
    fn uniform_init_weights() {
        let map = EnvironmentMap::open(20, 20, 1.0).unwrap();
        let phd = Phd::init_uniform(&map, 1.0, 20.0).unwrap();
        assert_eq!(phd.len(), 400);
        assert!(phd.weights().iter().all(|w| (w - 0.05).abs() < 1e-15));
        assert!((phd.lambda() - 20.0).abs() < 1e-12);
        let left = phd.mass_where(|p| p.x < 10.0);
        assert!((left - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_belief() {
        let map = EnvironmentMap::open(4, 4, 1.0).unwrap();
        let phd = Phd::init_uniform(&map, 1.0, 0.0).unwrap();
        assert_eq!(phd.lambda(), 0.0);
        assert_eq!(phd.entropy(), 0.0);
        assert!(Phd::init_uniform(&map, 1.0, -1.0).is_err());
    }

    #[test]
    fn no_free_cells_is_an_error() {
        let map = EnvironmentMap::parse("cell_size 1\n##\n##\n").unwrap();
        assert_eq!(Phd::init_uniform(&map, 1.0, 1.0).unwrap_err(), PhdError::NoFreeCells);
    }

    #[test]
    fn single_particle_update_matches_hand_evaluation() {
        // p_d = 0.8 at the particle, g = 0.2, κ = 0.06
        let grid = grid_of(1.0, &[(0, 0)]);
        let mut phd = Phd::from_weights(grid, vec![0.5]).unwrap();
        // g(x|x) = 1/(2πσ²) = 0.2
        let sigma_g = (1.0 / (0.4 * std::f64::consts::PI)).sqrt();
        let sensor = SensorModel { mu: 0.06, sigma_g, ..SensorModel::default() };
        let x = Point::new(0.5, 0.5);
        let z = MeasurementSet { points: vec![x], robot_pose: x, time: 1 };
        assert!((sensor.measurement_likelihood(z.points[0], x) - 0.2).abs() < 1e-12);
        let fp = Footprint { pose: x, indices: vec![0], pd: vec![0.8], visible_area: 1.0 };
        phd.apply_update(&z, &fp, &sensor);
        let expected = 0.5 * (0.2 + 0.16 / (0.06 + 0.08));
        assert!((phd.weight(0) - expected).abs() < 1e-12);
        assert!((phd.weight(0) - 0.6714).abs() < 1e-4);
        assert!((phd.lambda() - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_measurement_set_scales_by_missed_detection() {
        let grid = grid_of(1.0, &[(0, 0), (3, 0)]);
        let mut phd = Phd::from_weights(grid, vec![0.4, 0.7]).unwrap();
        let fp = Footprint { pose: Point::new(0.5, 0.5), indices: vec![0], pd: vec![0.8], visible_area: 10.0 };
        phd.apply_update(&MeasurementSet::empty(fp.pose, 1), &fp, &SensorModel::default());
        assert!((phd.weight(0) - 0.2 * 0.4).abs() < 1e-15);
        assert_eq!(phd.weight(1), 0.7);
    }

    #[test]
    fn empty_footprint_leaves_belief_unchanged() {
        let map = EnvironmentMap::open(10, 10, 1.0).unwrap();
        let phd = Phd::init_uniform(&map, 1.0, 5.0).unwrap();
        let sensor = SensorModel { p_d0: 0.0, ..SensorModel::default() };
        let q = Point::new(5.5, 5.5);
        let z = MeasurementSet { points: vec![Point::new(5.0, 5.0)], robot_pose: q, time: 0 };
        assert_eq!(phd.update(q, &z, &sensor, &map), phd);
    }

    #[test]
    fn single_detection_without_clutter_captures_one_target() {
        let map = EnvironmentMap::open(20, 20, 1.0).unwrap();
        let phd = Phd::init_uniform(&map, 0.5, 10.0).unwrap();
        let sensor = SensorModel { p_d0: 1.0, sigma_d: f64::INFINITY, mu: 0.0, ..SensorModel::default() };
        let q = Point::new(10.0, 10.0);
        let z = MeasurementSet { points: vec![Point::new(11.0, 9.5)], robot_pose: q, time: 0 };
        let fp = sensor.footprint(phd.grid(), q, &map);
        let post = phd.update(q, &z, &sensor, &map);
        // p̄_d = 0 on the footprint, so all surviving mass there is the detection term
        let inside: f64 = fp.iter().map(|(i, _)| post.weight(i)).sum();
        assert!((inside - 1.0).abs() < 1e-12, "{inside}");
    }

    #[test]
    fn entropy_of_unit_area_uniform_density() {
        for &(spacing, lambda) in &[(0.1, 1.0), (0.25, 2.5), (0.5, 0.3)] {
            let n = (1.0 / spacing) as u32;
            let cells: Vec<_> = (0..n).flat_map(|r| (0..n).map(move |c| (c, r))).collect();
            let phd = Phd::uniform(grid_of(spacing, &cells), lambda).unwrap();
            let expected = lambda * (1.0 - lambda.ln());
            assert!((phd.entropy() - expected).abs() < 1e-12, "{} vs {expected}", phd.entropy());
        }
    }

    #[test]
    fn entropy_scaling_with_fixed_shape() {
        let grid = grid_of(0.5, &[(0, 0), (1, 0), (2, 1), (4, 4)]);
        let shape = [0.1, 0.4, 0.3, 0.2];
        let area = 0.25;
        let h_d: f64 = -shape.iter().map(|d: &f64| d * (d / area).ln()).sum::<f64>();
        for &lam in &[0.5, 1.0, 3.0, 12.0] {
            let phd = Phd::from_weights(grid.clone(), shape.iter().map(|d| d * lam).collect()).unwrap();
            let expected = lam * (1.0 - lam.ln() + h_d);
            assert!((phd.entropy() - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn downsample_identity_and_sum() {
        let fine = grid_of(0.2, &(0..5).flat_map(|r| (0..5).map(move |c| (c, r))).collect::<Vec<_>>());
        let fine_phd = Phd::from_weights(fine.clone(), vec![0.01; 25]).unwrap();
        assert_eq!(fine_phd.downsample(&fine_phd).unwrap(), fine_phd);
        let coarse = Phd::uniform(grid_of(1.0, &[(0, 0)]), 1.0).unwrap();
        let down = fine_phd.downsample(&coarse).unwrap();
        assert!((down.weight(0) - 0.25).abs() < 1e-15);
        let odd = Phd::uniform(grid_of(0.3, &[(0, 0)]), 1.0).unwrap();
        assert!(matches!(fine_phd.downsample(&odd), Err(PhdError::Misaligned(_))));
    }

    #[test]
    fn downsampled_uniform_is_uniform() {
        let map = EnvironmentMap::parse("cell_size 1\n....#\n.#...\n.....\n").unwrap();
        let fine = Phd::init_uniform(&map, 0.2, 20.0).unwrap();
        let coarse = Phd::init_uniform(&map, 1.0, 20.0).unwrap();
        let down = fine.downsample(&coarse).unwrap();
        for (a, b) in down.weights().iter().zip(coarse.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

//! Sensor models: detection probability, measurement likelihood, clutter, and
//! ground-truth measurement generation.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{ControlGraph, EnvironmentMap, NodeId, Point};
use crate::phd::ParticleGrid;

/// Resolution used when measuring visible footprint area by cell counting.
const AREA_RESOLUTION: f64 = 0.25;
const MAX_REJECTION_DRAWS: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum SensingError {
    #[error("invalid sensor parameter {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// Omnidirectional sensor with a circular footprint.
///
/// `p_d(x; q) = p_d0 · exp(−|x−q|²/σ_d²)` inside radius `r_d` (and with line of sight),
/// zero elsewhere. Measurements are `x + η`, `η ~ N(0, σ_g² I)`. Clutter is Poisson with
/// mean `mu`, uniform over the visible footprint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorModel {
    pub p_d0: f64,
    pub sigma_d: f64,
    pub r_d: f64,
    pub sigma_g: f64,
    pub mu: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self { p_d0: 0.8, sigma_d: 2.0, r_d: 5.0, sigma_g: 1.0, mu: 0.3 }
    }
}

impl SensorModel {
    pub fn new(p_d0: f64, sigma_d: f64, r_d: f64, sigma_g: f64, mu: f64) -> Result<Self, SensingError> {
        let m = Self { p_d0, sigma_d, r_d, sigma_g, mu };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), SensingError> {
        let bad = |field, reason: &str| Err(SensingError::Invalid { field, reason: reason.to_string() });
        if !(0.0..=1.0).contains(&self.p_d0) {
            return bad("p_d0", "must lie in [0, 1]");
        }
        if !(self.sigma_d > 0.0) {
            return bad("sigma_d", "must be positive");
        }
        if !(self.r_d > 0.0 && self.r_d.is_finite()) {
            return bad("r_d", "must be positive and finite");
        }
        if !(self.sigma_g > 0.0 && self.sigma_g.is_finite()) {
            return bad("sigma_g", "must be positive and finite");
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad("mu", "must be nonnegative and finite");
        }
        Ok(())
    }

    /// Detection probability ignoring obstacles.
    pub fn detection_prob_open(&self, x: Point, q: Point) -> f64 {
        let d2 = x.dist2(q);
        if d2 > self.r_d * self.r_d {
            return 0.0;
        }
        self.p_d0 * (-d2 / (self.sigma_d * self.sigma_d)).exp()
    }

    /// `p_d(x; q)`, zero outside the footprint or without line of sight.
    pub fn detection_prob(&self, x: Point, q: Point, map: &EnvironmentMap) -> f64 {
        let pd = self.detection_prob_open(x, q);
        if pd > 0.0 && map.line_of_sight(q, x) {
            pd
        } else {
            0.0
        }
    }

    /// `g(z | x)`: isotropic Gaussian density.
    pub fn measurement_likelihood(&self, z: Point, x: Point) -> f64 {
        let s2 = self.sigma_g * self.sigma_g;
        (-z.dist2(x) / (2.0 * s2)).exp() / (2.0 * PI * s2)
    }

    /// True when a measurement at `z` could be returned by a robot at `q`.
    pub fn in_footprint(&self, z: Point, q: Point, map: &EnvironmentMap) -> bool {
        z.dist2(q) <= self.r_d * self.r_d && map.contains(z) && map.line_of_sight(q, z)
    }

    /// Open-space footprint area `π r_d²`.
    pub fn nominal_area(&self) -> f64 {
        PI * self.r_d * self.r_d
    }

    /// Area of the footprint visible from `q`, measured by counting sub-cells of the map.
    pub fn visible_area(&self, q: Point, map: &EnvironmentMap) -> f64 {
        let k = (map.cell_size() / AREA_RESOLUTION).ceil().max(1.0);
        let h = map.cell_size() / k;
        let n_c = (map.width() / h).round() as i64;
        let n_r = (map.height() / h).round() as i64;
        let c0 = ((q.x - self.r_d) / h).floor().max(0.0) as i64;
        let c1 = (((q.x + self.r_d) / h).ceil() as i64).min(n_c - 1);
        let r0 = ((q.y - self.r_d) / h).floor().max(0.0) as i64;
        let r1 = (((q.y + self.r_d) / h).ceil() as i64).min(n_r - 1);
        let r2 = self.r_d * self.r_d;
        let mut count = 0usize;
        for r in r0..=r1 {
            for c in c0..=c1 {
                let p = Point::new((c as f64 + 0.5) * h, (r as f64 + 0.5) * h);
                if p.dist2(q) <= r2 && map.line_of_sight(q, p) {
                    count += 1;
                }
            }
        }
        count as f64 * h * h
    }

    /// `κ(z) = μ/|F|` on the footprint (callers pass the visible area), zero outside.
    pub fn clutter_intensity(&self, z: Point, q: Point, map: &EnvironmentMap, visible_area: f64) -> f64 {
        if visible_area > 0.0 && self.in_footprint(z, q, map) {
            self.mu / visible_area
        } else {
            0.0
        }
    }

    /// Particles with nonzero detection probability from `q`, with their `p_d` values.
    pub fn footprint(&self, grid: &ParticleGrid, q: Point, map: &EnvironmentMap) -> Footprint {
        self.footprint_with_area(grid, q, map, self.visible_area(q, map))
    }

    pub fn footprint_with_area(&self, grid: &ParticleGrid, q: Point, map: &EnvironmentMap, visible_area: f64) -> Footprint {
        let mut indices = Vec::new();
        let mut pd = Vec::new();
        for idx in grid.indices_within(q, self.r_d) {
            let p = self.detection_prob(grid.position(idx), q, map);
            if p > 0.0 {
                indices.push(idx as u32);
                pd.push(p);
            }
        }
        Footprint { pose: q, indices, pd, visible_area }
    }

    /// Samples the measurement set a robot at `q` receives from the true `targets`.
    pub fn generate_measurements<R: Rng + ?Sized>(
        &self,
        q: Point,
        time: u64,
        targets: &[Point],
        map: &EnvironmentMap,
        rng: &mut R,
    ) -> MeasurementSet {
        let mut points = Vec::new();
        let noise = Normal::new(0.0, self.sigma_g).expect("sigma_g validated positive");
        for &x in targets {
            let p = self.detection_prob(x, q, map);
            if p <= 0.0 || rng.random::<f64>() >= p {
                continue;
            }
            let mut z = x;
            for _ in 0..MAX_REJECTION_DRAWS {
                let cand = Point::new(x.x + noise.sample(rng), x.y + noise.sample(rng));
                if self.in_footprint(cand, q, map) {
                    z = cand;
                    break;
                }
            }
            points.push(z);
        }
        if self.mu > 0.0 {
            let count = Poisson::new(self.mu).expect("mu validated").sample(rng) as usize;
            for _ in 0..count {
                for _ in 0..MAX_REJECTION_DRAWS {
                    let rad = self.r_d * rng.random::<f64>().sqrt();
                    let ang = 2.0 * PI * rng.random::<f64>();
                    let cand = Point::new(q.x + rad * ang.cos(), q.y + rad * ang.sin());
                    if self.in_footprint(cand, q, map) {
                        points.push(cand);
                        break;
                    }
                }
            }
        }
        points.shuffle(rng);
        MeasurementSet { points, robot_pose: q, time }
    }
}

/// Measurements returned by one robot at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub points: Vec<Point>,
    pub robot_pose: Point,
    pub time: u64,
}

impl MeasurementSet {
    pub fn empty(robot_pose: Point, time: u64) -> Self {
        Self { points: Vec::new(), robot_pose, time }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sparse detection-probability field of one pose over one particle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Footprint {
    pub pose: Point,
    /// Particle indices with `p_d > 0`, ascending.
    pub indices: Vec<u32>,
    pub pd: Vec<f64>,
    /// Visible footprint area `|F|` used for the clutter density.
    pub visible_area: f64,
}

impl Footprint {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().zip(&self.pd).map(|(&i, &p)| (i as usize, p))
    }
}

/// Footprints of every control-graph node over one particle grid.
#[derive(Debug, Clone)]
pub struct FootprintTable {
    per_node: Vec<Footprint>,
}

impl FootprintTable {
    /// `visible_areas[n]` is the visible footprint area at node `n`.
    pub fn build(
        sensor: &SensorModel,
        grid: &ParticleGrid,
        graph: &ControlGraph,
        map: &EnvironmentMap,
        visible_areas: &[f64],
    ) -> Self {
        let per_node = (0..graph.len())
            .map(|n| sensor.footprint_with_area(grid, graph.position(n), map, visible_areas[n]))
            .collect();
        Self { per_node }
    }

    pub fn get(&self, node: NodeId) -> &Footprint {
        &self.per_node[node]
    }

    pub fn len(&self) -> usize {
        self.per_node.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_node.is_empty()
    }
}

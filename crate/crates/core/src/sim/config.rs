use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coord::{seeded_stream, CoordConfig, World};
use crate::env::{build_graph, AccessPointLayout, EnvironmentMap, NodeId, Point};
use crate::info::SeriesConfig;
use crate::sensing::SensorModel;

use super::office::{office_access_points, office_map, BUILTIN_OFFICE};
use super::SimError;

pub const SCENARIO_SCHEMA: &str = "coopsearch-scenario v1";

/// Random stream used for target placement.
const TARGET_STREAM: u64 = 0;
const MAX_PLACEMENT_DRAWS: usize = 100_000;

/// One problem found while validating a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldIssue {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for FieldIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetConfig {
    /// Number of targets placed uniformly at random in free space (ignored when
    /// `positions` is given).
    pub count: usize,
    pub positions: Option<Vec<[f64; 2]>>,
    /// Minimum distance between randomly placed targets.
    pub min_separation: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self { count: 5, positions: None, min_separation: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AccessConfig {
    /// Defaults to the built-in office layout's access points.
    pub positions: Option<Vec<[f64; 2]>>,
    pub comm_range: f64,
}

impl Default for AccessConfig {
    fn default() -> Self {
        Self { positions: None, comm_range: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoordinationConfig {
    /// `T_C` in steps; `inf` disables the check-in deadline.
    pub check_in_period: f64,
    pub stuck_steps: usize,
    pub stuck_radius: f64,
    pub taylor_terms: usize,
    pub atom_tail: bool,
    pub coalition_cap: usize,
    pub gamma: f64,
    pub leader_election: bool,
}

impl Default for CoordinationConfig {
    fn default() -> Self {
        let c = CoordConfig::default();
        Self {
            check_in_period: c.check_in_period,
            stuck_steps: c.stuck_steps,
            stuck_radius: c.stuck_radius,
            taylor_terms: c.series.terms,
            atom_tail: c.series.atom_tail,
            coalition_cap: c.coalition_cap,
            gamma: c.gamma,
            leader_election: c.leader_election,
        }
    }
}

/// A complete simulation scenario, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub schema: String,
    /// `builtin:office` or a path to an ASCII map, relative to the config file.
    pub map: String,
    pub steps: u64,
    pub seed: u64,
    pub team_size: usize,
    pub node_spacing: f64,
    pub max_step: f64,
    pub robot_spacing: f64,
    pub server_spacing: f64,
    pub lambda0: f64,
    pub w_min: f64,
    pub mass_min: f64,
    pub match_radius: f64,
    pub sensor: SensorModel,
    pub targets: TargetConfig,
    pub access_points: AccessConfig,
    pub coordination: CoordinationConfig,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema: SCENARIO_SCHEMA.to_string(),
            map: BUILTIN_OFFICE.to_string(),
            steps: 1000,
            seed: 1,
            team_size: 4,
            node_spacing: 1.0,
            max_step: 2.0,
            robot_spacing: 1.0,
            server_spacing: 0.2,
            lambda0: 20.0,
            w_min: 0.02,
            mass_min: 0.5,
            match_radius: 1.0,
            sensor: SensorModel::default(),
            targets: TargetConfig::default(),
            access_points: AccessConfig::default(),
            coordination: CoordinationConfig::default(),
            base_dir: None,
        }
    }
}

/// Parameters that can be varied by a sweep.
pub const SWEEP_AXES: &[&str] = &[
    "team_size",
    "steps",
    "r_d",
    "p_d0",
    "sigma_d",
    "sigma_g",
    "mu",
    "comm_range",
    "check_in_period",
    "stuck_steps",
    "stuck_radius",
    "taylor_terms",
    "coalition_cap",
    "gamma",
    "leader_election",
    "lambda0",
    "target_count",
    "robot_spacing",
    "server_spacing",
];

impl ScenarioConfig {
    /// The reduced-scale scenario: 300 steps with a 0.5 m server grid.
    pub fn reduced() -> Self {
        Self { steps: 300, server_spacing: 0.5, ..Self::default() }
    }

    pub fn parse(text: &str) -> Result<Self, SimError> {
        let cfg: Self = toml::from_str(text).map_err(|e| SimError::Config(vec![FieldIssue {
            field: "<file>".into(),
            reason: e.to_string().trim().to_string(),
        }]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            SimError::Config(vec![FieldIssue { field: path.display().to_string(), reason: e.to_string() }])
        })?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<(), SimError> {
        let mut issues = Vec::new();
        let mut bad = |field: &str, reason: String| issues.push(FieldIssue { field: field.into(), reason });
        if self.schema != SCENARIO_SCHEMA {
            bad("schema", format!("expected {SCENARIO_SCHEMA:?}, got {:?}", self.schema));
        }
        if self.team_size == 0 {
            bad("team_size", "must be at least 1".into());
        }
        for (name, v) in [
            ("node_spacing", self.node_spacing),
            ("max_step", self.max_step),
            ("robot_spacing", self.robot_spacing),
            ("server_spacing", self.server_spacing),
            ("match_radius", self.match_radius),
            ("access_points.comm_range", self.access_points.comm_range),
            ("coordination.stuck_radius", self.coordination.stuck_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bad(name, format!("must be positive and finite, got {v}"));
            }
        }
        if self.max_step < self.node_spacing {
            bad("max_step", "must be at least node_spacing so the graph has edges".into());
        }
        if self.robot_spacing > 0.0 && self.server_spacing > 0.0 {
            let ratio = self.robot_spacing / self.server_spacing;
            if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-9 * ratio {
                bad(
                    "robot_spacing",
                    format!("must be an integer multiple of server_spacing ({})", self.server_spacing),
                );
            }
        }
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            bad("lambda0", "must be nonnegative".into());
        }
        if !(self.w_min > 0.0 && self.w_min < 1.0) {
            bad("w_min", "must lie in (0, 1)".into());
        }
        if !(self.mass_min >= 0.0) {
            bad("mass_min", "must be nonnegative".into());
        }
        if let Err(e) = self.sensor.validate() {
            let crate::sensing::SensingError::Invalid { field, reason } = e;
            bad(&format!("sensor.{field}"), reason);
        }
        if !(self.targets.min_separation >= 0.0) {
            bad("targets.min_separation", "must be nonnegative".into());
        }
        let c = &self.coordination;
        if !(c.check_in_period >= 1.0) {
            bad("coordination.check_in_period", format!("must be at least 1 (or inf), got {}", c.check_in_period));
        }
        if c.stuck_steps == 0 {
            bad("coordination.stuck_steps", "must be at least 1".into());
        }
        if c.taylor_terms == 0 {
            bad("coordination.taylor_terms", "must be at least 1".into());
        }
        if c.coalition_cap == 0 {
            bad("coordination.coalition_cap", "must be at least 1".into());
        }
        if !(c.gamma > 0.0 && c.gamma <= 1.0) {
            bad("coordination.gamma", "must lie in (0, 1]".into());
        }
        if self.map != BUILTIN_OFFICE && self.access_points.positions.is_none() {
            bad("access_points.positions", "required for maps other than the built-in office".into());
        }
        if matches!(&self.access_points.positions, Some(p) if p.is_empty()) {
            bad("access_points.positions", "at least one access point is required".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(SimError::Config(issues))
        }
    }

    /// Sets a sweep axis from its textual value.
    pub fn set_axis(&mut self, axis: &str, value: &str) -> Result<(), SimError> {
        let invalid = |reason: String| SimError::Config(vec![FieldIssue { field: axis.to_string(), reason }]);
        let float = || value.trim().parse::<f64>().map_err(|_| invalid(format!("expected a number, got {value:?}")));
        let int = || value.trim().parse::<u64>().map_err(|_| invalid(format!("expected an integer, got {value:?}")));
        match axis {
            "team_size" => self.team_size = int()? as usize,
            "steps" => self.steps = int()?,
            "r_d" => self.sensor.r_d = float()?,
            "p_d0" => self.sensor.p_d0 = float()?,
            "sigma_d" => self.sensor.sigma_d = float()?,
            "sigma_g" => self.sensor.sigma_g = float()?,
            "mu" => self.sensor.mu = float()?,
            "comm_range" => self.access_points.comm_range = float()?,
            "check_in_period" => self.coordination.check_in_period = float()?,
            "stuck_steps" => self.coordination.stuck_steps = int()? as usize,
            "stuck_radius" => self.coordination.stuck_radius = float()?,
            "taylor_terms" => self.coordination.taylor_terms = int()? as usize,
            "coalition_cap" => self.coordination.coalition_cap = int()? as usize,
            "gamma" => self.coordination.gamma = float()?,
            "leader_election" => {
                self.coordination.leader_election = value
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("expected true or false, got {value:?}")))?
            }
            "lambda0" => self.lambda0 = float()?,
            "target_count" => {
                self.targets.count = int()? as usize;
                self.targets.positions = None;
            }
            "robot_spacing" => self.robot_spacing = float()?,
            "server_spacing" => self.server_spacing = float()?,
            _ => {
                return Err(SimError::UnknownAxis { axis: axis.to_string(), valid: SWEEP_AXES.join(", ") });
            }
        }
        self.validate()
    }

    pub fn coord_config(&self) -> CoordConfig {
        let c = &self.coordination;
        CoordConfig {
            check_in_period: c.check_in_period,
            stuck_steps: c.stuck_steps,
            stuck_radius: c.stuck_radius,
            series: SeriesConfig { terms: c.taylor_terms, atom_tail: c.atom_tail },
            coalition_cap: c.coalition_cap,
            gamma: c.gamma,
            leader_election: c.leader_election,
        }
    }

    pub fn load_map(&self) -> Result<EnvironmentMap, SimError> {
        if self.map == BUILTIN_OFFICE {
            return Ok(office_map());
        }
        let path = match &self.base_dir {
            Some(dir) => dir.join(&self.map),
            None => PathBuf::from(&self.map),
        };
        Ok(EnvironmentMap::load(path)?)
    }

    pub fn access_point_positions(&self) -> Vec<Point> {
        match &self.access_points.positions {
            Some(p) => p.iter().map(|&[x, y]| Point::new(x, y)).collect(),
            None => office_access_points(),
        }
    }

    /// Builds the static world: map, control graph, access points, grids, footprints.
    pub fn build_world(&self) -> Result<World, SimError> {
        self.validate()?;
        let map = self.load_map()?;
        let k = map.cell_size() / self.robot_spacing;
        if (k - k.round()).abs() > 1e-9 * k || k.round() < 1.0 {
            return Err(SimError::Config(vec![FieldIssue {
                field: "robot_spacing".into(),
                reason: format!("map cell size {} must be an integer multiple of it", map.cell_size()),
            }]));
        }
        let aps = self.access_point_positions();
        for (i, p) in aps.iter().enumerate() {
            if !map.is_free(*p) {
                return Err(SimError::Config(vec![FieldIssue {
                    field: format!("access_points.positions[{i}]"),
                    reason: format!("{p} is not in free space"),
                }]));
            }
        }
        let graph = build_graph(&map, self.node_spacing, self.max_step)?;
        let layout = AccessPointLayout::new(aps, self.access_points.comm_range, &graph);
        Ok(World::new(map, graph, layout, self.sensor, self.robot_spacing, self.server_spacing)?)
    }

    /// Robot `i` starts at the node nearest access point `i mod A`.
    pub fn start_nodes(&self, world: &World) -> Vec<NodeId> {
        let nodes = world.access_points.nodes();
        (0..self.team_size).map(|i| nodes[i % nodes.len()]).collect()
    }

    /// True target positions for `seed`.
    pub fn target_positions(&self, world: &World, seed: u64) -> Result<Vec<Point>, SimError> {
        if let Some(p) = &self.targets.positions {
            let pts: Vec<Point> = p.iter().map(|&[x, y]| Point::new(x, y)).collect();
            if let Some((i, p)) = pts.iter().enumerate().find(|(_, p)| !world.map.is_free(**p)) {
                return Err(SimError::Config(vec![FieldIssue {
                    field: format!("targets.positions[{i}]"),
                    reason: format!("{p} is not in free space"),
                }]));
            }
            return Ok(pts);
        }
        let mut rng = seeded_stream(seed, TARGET_STREAM);
        let (w, h) = (world.map.width(), world.map.height());
        let mut out: Vec<Point> = Vec::with_capacity(self.targets.count);
        let mut draws = 0;
        while out.len() < self.targets.count {
            draws += 1;
            if draws > MAX_PLACEMENT_DRAWS {
                return Err(SimError::Config(vec![FieldIssue {
                    field: "targets.min_separation".into(),
                    reason: format!("could not place {} targets this far apart", self.targets.count),
                }]));
            }
            let p = Point::new(rng.random_range(0.0..w), rng.random_range(0.0..h));
            if world.map.is_free(p) && out.iter().all(|q| q.dist(p) >= self.targets.min_separation) {
                out.push(p);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = ScenarioConfig::default();
        let text = cfg.to_toml();
        assert_eq!(ScenarioConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn infinite_check_in_period_parses() {
        let mut cfg = ScenarioConfig::default();
        cfg.coordination.check_in_period = f64::INFINITY;
        let back = ScenarioConfig::parse(&cfg.to_toml()).unwrap();
        assert!(back.coordination.check_in_period.is_infinite());
        let mut cfg = ScenarioConfig::default();
        cfg.set_axis("check_in_period", "inf").unwrap();
        assert!(cfg.coordination.check_in_period.is_infinite());
    }

    #[test]
    fn validation_reports_every_bad_field() {
        let text = format!(
            "schema = \"{SCENARIO_SCHEMA}\"\nteam_size = 0\nrobot_spacing = 0.3\n[sensor]\np_d0 = 1.5\nsigma_d = 2.0\nr_d = 5.0\nsigma_g = 1.0\nmu = 0.3\n"
        );
        let SimError::Config(issues) = ScenarioConfig::parse(&text).unwrap_err() else { panic!("expected config error") };
        let fields: Vec<&str> = issues.iter().map(|i| i.field.as_str()).collect();
        assert_eq!(fields, vec!["team_size", "robot_spacing", "sensor.p_d0"]);
    }

    #[test]
    fn unknown_keys_and_axes_are_rejected() {
        assert!(ScenarioConfig::parse(&format!("schema = \"{SCENARIO_SCHEMA}\"\nrobots = 3\n")).is_err());
        let mut cfg = ScenarioConfig::default();
        let err = cfg.set_axis("speed", "2").unwrap_err();
        assert!(err.to_string().contains("team_size"));
    }

    #[test]
    fn missing_fields_take_defaults() {
        let cfg = ScenarioConfig::parse(&format!("schema = \"{SCENARIO_SCHEMA}\"\nsteps = 10\n")).unwrap();
        assert_eq!(cfg.steps, 10);
        assert_eq!(cfg.team_size, 4);
    }
}

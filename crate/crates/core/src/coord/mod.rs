//! Robot control modes, coalitions, joint planning, and the robot/server message protocol.

mod coalition;
mod planner;
mod server;
mod team;
mod world;

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::env::{EnvError, NodeId, Point};
use crate::info::{InfoError, SeriesConfig, DEFAULT_COALITION_CAP};
use crate::phd::{Phd, PhdError};
use crate::sensing::MeasurementSet;

pub use coalition::{comm_components, form_coalitions, Coalition};
pub use planner::{candidates, joint_objective, plan_exploit, Plan, PlanContext};
pub use server::ServerState;
pub use team::{StepReport, Team};
pub use world::World;

#[derive(Debug, Error)]
pub enum CoordError {
    #[error("robot {robot} is not within range of any access point")]
    OutOfRange { robot: usize },
    #[error("message from robot {robot} at step {time} was uploaded twice")]
    DuplicateMessage { robot: usize, time: u64 },
    #[error("invalid coordination setup: {0}")]
    Invalid(String),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Phd(#[from] PhdError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Explore,
    CheckIn,
    Exploit,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Explore, Mode::CheckIn, Mode::Exploit];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Explore => "explore",
            Mode::CheckIn => "checkin",
            Mode::Exploit => "exploit",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One robot's measurement set at one step, tagged with where it was taken.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub robot_id: usize,
    pub node: NodeId,
    pub pose: Point,
    pub measurements: MeasurementSet,
    pub time: u64,
}

impl Message {
    /// Global application order: by time, then robot id.
    pub fn order_key(&self) -> (u64, usize) {
        (self.time, self.robot_id)
    }
}

/// Protocol and planning parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordConfig {
    /// `T_C`; `f64::INFINITY` disables the check-in deadline.
    pub check_in_period: f64,
    /// `T_S`: steps a robot may stay inside the disk `U` before it is declared stuck.
    pub stuck_steps: usize,
    /// `r_U`.
    pub stuck_radius: f64,
    pub series: SeriesConfig,
    pub coalition_cap: usize,
    /// `γ` in the server information model.
    pub gamma: f64,
    /// When false every coalition member plans from its own belief and executes its own part.
    pub leader_election: bool,
}

impl Default for CoordConfig {
    fn default() -> Self {
        Self {
            check_in_period: 40.0,
            stuck_steps: 15,
            stuck_radius: 3.0,
            series: SeriesConfig::default(),
            coalition_cap: DEFAULT_COALITION_CAP,
            gamma: 0.9,
            leader_election: true,
        }
    }
}

impl CoordConfig {
    pub fn validate(&self) -> Result<(), CoordError> {
        if !(self.check_in_period >= 1.0) {
            return Err(CoordError::Invalid(format!("check-in period must be at least 1, got {}", self.check_in_period)));
        }
        if self.stuck_steps == 0 || !(self.stuck_radius > 0.0) {
            return Err(CoordError::Invalid("stuck window and radius must be positive".into()));
        }
        if self.coalition_cap == 0 {
            return Err(CoordError::Invalid("coalition cap must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(CoordError::Invalid(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Deterministic random stream `stream` derived from a master seed.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids: 0 for target placement, then two per robot.
pub fn sensing_stream(robot: usize) -> u64 {
    1 + 2 * robot as u64
}

pub fn explore_stream(robot: usize) -> u64 {
    2 + 2 * robot as u64
}

#[derive(Debug, Clone)]
pub struct RobotState {
    pub id: usize,
    pub node: NodeId,
    pub belief: Phd,
    pub mode: Mode,
    /// Remaining nodes to visit in Explore / Check-in, excluding the current node.
    pub goal_path: VecDeque<NodeId>,
    /// Own messages since the last check-in, oldest first.
    pub msg_history: Vec<Arc<Message>>,
    pub last_checkin_time: u64,
    /// Recent Exploit-mode poses, oldest first.
    pub stuck_window: VecDeque<Point>,
    pub(crate) sense_rng: ChaCha8Rng,
    pub(crate) explore_rng: ChaCha8Rng,
}

impl RobotState {
    pub fn new(id: usize, node: NodeId, belief: Phd, seed: u64) -> Self {
        Self {
            id,
            node,
            belief,
            mode: Mode::Exploit,
            goal_path: VecDeque::new(),
            msg_history: Vec::new(),
            last_checkin_time: 0,
            stuck_window: VecDeque::new(),
            sense_rng: seeded_stream(seed, sensing_stream(id)),
            explore_rng: seeded_stream(seed, explore_stream(id)),
        }
    }

    /// Steps since the last check-in.
    pub fn tau(&self, now: u64) -> u64 {
        now.saturating_sub(self.last_checkin_time)
    }

    /// Records an Exploit pose and reports whether the robot has stayed within
    /// `radius` of where the window started for `steps` steps.
    pub fn observe_pose(&mut self, pose: Point, steps: usize, radius: f64) -> bool {
        self.stuck_window.push_back(pose);
        while self.stuck_window.len() > steps + 1 {
            self.stuck_window.pop_front();
        }
        if self.stuck_window.len() < steps + 1 {
            return false;
        }
        let anchor = self.stuck_window[0];
        self.stuck_window.iter().all(|p| p.dist(anchor) <= radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phd::ParticleGrid;

    fn robot() -> RobotState {
        let grid = Arc::new(ParticleGrid::from_cells(1.0, vec![(0, 0)]).unwrap());
        RobotState::new(0, 0, Phd::from_weights(grid, vec![1.0]).unwrap(), 1)
    }

    #[test]
    fn stuck_needs_a_full_window() {
        let mut r = robot();
        let p = Point::new(1.0, 1.0);
        for _ in 0..3 {
            assert!(!r.observe_pose(p, 3, 0.5));
        }
        assert!(r.observe_pose(p, 3, 0.5));
    }

    #[test]
    fn moving_robot_is_not_stuck() {
        let mut r = robot();
        for i in 0..20 {
            assert!(!r.observe_pose(Point::new(i as f64, 0.0), 3, 2.5));
        }
    }

    #[test]
    fn mode_names_round_trip() {
        for m in Mode::ALL {
            assert_eq!(Mode::parse(m.as_str()), Some(m));
        }
        assert_eq!(Mode::parse("sleep"), None);
    }

    #[test]
    fn streams_are_independent() {
        use rand::Rng;
        let mut a = seeded_stream(7, sensing_stream(0));
        let mut b = seeded_stream(7, explore_stream(0));
        assert_ne!(a.random::<u64>(), b.random::<u64>());
        let mut c = seeded_stream(7, sensing_stream(0));
        let mut a2 = seeded_stream(7, sensing_stream(0));
        assert_eq!(c.random::<u64>(), a2.random::<u64>());
    }
}

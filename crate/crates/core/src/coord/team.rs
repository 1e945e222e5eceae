use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::env::{NodeId, Point};
use crate::phd::Phd;

use super::{
    comm_components, form_coalitions, plan_exploit, CoordConfig, CoordError, Message, Mode, PlanContext, RobotState,
    ServerState, World,
};

/// What happened during one simulation step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub time: u64,
    /// Mode of each robot while it moved this step.
    pub modes: Vec<Mode>,
    /// `(coalition size, wall-clock time)` of every joint planning call.
    pub plan_timings: Vec<(usize, Duration)>,
    /// Robots that checked in this step, ascending.
    pub checkins: Vec<usize>,
    pub server_changed: bool,
}

/// The robot team plus the server: runs the sense / exchange / check-in / decide / move loop.
#[derive(Debug, Clone)]
pub struct Team {
    world: Arc<World>,
    config: CoordConfig,
    robots: Vec<RobotState>,
    server: ServerState,
    time: u64,
    messages_generated: usize,
    deadline_violations: usize,
}

impl Team {
    /// Robot `i` starts at `start_nodes[i]` in Exploit mode with the server's initial belief
    /// (uniform with mass `lambda0`).
    pub fn new(
        world: Arc<World>,
        config: CoordConfig,
        lambda0: f64,
        start_nodes: &[NodeId],
        seed: u64,
    ) -> Result<Self, CoordError> {
        config.validate()?;
        if start_nodes.is_empty() {
            return Err(CoordError::Invalid("team must have at least one robot".into()));
        }
        if let Some(&bad) = start_nodes.iter().find(|&&n| n >= world.graph.len()) {
            return Err(CoordError::Invalid(format!("start node {bad} is not a graph node")));
        }
        let initial = Phd::uniform(world.server_grid.clone(), lambda0)?;
        let robot_belief = initial.downsample_to(&world.robot_grid)?;
        let robots = start_nodes
            .iter()
            .enumerate()
            .map(|(id, &node)| RobotState::new(id, node, robot_belief.clone(), seed))
            .collect();
        Ok(Self {
            server: ServerState::new(initial, start_nodes.len()),
            world,
            config,
            robots,
            time: 0,
            messages_generated: 0,
            deadline_violations: 0,
        })
    }

    pub fn world(&self) -> &Arc<World> {
        &self.world
    }

    pub fn config(&self) -> &CoordConfig {
        &self.config
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn server(&self) -> &ServerState {
        &self.server
    }

    /// Last completed step (0 before the first step).
    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn messages_generated(&self) -> usize {
        self.messages_generated
    }

    /// Messages generated but not yet uploaded.
    pub fn messages_in_flight(&self) -> usize {
        self.robots.iter().map(|r| r.msg_history.len()).sum()
    }

    /// Steps on which some robot's check-in age exceeded `T_C` plus its hop distance
    /// to the nearest access point.
    pub fn deadline_violations(&self) -> usize {
        self.deadline_violations
    }

    pub fn pose(&self, robot: usize) -> Point {
        self.world.graph.position(self.robots[robot].node)
    }

    /// Uploads robot `robot`'s history and replaces its belief with the server's.
    pub fn check_in(&mut self, robot: usize) -> Result<(), CoordError> {
        let now = self.time.max(self.robots[robot].last_checkin_time);
        self.check_in_at(robot, now)
    }

    fn check_in_at(&mut self, robot: usize, now: u64) -> Result<(), CoordError> {
        if !self.world.access_points.in_range(self.pose(robot)) {
            return Err(CoordError::OutOfRange { robot });
        }
        let r = &mut self.robots[robot];
        self.server.upload(robot, &r.msg_history, now, &self.world)?;
        r.msg_history.clear();
        r.belief = self.server.belief().downsample_to(&self.world.robot_grid)?;
        r.last_checkin_time = now;
        Ok(())
    }

    pub fn step(&mut self, targets: &[Point]) -> Result<StepReport, CoordError> {
        let t = self.time + 1;
        let world = self.world.clone();
        let sensor = &world.sensor;
        let n = self.robots.len();

        // sense
        let mut msgs = Vec::with_capacity(n);
        for r in &mut self.robots {
            let pose = world.graph.position(r.node);
            let z = sensor.generate_measurements(pose, t, targets, &world.map, &mut r.sense_rng);
            let msg = Arc::new(Message { robot_id: r.id, node: r.node, pose, measurements: z, time: t });
            r.msg_history.push(msg.clone());
            msgs.push(msg);
        }
        self.messages_generated += n;

        // peer exchange, own message included, ascending robot id
        let poses: Vec<Point> = (0..n).map(|i| self.pose(i)).collect();
        for comp in comm_components(&poses, world.access_points.comm_range()) {
            for &i in &comp {
                for &j in &comp {
                    let m = &msgs[j];
                    self.robots[i].belief.apply_update(&m.measurements, world.robot_footprints.get(m.node), sensor);
                }
            }
        }

        // check-in whenever an access point is in range
        let version = self.server.version();
        let mut checkins = Vec::new();
        for i in 0..n {
            if world.access_points.in_range(poses[i]) {
                self.check_in_at(i, t)?;
                checkins.push(i);
                let r = &mut self.robots[i];
                if r.mode == Mode::CheckIn {
                    r.mode = Mode::Exploit;
                    r.goal_path.clear();
                    r.stuck_window.clear();
                }
            }
        }

        // mode transitions
        for r in &mut self.robots {
            if r.mode != Mode::Exploit && r.goal_path.is_empty() {
                r.mode = Mode::Exploit;
                r.stuck_window.clear();
            }
            let hops = world.hops_to_access_point(r.node);
            let tau = r.tau(t);
            if self.config.check_in_period.is_finite() {
                if tau as f64 > self.config.check_in_period + hops as f64 {
                    self.deadline_violations += 1;
                }
                if r.mode != Mode::CheckIn && (tau + hops as u64) as f64 >= self.config.check_in_period {
                    if let Some(goal) = world.access_points.nearest_by_hops(&world.graph, r.node) {
                        r.mode = Mode::CheckIn;
                        r.goal_path = world.graph.shortest_path(r.node, goal)?.into_iter().skip(1).collect();
                        r.stuck_window.clear();
                        continue;
                    }
                }
            }
            if r.mode == Mode::Exploit
                && r.observe_pose(world.graph.position(r.node), self.config.stuck_steps, self.config.stuck_radius)
            {
                let goal = r.explore_rng.random_range(0..world.graph.len());
                r.mode = Mode::Explore;
                r.goal_path = world.graph.shortest_path(r.node, goal)?.into_iter().skip(1).collect();
                r.stuck_window.clear();
            }
        }

        // joint planning for Exploit coalitions
        let ctx = PlanContext { world: &world, config: &self.config, team_size: n };
        let exploiting: Vec<(usize, Point, u64)> = self
            .robots
            .iter()
            .filter(|r| r.mode == Mode::Exploit)
            .map(|r| (r.id, poses[r.id], r.last_checkin_time))
            .collect();
        let coalitions = form_coalitions(&exploiting, world.access_points.comm_range(), sensor.r_d, self.config.coalition_cap);
        let mut next: Vec<Option<NodeId>> = vec![None; n];
        let mut plan_timings = Vec::new();
        for c in &coalitions {
            let nodes: Vec<NodeId> = c.members.iter().map(|&m| self.robots[m].node).collect();
            let taus: Vec<u64> = c.members.iter().map(|&m| self.robots[m].tau(t)).collect();
            let planners: Vec<usize> = if self.config.leader_election { vec![c.leader] } else { c.members.clone() };
            for p in planners {
                let start = Instant::now();
                let plan = plan_exploit(&ctx, &self.robots[p].belief, &nodes, &taus)?;
                plan_timings.push((c.len(), start.elapsed()));
                for (k, &m) in c.members.iter().enumerate() {
                    if self.config.leader_election || m == p {
                        next[m] = Some(plan.actions[k]);
                    }
                }
            }
        }

        // move
        let modes: Vec<Mode> = self.robots.iter().map(|r| r.mode).collect();
        for r in &mut self.robots {
            match r.mode {
                Mode::Exploit => {
                    if let Some(node) = next[r.id] {
                        r.node = node;
                    }
                }
                Mode::Explore | Mode::CheckIn => {
                    if let Some(node) = r.goal_path.pop_front() {
                        r.node = node;
                    }
                }
            }
        }
        self.time = t;
        Ok(StepReport { time: t, modes, plan_timings, checkins, server_changed: self.server.version() != version })
    }
}

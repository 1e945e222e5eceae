use crate::env::NodeId;
use crate::info::{accumulate_detected, outcome_entropy, InfoError, RobotChannel, ServerInfoModel};
use crate::phd::Phd;

use super::{CoordConfig, CoordError, World};

/// Everything `plan_exploit` reads besides the belief and the coalition's poses.
#[derive(Debug, Clone, Copy)]
pub struct PlanContext<'a> {
    pub world: &'a World,
    pub config: &'a CoordConfig,
    pub team_size: usize,
}

impl PlanContext<'_> {
    pub fn server_model(&self) -> Result<ServerInfoModel, InfoError> {
        let r_d = self.world.sensor.r_d;
        ServerInfoModel::new(
            self.team_size,
            std::f64::consts::PI * r_d * r_d,
            self.world.map.free_area(),
            self.config.gamma,
            ServerInfoModel::rate_for_period(self.config.check_in_period),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    /// Next node per coalition member, in member order.
    pub actions: Vec<NodeId>,
    pub objective: f64,
    pub joint_evaluations: usize,
}

/// Candidate nodes for a robot at `q`: its graph neighbors and `q` itself, ascending.
pub fn candidates(world: &World, q: NodeId) -> Vec<NodeId> {
    let mut c: Vec<NodeId> = world.graph.neighbors(q).to_vec();
    c.push(q);
    c.sort_unstable();
    c.dedup();
    c
}

/// Scratch buffers for evaluating `H[Z_C]` over unions of sparse footprints.
struct JointScratch {
    slot: Vec<u32>,
    touched: Vec<usize>,
    weights: Vec<f64>,
    miss: Vec<f64>,
    detected: Vec<f64>,
}

impl JointScratch {
    fn new(particles: usize, k: usize) -> Self {
        Self {
            slot: vec![u32::MAX; particles],
            touched: Vec::new(),
            weights: Vec::new(),
            miss: Vec::new(),
            detected: vec![0.0; 1 << k],
        }
    }

    fn outcome_entropy(&mut self, world: &World, belief: &Phd, nodes: &[NodeId], mu: f64) -> f64 {
        let k = nodes.len();
        for (m, &node) in nodes.iter().enumerate() {
            for (idx, pd) in world.robot_footprints.get(node).iter() {
                let mut s = self.slot[idx];
                if s == u32::MAX {
                    s = self.weights.len() as u32;
                    self.slot[idx] = s;
                    self.touched.push(idx);
                    self.weights.push(belief.weight(idx));
                    self.miss.extend(std::iter::repeat_n(1.0, k));
                }
                self.miss[s as usize * k + m] = 1.0 - pd;
            }
        }
        self.detected.iter_mut().for_each(|d| *d = 0.0);
        accumulate_detected(&self.weights, &self.miss, k, &mut self.detected);
        for &idx in &self.touched {
            self.slot[idx] = u32::MAX;
        }
        self.touched.clear();
        self.weights.clear();
        self.miss.clear();
        outcome_entropy(mu, &self.detected)
    }
}

/// Precomputed per-member terms of the objective.
struct MemberTerms {
    candidates: Vec<NodeId>,
    /// `−H[Z_j|X] + server MI` per candidate.
    local: Vec<f64>,
}

fn member_terms(
    ctx: &PlanContext,
    server: &ServerInfoModel,
    belief: &Phd,
    node: NodeId,
    tau: u64,
) -> MemberTerms {
    let world = ctx.world;
    let mu = world.sensor.mu;
    let series = ctx.config.series;
    let candidates = candidates(world, node);
    let local = candidates
        .iter()
        .map(|&c| {
            let hc = RobotChannel::from_footprint(belief, world.robot_footprints.get(c), series).conditional_entropy(mu);
            let hops = world.hops_to_access_point(c);
            server.mutual_info(belief.lambda(), mu, series, tau, hops) - hc
        })
        .collect();
    MemberTerms { candidates, local }
}

/// Objective of one joint action: `I[X; Z_C] + Σ_j I_server(q_j)`.
pub fn joint_objective(ctx: &PlanContext, belief: &Phd, actions: &[NodeId], taus: &[u64]) -> Result<f64, CoordError> {
    let world = ctx.world;
    let server = ctx.server_model()?;
    let mu = world.sensor.mu;
    let mut scratch = JointScratch::new(belief.len(), actions.len());
    let mut total = scratch.outcome_entropy(world, belief, actions, mu);
    for (&a, &tau) in actions.iter().zip(taus) {
        let hc = RobotChannel::from_footprint(belief, world.robot_footprints.get(a), ctx.config.series)
            .conditional_entropy(mu);
        total += server.mutual_info(belief.lambda(), mu, ctx.config.series, tau, world.hops_to_access_point(a)) - hc;
    }
    Ok(total)
}

/// Exhaustive one-step joint planning for a coalition at `nodes` (member order),
/// using `belief` (the planner's own PHD on the robot grid).
///
/// Joint actions are enumerated in lexicographic order of node ids; a later action
/// replaces the incumbent only if it scores higher by more than a relative `1e-12`,
/// so ties resolve to the lexicographically smallest tuple.
pub fn plan_exploit(ctx: &PlanContext, belief: &Phd, nodes: &[NodeId], taus: &[u64]) -> Result<Plan, CoordError> {
    let k = nodes.len();
    if k == 0 {
        return Err(InfoError::EmptyCoalition.into());
    }
    if k > ctx.config.coalition_cap {
        return Err(InfoError::CoalitionTooLarge { size: k, cap: ctx.config.coalition_cap }.into());
    }
    if taus.len() != k {
        return Err(CoordError::Invalid(format!("{} poses but {} check-in ages", k, taus.len())));
    }
    if belief.len() != ctx.world.robot_grid.len() {
        return Err(CoordError::Invalid("planning belief must live on the robot grid".into()));
    }
    let server = ctx.server_model()?;
    let terms: Vec<MemberTerms> =
        nodes.iter().zip(taus).map(|(&q, &tau)| member_terms(ctx, &server, belief, q, tau)).collect();
    let mu = ctx.world.sensor.mu;
    let mut scratch = JointScratch::new(belief.len(), k);
    let mut pick = vec![0usize; k];
    let mut joint = vec![0 as NodeId; k];
    let mut best: Option<(f64, Vec<NodeId>)> = None;
    let mut evaluations = 0;
    loop {
        let mut local = 0.0;
        for m in 0..k {
            joint[m] = terms[m].candidates[pick[m]];
            local += terms[m].local[pick[m]];
        }
        let value = scratch.outcome_entropy(ctx.world, belief, &joint, mu) + local;
        evaluations += 1;
        let value = if value.is_nan() { f64::NEG_INFINITY } else { value };
        let better = match &best {
            None => true,
            Some((b, _)) => value > b + 1e-12 * b.abs().max(1.0),
        };
        if better {
            best = Some((value, joint.clone()));
        }
        // odometer, last member fastest
        let mut m = k;
        loop {
            if m == 0 {
                let (objective, actions) = best.expect("at least one joint action");
                return Ok(Plan { actions, objective, joint_evaluations: evaluations });
            }
            m -= 1;
            pick[m] += 1;
            if pick[m] < terms[m].candidates.len() {
                break;
            }
            pick[m] = 0;
        }
    }
}

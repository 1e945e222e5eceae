use std::collections::HashSet;
use std::sync::Arc;

use crate::phd::Phd;

use super::{CoordError, Message, World};

/// The server's fine-grid belief and upload bookkeeping.
///
/// The belief always equals the initial belief updated with every uploaded message in
/// global `(time, robot id)` order. Messages no future upload can precede (time at or
/// before every robot's last check-in) are folded into a committed snapshot; the rest
/// stay pending and are replayed when an upload arrives out of order.
#[derive(Debug, Clone)]
pub struct ServerState {
    committed: Phd,
    current: Phd,
    pending: Vec<Arc<Message>>,
    commit_time: u64,
    frontier: Option<(u64, usize)>,
    last_checkin: Vec<u64>,
    uploaded: HashSet<(usize, u64)>,
    version: u64,
    replays: u64,
}

impl ServerState {
    /// All robots are taken to have synchronized with the server at time 0.
    pub fn new(initial: Phd, team_size: usize) -> Self {
        Self {
            committed: initial.clone(),
            current: initial,
            pending: Vec::new(),
            commit_time: 0,
            frontier: None,
            last_checkin: vec![0; team_size],
            uploaded: HashSet::new(),
            version: 0,
            replays: 0,
        }
    }

    pub fn belief(&self) -> &Phd {
        &self.current
    }

    /// Number of distinct messages incorporated into the belief.
    pub fn applied_messages(&self) -> usize {
        self.uploaded.len()
    }

    /// Incremented whenever the belief changes.
    pub fn version(&self) -> u64 {
        self.version
    }

    /// Number of out-of-order uploads that forced a replay of pending messages.
    pub fn replays(&self) -> u64 {
        self.replays
    }

    pub fn last_update_time(&self, robot: usize) -> u64 {
        self.last_checkin[robot]
    }

    /// Applies robot `robot`'s message history at check-in time `now`.
    pub fn upload(&mut self, robot: usize, msgs: &[Arc<Message>], now: u64, world: &World) -> Result<(), CoordError> {
        if robot >= self.last_checkin.len() {
            return Err(CoordError::Invalid(format!("unknown robot {robot}")));
        }
        let mut prev = self.last_checkin[robot];
        for m in msgs {
            if m.robot_id != robot {
                return Err(CoordError::Invalid(format!("robot {robot} uploaded a message of robot {}", m.robot_id)));
            }
            if !self.uploaded.insert((robot, m.time)) {
                return Err(CoordError::DuplicateMessage { robot, time: m.time });
            }
            if m.time <= prev || m.time > now {
                return Err(CoordError::Invalid(format!(
                    "message time {} outside ({prev}, {now}] for robot {robot}",
                    m.time
                )));
            }
            prev = m.time;
        }
        if let Some(first) = msgs.first() {
            let in_order = self.frontier.is_none_or(|f| first.order_key() > f);
            self.pending.extend(msgs.iter().cloned());
            if in_order {
                for m in msgs {
                    apply(&mut self.current, m, world);
                }
            } else {
                self.replays += 1;
                self.pending.sort_by_key(|m| m.order_key());
                self.current = self.committed.clone();
                for m in &self.pending {
                    apply(&mut self.current, m, world);
                }
            }
            let last = msgs.last().expect("nonempty").order_key();
            self.frontier = Some(self.frontier.map_or(last, |f| f.max(last)));
            self.version += 1;
        }
        self.last_checkin[robot] = now;
        self.commit(world);
        Ok(())
    }

    /// Folds pending messages that no later upload can precede into the committed snapshot.
    fn commit(&mut self, world: &World) {
        let threshold = self.last_checkin.iter().copied().min().unwrap_or(0);
        if threshold <= self.commit_time {
            return;
        }
        // pending stays sorted: in-order uploads append past the frontier, others re-sort
        let split = self.pending.partition_point(|m| m.time <= threshold);
        if split == self.pending.len() {
            self.committed = self.current.clone();
            self.pending.clear();
        } else {
            for m in self.pending.drain(..split) {
                apply(&mut self.committed, &m, world);
            }
        }
        self.commit_time = threshold;
    }
}

fn apply(belief: &mut Phd, m: &Message, world: &World) {
    belief.apply_update(&m.measurements, world.server_footprints.get(m.node), &world.sensor);
}

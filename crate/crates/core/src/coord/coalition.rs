use crate::env::Point;

/// Robots that plan jointly; the leader's belief drives the plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalition {
    /// Robot ids, ascending.
    pub members: Vec<usize>,
    pub leader: usize,
}

impl Coalition {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Connected components of the graph on `items` with an edge wherever `linked(a, b)`.
/// Components are returned as index lists, each ascending, ordered by first index.
fn components(n: usize, mut linked: impl FnMut(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        label[start] = id;
        let mut comp = vec![start];
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for v in 0..n {
                if label[v] == usize::MAX && linked(u, v) {
                    label[v] = id;
                    comp.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Groups of robots that can exchange messages: connected components of the
/// "within `range`" graph over `poses`.
pub fn comm_components(poses: &[Point], range: f64) -> Vec<Vec<usize>> {
    components(poses.len(), |a, b| poses[a].dist(poses[b]) <= range)
}

/// Partitions Exploit-mode robots `(id, pose, last_checkin_time)` into coalitions.
///
/// Two robots are linked when they are within `comm_range` and their footprints can
/// overlap (`|q_i − q_j| ≤ 2 r_d`). The leader is the most recently checked-in member,
/// lowest id on ties. Components larger than `cap` are split: the highest-priority
/// remaining robot leads and takes its `cap − 1` nearest remaining members.
pub fn form_coalitions(robots: &[(usize, Point, u64)], comm_range: f64, r_d: f64, cap: usize) -> Vec<Coalition> {
    let reach = comm_range.min(2.0 * r_d);
    let priority = |i: usize| (std::cmp::Reverse(robots[i].2), robots[i].0);
    let mut out = Vec::new();
    for comp in components(robots.len(), |a, b| robots[a].1.dist(robots[b].1) <= reach) {
        let mut rest = comp;
        while !rest.is_empty() {
            let lead = *rest.iter().min_by_key(|&&i| priority(i)).expect("nonempty");
            let mut chosen = vec![lead];
            if rest.len() > cap {
                let mut others: Vec<usize> = rest.iter().copied().filter(|&i| i != lead).collect();
                others.sort_by(|&a, &b| {
                    let da = robots[a].1.dist2(robots[lead].1);
                    let db = robots[b].1.dist2(robots[lead].1);
                    da.total_cmp(&db).then(robots[a].0.cmp(&robots[b].0))
                });
                chosen.extend(others.into_iter().take(cap.max(1) - 1));
            } else {
                chosen = rest.clone();
            }
            rest.retain(|i| !chosen.contains(i));
            let mut members: Vec<usize> = chosen.iter().map(|&i| robots[i].0).collect();
            members.sort_unstable();
            out.push(Coalition { members, leader: robots[lead].0 });
        }
    }
    out.sort_by_key(|c| c.members[0]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_apart_robots_are_singletons() {
        let robots = [(0, Point::new(0.0, 0.0), 0), (1, Point::new(30.0, 0.0), 5), (2, Point::new(60.0, 0.0), 2)];
        let cs = form_coalitions(&robots, 10.0, 5.0, 3);
        assert_eq!(cs.len(), 3);
        for (c, r) in cs.iter().zip(&robots) {
            assert_eq!(c.members, vec![r.0]);
            assert_eq!(c.leader, r.0);
        }
    }

    #[test]
    fn chain_is_one_coalition() {
        let robots = [(0, Point::new(0.0, 0.0), 0), (1, Point::new(8.0, 0.0), 0), (2, Point::new(16.0, 0.0), 0)];
        let cs = form_coalitions(&robots, 10.0, 5.0, 3);
        assert_eq!(cs, vec![Coalition { members: vec![0, 1, 2], leader: 0 }]);
    }

    #[test]
    fn footprint_overlap_is_required() {
        // in radio range but footprints cannot overlap
        let robots = [(0, Point::new(0.0, 0.0), 0), (1, Point::new(9.0, 0.0), 0)];
        assert_eq!(form_coalitions(&robots, 10.0, 4.0, 3).len(), 2);
    }

    #[test]
    fn latest_check_in_leads() {
        let robots = [(0, Point::new(0.0, 0.0), 10), (1, Point::new(1.0, 0.0), 30)];
        assert_eq!(form_coalitions(&robots, 10.0, 5.0, 3)[0].leader, 1);
        // ties go to the lowest id, whatever the input order
        let robots = [(3, Point::new(0.0, 0.0), 7), (1, Point::new(1.0, 0.0), 7)];
        assert_eq!(form_coalitions(&robots, 10.0, 5.0, 3)[0].leader, 1);
        let robots = [(1, Point::new(1.0, 0.0), 7), (3, Point::new(0.0, 0.0), 7)];
        assert_eq!(form_coalitions(&robots, 10.0, 5.0, 3)[0].leader, 1);
    }

    #[test]
    fn oversized_components_are_split() {
        let robots: Vec<_> = (0..5).map(|i| (i, Point::new(i as f64, 0.0), i as u64)).collect();
        let cs = form_coalitions(&robots, 10.0, 5.0, 3);
        assert_eq!(cs.len(), 2);
        let mut all: Vec<usize> = cs.iter().flat_map(|c| c.members.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        assert!(cs.iter().all(|c| c.len() <= 3 && c.members.contains(&c.leader)));
        let first = cs.iter().find(|c| c.leader == 4).unwrap();
        assert_eq!(first.members, vec![2, 3, 4]);
    }

    #[test]
    fn comm_components_ignore_footprints() {
        let poses = [Point::new(0.0, 0.0), Point::new(9.0, 0.0), Point::new(40.0, 0.0)];
        assert_eq!(comm_components(&poses, 10.0), vec![vec![0, 1], vec![2]]);
    }
}

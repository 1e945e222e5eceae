use super::{ControlGraph, NodeId, Point, UNREACHABLE};

/// Fixed access points granting server communication within a disk of radius `comm_range`.
#[derive(Debug, Clone)]
pub struct AccessPointLayout {
    positions: Vec<Point>,
    comm_range: f64,
    nearest_node: Vec<NodeId>,
}

impl AccessPointLayout {
    pub fn new(positions: Vec<Point>, comm_range: f64, graph: &ControlGraph) -> Self {
        let nearest_node = positions.iter().map(|p| graph.nearest_node(*p)).collect();
        Self { positions, comm_range, nearest_node }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn comm_range(&self) -> f64 {
        self.comm_range
    }

    /// `g_a`: the graph node nearest each access point.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nearest_node
    }

    /// True when `p` can talk to at least one access point.
    pub fn in_range(&self, p: Point) -> bool {
        self.positions.iter().any(|s| s.dist(p) <= self.comm_range)
    }

    /// `min_a d_G(q, g_a)`; `UNREACHABLE` when there are no access points.
    pub fn hops_to_nearest(&self, graph: &ControlGraph, q: NodeId) -> u32 {
        self.nearest_node.iter().map(|&g| graph.hops(q, g)).min().unwrap_or(UNREACHABLE)
    }

    /// The access-point node with the fewest hops from `q` (lowest index on ties).
    pub fn nearest_by_hops(&self, graph: &ControlGraph, q: NodeId) -> Option<NodeId> {
        self.nearest_node.iter().copied().min_by_key(|&g| graph.hops(q, g))
    }

    /// Largest `hops_to_nearest` over all nodes: the minimum number of motions that
    /// reaches any point from its nearest access point.
    pub fn max_hops_to_nearest(&self, graph: &ControlGraph) -> u32 {
        (0..graph.len()).map(|q| self.hops_to_nearest(graph, q)).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{build_graph, EnvironmentMap};

    #[test]
    fn nearest_nodes_and_hops() {
        let map = EnvironmentMap::open(10, 4, 1.0).unwrap();
        let g = build_graph(&map, 1.0, 2.0).unwrap();
        let aps = AccessPointLayout::new(vec![Point::new(0.6, 0.4), Point::new(9.4, 3.6)], 3.0, &g);
        assert_eq!(g.position(aps.nodes()[0]), Point::new(0.5, 0.5));
        assert_eq!(g.position(aps.nodes()[1]), Point::new(9.5, 3.5));
        let mid = g.node_at(Point::new(4.5, 0.5)).unwrap();
        assert_eq!(aps.hops_to_nearest(&g, mid), 2);
        assert_eq!(aps.nearest_by_hops(&g, mid), Some(aps.nodes()[0]));
        assert!(aps.in_range(Point::new(2.0, 2.0)));
        assert!(!aps.in_range(Point::new(5.0, 2.0)));
        assert_eq!(aps.hops_to_nearest(&g, aps.nodes()[1]), 0);
    }
}

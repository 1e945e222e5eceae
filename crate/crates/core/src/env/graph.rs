use std::collections::{HashMap, VecDeque};
use std::io::{self, Write};

use super::{EnvError, EnvironmentMap, Point};

pub type NodeId = usize;

/// Hop distance marking an unreachable pair.
pub const UNREACHABLE: u32 = u32::MAX;

/// Discrete motion graph over free space with precomputed all-pairs shortest paths.
///
/// Edges carry unit weight (one time step). Distances and next hops come from
/// Floyd-Warshall and are stored densely, `n × n`.
#[derive(Debug, Clone)]
pub struct ControlGraph {
    nodes: Vec<Point>,
    adjacency: Vec<Vec<NodeId>>,
    dist: Vec<u32>,
    next: Vec<u32>,
    spacing: f64,
    lattice: HashMap<(i64, i64), NodeId>,
}

/// Summary of one connected component, used in construction errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSummary {
    pub size: usize,
    pub representative: Point,
}

impl std::fmt::Display for ComponentSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} nodes around {}", self.size, self.representative)
    }
}

/// Builds the control graph: one node per free-cell-center on a lattice with the
/// given spacing, edges between nodes at most `max_step` apart with a clear segment.
pub fn build_graph(map: &EnvironmentMap, node_spacing: f64, max_step: f64) -> Result<ControlGraph, EnvError> {
    if !(node_spacing > 0.0 && node_spacing.is_finite()) {
        return Err(EnvError::InvalidGraph(format!("node_spacing must be positive, got {node_spacing}")));
    }
    if !(max_step >= node_spacing) {
        return Err(EnvError::InvalidGraph(format!(
            "max_step ({max_step}) must be at least node_spacing ({node_spacing})"
        )));
    }
    let nx = (map.width() / node_spacing + 1e-9).floor() as i64;
    let ny = (map.height() / node_spacing + 1e-9).floor() as i64;
    let mut nodes = Vec::new();
    let mut lattice = HashMap::new();
    for j in 0..ny {
        for i in 0..nx {
            let p = Point::new((i as f64 + 0.5) * node_spacing, (j as f64 + 0.5) * node_spacing);
            if map.is_free(p) {
                lattice.insert((i, j), nodes.len());
                nodes.push(p);
            }
        }
    }
    if nodes.is_empty() {
        return Err(EnvError::InvalidGraph("map has no free node positions".into()));
    }
    let reach = (max_step / node_spacing + 1e-9).floor() as i64;
    let max2 = max_step * max_step * (1.0 + 1e-12);
    let mut edges = Vec::new();
    for (&(i, j), &a) in &lattice {
        for dj in -reach..=reach {
            for di in -reach..=reach {
                if (di, dj) == (0, 0) {
                    continue;
                }
                let Some(&b) = lattice.get(&(i + di, j + dj)) else { continue };
                if a < b && nodes[a].dist2(nodes[b]) <= max2 && map.line_of_sight(nodes[a], nodes[b]) {
                    edges.push((a, b));
                }
            }
        }
    }
    let mut graph = ControlGraph::from_edges(nodes, &edges)?;
    graph.spacing = node_spacing;
    graph.lattice = lattice;
    let components = graph.components();
    if components.len() > 1 {
        return Err(EnvError::Disconnected { components });
    }
    Ok(graph)
}

impl ControlGraph {
    /// Graph over arbitrary positions and undirected edges. Connectivity is not required.
    pub fn from_edges(nodes: Vec<Point>, edges: &[(NodeId, NodeId)]) -> Result<Self, EnvError> {
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(EnvError::InvalidGraph(format!("edge ({a}, {b}) references a missing node")));
            }
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let (dist, next) = floyd_warshall(&adjacency);
        Ok(Self { nodes, adjacency, dist, next, spacing: 0.0, lattice: HashMap::new() })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn position(&self, node: NodeId) -> Point {
        self.nodes[node]
    }

    pub fn positions(&self) -> &[Point] {
        &self.nodes
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Hop distance, or `None` when unreachable.
    pub fn distance(&self, from: NodeId, to: NodeId) -> Option<u32> {
        let d = self.dist[from * self.len() + to];
        (d != UNREACHABLE).then_some(d)
    }

    /// Raw hop distance (`UNREACHABLE` for disconnected pairs).
    pub fn hops(&self, from: NodeId, to: NodeId) -> u32 {
        self.dist[from * self.len() + to]
    }

    /// Node sequence from `from` to `to` inclusive, following the next-hop table.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Result<Vec<NodeId>, EnvError> {
        let n = self.len();
        if from >= n || to >= n {
            return Err(EnvError::UnknownNode(from.max(to)));
        }
        if self.dist[from * n + to] == UNREACHABLE {
            return Err(EnvError::NoPath { from, to });
        }
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = self.next[cur * n + to] as usize;
            path.push(cur);
        }
        Ok(path)
    }

    /// Node closest to `p` in Euclidean distance (lowest id on ties).
    pub fn nearest_node(&self, p: Point) -> NodeId {
        if self.spacing > 0.0 {
            let i = (p.x / self.spacing - 0.5).round() as i64;
            let j = (p.y / self.spacing - 0.5).round() as i64;
            if let Some(&id) = self.lattice.get(&(i, j)) {
                // a lattice hit is the nearest node unless p sits exactly between nodes
                if p.dist(self.nodes[id]) < 0.5 * self.spacing - 1e-9 {
                    return id;
                }
            }
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (id, q) in self.nodes.iter().enumerate() {
            let d = p.dist2(*q);
            if d < best_d {
                best_d = d;
                best = id;
            }
        }
        best
    }

    /// Node located exactly at `p` (within a tiny tolerance).
    pub fn node_at(&self, p: Point) -> Option<NodeId> {
        let id = self.nearest_node(p);
        (self.nodes.get(id)?.dist(p) < 1e-9).then_some(id)
    }

    /// Connected components, largest first.
    pub fn components(&self) -> Vec<ComponentSummary> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut size = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                size += 1;
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            out.push(ComponentSummary { size, representative: self.nodes[start] });
        }
        out.sort_by(|a, b| b.size.cmp(&a.size));
        out
    }

    /// Largest hop distance between any connected pair.
    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().filter(|d| *d != UNREACHABLE).max().unwrap_or(0)
    }

    /// Debug export: node lines `n <id> <x> <y>` then edge lines `e <a> <b>`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# coopsearch-graph v1")?;
        for (id, p) in self.nodes.iter().enumerate() {
            writeln!(out, "n {id} {} {}", p.x, p.y)?;
        }
        for (a, list) in self.adjacency.iter().enumerate() {
            for &b in list.iter().filter(|b| **b > a) {
                writeln!(out, "e {a} {b}")?;
            }
        }
        Ok(())
    }
}

fn floyd_warshall(adjacency: &[Vec<NodeId>]) -> (Vec<u32>, Vec<u32>) {
    let n = adjacency.len();
    let mut dist = vec![UNREACHABLE; n * n];
    let mut next = vec![u32::MAX; n * n];
    for i in 0..n {
        dist[i * n + i] = 0;
        next[i * n + i] = i as u32;
        for &j in &adjacency[i] {
            dist[i * n + j] = 1;
            next[i * n + j] = j as u32;
        }
    }
    let mut row_k = vec![0u32; n];
    for k in 0..n {
        row_k.copy_from_slice(&dist[k * n..(k + 1) * n]);
        for i in 0..n {
            let d_ik = dist[i * n + k];
            if d_ik == UNREACHABLE || i == k {
                continue;
            }
            let hop = next[i * n + k];
            let row_d = &mut dist[i * n..(i + 1) * n];
            let row_n = &mut next[i * n..(i + 1) * n];
            for j in 0..n {
                let via = d_ik.saturating_add(row_k[j]);
                if via < row_d[j] {
                    row_d[j] = via;
                    row_n[j] = hop;
                }
            }
        }
    }
    (dist, next)
}

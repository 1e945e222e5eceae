use std::collections::VecDeque;

use coopsearch::env::{build_graph, ControlGraph, EnvironmentMap, NodeId, Point, UNREACHABLE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bfs(graph: &ControlGraph, from: NodeId) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; graph.len()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &v in graph.neighbors(u) {
            if dist[v] == UNREACHABLE {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> ControlGraph {
    let nodes: Vec<Point> = (0..n).map(|i| Point::new(i as f64, 0.0)).collect();
    let mut edges = Vec::new();
    // random spanning tree, then extra chords
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.push((a, b));
        }
    }
    ControlGraph::from_edges(nodes, &edges).unwrap()
}

#[test]
fn shortest_paths_match_breadth_first_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let graph = random_connected_graph(&mut rng, 20, 12);
        for from in 0..graph.len() {
            let oracle = bfs(&graph, from);
            for to in 0..graph.len() {
                assert_eq!(graph.hops(from, to), oracle[to]);
                let path = graph.shortest_path(from, to).unwrap();
                assert_eq!(path.len() as u32, oracle[to] + 1);
                assert_eq!((path[0], *path.last().unwrap()), (from, to));
                for w in path.windows(2) {
                    assert!(graph.neighbors(w[0]).contains(&w[1]));
                }
            }
        }
    }
}

fn random_map(rng: &mut ChaCha8Rng, cols: usize, rows: usize, density: f64) -> EnvironmentMap {
    let obstacle = (0..cols * rows).map(|_| rng.random::<f64>() < density).collect();
    EnvironmentMap::new(cols, rows, 1.0, obstacle).unwrap()
}

/// Walks the segment at a tenth of a cell and reports whether every sample is free.
fn sampled_line_of_sight(map: &EnvironmentMap, a: Point, b: Point) -> bool {
    let steps = (a.dist(b) / (map.cell_size() / 10.0)).ceil().max(1.0) as usize;
    (0..=steps).all(|i| {
        let t = i as f64 / steps as f64;
        map.is_free(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
    })
}

#[test]
fn line_of_sight_matches_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let map = random_map(&mut rng, 30, 20, 0.15);
    let mut checked = 0;
    while checked < 100 {
        let a = Point::new(rng.random_range(0.0..30.0), rng.random_range(0.0..20.0));
        let b = Point::new(rng.random_range(0.0..30.0), rng.random_range(0.0..20.0));
        if !map.is_free(a) || !map.is_free(b) {
            continue;
        }
        assert_eq!(map.line_of_sight(a, b), sampled_line_of_sight(&map, a, b), "segment {a} -> {b}");
        assert_eq!(map.line_of_sight(a, b), map.line_of_sight(b, a));
        checked += 1;
    }
}

#[test]
fn graph_edges_respect_step_length_and_walls() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut obstacle = vec![false; 15 * 15];
    for r in 0..15 {
        if r != 7 {
            obstacle[r * 15 + 7] = true;
        }
    }
    for _ in 0..10 {
        let i = rng.random_range(0..15 * 15);
        if i % 15 != 7 {
            obstacle[i] = true;
        }
    }
    let map = EnvironmentMap::new(15, 15, 1.0, obstacle).unwrap();
    let graph = build_graph(&map, 1.0, 2.0).expect("this seed leaves the map connected");
    for u in 0..graph.len() {
        for &v in graph.neighbors(u) {
            let (a, b) = (graph.position(u), graph.position(v));
            assert!(a.dist(b) <= 2.0 + 1e-9);
            assert!(sampled_line_of_sight(&map, a, b));
            assert!(graph.neighbors(v).contains(&u));
        }
    }
}

#[test]
fn open_map_node_degrees() {
    let map = EnvironmentMap::open(10, 10, 1.0).unwrap();
    let graph = build_graph(&map, 1.0, 2.0).unwrap();
    let centre = graph.node_at(Point::new(5.5, 5.5)).unwrap();
    assert_eq!(graph.neighbors(centre).len(), 12);
    let corner = graph.node_at(Point::new(0.5, 0.5)).unwrap();
    // (1,0) (2,0) (0,1) (0,2) (1,1)
    assert_eq!(graph.neighbors(corner).len(), 5);
    // corner to corner needs nine diagonal moves
    assert_eq!(graph.diameter(), 9);
}

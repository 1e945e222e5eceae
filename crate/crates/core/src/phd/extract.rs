use std::collections::VecDeque;

use crate::env::Point;

use super::Phd;

/// Extracted target locations with the mass of the cluster behind each.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TargetEstimate {
    pub locations: Vec<Point>,
    pub cluster_weights: Vec<f64>,
    /// Particle indices of each cluster, in lattice (row, column) order.
    pub members: Vec<Vec<usize>>,
}

impl TargetEstimate {
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }
}

pub(super) fn extract_targets(phd: &Phd, w_min: f64, mass_min: f64) -> TargetEstimate {
    let grid = phd.grid();
    let n = phd.len();
    let keep: Vec<bool> = phd.weights().iter().map(|w| *w >= w_min).collect();
    let mut seen = vec![false; n];
    let mut clusters: Vec<(Point, f64, Vec<usize>)> = Vec::new();
    let mut members = Vec::new();
    for start in 0..n {
        if !keep[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        members.clear();
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            members.push(p);
            let (c, r) = grid.cell(p);
            for dr in -1..=1i64 {
                for dc in -1..=1i64 {
                    if let Some(q) = grid.index_at(c as i64 + dc, r as i64 + dr) {
                        if keep[q] && !seen[q] {
                            seen[q] = true;
                            queue.push_back(q);
                        }
                    }
                }
            }
        }
        // sum in lattice order so the result does not depend on particle order
        members.sort_by_key(|&p| {
            let (c, r) = grid.cell(p);
            (r, c)
        });
        let mut mass = 0.0;
        let (mut sx, mut sy) = (0.0, 0.0);
        for &p in &members {
            let w = phd.weight(p);
            let pos = grid.position(p);
            mass += w;
            sx += w * pos.x;
            sy += w * pos.y;
        }
        if mass > mass_min {
            clusters.push((Point::new(sx / mass, sy / mass), mass, members.clone()));
        }
    }
    clusters.sort_by(|a, b| a.0.x.total_cmp(&b.0.x).then(a.0.y.total_cmp(&b.0.y)));
    TargetEstimate {
        locations: clusters.iter().map(|c| c.0).collect(),
        cluster_weights: clusters.iter().map(|c| c.1).collect(),
        members: clusters.into_iter().map(|c| c.2).collect(),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::ParticleGrid;
    use super::*;

    fn phd(cells: &[(u32, u32)], weights: &[f64]) -> Phd {
        let grid = Arc::new(ParticleGrid::from_cells(1.0, cells.to_vec()).unwrap());
        Phd::from_weights(grid, weights.to_vec()).unwrap()
    }

    #[test]
    fn all_below_threshold_is_empty() {
        let b = phd(&[(0, 0), (1, 0), (2, 0)], &[0.01, 0.015, 0.019]);
        assert!(b.extract_targets(0.02, 0.0).is_empty());
    }

    #[test]
    fn isolated_heavy_particle() {
        let b = phd(&[(0, 0), (5, 5)], &[0.01, 0.6]);
        let est = b.extract_targets(0.02, 0.5);
        assert_eq!(est.locations, vec![Point::new(5.5, 5.5)]);
        assert!((est.cluster_weights[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn diagonal_neighbors_form_one_cluster() {
        let b = phd(&[(2, 2), (3, 3)], &[0.3, 0.4]);
        let est = b.extract_targets(0.02, 0.5);
        assert_eq!(est.len(), 1);
        let x = (0.3 * 2.5 + 0.4 * 3.5) / 0.7;
        assert!((est.locations[0].x - x).abs() < 1e-12);
        assert!((est.locations[0].y - x).abs() < 1e-12);
        assert!((est.cluster_weights[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn light_clusters_are_dropped_and_gaps_split() {
        let b = phd(&[(0, 0), (1, 0), (3, 0), (4, 0)], &[0.3, 0.3, 0.2, 0.2]);
        let est = b.extract_targets(0.02, 0.5);
        assert_eq!(est.len(), 1);
        assert!((est.locations[0].x - 1.0).abs() < 1e-12);
    }
}

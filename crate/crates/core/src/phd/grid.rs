use crate::env::{EnvironmentMap, Point};

use super::PhdError;

const NO_PARTICLE: u32 = u32::MAX;

/// Fixed particle positions on a regular lattice anchored at the origin.
///
/// Particle `p` sits at the center of lattice cell `cells[p]`. The lattice is
/// shared between snapshots of a belief, so it lives behind an `Arc` in [`super::Phd`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleGrid {
    spacing: f64,
    cols: usize,
    rows: usize,
    cells: Vec<(u32, u32)>,
    positions: Vec<Point>,
    lookup: Vec<u32>,
}

impl ParticleGrid {
    /// One particle at every lattice cell whose center lies in free space.
    pub fn from_map(map: &EnvironmentMap, spacing: f64) -> Result<Self, PhdError> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(PhdError::InvalidGrid(format!("grid spacing must be positive, got {spacing}")));
        }
        let cols = (map.width() / spacing + 1e-9).floor() as usize;
        let rows = (map.height() / spacing + 1e-9).floor() as usize;
        let mut cells = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let p = Point::new((c as f64 + 0.5) * spacing, (r as f64 + 0.5) * spacing);
                if map.is_free(p) {
                    cells.push((c as u32, r as u32));
                }
            }
        }
        if cells.is_empty() {
            return Err(PhdError::NoFreeCells);
        }
        Self::from_cells(spacing, cells)
    }

    /// Grid over an explicit list of lattice cells, in the given particle order.
    pub fn from_cells(spacing: f64, cells: Vec<(u32, u32)>) -> Result<Self, PhdError> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(PhdError::InvalidGrid(format!("grid spacing must be positive, got {spacing}")));
        }
        if cells.is_empty() {
            return Err(PhdError::NoFreeCells);
        }
        let cols = cells.iter().map(|c| c.0 as usize).max().unwrap_or(0) + 1;
        let rows = cells.iter().map(|c| c.1 as usize).max().unwrap_or(0) + 1;
        let mut lookup = vec![NO_PARTICLE; cols * rows];
        for (i, &(c, r)) in cells.iter().enumerate() {
            let slot = &mut lookup[r as usize * cols + c as usize];
            if *slot != NO_PARTICLE {
                return Err(PhdError::InvalidGrid(format!("duplicate particle cell ({c}, {r})")));
            }
            *slot = i as u32;
        }
        let positions =
            cells.iter().map(|&(c, r)| Point::new((c as f64 + 0.5) * spacing, (r as f64 + 0.5) * spacing)).collect();
        Ok(Self { spacing, cols, rows, cells, positions, lookup })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn position(&self, p: usize) -> Point {
        self.positions[p]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn cell(&self, p: usize) -> (u32, u32) {
        self.cells[p]
    }

    pub fn cells(&self) -> &[(u32, u32)] {
        &self.cells
    }

    /// Particle index at lattice cell `(c, r)`, if any.
    pub fn index_at(&self, c: i64, r: i64) -> Option<usize> {
        if c < 0 || r < 0 || c as usize >= self.cols || r as usize >= self.rows {
            return None;
        }
        let idx = self.lookup[r as usize * self.cols + c as usize];
        (idx != NO_PARTICLE).then_some(idx as usize)
    }

    /// Lattice cell containing `p` (not necessarily occupied by a particle).
    pub fn cell_of_point(&self, p: Point) -> (i64, i64) {
        ((p.x / self.spacing).floor() as i64, (p.y / self.spacing).floor() as i64)
    }

    /// Particles within `radius` of `center`, in ascending index order of the lattice scan.
    pub fn indices_within(&self, center: Point, radius: f64) -> Vec<usize> {
        let r2 = radius * radius;
        let c0 = ((center.x - radius) / self.spacing).floor().max(0.0) as i64;
        let c1 = ((center.x + radius) / self.spacing).floor() as i64;
        let r0 = ((center.y - radius) / self.spacing).floor().max(0.0) as i64;
        let r1 = ((center.y + radius) / self.spacing).floor() as i64;
        let mut out = Vec::new();
        for r in r0..=r1.min(self.rows as i64 - 1) {
            for c in c0..=c1.min(self.cols as i64 - 1) {
                if let Some(idx) = self.index_at(c, r) {
                    if self.positions[idx].dist2(center) <= r2 {
                        out.push(idx);
                    }
                }
            }
        }
        out
    }
}

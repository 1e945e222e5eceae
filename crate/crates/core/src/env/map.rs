use std::fmt;
use std::fs;
use std::path::Path;

use super::EnvError;

/// Schema line written at the top of every map file.
pub const MAP_SCHEMA: &str = "# coopsearch-map v1";

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.x, self.y)
    }
}

/// Known obstacle map on a regular grid.
///
/// Cell `(c, r)` covers `[c·s, (c+1)·s) × [r·s, (r+1)·s)` with `s` the cell size,
/// so the map spans `[0, width] × [0, height]`. Points on the far boundary
/// resolve to the last row/column.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentMap {
    cols: usize,
    rows: usize,
    cell_size: f64,
    obstacle: Vec<bool>,
    free_cells: usize,
}

impl EnvironmentMap {
    /// Builds a map from a row-major obstacle mask (`obstacle[r * cols + c]`, row 0 at `y = 0`).
    pub fn new(cols: usize, rows: usize, cell_size: f64, obstacle: Vec<bool>) -> Result<Self, EnvError> {
        if cols == 0 || rows == 0 {
            return Err(EnvError::InvalidMap("map must have at least one cell".into()));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(EnvError::InvalidMap(format!("cell_size must be positive, got {cell_size}")));
        }
        if obstacle.len() != cols * rows {
            return Err(EnvError::InvalidMap(format!(
                "obstacle mask has {} cells, expected {}",
                obstacle.len(),
                cols * rows
            )));
        }
        let free_cells = obstacle.iter().filter(|o| !**o).count();
        Ok(Self { cols, rows, cell_size, obstacle, free_cells })
    }

    /// Obstacle-free rectangle.
    pub fn open(cols: usize, rows: usize, cell_size: f64) -> Result<Self, EnvError> {
        Self::new(cols, rows, cell_size, vec![false; cols * rows])
    }

    /// Parses the ASCII map format: optional `#` comment lines, a `cell_size <meters>`
    /// header, then one text line per row with `.` for free and `#` for obstacle.
    /// The first grid line is the top (largest y) row.
    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let mut cell_size = None;
        let mut grid: Vec<&str> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if cell_size.is_none() {
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let value = line
                    .strip_prefix("cell_size")
                    .ok_or_else(|| EnvError::Parse { line: lineno + 1, reason: "expected `cell_size <meters>` header".into() })?;
                let value: f64 = value.trim().parse().map_err(|_| EnvError::Parse {
                    line: lineno + 1,
                    reason: format!("bad cell_size value {:?}", value.trim()),
                })?;
                cell_size = Some(value);
                continue;
            }
            if line.is_empty() {
                continue;
            }
            if let Some(bad) = line.chars().find(|ch| *ch != '.' && *ch != '#') {
                return Err(EnvError::Parse { line: lineno + 1, reason: format!("unexpected character {bad:?}") });
            }
            if let Some(first) = grid.first() {
                if first.len() != line.len() {
                    return Err(EnvError::Parse {
                        line: lineno + 1,
                        reason: format!("row has {} cells, expected {}", line.len(), first.len()),
                    });
                }
            }
            grid.push(line);
        }
        let cell_size = cell_size.ok_or(EnvError::Parse { line: 1, reason: "missing cell_size header".into() })?;
        if grid.is_empty() {
            return Err(EnvError::InvalidMap("map has no grid rows".into()));
        }
        let rows = grid.len();
        let cols = grid[0].len();
        let mut obstacle = vec![false; cols * rows];
        for (i, line) in grid.iter().enumerate() {
            let r = rows - 1 - i;
            for (c, ch) in line.bytes().enumerate() {
                obstacle[r * cols + c] = ch == b'#';
            }
        }
        Self::new(cols, rows, cell_size, obstacle)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EnvError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| EnvError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.cols + 1) * self.rows + 64);
        out.push_str(MAP_SCHEMA);
        out.push('\n');
        out.push_str(&format!("cell_size {}\n", self.cell_size));
        for r in (0..self.rows).rev() {
            for c in 0..self.cols {
                out.push(if self.obstacle[r * self.cols + c] { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn width(&self) -> f64 {
        self.cols as f64 * self.cell_size
    }

    pub fn height(&self) -> f64 {
        self.rows as f64 * self.cell_size
    }

    /// |E|: total free area in square meters.
    pub fn free_area(&self) -> f64 {
        self.free_cells as f64 * self.cell_size * self.cell_size
    }

    pub fn free_cell_count(&self) -> usize {
        self.free_cells
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width() && p.y <= self.height()
    }

    /// Cell containing `p`, or `None` outside the map.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        if !self.contains(p) {
            return None;
        }
        Some(self.clamped_cell(p))
    }

    fn clamped_cell(&self, p: Point) -> (usize, usize) {
        let c = ((p.x / self.cell_size).floor().max(0.0) as usize).min(self.cols - 1);
        let r = ((p.y / self.cell_size).floor().max(0.0) as usize).min(self.rows - 1);
        (c, r)
    }

    pub fn is_obstacle_cell(&self, c: usize, r: usize) -> bool {
        self.obstacle[r * self.cols + c]
    }

    /// True when `p` is inside the map and in a free cell.
    pub fn is_free(&self, p: Point) -> bool {
        match self.cell_of(p) {
            Some((c, r)) => !self.is_obstacle_cell(c, r),
            None => false,
        }
    }

    pub fn cell_center(&self, c: usize, r: usize) -> Point {
        Point::new((c as f64 + 0.5) * self.cell_size, (r as f64 + 0.5) * self.cell_size)
    }

    /// True iff the segment `a`–`b` passes through no obstacle cell.
    ///
    /// Grid traversal in the style of Amanatides & Woo. A segment that only grazes a
    /// cell corner does not enter the two cells meeting diagonally there.
    pub fn line_of_sight(&self, a: Point, b: Point) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        let (mut c, mut r) = self.clamped_cell(a);
        let (ec, er) = self.clamped_cell(b);
        if self.is_obstacle_cell(c, r) || self.is_obstacle_cell(ec, er) {
            return false;
        }
        let s = self.cell_size;
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        let (step_c, mut t_max_x, t_delta_x) = if dx > 0.0 {
            (1i64, ((c + 1) as f64 * s - a.x) / dx, s / dx)
        } else if dx < 0.0 {
            (-1i64, (c as f64 * s - a.x) / dx, -s / dx)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        };
        let (step_r, mut t_max_y, t_delta_y) = if dy > 0.0 {
            (1i64, ((r + 1) as f64 * s - a.y) / dy, s / dy)
        } else if dy < 0.0 {
            (-1i64, (r as f64 * s - a.y) / dy, -s / dy)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        };
        const TIE: f64 = 1e-12;
        let max_steps = self.cols + self.rows + 2;
        for _ in 0..max_steps {
            if c == ec && r == er {
                return true;
            }
            let t;
            if t_max_x.is_finite() && (t_max_x - t_max_y).abs() <= TIE * t_max_x.abs().max(1.0) {
                t = t_max_x;
                c = (c as i64 + step_c) as usize;
                r = (r as i64 + step_r) as usize;
                t_max_x += t_delta_x;
                t_max_y += t_delta_y;
            } else if t_max_x < t_max_y {
                t = t_max_x;
                c = (c as i64 + step_c) as usize;
                t_max_x += t_delta_x;
            } else {
                t = t_max_y;
                r = (r as i64 + step_r) as usize;
                t_max_y += t_delta_y;
            }
            if t > 1.0 + TIE || c >= self.cols || r >= self.rows {
                // stepped past the endpoint (both endpoint cells are already known free)
                return true;
            }
            if self.is_obstacle_cell(c, r) {
                return false;
            }
        }
        true
    }
}

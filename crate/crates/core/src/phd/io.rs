use std::io::{BufRead, Write};
use std::sync::Arc;

use super::{ParticleGrid, Phd, PhdError};

/// Schema line of the flat PHD text format.
pub const PHD_SCHEMA: &str = "# coopsearch-phd v1";

impl Phd {
    /// Writes `x,y,w` lines after a schema line and a `spacing=<s>` line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{PHD_SCHEMA}")?;
        writeln!(out, "spacing={}", self.grid.spacing())?;
        writeln!(out, "x,y,w")?;
        for (p, w) in self.grid.positions().iter().zip(&self.weights) {
            writeln!(out, "{},{},{}", p.x, p.y, w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Phd, PhdError> {
        let mut spacing = None;
        let mut cells = Vec::new();
        let mut weights = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| PhdError::Parse { line: lineno, reason: e.to_string() })?;
            let line = line.trim();
            if lineno == 1 {
                if line != PHD_SCHEMA {
                    return Err(PhdError::Parse { line: 1, reason: format!("expected schema line {PHD_SCHEMA:?}") });
                }
                continue;
            }
            if line.is_empty() || line == "x,y,w" {
                continue;
            }
            if let Some(v) = line.strip_prefix("spacing=") {
                let s: f64 = v
                    .parse()
                    .map_err(|_| PhdError::Parse { line: lineno, reason: format!("bad spacing {v:?}") })?;
                spacing = Some(s);
                continue;
            }
            let s = spacing.ok_or(PhdError::Parse { line: lineno, reason: "particle before spacing line".into() })?;
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| PhdError::Parse { line: lineno, reason: format!("bad particle line {line:?}") })?;
            if fields.len() != 3 {
                return Err(PhdError::Parse { line: lineno, reason: "expected x,y,w".into() });
            }
            let (c, r) = ((fields[0] / s).floor(), (fields[1] / s).floor());
            if c < 0.0 || r < 0.0 {
                return Err(PhdError::Parse { line: lineno, reason: "negative coordinates".into() });
            }
            cells.push((c as u32, r as u32));
            weights.push(fields[2]);
        }
        let spacing = spacing.ok_or(PhdError::Parse { line: 1, reason: "missing spacing line".into() })?;
        let grid = Arc::new(ParticleGrid::from_cells(spacing, cells)?);
        Phd::from_weights(grid, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_round_trip(weights in prop::collection::vec(0.0f64..5.0, 1..40), spacing in prop::sample::select(vec![0.2, 0.5, 1.0])) {
            let cells: Vec<(u32, u32)> = (0..weights.len() as u32).map(|i| (i % 7, i / 7)).collect();
            let grid = Arc::new(ParticleGrid::from_cells(spacing, cells).unwrap());
            let phd = Phd::from_weights(grid, weights).unwrap();
            let mut buf = Vec::new();
            phd.write_csv(&mut buf).unwrap();
            let back = Phd::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.grid().cells(), phd.grid().cells());
            prop_assert_eq!(back.weights(), phd.weights());
        }
    }

    #[test]
    fn missing_schema_is_rejected() {
        let err = Phd::read_csv("spacing=1\n0.5,0.5,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PhdError::Parse { line: 1, .. }));
    }
}

//! Plain-text configuration snapshots.
//!
//! ```text
//! d n_points half_side boundary
//! x_1 [y_1 [z_1]]
//! ...
//! ```
//!
//! Coordinates are written in scientific notation with 17 significant digits,
//! which round-trips every `f64` exactly.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::{Boundary, GeometryError, Point, PointConfiguration, Window};

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> SnapshotError {
    SnapshotError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn write_snapshot<W: Write>(out: &mut W, config: &PointConfiguration) -> std::io::Result<()> {
    let w = config.window();
    writeln!(
        out,
        "{} {} {:.16e} {}",
        w.dim(),
        config.len(),
        w.half_side(),
        w.boundary()
    )?;
    for p in config.points() {
        let line: Vec<String> = p.coords(w.dim()).iter().map(|c| format!("{c:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn snapshot_string(config: &PointConfiguration) -> String {
    let mut buf = Vec::new();
    write_snapshot(&mut buf, config).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("snapshot is ASCII")
}

/// Reads a snapshot; the grid is built with minimum cell size `cell_size`.
pub fn read_snapshot<R: BufRead>(input: R, cell_size: f64) -> Result<PointConfiguration, SnapshotError> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| {
        l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true)
    });
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(parse_err(1, "header must be `d n_points half_side boundary`"));
    }
    let dim: usize = fields[0].parse().map_err(|_| parse_err(1, "bad dimension"))?;
    let n: usize = fields[1].parse().map_err(|_| parse_err(1, "bad point count"))?;
    let half_side: f64 = fields[2].parse().map_err(|_| parse_err(1, "bad half side"))?;
    let boundary: Boundary = fields[3].parse().map_err(|e: String| parse_err(1, e))?;
    let window = Window::new(half_side, dim, boundary)?;
    let mut config = PointConfiguration::new(window, cell_size)?;
    for (idx, line) in lines {
        let line = line?;
        let coords: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let coords = coords.map_err(|e| parse_err(idx + 1, e.to_string()))?;
        if coords.len() != dim {
            return Err(parse_err(idx + 1, format!("expected {dim} coordinates")));
        }
        config.insert(Point::from_slice(&coords))?;
    }
    if config.len() != n {
        return Err(parse_err(1, format!("header announces {n} points, found {}", config.len())));
    }
    Ok(config)
}

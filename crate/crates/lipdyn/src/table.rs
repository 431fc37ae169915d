//! CSV files: grid functions and plain numeric tables.
//!
//! A grid function is written one node per row in grid order, under the
//! header `xi_1,...,xi_d,val_1,...,val_m`. Reading recovers the grid from the
//! node coordinates and rejects files whose nodes are not a full uniform grid
//! in that order.

use std::path::Path;

use lipdyn_core::grid::{GraphFn, Grid};
use lipdyn_core::Point;

use crate::error::CliError;

fn csv_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Writes rows of numbers under `header`.
pub fn write_table<I>(path: &Path, header: &[String], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn names(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}_{i}"))
}

pub fn write_graph(path: &Path, g: &GraphFn) -> Result<(), CliError> {
    let header: Vec<String> = names("xi", g.in_dim()).chain(names("val", g.out_dim())).collect();
    let rows = g
        .grid
        .nodes()
        .zip(&g.values)
        .map(|(x, v)| x.coords().iter().chain(v.coords()).copied().collect());
    write_table(path, &header, rows)
}

pub fn read_graph(path: &Path) -> Result<GraphFn, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let d = header.iter().filter(|h| h.starts_with("xi_")).count();
    let m = header.iter().filter(|h| h.starts_with("val_")).count();
    let expected: Vec<String> = names("xi", d).chain(names("val", m)).collect();
    if d == 0 || m == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(csv_err(path, "header must read xi_1,..,xi_d,val_1,..,val_m"));
    }
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let nums = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| csv_err(path, format!("line {:?}: {e}", rec.position().map(|p| p.line())))))
            .collect::<Result<Vec<_>, _>>()?;
        xs.push(Point::new(&nums[..d])?);
        vals.push(Point::new(&nums[d..])?);
    }
    let len = xs.len();
    let n = (len as f64).powf(1.0 / d as f64).round() as usize;
    if n < 2 || n.pow(d as u32) != len {
        return Err(csv_err(path, format!("{len} rows do not form a full {d}-dimensional grid")));
    }
    let lo = xs[0];
    let hi = xs[len - 1];
    let radius = 0.5 * (hi[0] - lo[0]);
    let center = lo.zip_map(&hi, |a, b| 0.5 * (a + b));
    let grid = Grid::new(center, radius, n)?;
    let slack = 1e-9 * radius.max(center.norm());
    if let Some(i) = xs.iter().enumerate().position(|(i, x)| x.dist(&grid.node(i)) > slack) {
        return Err(csv_err(path, format!("row {} is not the expected grid node", i + 1)));
    }
    Ok(GraphFn { grid, values: vals })
}

//! Plain-text field snapshots.
//!
//! ```text
//! # t=0.1 dim=2 nx=4 ny=3 hx=0.25 hy=0.5
//! v00,v10,v20,v30
//! ...
//! ```
//!
//! One row per y-index, values printed in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub fn header(grid: &Grid, t: f64) -> String {
    format!(
        "# t={t:?} dim={} nx={} ny={} hx={:?} hy={:?}",
        grid.dim(),
        grid.nx(),
        grid.ny(),
        grid.hx(),
        grid.hy()
    )
}

pub fn format_snapshot(field: &Field, t: f64) -> String {
    let grid = field.grid();
    let mut out = header(grid, t);
    out.push('\n');
    for row in field.values().chunks(grid.nx()) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_snapshot(field: &Field, t: f64, path: &Path) -> Result<()> {
    fs::write(path, format_snapshot(field, t))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Parses snapshot text, checking the header against `grid`. Returns the
/// field and its time stamp.
pub fn parse_snapshot(text: &str, grid: &Grid) -> Result<(Field, f64)> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| Error::Snapshot("missing `#` header line".into()))?;
    let mut t = None;
    let expected = [
        ("dim", grid.dim().to_string()),
        ("nx", grid.nx().to_string()),
        ("ny", grid.ny().to_string()),
        ("hx", format!("{:?}", grid.hx())),
        ("hy", format!("{:?}", grid.hy())),
    ];
    let mut seen = Vec::new();
    for item in head.split_whitespace() {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Snapshot(format!("header item `{item}` is not key=value")))?;
        if key == "t" {
            t =
                Some(value.parse::<f64>().map_err(|_| {
                    Error::Snapshot(format!("header time `{value}` is not a number"))
                })?);
            continue;
        }
        let want = &expected
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| Error::Snapshot(format!("unknown header key `{key}`")))?
            .1;
        let matches = match key {
            "hx" | "hy" => value.parse::<f64>().ok() == want.parse::<f64>().ok(),
            _ => value == want,
        };
        if !matches {
            return Err(Error::Snapshot(format!(
                "header {key} mismatch: expected {want}, found {value}"
            )));
        }
        seen.push(key);
    }
    if let Some((k, _)) = expected.iter().find(|(k, _)| !seen.contains(k)) {
        return Err(Error::Snapshot(format!("header is missing `{k}`")));
    }
    let t = t.ok_or_else(|| Error::Snapshot("header is missing `t`".into()))?;

    let mut values = Vec::with_capacity(grid.len());
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let before = values.len();
        for item in line.split(',') {
            let v = item.trim().parse::<f64>().map_err(|_| {
                Error::Snapshot(format!("row {}: `{}` is not a number", i + 1, item.trim()))
            })?;
            values.push(v);
        }
        if values.len() - before != grid.nx() {
            return Err(Error::Snapshot(format!(
                "row {}: expected {} values, found {}",
                i + 1,
                grid.nx(),
                values.len() - before
            )));
        }
    }
    if rows != grid.ny() {
        return Err(Error::Snapshot(format!(
            "expected {} rows, found {rows}",
            grid.ny()
        )));
    }
    let field = Field::new(*grid, values).map_err(|e| Error::Snapshot(e.to_string()))?;
    Ok((field, t))
}

pub fn read_snapshot(path: &Path, grid: &Grid) -> Result<(Field, f64)> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_snapshot(&text, grid)
}

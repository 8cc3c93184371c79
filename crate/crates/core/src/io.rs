//! Serialization of fields and series: two-column text profiles, JSON
//! snapshots, and the norm-history / monitor CSV formats.
//!
//! Float formatting uses Rust's shortest round-trip representation, so
//! outputs are byte-deterministic and re-parse to the exact same values.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DiscreteField;
use crate::monitors::NormHistory;

/// Read a whitespace-separated two-column numeric table; `#`-prefixed lines
/// and blank lines are skipped.
pub fn read_two_column(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = File::open(path)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.ok_or_else(|| {
                Error::Config(format!("{}:{}: expected two columns", path.display(), lineno + 1))
            })?
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))
        };
        let x = parse(parts.next())?;
        let y = parse(parts.next())?;
        rows.push((x, y));
    }
    Ok(rows)
}

/// Write a field as `r_i u_i` lines.
pub fn write_field_text<W: Write>(field: &DiscreteField, mut out: W) -> Result<()> {
    for (r, u) in field.grid().cell_centers().iter().zip(field.values()) {
        writeln!(out, "{r} {u}")?;
    }
    Ok(())
}

pub fn write_field_text_file(field: &DiscreteField, path: &Path) -> Result<()> {
    write_field_text(field, File::create(path)?)
}

/// JSON snapshot payload `{t, r[], u[]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct SnapshotJson {
    pub t: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

impl SnapshotJson {
    pub fn from_field(t: f64, field: &DiscreteField) -> Self {
        Self {
            t,
            r: field.grid().cell_centers().to_vec(),
            u: field.values().to_vec(),
        }
    }
}

pub fn write_snapshot_json<W: Write>(t: f64, field: &DiscreteField, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &SnapshotJson::from_field(t, field))
        .map_err(|e| Error::Config(format!("snapshot serialization failed: {e}")))
}

/// Norm history as CSV with header `t,dt,sup,L1,L<s>...`.
pub fn write_history_csv<W: Write>(history: &NormHistory, mut out: W) -> Result<()> {
    let mut header = String::from("t,dt,sup");
    for &s in history.finite_exponents() {
        header.push_str(&format!(",L{s}"));
    }
    writeln!(out, "{header}")?;
    for j in 0..history.len() {
        let mut row = format!(
            "{},{},{}",
            history.times()[j],
            history.dts()[j],
            history.sup_series()[j]
        );
        for &s in history.finite_exponents() {
            row.push_str(&format!(",{}", history.norm_series(s).unwrap()[j]));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Monitor series (S, F, M running suprema) as CSV alongside the underlying
/// norms, for plotting.
pub fn write_monitor_csv<W: Write>(
    history: &NormHistory,
    q: f64,
    s: f64,
    mut out: W,
) -> Result<()> {
    let s_series = crate::monitors::s_monitor(history, q)?;
    let ls = history.norm_series(s).ok_or_else(|| {
        Error::Config(format!("norm series for s = {s} was not recorded"))
    })?;
    let l1 = history.norm_series(1.0).expect("L1 always recorded");
    writeln!(out, "t,sup,L1,L{s},S,F,M")?;
    let mut running_f = 0.0_f64;
    let mut running_m = 0.0_f64;
    for j in 0..history.len() {
        running_f = running_f.max(ls[j].powf(s));
        running_m = running_m.max(l1[j]);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            history.times()[j],
            history.sup_series()[j],
            l1[j],
            ls[j],
            s_series[j],
            running_f,
            running_m
        )?;
    }
    Ok(())
}

//! CSV output of simulation records and read-back of snapshot files.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::network::{EdgeSnapshot, SimulationRecord, Snapshot};

pub const SNAPSHOT_HEADER: [&str; 6] = ["edge_id", "x", "A", "Q", "p", "u"];

/// 17 significant digits, enough to round-trip every `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes one snapshot as CSV, edges ordered by id and cells by `x`.
pub fn write_snapshot<W: Write>(snapshot: &Snapshot, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SNAPSHOT_HEADER)?;
    let mut edges: Vec<&EdgeSnapshot> = snapshot.edges.iter().collect();
    edges.sort_by(|a, b| a.edge_id.cmp(&b.edge_id));
    for e in edges {
        let mut idx: Vec<usize> = (0..e.x.len()).collect();
        idx.sort_by(|&i, &j| e.x[i].total_cmp(&e.x[j]));
        for i in idx {
            wtr.write_record([
                e.edge_id.clone(),
                fmt_f64(e.x[i]),
                fmt_f64(e.a[i]),
                fmt_f64(e.q[i]),
                fmt_f64(e.p[i]),
                fmt_f64(e.u[i]),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// File name of the snapshot with index `i`.
pub fn snapshot_file_name(i: usize, t: f64) -> String {
    format!("snapshot_{i:04}_t{t:.6}.csv")
}

/// Writes every snapshot of `record` into `dir`, one file each.
pub fn write_snapshot_csv(record: &SimulationRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    if record.snapshots.is_empty() {
        return Err(Error::domain("record has no snapshots"));
    }
    fs::create_dir_all(dir)?;
    record
        .snapshots
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let path = dir.join(snapshot_file_name(i, s.t));
            write_snapshot(s, fs::File::create(&path)?)?;
            Ok(path)
        })
        .collect()
}

/// Per-step diagnostics as CSV.
pub fn write_diagnostics<W: Write>(record: &SimulationRecord, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "dt", "lambda", "coupling_residual", "node_imbalance"])?;
    for d in &record.steps {
        wtr.write_record([d.t, d.dt, d.lambda, d.coupling_residual, d.node_imbalance].map(fmt_f64))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Coupling errors of one-to-one junctions at the snapshot times.
pub fn write_coupling_errors<W: Write>(record: &SimulationRecord, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "junction_id", "e1", "e2"])?;
    for c in &record.coupling {
        wtr.write_record([fmt_f64(c.t), c.junction_id.clone(), fmt_f64(c.e1), fmt_f64(c.e2)])?;
    }
    wtr.flush()?;
    Ok(())
}

fn parse_field(s: &str, line: u64, col: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::config(format!("line {line}, column {col}"), format!("`{s}`: {e}")))
}

/// Parses a snapshot file back into per-edge data in file order.
pub fn read_snapshot<R: Read>(r: R) -> Result<Vec<EdgeSnapshot>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(SNAPSHOT_HEADER) {
        return Err(Error::config(
            "header",
            format!("expected {SNAPSHOT_HEADER:?}, got {headers:?}"),
        ));
    }
    let mut edges: Vec<EdgeSnapshot> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != SNAPSHOT_HEADER.len() {
            return Err(Error::config(format!("line {line}"), "wrong number of fields"));
        }
        let id = &rec[0];
        let vals: Vec<f64> = (1..6)
            .map(|k| parse_field(&rec[k], line, SNAPSHOT_HEADER[k]))
            .collect::<Result<_>>()?;
        let edge = match edges.last_mut() {
            Some(e) if e.edge_id == id => e,
            _ => {
                if edges.iter().any(|e| e.edge_id == id) {
                    return Err(Error::config(
                        format!("line {line}"),
                        format!("rows of edge `{id}` are not contiguous"),
                    ));
                }
                edges.push(EdgeSnapshot {
                    edge_id: id.to_string(),
                    dx: 0.0,
                    x: Vec::new(),
                    a: Vec::new(),
                    q: Vec::new(),
                    p: Vec::new(),
                    u: Vec::new(),
                });
                edges.last_mut().unwrap()
            }
        };
        edge.x.push(vals[0]);
        edge.a.push(vals[1]);
        edge.q.push(vals[2]);
        edge.p.push(vals[3]);
        edge.u.push(vals[4]);
    }
    for e in &mut edges {
        if e.x.len() > 1 {
            e.dx = e.x[1] - e.x[0];
        }
    }
    Ok(edges)
}

/// Parses a snapshot from a string.
pub fn parse_snapshot_csv(text: &str) -> Result<Vec<EdgeSnapshot>> {
    read_snapshot(text.as_bytes())
}

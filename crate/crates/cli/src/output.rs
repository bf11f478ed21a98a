//! Series, snapshot and table writers.
//!
//! Series are NDJSON: a header object followed by one object per record.
//! Snapshots are CSV (`v1,…,vd,f`, 17 significant digits) with a sidecar
//! `.json` describing the frame, the grid and the configuration hash.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bne_core::frame::Frame;
use bne_core::grid::GridSpec;
use serde::Serialize;
use serde_json::json;

use crate::config::SimConfig;
use crate::run::{Outcome, Record, RunError, RunRecord, Snapshot};

fn io_err(path: &Path, source: std::io::Error) -> RunError {
    RunError::Io { path: path.display().to_string(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

/// Header line of a series file.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesHeader<'a> {
    pub config_hash: &'a str,
    pub label: &'a str,
    pub hbar: Option<f64>,
    pub hbar_star: Option<f64>,
}

pub fn write_series(
    path: &Path,
    header: &SeriesHeader<'_>,
    records: &[Record],
    outcome: Option<&Outcome>,
) -> Result<(), RunError> {
    let mut w = create(path)?;
    let mut line = |v: serde_json::Value| -> Result<(), RunError> {
        serde_json::to_writer(&mut w, &v).map_err(|e| io_err(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| io_err(path, e))
    };
    line(json!({ "header": header }))?;
    for r in records {
        line(serde_json::to_value(r).expect("record serializes"))?;
    }
    if let Some(o) = outcome {
        line(json!({ "outcome": o }))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Sidecar path of a snapshot: `name.csv` → `name.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_snapshot(
    path: &Path,
    grid: &GridSpec,
    snap: &Snapshot,
    config_hash: &str,
) -> Result<(), RunError> {
    let d = grid.dim;
    let mut w = create(path)?;
    let names: Vec<String> = (1..=d).map(|a| format!("v{a}")).chain(["f".to_string()]).collect();
    let mut out = names.join(",");
    out.push('\n');
    for j in grid.sorted_order() {
        let v = snap.frame.velocity(grid, j);
        for x in &v[..d] {
            out += &format!("{x:.16e},");
        }
        out += &format!("{:.16e}\n", snap.f[j]);
    }
    w.write_all(out.as_bytes()).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))?;

    let side = sidecar_path(path);
    let meta = json!({
        "step": snap.step,
        "t": snap.t,
        "frame": frame_json(&snap.frame),
        "grid": grid_json(grid),
        "config_hash": config_hash,
    });
    let mut w = create(&side)?;
    serde_json::to_writer_pretty(&mut w, &meta).map_err(|e| io_err(&side, e.into()))?;
    w.write_all(b"\n").map_err(|e| io_err(&side, e))?;
    w.flush().map_err(|e| io_err(&side, e))
}

pub fn frame_json(f: &Frame) -> serde_json::Value {
    json!({
        "omega": f.omega,
        "u": &f.u[..f.dim],
        "mu": f.mu,
        "lambda": f.lambda(),
        "L": f.half_width_l,
    })
}

pub fn grid_json(g: &GridSpec) -> serde_json::Value {
    json!({
        "dim": g.dim,
        "n": g.n,
        "L": g.half_width_l,
        "trunc_ratio": g.trunc_ratio,
        "S": g.support_s,
        "R": g.trunc_r,
    })
}

/// Velocities and values of a snapshot CSV, in file order.
pub fn read_snapshot(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<f64>), RunError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut v = Vec::new();
    let mut f = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if i == 0 {
            continue;
        }
        let mut vals = line
            .split(',')
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| io_err(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
        f.push(vals.pop().unwrap_or(f64::NAN));
        v.push(vals);
    }
    Ok((v, f))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), RunError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes a finished run into `dir`: `config.txt`, `series.ndjson`,
/// `snapshot_<k>.csv` with sidecars and `summary.json`.
pub fn write_run(dir: &Path, config: &SimConfig, label: &str, grid: &GridSpec, run: &RunRecord) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let hash = config.hash();
    let cfg_path = dir.join("config.txt");
    std::fs::write(&cfg_path, config.to_text()).map_err(|e| io_err(&cfg_path, e))?;
    let header = SeriesHeader { config_hash: &hash, label, hbar: run.hbar, hbar_star: run.hbar_star };
    write_series(&dir.join("series.ndjson"), &header, &run.records, Some(&run.outcome))?;
    for (k, snap) in run.snapshots.iter().enumerate() {
        write_snapshot(&dir.join(format!("snapshot_{k}.csv")), grid, snap, &hash)?;
    }
    let summary = json!({
        "label": label,
        "config_hash": hash,
        "outcome": run.outcome,
        "hbar": run.hbar,
        "hbar_star": run.hbar_star,
        "limit": run.limit.map(|l| format!("{l:?}")),
        "records": run.records.len(),
        "snapshots": run.snapshots.len(),
    });
    write_json(&dir.join("summary.json"), &summary)
}

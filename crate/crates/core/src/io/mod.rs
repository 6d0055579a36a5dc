//! Run configuration, snapshot files and diagnostic tables.
//!
//! Binary snapshot layout (all little-endian):
//!
//! ```text
//! magic    8 bytes  "CL3SNAP\0"
//! version  u32      1
//! n        3 × u64
//! extent   3 × f64
//! t        f64
//! data     8 × f64 per point (re, im of c0..c3), row-major, z fastest
//! ```

mod config;

pub use config::{DiagnosticsSpec, Format, InitialSpec, OutputSpec, PotentialSpec, RunConfig};

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::clifford::Paravector;
use crate::evolution::{Grid, SpinorField, StepLog};
use crate::hydro::{FlowPoint, LawResidual};

pub const MAGIC: &[u8; 8] = b"CL3SNAP\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("config error: {0}")]
    Config(String),
    #[error("malformed snapshot: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> IoError {
    IoError::Io(format!("{}: {e}", path.display()))
}

pub fn write_snapshot_bin(w: &mut impl Write, field: &SpinorField) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for n in field.grid.n {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for l in field.grid.extent {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&field.t.to_le_bytes())?;
    for p in &field.data {
        for x in p.to_reals() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_snapshot_bin(r: &mut impl Read) -> Result<SpinorField, IoError> {
    let fmt = |e: std::io::Error| IoError::Format(e.to_string());
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(fmt)?;
    if &magic != MAGIC {
        return Err(IoError::Format("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4).map_err(fmt)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(IoError::Format(format!("unsupported version {version}")));
    }
    let mut b8 = [0u8; 8];
    let mut u64_at = |r: &mut dyn Read| -> Result<[u8; 8], IoError> {
        r.read_exact(&mut b8).map_err(fmt)?;
        Ok(b8)
    };
    let mut n = [0usize; 3];
    for k in n.iter_mut() {
        *k = usize::try_from(u64::from_le_bytes(u64_at(r)?)).map_err(|e| IoError::Format(e.to_string()))?;
    }
    let mut extent = [0.0; 3];
    for l in extent.iter_mut() {
        *l = f64::from_le_bytes(u64_at(r)?);
    }
    let t = f64::from_le_bytes(u64_at(r)?);
    let grid = Grid::new(n, extent).map_err(|e| IoError::Format(e.to_string()))?;
    let mut bytes = vec![0u8; grid.len() * 64];
    r.read_exact(&mut bytes).map_err(fmt)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(fmt)? != 0 {
        return Err(IoError::Format("trailing bytes".into()));
    }
    let data = bytes
        .chunks_exact(64)
        .map(|c| {
            let mut reals = [0.0; 8];
            for (k, x) in reals.iter_mut().enumerate() {
                *x = f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().unwrap());
            }
            Paravector::from_reals(reals)
        })
        .collect();
    Ok(SpinorField { grid, data, t })
}

const CSV_COEFFS: [&str; 8] = ["c0_re", "c0_im", "c1_re", "c1_im", "c2_re", "c2_im", "c3_re", "c3_im"];

/// CSV export: a `#` metadata line, then one row per point.
pub fn write_snapshot_csv(w: &mut impl Write, field: &SpinorField) -> Result<(), IoError> {
    let g = field.grid;
    writeln!(
        w,
        "# t={} n={},{},{} extent={},{},{}",
        field.t, g.n[0], g.n[1], g.n[2], g.extent[0], g.extent[1], g.extent[2]
    )
    .map_err(|e| IoError::Io(e.to_string()))?;
    let mut cw = csv::Writer::from_writer(w);
    let mut header = vec!["ix", "iy", "iz", "x", "y", "z"];
    header.extend(CSV_COEFFS);
    cw.write_record(&header).map_err(|e| IoError::Io(e.to_string()))?;
    for (idx, p) in field.data.iter().enumerate() {
        let i = g.unravel(idx);
        let x = g.position(idx);
        let mut row: Vec<String> = i.iter().map(|v| v.to_string()).collect();
        row.extend(x.iter().map(|v| v.to_string()));
        row.extend(p.to_reals().iter().map(|v| v.to_string()));
        cw.write_record(&row).map_err(|e| IoError::Io(e.to_string()))?;
    }
    cw.flush().map_err(|e| IoError::Io(e.to_string()))
}

fn parse_triple<T: std::str::FromStr>(s: &str) -> Option<[T; 3]> {
    let v: Vec<T> = s.split(',').map(|x| x.parse().ok()).collect::<Option<_>>()?;
    v.try_into().ok()
}

pub fn read_snapshot_csv(r: impl Read) -> Result<SpinorField, IoError> {
    let mut text = String::new();
    BufReader::new(r).read_to_string(&mut text).map_err(|e| IoError::Io(e.to_string()))?;
    let (meta, body) = text.split_once('\n').ok_or_else(|| IoError::Format("empty csv".into()))?;
    let meta = meta.strip_prefix("# ").ok_or_else(|| IoError::Format("missing metadata line".into()))?;
    let (mut t, mut n, mut extent) = (None, None, None);
    for kv in meta.split_whitespace() {
        match kv.split_once('=') {
            Some(("t", v)) => t = v.parse::<f64>().ok(),
            Some(("n", v)) => n = parse_triple::<usize>(v),
            Some(("extent", v)) => extent = parse_triple::<f64>(v),
            _ => return Err(IoError::Format(format!("unknown metadata {kv}"))),
        }
    }
    let (Some(t), Some(n), Some(extent)) = (t, n, extent) else {
        return Err(IoError::Format("incomplete metadata".into()));
    };
    let grid = Grid::new(n, extent).map_err(|e| IoError::Format(e.to_string()))?;
    let mut data = vec![None; grid.len()];
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    for rec in rd.records() {
        let rec = rec.map_err(|e| IoError::Format(e.to_string()))?;
        if rec.len() != 14 {
            return Err(IoError::Format(format!("expected 14 columns, got {}", rec.len())));
        }
        let num = |k: usize| rec[k].parse::<f64>().map_err(|e| IoError::Format(e.to_string()));
        let ix = |k: usize| rec[k].parse::<usize>().map_err(|e| IoError::Format(e.to_string()));
        let (a, b, c) = (ix(0)?, ix(1)?, ix(2)?);
        if a >= n[0] || b >= n[1] || c >= n[2] {
            return Err(IoError::Format("index out of range".into()));
        }
        let mut reals = [0.0; 8];
        for (k, x) in reals.iter_mut().enumerate() {
            *x = num(6 + k)?;
        }
        data[grid.idx(a, b, c)] = Some(Paravector::from_reals(reals));
    }
    let data = data.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| IoError::Format("missing points".into()))?;
    Ok(SpinorField { grid, data, t })
}

pub fn snapshot_name(step: usize, format: Format) -> String {
    match format {
        Format::Bin => format!("snap_{step:06}.bin"),
        Format::Csv => format!("snap_{step:06}.csv"),
    }
}

pub fn write_snapshot(path: &Path, field: &SpinorField, format: Format) -> Result<(), IoError> {
    let f = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    match format {
        Format::Bin => write_snapshot_bin(&mut w, field).map_err(|e| io_err(path, e))?,
        Format::Csv => write_snapshot_csv(&mut w, field)?,
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads either format, chosen by extension.
pub fn read_snapshot(path: &Path) -> Result<SpinorField, IoError> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_snapshot_csv(f),
        _ => read_snapshot_bin(&mut BufReader::new(f)),
    }
}

/// Snapshot files in `dir` sorted by name.
pub fn list_snapshots(dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("snap_") && (name.ends_with(".bin") || name.ends_with(".csv"))
        })
        .collect();
    out.sort();
    Ok(out)
}

pub const RESIDUAL_HEADER: [&str; 5] = ["law", "sector", "norm_type", "value", "masked_fraction"];

/// Rows `[law, sector, norm_type, value, masked_fraction]` for each norm.
pub fn residual_rows(r: &LawResidual) -> Vec<[String; 5]> {
    let row = |kind: &str, v: f64| {
        [
            r.law.name().to_string(),
            r.sector_label().to_string(),
            kind.to_string(),
            format!("{v:e}"),
            r.masked_fraction.to_string(),
        ]
    };
    vec![row("l2", r.l2), row("linf", r.linf), row("l2_rel", r.l2_rel()), row("linf_rel", r.linf_rel())]
}

pub fn write_residual_csv(w: impl Write, rows: &[LawResidual]) -> Result<(), IoError> {
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(RESIDUAL_HEADER).map_err(|e| IoError::Io(e.to_string()))?;
    for r in rows {
        for row in residual_rows(r) {
            cw.write_record(&row).map_err(|e| IoError::Io(e.to_string()))?;
        }
    }
    cw.flush().map_err(|e| IoError::Io(e.to_string()))
}

/// Polyline rows `[line_id, s, x, y, z]`.
pub fn write_flowline_csv<'a>(
    w: impl Write,
    lines: impl IntoIterator<Item = (String, &'a [FlowPoint])>,
) -> Result<(), IoError> {
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(["line_id", "s", "x", "y", "z"]).map_err(|e| IoError::Io(e.to_string()))?;
    for (id, pts) in lines {
        for p in pts {
            cw.write_record([id.clone(), p.s.to_string(), p.x[0].to_string(), p.x[1].to_string(), p.x[2].to_string()])
                .map_err(|e| IoError::Io(e.to_string()))?;
        }
    }
    cw.flush().map_err(|e| IoError::Io(e.to_string()))
}

/// One structured log line for a step.
pub fn step_log_line(log: &StepLog) -> String {
    let h1 = log.h1.map_or("-".to_string(), |h| format!("{h:e}"));
    format!(
        "event=step step={} t={} l2={:e} h1={} envelope_ratio={:e}",
        log.step, log.t, log.l2, h1, log.envelope_ratio
    )
}

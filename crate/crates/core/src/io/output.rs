//! Snapshot outputs: six ESRI ASCII grids, a contour CSV, and the JSON run
//! report.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::solver::{RunReport, SimSnapshot};

use super::asc::{push_fixed6, write_asc, AscHeader};

pub const CSV_HEADER: &str = "X,Y,h,phi_s,vx_s,vy_s,vx_f,vy_f";

/// Output time label: seconds rounded to 6 decimals, trailing zeros trimmed
/// (`181.82`, `60`, `0.5`).
pub fn time_label(t: f64) -> String {
    let s = format!("{t:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn check_size(snapshot: &SimSnapshot, header: &AscHeader) -> Result<()> {
    if snapshot.ncols != header.ncols || snapshot.nrows != header.nrows {
        return Err(Error::Config(format!(
            "snapshot is {}x{} but the DEM header is {}x{}",
            snapshot.ncols, snapshot.nrows, header.ncols, header.nrows
        )));
    }
    Ok(())
}

/// Writes `h_t<time>.asc`, `phis_…`, `vxs_…`, `vys_…`, `vxf_…`, `vyf_…`.
pub fn write_snapshot(snapshot: &SimSnapshot, header: &AscHeader, out_dir: &Path) -> Result<Vec<PathBuf>> {
    check_size(snapshot, header)?;
    ensure_dir(out_dir)?;
    let label = time_label(snapshot.t);
    let mut paths = Vec::with_capacity(6);
    for (prefix, values) in snapshot.fields() {
        let path = out_dir.join(format!("{prefix}_t{label}.asc"));
        write_asc(&path, header, values)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes `fields_t<time>.csv`, one row per cell at cell centres.
pub fn write_contour_csv(snapshot: &SimSnapshot, header: &AscHeader, out_dir: &Path) -> Result<PathBuf> {
    check_size(snapshot, header)?;
    ensure_dir(out_dir)?;
    let path = out_dir.join(format!("fields_t{}.csv", time_label(snapshot.t)));
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(&path, e);
    writeln!(w, "{CSV_HEADER}").map_err(io)?;
    let fields = snapshot.fields();
    let mut line = String::new();
    for j in 0..header.nrows {
        for i in 0..header.ncols {
            let k = j * header.ncols + i;
            line.clear();
            let x = header.xll + (i as f64 + 0.5) * header.cellsize;
            let y = header.yll + (j as f64 + 0.5) * header.cellsize;
            line.push_str(&format!("{x},{y}"));
            for (_, values) in &fields {
                line.push(',');
                push_fixed6(&mut line, values[k]);
            }
            line.push('\n');
            w.write_all(line.as_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    Ok(path)
}

/// Writes `run_report.json`.
pub fn write_run_report(report: &RunReport, out_dir: &Path) -> Result<PathBuf> {
    ensure_dir(out_dir)?;
    let path = out_dir.join("run_report.json");
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Config(format!("run report: {e}")))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

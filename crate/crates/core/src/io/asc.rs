//! ESRI ASCII grid (`.asc`) reading and writing.
//!
//! Layout: six header lines (`ncols`, `nrows`, `xllcorner`, `yllcorner`,
//! `cellsize`, `NODATA_value`; keys case-insensitive) followed by `nrows`
//! rows of `ncols` values, northernmost row first. In memory, values are
//! stored south-to-north: `data[j * ncols + i]` with `i` east and `j` north.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

const KEYS: [&str; 6] = [
    "ncols",
    "nrows",
    "xllcorner",
    "yllcorner",
    "cellsize",
    "nodata_value",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AscHeader {
    pub ncols: usize,
    pub nrows: usize,
    pub xll: f64,
    pub yll: f64,
    pub cellsize: f64,
    pub nodata: f64,
    /// The header lines exactly as read, so outputs can repeat them byte for byte.
    raw: String,
}

impl AscHeader {
    pub fn new(ncols: usize, nrows: usize, xll: f64, yll: f64, cellsize: f64, nodata: f64) -> Self {
        let mut raw = String::new();
        let _ = writeln!(raw, "ncols         {ncols}");
        let _ = writeln!(raw, "nrows         {nrows}");
        let _ = writeln!(raw, "xllcorner     {xll}");
        let _ = writeln!(raw, "yllcorner     {yll}");
        let _ = writeln!(raw, "cellsize      {cellsize}");
        let _ = writeln!(raw, "NODATA_value  {nodata}");
        Self {
            ncols,
            nrows,
            xll,
            yll,
            cellsize,
            nodata,
            raw,
        }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn cell_count(&self) -> usize {
        self.ncols * self.nrows
    }

    /// Same dimensions and georeference (raw text may differ).
    pub fn congruent(&self, other: &AscHeader) -> bool {
        let tol = 1e-9 * self.cellsize.abs().max(1.0);
        self.ncols == other.ncols
            && self.nrows == other.nrows
            && (self.xll - other.xll).abs() <= tol
            && (self.yll - other.yll).abs() <= tol
            && (self.cellsize - other.cellsize).abs() <= tol
    }
}

/// A raster in south-to-north order.
#[derive(Debug, Clone, PartialEq)]
pub struct AscGrid {
    pub header: AscHeader,
    pub data: Vec<f64>,
}

impl AscGrid {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.header.ncols + i]
    }
}

pub fn read_asc(path: &Path) -> Result<AscGrid> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_asc(&text, path)
}

/// Parses grid text; `path` is only used in error messages.
pub fn parse_asc(text: &str, path: &Path) -> Result<AscGrid> {
    let format_err = |line: usize, msg: String| Error::Format {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut values: [Option<f64>; 6] = [None; 6];
    let mut raw = String::new();
    let mut consumed = 0usize;
    let mut line_no = 0usize;
    let mut lines = text.split_inclusive('\n');
    while values.iter().any(Option::is_none) {
        let Some(line) = lines.next() else {
            return Err(format_err(line_no, "header ended early".into()));
        };
        line_no += 1;
        consumed += line.len();
        let trimmed = line.trim();
        if trimmed.is_empty() {
            return Err(format_err(line_no, "blank line inside header".into()));
        }
        let mut parts = trimmed.split_whitespace();
        let key = parts.next().unwrap_or_default().to_ascii_lowercase();
        let Some(slot) = KEYS.iter().position(|k| *k == key) else {
            return Err(format_err(line_no, format!("unexpected header key `{key}`")));
        };
        if values[slot].is_some() {
            return Err(format_err(line_no, format!("duplicate header key `{key}`")));
        }
        let value = parts
            .next()
            .ok_or_else(|| format_err(line_no, format!("missing value for `{key}`")))?;
        if parts.next().is_some() {
            return Err(format_err(line_no, format!("trailing text after `{key}`")));
        }
        let v: f64 = value
            .parse()
            .map_err(|_| format_err(line_no, format!("bad number `{value}` for `{key}`")))?;
        if !v.is_finite() {
            return Err(format_err(line_no, format!("non-finite value for `{key}`")));
        }
        values[slot] = Some(v);
        raw.push_str(line);
    }
    let [ncols, nrows, xll, yll, cellsize, nodata] = values.map(Option::unwrap);
    let as_count = |v: f64, key: &str| -> Result<usize> {
        if v.fract() != 0.0 || v < 2.0 {
            return Err(Error::Grid {
                path: path.to_path_buf(),
                msg: format!("{key} must be an integer >= 2, got {v}"),
            });
        }
        Ok(v as usize)
    };
    let ncols = as_count(ncols, "ncols")?;
    let nrows = as_count(nrows, "nrows")?;
    if cellsize <= 0.0 {
        return Err(Error::Grid {
            path: path.to_path_buf(),
            msg: format!("non-positive cellsize {cellsize}"),
        });
    }

    let body = &text[consumed..];
    let mut file_order = Vec::with_capacity(ncols * nrows);
    for (k, line) in body.lines().enumerate() {
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| format_err(line_no + k + 1, format!("bad number `{tok}`")))?;
            file_order.push(v);
        }
    }
    if file_order.len() != ncols * nrows {
        return Err(Error::Grid {
            path: path.to_path_buf(),
            msg: format!(
                "value count mismatch: expected {} ({ncols}x{nrows}), found {}",
                ncols * nrows,
                file_order.len()
            ),
        });
    }

    let mut data = vec![0.0; ncols * nrows];
    for (r, row) in file_order.chunks_exact(ncols).enumerate() {
        let j = nrows - 1 - r;
        for (i, &v) in row.iter().enumerate() {
            if v == nodata {
                return Err(Error::Grid {
                    path: path.to_path_buf(),
                    msg: format!("NODATA inside domain at column {i}, row {r}"),
                });
            }
            if !v.is_finite() {
                return Err(Error::Grid {
                    path: path.to_path_buf(),
                    msg: format!("non-finite value at column {i}, row {r}"),
                });
            }
            data[j * ncols + i] = v;
        }
    }

    Ok(AscGrid {
        header: AscHeader {
            ncols,
            nrows,
            xll,
            yll,
            cellsize,
            nodata,
            raw,
        },
        data,
    })
}

/// Writes `data` (south-to-north) under a verbatim copy of `header`.
pub fn write_asc(path: &Path, header: &AscHeader, data: &[f64]) -> Result<()> {
    assert_eq!(data.len(), header.cell_count(), "grid size mismatch");
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(header.raw.as_bytes()).map_err(io)?;
    if !header.raw.ends_with('\n') {
        w.write_all(b"\n").map_err(io)?;
    }
    let mut line = String::new();
    for j in (0..header.nrows).rev() {
        line.clear();
        for i in 0..header.ncols {
            if i > 0 {
                line.push(' ');
            }
            push_fixed6(&mut line, data[j * header.ncols + i]);
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Six-decimal fixed notation, without a sign on values that round to zero.
pub(crate) fn push_fixed6(buf: &mut String, v: f64) {
    let start = buf.len();
    let _ = write!(buf, "{v:.6}");
    if &buf[start..] == "-0.000000" {
        buf.replace_range(start.., "0.000000");
    }
}

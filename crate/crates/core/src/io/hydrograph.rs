//! Inflow hydrograph files.
//!
//! ```text
//! # inflow cells: column i (east), row j (north, 0 = southernmost), side
//! cell 0 12 W
//! cell 0 13 W
//! t h phi_s speed
//! 0    0.0  0.5  0.0
//! 60   2.0  0.5  3.0
//! ```
//!
//! Times are seconds, `h` is thickness normal to the bed in metres and
//! `speed` the inward velocity in m/s. Blank lines and `#` comments are
//! ignored.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    North,
    South,
    East,
    West,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" | "n" => Ok(Side::North),
            "S" | "s" => Ok(Side::South),
            "E" | "e" => Ok(Side::East),
            "W" | "w" => Ok(Side::West),
            other => Err(Error::Hydrograph(format!("unknown side `{other}` (expected N, S, E or W)"))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Side::North => "N",
            Side::South => "S",
            Side::East => "E",
            Side::West => "W",
        };
        f.write_str(c)
    }
}

impl Side {
    /// Unit inward direction (X, Y).
    pub fn inward(self) -> [f64; 2] {
        match self {
            Side::North => [0.0, -1.0],
            Side::South => [0.0, 1.0],
            Side::East => [-1.0, 0.0],
            Side::West => [1.0, 0.0],
        }
    }

    pub fn contains(self, i: usize, j: usize, ncols: usize, nrows: usize) -> bool {
        i < ncols
            && j < nrows
            && match self {
                Side::North => j == nrows - 1,
                Side::South => j == 0,
                Side::East => i == ncols - 1,
                Side::West => i == 0,
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InflowCell {
    pub i: usize,
    pub j: usize,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflowSample {
    pub t: f64,
    pub h: f64,
    pub phi_s: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hydrograph {
    pub cells: Vec<InflowCell>,
    pub samples: Vec<InflowSample>,
}

impl Hydrograph {
    pub fn new(cells: Vec<InflowCell>, samples: Vec<InflowSample>, ncols: usize, nrows: usize) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Hydrograph("no inflow cells".into()));
        }
        if samples.is_empty() {
            return Err(Error::Hydrograph("no samples".into()));
        }
        for c in &cells {
            if !c.side.contains(c.i, c.j, ncols, nrows) {
                return Err(Error::Hydrograph(format!(
                    "cell ({}, {}) is not on the {} boundary of a {ncols}x{nrows} grid",
                    c.i, c.j, c.side
                )));
            }
        }
        for pair in samples.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(Error::Hydrograph(format!(
                    "sample times must increase strictly ({} then {})",
                    pair[0].t, pair[1].t
                )));
            }
        }
        for s in &samples {
            if !s.t.is_finite() {
                return Err(Error::Hydrograph(format!("non-finite time {}", s.t)));
            }
            if !(s.h >= 0.0 && s.h.is_finite()) {
                return Err(Error::Hydrograph(format!("negative thickness {} at t = {}", s.h, s.t)));
            }
            if !(s.speed >= 0.0 && s.speed.is_finite()) {
                return Err(Error::Hydrograph(format!("negative speed {} at t = {}", s.speed, s.t)));
            }
            if !(0.0..=1.0).contains(&s.phi_s) {
                return Err(Error::Hydrograph(format!("phi_s {} outside [0, 1] at t = {}", s.phi_s, s.t)));
            }
        }
        Ok(Self { cells, samples })
    }

    /// Inflow at time `t`, linearly interpolated. `None` outside the sampled
    /// interval, where the boundary reverts to open.
    pub fn sample_at(&self, t: f64) -> Option<InflowSample> {
        let first = self.samples.first()?;
        let last = self.samples.last()?;
        if t < first.t || t > last.t {
            return None;
        }
        let k = self.samples.partition_point(|s| s.t <= t);
        if k == self.samples.len() {
            return Some(*last);
        }
        let (a, b) = (self.samples[k - 1], self.samples[k]);
        let w = (t - a.t) / (b.t - a.t);
        let lerp = |x: f64, y: f64| x + w * (y - x);
        Some(InflowSample {
            t,
            h: lerp(a.h, b.h),
            phi_s: lerp(a.phi_s, b.phi_s),
            speed: lerp(a.speed, b.speed),
        })
    }

    /// Prescribed inflow thickness at `t` (0 outside the sampled interval).
    pub fn inflow_thickness(&self, t: f64) -> f64 {
        self.sample_at(t).map_or(0.0, |s| s.h)
    }
}

pub fn load_hydrograph(path: &Path, ncols: usize, nrows: usize) -> Result<Hydrograph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_hydrograph(&text, path, ncols, nrows)
}

pub fn parse_hydrograph(text: &str, path: &Path, ncols: usize, nrows: usize) -> Result<Hydrograph> {
    let err = |line: usize, msg: String| Error::Format {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut cells = Vec::new();
    let mut samples = Vec::new();
    let mut in_table = false;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if !in_table {
            if tokens == ["t", "h", "phi_s", "speed"] {
                in_table = true;
                continue;
            }
            match tokens.as_slice() {
                ["cell", i, j, side] => {
                    let i = i
                        .parse()
                        .map_err(|_| err(line_no, format!("bad column index `{i}`")))?;
                    let j = j.parse().map_err(|_| err(line_no, format!("bad row index `{j}`")))?;
                    cells.push(InflowCell {
                        i,
                        j,
                        side: side.parse()?,
                    });
                }
                _ => {
                    return Err(err(
                        line_no,
                        "expected `cell <i> <j> <side>` or the `t h phi_s speed` header".into(),
                    ))
                }
            }
        } else {
            if tokens.len() != 4 {
                return Err(err(line_no, format!("expected 4 columns, found {}", tokens.len())));
            }
            let mut v = [0.0; 4];
            for (slot, tok) in v.iter_mut().zip(&tokens) {
                *slot = tok.parse().map_err(|_| err(line_no, format!("bad number `{tok}`")))?;
            }
            samples.push(InflowSample {
                t: v[0],
                h: v[1],
                phi_s: v[2],
                speed: v[3],
            });
        }
    }
    if !in_table {
        return Err(err(0, "missing `t h phi_s speed` header".into()));
    }
    Hydrograph::new(cells, samples, ncols, nrows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, n: usize) -> Result<Hydrograph> {
        parse_hydrograph(text, Path::new("inflow.txt"), n, n)
    }

    #[test]
    fn transcribes_cells_and_samples() {
        let text = "cell 0 3 W\ncell 0 4 W\nt h phi_s speed\n0 0.5 0.5 1.0\n60 1.0 0.5 2.0\n";
        let h = parse(text, 10).unwrap();
        assert_eq!(h.cells.len(), 2);
        assert_eq!(h.samples.len(), 2);
        assert_eq!(h.samples[1], InflowSample { t: 60.0, h: 1.0, phi_s: 0.5, speed: 2.0 });
    }

    #[test]
    fn rejects_non_monotone_times() {
        let text = "cell 0 3 W\nt h phi_s speed\n10 0.5 0.5 1.0\n5 1.0 0.5 2.0\n";
        let e = parse(text, 10).unwrap_err();
        assert!(e.to_string().contains("increase"), "{e}");
    }

    #[test]
    fn rejects_cell_off_boundary() {
        let text = "cell 5 5 E\nt h phi_s speed\n0 0.5 0.5 1.0\n";
        let e = parse(text, 100).unwrap_err();
        assert!(e.to_string().contains("not on the E boundary"), "{e}");
    }

    #[test]
    fn rejects_bad_values() {
        for row in ["0 -1 0.5 1", "0 1 1.5 1", "0 1 0.5 -2"] {
            let text = format!("cell 0 3 W\nt h phi_s speed\n{row}\n");
            assert!(parse(&text, 10).is_err(), "{row}");
        }
    }

    #[test]
    fn interpolates_and_stops() {
        let h = Hydrograph::new(
            vec![InflowCell { i: 0, j: 1, side: Side::West }],
            vec![
                InflowSample { t: 0.0, h: 0.0, phi_s: 0.5, speed: 1.0 },
                InflowSample { t: 60.0, h: 2.0, phi_s: 0.5, speed: 1.0 },
            ],
            4,
            4,
        )
        .unwrap();
        assert_eq!(h.inflow_thickness(30.0), 1.0);
        assert_eq!(h.inflow_thickness(60.0), 2.0);
        assert_eq!(h.inflow_thickness(120.0), 0.0);
        assert!(h.sample_at(120.0).is_none());
    }
}

//! The `par_list` parameter file.
//!
//! UTF-8 `key = value` lines; `#` starts a comment. Every key may appear at
//! most once and unknown keys are rejected. Relative paths are resolved
//! against the directory holding the file.
//!
//! | key | required | meaning |
//! |-----|----------|---------|
//! | `dem` | yes | DEM grid (`.asc`) |
//! | `mode` | yes | `finite-release` (or `I`) / `inflow-hydrograph` (or `II`) |
//! | `init` | Mode-I | release thickness grid, metres |
//! | `init_vx`, `init_vy` | no (pair) | initial velocity grids, m/s |
//! | `hydrograph` | Mode-II | inflow hydrograph file |
//! | `t_end`, `dt_out` | yes | seconds |
//! | `delta_b` | yes | basal friction angle, degrees |
//! | `C_d`, `N_R`, `theta_b`, `phi_s0` | yes | drag, viscosity number, fluid friction, initial solid fraction |
//! | `alpha_rho` | no (0.4) | density ratio ρ^f/ρ^s |
//! | `chi` | no (1) | curvature exponent |
//! | `cfl` | no (0.1) | Courant number, at most 0.125 |
//! | `h_dry`, `eps_h` | no (1e-10, 1e-6) | dry threshold and desingularisation scale (scaled) |
//! | `L`, `H`, `g` | no (1, 1, 9.80665) | length and thickness scales [m], gravity [m/s²] |
//! | `out_dir` | no | output directory |

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::physics::ModelParams;
use crate::scaling::ScalingConfig;
use crate::solver::{Mode, Regularization, SimConfig};

const KNOWN: [&str; 22] = [
    "dem", "mode", "init", "init_vx", "init_vy", "hydrograph", "t_end", "dt_out", "delta_b", "C_d", "N_R",
    "theta_b", "phi_s0", "alpha_rho", "chi", "cfl", "h_dry", "eps_h", "L", "H", "g", "out_dir",
];

const REQUIRED: [&str; 9] = ["dem", "mode", "t_end", "dt_out", "delta_b", "C_d", "N_R", "theta_b", "phi_s0"];

pub fn parse_par_list(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_par_list_str(&text, path)
}

/// Parses `par_list` text. `path` locates relative file names and labels
/// errors.
pub fn parse_par_list_str(text: &str, path: &Path) -> Result<SimConfig> {
    let format_err = |line: usize, msg: String| Error::Format {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format_err(line_no, format!("expected `key = value`, found `{line}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KNOWN.contains(&key) {
            return Err(format_err(line_no, format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(format_err(line_no, format!("empty value for `{key}`")));
        }
        if let Some((first, _)) = entries.insert(key, (line_no, value)) {
            return Err(format_err(line_no, format!("duplicate key `{key}` (first on line {first})")));
        }
    }
    for key in REQUIRED {
        if !entries.contains_key(key) {
            return Err(Error::Config(format!("{}: missing required key `{key}`", path.display())));
        }
    }

    let number = |key: &str| -> Result<Option<f64>> {
        let Some(&(line, value)) = entries.get(key) else {
            return Ok(None);
        };
        let v: f64 = value
            .parse()
            .map_err(|_| format_err(line, format!("`{key}`: bad number `{value}`")))?;
        if !v.is_finite() {
            return Err(format_err(line, format!("`{key}`: non-finite value")));
        }
        Ok(Some(v))
    };
    let required = |key: &str| number(key).map(|v| v.expect("checked above"));
    let base = path.parent().unwrap_or(Path::new(""));
    let file = |key: &str| entries.get(key).map(|&(_, v)| resolve(base, v));

    let scaling = ScalingConfig {
        length: number("L")?.unwrap_or(1.0),
        thickness: number("H")?.unwrap_or(1.0),
        gravity: number("g")?.unwrap_or(crate::scaling::STANDARD_GRAVITY),
    };
    scaling.validate()?;
    let defaults = ModelParams::standard();
    let params = ModelParams {
        delta_b: required("delta_b")?,
        c_d: required("C_d")?,
        n_r: required("N_R")?,
        theta_b: required("theta_b")?,
        phi_s0: required("phi_s0")?,
        alpha_rho: number("alpha_rho")?.unwrap_or(defaults.alpha_rho),
        epsilon: scaling.epsilon(),
        chi: number("chi")?.unwrap_or(defaults.chi),
    };

    let (mode_line, mode_value) = entries["mode"];
    let mode = match mode_value {
        "finite-release" | "I" | "1" => {
            if let Some(&(line, _)) = entries.get("hydrograph") {
                return Err(format_err(line, "`hydrograph` is only used in inflow-hydrograph mode".into()));
            }
            let init = file("init").ok_or_else(|| {
                Error::Config(format!("{}: missing required key `init` (finite-release mode)", path.display()))
            })?;
            let velocity = match (file("init_vx"), file("init_vy")) {
                (Some(x), Some(y)) => Some((x, y)),
                (None, None) => None,
                _ => {
                    return Err(Error::Config(format!(
                        "{}: `init_vx` and `init_vy` must be given together",
                        path.display()
                    )))
                }
            };
            Mode::FiniteRelease { init, velocity }
        }
        "inflow-hydrograph" | "II" | "2" => {
            for key in ["init", "init_vx", "init_vy"] {
                if let Some(&(line, _)) = entries.get(key) {
                    return Err(format_err(line, format!("`{key}` is only used in finite-release mode")));
                }
            }
            let hydrograph = file("hydrograph").ok_or_else(|| {
                Error::Config(format!(
                    "{}: missing required key `hydrograph` (inflow-hydrograph mode)",
                    path.display()
                ))
            })?;
            Mode::InflowHydrograph { hydrograph }
        }
        other => {
            return Err(format_err(
                mode_line,
                format!("unknown mode `{other}` (expected finite-release or inflow-hydrograph)"),
            ))
        }
    };

    let reg_default = Regularization::default();
    let config = SimConfig {
        params,
        scaling,
        mode,
        dem: file("dem").expect("checked above"),
        t_end: required("t_end")?,
        dt_out: required("dt_out")?,
        cfl: number("cfl")?.unwrap_or(0.1),
        reg: Regularization {
            h_dry: number("h_dry")?.unwrap_or(reg_default.h_dry),
            eps_h: number("eps_h")?.unwrap_or(reg_default.eps_h),
        },
        out_dir: file("out_dir"),
    };
    config.validate()?;
    Ok(config)
}

/// Renders `config` as `par_list` text that parses back to an equal config
/// (numbers use the shortest exact decimal form; paths are written as held).
pub fn format_par_list(config: &SimConfig) -> String {
    let mut out = String::new();
    let mut put = |key: &str, value: &dyn std::fmt::Display| out.push_str(&format!("{key} = {value}\n"));
    put("dem", &config.dem.display());
    match &config.mode {
        Mode::FiniteRelease { init, velocity } => {
            put("mode", &"finite-release");
            put("init", &init.display());
            if let Some((x, y)) = velocity {
                put("init_vx", &x.display());
                put("init_vy", &y.display());
            }
        }
        Mode::InflowHydrograph { hydrograph } => {
            put("mode", &"inflow-hydrograph");
            put("hydrograph", &hydrograph.display());
        }
    }
    let p = &config.params;
    let s = &config.scaling;
    for (key, v) in [
        ("t_end", config.t_end),
        ("dt_out", config.dt_out),
        ("delta_b", p.delta_b),
        ("C_d", p.c_d),
        ("N_R", p.n_r),
        ("theta_b", p.theta_b),
        ("phi_s0", p.phi_s0),
        ("alpha_rho", p.alpha_rho),
        ("chi", p.chi),
        ("cfl", config.cfl),
        ("h_dry", config.reg.h_dry),
        ("eps_h", config.reg.eps_h),
        ("L", s.length),
        ("H", s.thickness),
        ("g", s.gravity),
    ] {
        put(key, &v);
    }
    if let Some(dir) = &config.out_dir {
        put("out_dir", &dir.display());
    }
    out
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

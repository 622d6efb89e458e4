//! Time integration of the coupled two-phase system.

pub mod boundary;
pub mod run;
pub mod scheme;
pub mod state;

use std::path::PathBuf;

pub use crate::scaling::ScalingConfig;
pub use boundary::{apply_boundaries, BoundaryCondition};
pub use run::{run_simulation, MassLedger, RunReport, SimSnapshot, Simulation};
pub use scheme::{advect_scalar, capped_coulomb, cfl_step, limited_slope, Solver, StepReport};
pub use state::{regularize_state, Conserved, MixtureState, Regularization, CLIP_TOLERANCE};

use crate::error::{Error, Result};
use crate::physics::ModelParams;

/// Largest admissible Courant number.
pub const CFL_MAX: f64 = 0.125;

/// How material enters the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// Mode-I: a thickness grid released at t = 0, optionally with velocity
    /// grids (X, Y components in m/s).
    FiniteRelease {
        init: PathBuf,
        velocity: Option<(PathBuf, PathBuf)>,
    },
    /// Mode-II: empty domain fed through boundary cells.
    InflowHydrograph { hydrograph: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub scaling: ScalingConfig,
    pub mode: Mode,
    pub dem: PathBuf,
    /// Seconds.
    pub t_end: f64,
    /// Seconds.
    pub dt_out: f64,
    pub cfl: f64,
    pub reg: Regularization,
    pub out_dir: Option<PathBuf>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.scaling.validate()?;
        if !(self.cfl > 0.0) {
            return Err(Error::Config(format!("cfl must be positive, got {}", self.cfl)));
        }
        if self.cfl > CFL_MAX {
            return Err(Error::Config(format!("cfl exceeds 0.125 (got {})", self.cfl)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt_out > 0.0 && self.dt_out.is_finite()) {
            return Err(Error::Config(format!("dt_out must be positive, got {}", self.dt_out)));
        }
        if !(self.reg.h_dry > 0.0) || !(self.reg.eps_h > 0.0) {
            return Err(Error::Config("h_dry and eps_h must be positive".into()));
        }
        Ok(())
    }

    /// Output times in seconds: every multiple of `dt_out` below `t_end`,
    /// then `t_end` itself.
    pub fn output_times(&self) -> Vec<f64> {
        let mut times = Vec::new();
        let mut k = 0u64;
        loop {
            let t = k as f64 * self.dt_out;
            if t >= self.t_end * (1.0 - 1e-12) {
                break;
            }
            times.push(t);
            k += 1;
        }
        times.push(self.t_end);
        times
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> SimConfig {
        SimConfig {
            params: ModelParams::standard(),
            scaling: ScalingConfig::default(),
            mode: Mode::InflowHydrograph {
                hydrograph: "h.txt".into(),
            },
            dem: "dem.asc".into(),
            t_end: 10.0,
            dt_out: 4.0,
            cfl: 0.1,
            reg: Regularization::default(),
            out_dir: None,
        }
    }

    #[test]
    fn output_times_include_start_and_end() {
        assert_eq!(config().output_times(), vec![0.0, 4.0, 8.0, 10.0]);
        let exact = SimConfig { t_end: 8.0, ..config() };
        assert_eq!(exact.output_times(), vec![0.0, 4.0, 8.0]);
    }

    #[test]
    fn cfl_bound_enforced() {
        let err = SimConfig { cfl: 0.2, ..config() }.validate().unwrap_err();
        assert!(err.to_string().contains("cfl exceeds 0.125"), "{err}");
        SimConfig { cfl: 0.125, ..config() }.validate().unwrap();
    }
}

//! Built-in property scenarios: closed-basin conservation, quiescence,
//! transpose symmetry and inflow bookkeeping.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::hydrograph::{Hydrograph, InflowCell, InflowSample, Side};
use crate::parallel::Backend;
use crate::physics::{CellState, ModelParams};
use crate::scaling::ScalingConfig;
use crate::solver::{BoundaryCondition, Conserved, MixtureState, Regularization, Simulation, Solver};
use crate::terrain::{compute_geometry, ElevationGrid, TerrainGeometry};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            measured,
            tolerance,
            passed: measured.is_finite() && measured < tolerance,
            detail,
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<13} measured {:.3e} (tolerance {:.0e}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Conservation,
    Quiescence,
    Symmetry,
    Inflow,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "conservation" => Ok(Suite::Conservation),
            "quiescence" => Ok(Suite::Quiescence),
            "symmetry" => Ok(Suite::Symmetry),
            "inflow" => Ok(Suite::Inflow),
            other => Err(Error::Config(format!(
                "unknown suite `{other}` (all, conservation, quiescence, symmetry, inflow)"
            ))),
        }
    }
}

pub const CONSERVATION_TOL: f64 = 1e-10;
pub const QUIESCENCE_TOL: f64 = 1e-12;
pub const SYMMETRY_TOL: f64 = 1e-12;
pub const INFLOW_TOL: f64 = 1e-6;

pub fn run_suite(suite: Suite, backend: &Backend) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::All | Suite::Conservation) {
        out.push(closed_basin(200, 1000, backend)?);
    }
    if matches!(suite, Suite::All | Suite::Quiescence) {
        out.push(quiescence(64, 1000, backend)?);
    }
    if matches!(suite, Suite::All | Suite::Symmetry) {
        out.push(symmetry(64, 100, backend)?);
    }
    if matches!(suite, Suite::All | Suite::Inflow) {
        out.push(inflow_bookkeeping(backend)?);
    }
    Ok(out)
}

fn simulation(
    dem: &ElevationGrid,
    bc: BoundaryCondition,
    backend: &Backend,
    init: impl Fn(&TerrainGeometry, usize, usize) -> CellState,
) -> Result<Simulation> {
    let geom = compute_geometry(dem, &ScalingConfig::default());
    let state = MixtureState::from_fn(&geom, |i, j| init(&geom, i, j));
    let solver = Solver::new(
        geom,
        ModelParams::standard(),
        Regularization::default(),
        bc,
        0.1,
        backend.clone(),
    );
    Simulation::new(solver, state)
}

fn mixture(h: f64, phi_s: f64, v: [f64; 2]) -> CellState {
    CellState {
        hs: h * phi_s,
        hf: h * (1.0 - phi_s),
        vs: v,
        vf: v,
    }
}

/// Parabolic bowl, `n × n` cells of 1 m, with a paraboloid release at its
/// centre that stays far from the rim.
pub fn bowl_scenario(n: usize, backend: &Backend) -> Result<Simulation> {
    let c = n as f64 / 2.0;
    let dem = ElevationGrid::from_fn(n, n, 1.0, |x, y| ((x - c).powi(2) + (y - c).powi(2)) / 120.0);
    let radius = n as f64 * 0.075;
    simulation(&dem, BoundaryCondition::Open, backend, |_, i, j| {
        let r2 = ((i as f64 + 0.5 - c).powi(2) + (j as f64 + 0.5 - c).powi(2)) / (radius * radius);
        mixture((2.0 * (1.0 - r2)).max(0.0), 0.5, [0.0; 2])
    })
}

/// Mass drift of a release that never reaches the boundary.
pub fn closed_basin(n: usize, steps: usize, backend: &Backend) -> Result<CheckResult> {
    let mut sim = bowl_scenario(n, backend)?;
    for _ in 0..steps {
        sim.step_toward(f64::INFINITY)?;
    }
    let ledger = *sim.ledger();
    let audit = ledger.audit();
    let drift = (0..2)
        .map(|k| (ledger.current[k] - ledger.initial[k]).abs() / ledger.initial[k])
        .fold(0.0, f64::max);
    let audit_rel = (0..2).map(|k| audit[k].abs() / ledger.initial[k]).fold(0.0, f64::max);
    let exchange = ledger.injected.iter().chain(&ledger.outflowed).sum::<f64>();
    let mut result = CheckResult::new(
        "conservation",
        drift,
        CONSERVATION_TOL,
        format!(
            "({n}x{n} cells, {steps} steps, mass audit {audit_rel:.3e}, boundary exchange {exchange:.1e})"
        ),
    );
    if exchange != 0.0 {
        result.passed = false;
    }
    Ok(result)
}

/// Uniform-depth pond on flat ground.
pub fn quiescence(n: usize, steps: usize, backend: &Backend) -> Result<CheckResult> {
    let dem = ElevationGrid::from_fn(n, n, 1.0, |_, _| 12.0);
    let mut sim = simulation(&dem, BoundaryCondition::Open, backend, |_, _, _| mixture(1.5, 0.5, [0.0; 2]))?;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        sim.step_toward(f64::INFINITY)?;
        let prims = sim.state().primitives(&sim.solver().geom, &sim.solver().reg);
        for s in &prims {
            for v in [s.vs[0], s.vs[1], s.vf[0], s.vf[1]] {
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(CheckResult::new(
        "quiescence",
        worst,
        QUIESCENCE_TOL,
        format!("(max |v| over {steps} steps, {n}x{n} cells)"),
    ))
}

/// Terrain and release that are both symmetric under `X ↔ Y`.
pub fn symmetric_scenario(n: usize, backend: &Backend) -> Result<Simulation> {
    let c = n as f64 / 2.0;
    let dem = ElevationGrid::from_fn(n, n, 1.0, |x, y| {
        0.2 * (2.0 * n as f64 - x - y) + 0.004 * (x - c) * (y - c) + 0.002 * ((x - c).powi(2) + (y - c).powi(2))
    });
    let humps = [(0.35, 0.35), (0.3, 0.6), (0.6, 0.3)];
    simulation(&dem, BoundaryCondition::Open, backend, |_, i, j| {
        let (x, y) = (i as f64 + 0.5, j as f64 + 0.5);
        let h: f64 = humps
            .iter()
            .map(|&(a, b)| {
                let r2 = ((x - a * n as f64).powi(2) + (y - b * n as f64).powi(2)) / (0.08 * n as f64).powi(2);
                (1.5 * (1.0 - r2)).max(0.0)
            })
            .sum();
        mixture(h, 0.5, [0.0; 2])
    })
}

/// Largest componentwise difference between `U(i, j)` and the transposed
/// `U(j, i)` (with X/Y momentum components swapped).
pub fn transpose_asymmetry(state: &MixtureState) -> f64 {
    let n = state.mesh.nx;
    assert_eq!(n, state.mesh.ny, "transpose needs a square mesh");
    let swap = |u: &Conserved| Conserved {
        ms: u.ms,
        qs: [u.qs[1], u.qs[0]],
        mf: u.mf,
        qf: [u.qf[1], u.qf[0]],
    };
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let a = state.interior(i, j).to_array();
            let b = swap(state.interior(j, i)).to_array();
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    worst
}

pub fn symmetry(n: usize, steps: usize, backend: &Backend) -> Result<CheckResult> {
    let mut sim = symmetric_scenario(n, backend)?;
    for _ in 0..steps {
        sim.step_toward(f64::INFINITY)?;
    }
    Ok(CheckResult::new(
        "symmetry",
        transpose_asymmetry(sim.state()),
        SYMMETRY_TOL,
        format!("({n}x{n} cells, {steps} steps)"),
    ))
}

/// Inclined V-shaped channel fed through six western cells by a triangular
/// hydrograph; scaled time units.
pub fn channel_scenario(backend: &Backend) -> Result<(Simulation, f64)> {
    let (nx, ny) = (80, 30);
    let yc = ny as f64;
    let dem = ElevationGrid::from_fn(nx, ny, 2.0, |x, y| 0.12 * (2.0 * nx as f64 - x) + 0.08 * (y - yc).abs());
    let cells = (12..18).map(|j| InflowCell { i: 0, j, side: Side::West }).collect();
    let samples = vec![
        InflowSample { t: 0.0, h: 0.0, phi_s: 0.6, speed: 1.0 },
        InflowSample { t: 15.0, h: 1.5, phi_s: 0.5, speed: 2.0 },
        InflowSample { t: 30.0, h: 0.0, phi_s: 0.4, speed: 1.0 },
    ];
    let hydro = Hydrograph::new(cells, samples, nx, ny)?;
    let scaling = ScalingConfig::default();
    let bc = BoundaryCondition::inflow(&hydro, &scaling);
    let sim = simulation(&dem, bc, backend, |_, _, _| CellState::default())?;
    Ok((sim, scaling.time_to_scaled(45.0)))
}

pub fn inflow_bookkeeping(backend: &Backend) -> Result<CheckResult> {
    let (mut sim, t_end) = channel_scenario(backend)?;
    sim.advance_to(t_end)?;
    let l = *sim.ledger();
    let injected: f64 = l.injected.iter().sum();
    let gain: f64 = (0..2).map(|k| l.current[k] - l.initial[k]).sum();
    let outflow: f64 = l.outflowed.iter().sum();
    let rel = (injected - gain - outflow).abs() / injected;
    let mut result = CheckResult::new(
        "inflow",
        rel,
        INFLOW_TOL,
        format!(
            "(injected {injected:.6e}, gain {gain:.6e}, outflow {outflow:.6e}, {} steps)",
            sim.steps()
        ),
    );
    if !(injected > 0.0) {
        result.passed = false;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("inflow".parse::<Suite>().unwrap(), Suite::Inflow);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn failing_check_reported() {
        let r = CheckResult::new("conservation", 1e-4, CONSERVATION_TOL, String::new());
        assert!(!r.passed);
        assert!(r.to_string().starts_with("FAIL conservation"));
    }

    #[test]
    fn small_scenarios_pass() {
        let b = Backend::serial();
        assert!(closed_basin(40, 50, &b).unwrap().passed);
        assert!(quiescence(16, 50, &b).unwrap().passed);
        assert!(symmetry(24, 20, &b).unwrap().passed);
    }
}

//! Fixed-step performance campaign over a synthetic incline release.
//!
//! Each mesh is a 1 km square domain inclined 10° along X with a paraboloid
//! release at the centre. Timings cover the step loop only (no setup, no
//! file I/O) and use a fixed dt so CFL dynamics do not change the amount of
//! work; the wave-speed reduction still runs every step as a guard.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel::{Backend, BackendConfig, BackendKind};
use crate::physics::{CellState, ModelParams};
use crate::scaling::ScalingConfig;
use crate::solver::{BoundaryCondition, MixtureState, Regularization, Simulation, Solver};
use crate::terrain::{compute_geometry, ElevationGrid};

pub const DEFAULT_MESHES: [usize; 6] = [10_000, 50_000, 100_000, 250_000, 500_000, 1_000_000];
pub const DEFAULT_STEPS: usize = 10_000;
pub const DEFAULT_REPEATS: usize = 3;

const DOMAIN: f64 = 1000.0;
const SLOPE_DEG: f64 = 10.0;
const CFL: f64 = 0.1;
/// Fraction of the initial CFL step used as the fixed dt.
const DT_FRACTION: f64 = 0.25;

/// Grid shape closest to `mesh_count` cells with near-square aspect.
pub fn grid_shape(mesh_count: usize) -> (usize, usize) {
    let nx = ((mesh_count as f64).sqrt().round() as usize).max(2);
    let ny = ((mesh_count as f64 / nx as f64).round() as usize).max(2);
    (nx, ny)
}

/// The synthetic incline case and its fixed scaled dt.
pub fn incline_release(mesh_count: usize, backend: Backend) -> Result<(Simulation, f64)> {
    let (nx, ny) = grid_shape(mesh_count);
    let cellsize = DOMAIN / nx as f64;
    let tan = SLOPE_DEG.to_radians().tan();
    let dem = ElevationGrid::from_fn(nx, ny, cellsize, |x, _| (DOMAIN - x) * tan);
    let scaling = ScalingConfig::default();
    let geom = compute_geometry(&dem, &scaling);
    let (xc, yc) = (0.5 * nx as f64 * cellsize, 0.5 * ny as f64 * cellsize);
    let radius = 0.1 * DOMAIN;
    let state = MixtureState::from_fn(&geom, |i, j| {
        let x = (i as f64 + 0.5) * cellsize - xc;
        let y = (j as f64 + 0.5) * cellsize - yc;
        let h = (5.0 * (1.0 - (x * x + y * y) / (radius * radius))).max(0.0);
        CellState {
            hs: 0.5 * h,
            hf: 0.5 * h,
            vs: [0.0; 2],
            vf: [0.0; 2],
        }
    });
    let solver = Solver::new(
        geom,
        ModelParams::standard(),
        Regularization::default(),
        BoundaryCondition::Open,
        CFL,
        backend,
    );
    let sim = Simulation::new(solver, state)?;
    let mut probe = sim.state().clone();
    sim.solver().apply_boundaries(&mut probe, 0.0)?;
    let lambda = sim.solver().max_wave_speed(&probe)?;
    let dt = DT_FRACTION * CFL * scaling.length_to_scaled(cellsize) / lambda;
    Ok((sim, dt))
}

/// Wall seconds for `steps` fixed steps of the incline case.
pub fn time_case(mesh_count: usize, steps: usize, backend: Backend) -> Result<f64> {
    let (mut sim, dt) = incline_release(mesh_count, backend)?;
    let start = Instant::now();
    for _ in 0..steps {
        sim.step_fixed(dt)?;
    }
    Ok(start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub mesh_count: usize,
    pub cells: usize,
    pub backend: BackendKind,
    pub lanes: usize,
    /// Mean wall seconds over the repeats.
    pub seconds: f64,
    /// Serial seconds of the same mesh count divided by `seconds`.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub steps: usize,
    pub repeats: usize,
    pub rows: Vec<BenchRow>,
}

/// One measured timing before speedups are known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub mesh_count: usize,
    pub cells: usize,
    pub backend: BackendKind,
    pub lanes: usize,
    pub seconds: f64,
}

impl BenchReport {
    /// Derives speedups from the timings' own serial rows.
    pub fn from_timings(steps: usize, repeats: usize, timings: &[Timing]) -> Result<Self> {
        let mut rows = Vec::with_capacity(timings.len());
        for t in timings {
            let serial = timings
                .iter()
                .find(|s| s.mesh_count == t.mesh_count && s.backend == BackendKind::Serial)
                .ok_or_else(|| Error::Config(format!("no serial timing for mesh count {}", t.mesh_count)))?;
            rows.push(BenchRow {
                mesh_count: t.mesh_count,
                cells: t.cells,
                backend: t.backend,
                lanes: t.lanes,
                seconds: t.seconds,
                speedup: serial.seconds / t.seconds,
            });
        }
        Ok(Self { steps, repeats, rows })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# synthetic {SLOPE_DEG} deg incline, centred release; fixed dt ({DT_FRACTION} x initial CFL step)"
        );
        let _ = writeln!(
            out,
            "# {} steps per run, mean of {} repeats, step loop only (no I/O)",
            self.steps, self.repeats
        );
        out.push_str("mesh_count,cells,backend,lanes,seconds,speedup\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.mesh_count, r.cells, r.backend, r.lanes, r.seconds, r.speedup
            );
        }
        out
    }

    pub fn row(&self, mesh_count: usize, backend: BackendKind) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.mesh_count == mesh_count && r.backend == backend)
    }
}

/// Times every mesh count on a serial backend plus each of `backends`.
pub fn run_bench(
    meshes: &[usize],
    steps: usize,
    repeats: usize,
    backends: &[BackendConfig],
    mut progress: impl FnMut(&Timing),
) -> Result<BenchReport> {
    if repeats == 0 || steps == 0 {
        return Err(Error::Config("bench needs at least one step and one repeat".into()));
    }
    let mut configs = vec![BackendConfig::serial()];
    configs.extend(backends.iter().filter(|c| c.kind != BackendKind::Serial).copied());
    let mut timings = Vec::new();
    for &mesh_count in meshes {
        let (nx, ny) = grid_shape(mesh_count);
        for cfg in &configs {
            let backend = Backend::new(*cfg)?;
            let mut total = 0.0;
            for _ in 0..repeats {
                total += time_case(mesh_count, steps, backend.clone())?;
            }
            let t = Timing {
                mesh_count,
                cells: nx * ny,
                backend: cfg.kind,
                lanes: cfg.lanes,
                seconds: total / repeats as f64,
            };
            progress(&t);
            timings.push(t);
        }
    }
    BenchReport::from_timings(steps, repeats, &timings)
}

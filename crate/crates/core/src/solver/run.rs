//! Host-side orchestration: load inputs, step in time, emit snapshots and a
//! mass-audited run report.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::asc::AscHeader;
use crate::io::hydrograph::load_hydrograph;
use crate::io::init::load_initial_state;
use crate::parallel::Backend;
use crate::scaling::ScalingConfig;
use crate::terrain::{compute_geometry, load_dem, ElevationGrid};

use super::boundary::BoundaryCondition;
use super::scheme::{Solver, StepReport};
use super::state::{regularize_state, MixtureState};
use super::{Mode, SimConfig};

/// Running per-phase mass balance, `[solid, fluid]`, scaled units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MassLedger {
    pub initial: [f64; 2],
    pub injected: [f64; 2],
    pub outflowed: [f64; 2],
    pub clipped: [f64; 2],
    pub current: [f64; 2],
}

impl MassLedger {
    /// `initial + injected − outflowed − current` per phase.
    pub fn audit(&self) -> [f64; 2] {
        std::array::from_fn(|k| self.initial[k] + self.injected[k] - self.outflowed[k] - self.current[k])
    }

    fn record(&mut self, step: &StepReport) {
        for k in 0..2 {
            self.injected[k] += step.inflow[k];
            self.outflowed[k] += step.outflow[k];
            self.clipped[k] += step.clipped[k];
        }
    }
}

/// Output fields at one time, physical units, south-to-north.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSnapshot {
    /// Seconds.
    pub t: f64,
    pub step_index: u64,
    pub ncols: usize,
    pub nrows: usize,
    /// Total thickness normal to the bed, metres.
    pub h: Vec<f64>,
    pub phi_s: Vec<f64>,
    pub vx_s: Vec<f64>,
    pub vy_s: Vec<f64>,
    pub vx_f: Vec<f64>,
    pub vy_f: Vec<f64>,
}

impl SimSnapshot {
    /// `(file prefix, values)` for each of the six fields.
    pub fn fields(&self) -> [(&'static str, &[f64]); 6] {
        [
            ("h", &self.h),
            ("phis", &self.phi_s),
            ("vxs", &self.vx_s),
            ("vys", &self.vy_s),
            ("vxf", &self.vx_f),
            ("vyf", &self.vy_f),
        ]
    }
}

/// Per-phase volumes in m³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseBudget {
    pub initial: f64,
    pub injected: f64,
    pub outflowed: f64,
    pub clipped: f64,
    #[serde(rename = "final")]
    pub final_: f64,
    pub audit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub steps: u64,
    pub wall_seconds: f64,
    pub t_end: f64,
    pub snapshots: usize,
    pub backend: String,
    pub lanes: usize,
    pub solid: PhaseBudget,
    pub fluid: PhaseBudget,
    /// Sum of both phase audits, m³.
    pub mass_audit: f64,
    /// Sum of both phases' clipped volume, m³.
    pub clipped_total: f64,
    /// Largest `dt · λ_max / min(Δ)` over all steps.
    pub max_courant: f64,
}

/// Simulation state plus clock and mass ledger.
#[derive(Debug)]
pub struct Simulation {
    solver: Solver,
    state: MixtureState,
    t: f64,
    steps: u64,
    ledger: MassLedger,
    max_courant: f64,
}

impl Simulation {
    /// Regularises `state` and records its mass as the initial budget.
    pub fn new(solver: Solver, mut state: MixtureState) -> Result<Self> {
        let clipped = regularize_state(&mut state, &solver.geom, &solver.reg)?;
        let masses = state.masses();
        Ok(Self {
            solver,
            state,
            t: 0.0,
            steps: 0,
            ledger: MassLedger {
                initial: masses,
                clipped,
                current: masses,
                ..Default::default()
            },
            max_courant: 0.0,
        })
    }

    /// Loads DEM and mode inputs named by `config`.
    pub fn from_config(config: &SimConfig, backend: Backend) -> Result<(ElevationGrid, Self)> {
        config.validate()?;
        let dem = load_dem(&config.dem)?;
        let geom = compute_geometry(&dem, &config.scaling);
        let (state, bc) = match &config.mode {
            Mode::FiniteRelease { init, velocity } => {
                let vel = velocity.as_ref().map(|(x, y)| (x.as_path(), y.as_path()));
                let state = load_initial_state(init, vel, &dem, &geom, &config.params, &config.scaling)?;
                (state, BoundaryCondition::Open)
            }
            Mode::InflowHydrograph { hydrograph } => {
                let hydro = load_hydrograph(hydrograph, dem.ncols(), dem.nrows())?;
                (
                    MixtureState::zeros(geom.mesh),
                    BoundaryCondition::inflow(&hydro, &config.scaling),
                )
            }
        };
        let solver = Solver::new(geom, config.params, config.reg, bc, config.cfl, backend);
        Ok((dem, Self::new(solver, state)?))
    }

    /// Scaled time.
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn state(&self) -> &MixtureState {
        &self.state
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn ledger(&self) -> &MassLedger {
        &self.ledger
    }

    pub fn max_courant(&self) -> f64 {
        self.max_courant
    }

    /// One CFL-limited step that does not pass scaled time `t_target`; the
    /// target is hit exactly when reachable.
    pub fn step_toward(&mut self, t_target: f64) -> Result<StepReport> {
        self.solver.apply_boundaries(&mut self.state, self.t)?;
        let remaining = t_target - self.t;
        let (dt, lambda) = self.solver.compute_dt(&self.state, self.t, remaining)?;
        let report = self.commit_step(dt, lambda)?;
        self.t = if dt >= remaining { t_target } else { self.t + dt };
        Ok(report)
    }

    /// One step of prescribed size. Fails if `dt` breaks the CFL bound.
    pub fn step_fixed(&mut self, dt: f64) -> Result<StepReport> {
        self.solver.apply_boundaries(&mut self.state, self.t)?;
        let inflow = self.solver.bc.max_inflow_speed(self.t, self.t + dt, self.solver.params.epsilon);
        let lambda = self.solver.max_wave_speed(&self.state)?.max(inflow);
        let mesh = self.solver.mesh();
        let limit = self.solver.cfl * mesh.dx.min(mesh.dy);
        if dt * lambda > limit + 1e-15 {
            return Err(Error::CflViolation {
                dt,
                limit: limit / lambda,
            });
        }
        let report = self.commit_step(dt, lambda)?;
        self.t += dt;
        Ok(report)
    }

    fn commit_step(&mut self, dt: f64, lambda: f64) -> Result<StepReport> {
        let mut report = self.solver.advance(&mut self.state, self.t, dt)?;
        report.lambda_max = lambda;
        let mesh = self.solver.mesh();
        self.max_courant = self.max_courant.max(dt * lambda / mesh.dx.min(mesh.dy));
        self.ledger.record(&report);
        self.ledger.current = self.state.masses();
        self.steps += 1;
        Ok(report)
    }

    /// Steps until scaled time `t_target`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            self.step_toward(t_target)?;
        }
        Ok(())
    }

    /// Output fields at the current state, labelled with `t_seconds`.
    pub fn snapshot(&self, scaling: &ScalingConfig, t_seconds: f64) -> SimSnapshot {
        let mesh = self.state.mesh;
        let prims = self.state.primitives(&self.solver.geom, &self.solver.reg);
        let n = prims.len();
        let mut snap = SimSnapshot {
            t: t_seconds,
            step_index: self.steps,
            ncols: mesh.nx,
            nrows: mesh.ny,
            h: Vec::with_capacity(n),
            phi_s: Vec::with_capacity(n),
            vx_s: Vec::with_capacity(n),
            vy_s: Vec::with_capacity(n),
            vx_f: Vec::with_capacity(n),
            vy_f: Vec::with_capacity(n),
        };
        let h_dry = self.solver.reg.h_dry;
        let vel = |v: f64| scaling.velocity_to_physical(v);
        for s in &prims {
            let h = s.h();
            let wet = h >= h_dry;
            snap.h.push(if wet { scaling.thickness_to_physical(h) } else { 0.0 });
            snap.phi_s.push(if wet { (s.hs / h).clamp(0.0, 1.0) } else { 0.0 });
            snap.vx_s.push(if wet { vel(s.vs[0]) } else { 0.0 });
            snap.vy_s.push(if wet { vel(s.vs[1]) } else { 0.0 });
            snap.vx_f.push(if wet { vel(s.vf[0]) } else { 0.0 });
            snap.vy_f.push(if wet { vel(s.vf[1]) } else { 0.0 });
        }
        snap
    }

    pub fn report(&self, scaling: &ScalingConfig, wall_seconds: f64, t_end: f64, snapshots: usize) -> RunReport {
        let l = &self.ledger;
        let audit = l.audit();
        let vol = |x: f64| scaling.volume_to_physical(x);
        let budget = |k: usize| PhaseBudget {
            initial: vol(l.initial[k]),
            injected: vol(l.injected[k]),
            outflowed: vol(l.outflowed[k]),
            clipped: vol(l.clipped[k]),
            final_: vol(l.current[k]),
            audit: vol(audit[k]),
        };
        let cfg = self.solver.backend().config();
        RunReport {
            steps: self.steps,
            wall_seconds,
            t_end,
            snapshots,
            backend: cfg.kind.to_string(),
            lanes: cfg.lanes,
            solid: budget(0),
            fluid: budget(1),
            mass_audit: vol(audit[0] + audit[1]),
            clipped_total: vol(l.clipped[0] + l.clipped[1]),
            max_courant: self.max_courant,
        }
    }
}

/// Runs `config` to `t_end`, handing each snapshot and the DEM header to
/// `on_snapshot` (which typically writes files).
pub fn run_simulation<F>(config: &SimConfig, backend: Backend, mut on_snapshot: F) -> Result<RunReport>
where
    F: FnMut(&SimSnapshot, &AscHeader) -> Result<()>,
{
    let start = Instant::now();
    let (dem, mut sim) = Simulation::from_config(config, backend)?;
    let times = config.output_times();
    for &t_out in &times {
        sim.advance_to(config.scaling.time_to_scaled(t_out))?;
        on_snapshot(&sim.snapshot(&config.scaling, t_out), &dem.header)?;
    }
    Ok(sim.report(&config.scaling, start.elapsed().as_secs_f64(), config.t_end, times.len()))
}

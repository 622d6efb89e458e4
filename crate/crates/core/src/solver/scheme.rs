//! Semi-discrete central finite-volume scheme.
//!
//! Cell averages of `(J h^s, q^s, J h^f, q^f)` live on a fixed grid. Face
//! values come from a Minmod-limited linear reconstruction of the phase
//! masses and velocities; the numerical flux is the central (local
//! Lax-Friedrichs type) flux with local speed bounds. Time integration is
//! the two-stage modified Euler (Heun) method. Coulomb basal friction is
//! applied after each stage with a cap so it can stop, but never reverse, the
//! solid motion.
//!
//! Every pass is a pure per-cell kernel run through the [`Backend`]; the
//! only cross-cell reductions (CFL maximum, mass bookkeeping) are done in a
//! fixed order, so results do not depend on the lane count.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, GHOST};
use crate::parallel::Backend;
use crate::physics::{
    coulomb_magnitude_tan, curvature_accel, hydrostatic_terms, momentum_sources_tan, phase_fluxes,
    viscous_stresses, wave_speed_bound, CellState, ModelParams, Phase, SourceGradients, COULOMB_SPEED_FLOOR,
};
use crate::terrain::{CellGeometry, TerrainGeometry};

use super::boundary::{apply_boundaries, BoundaryCondition};
use super::state::{interior_coords, Conserved, MixtureState, Regularization, FIELD_NAMES};

/// Minmod: the smaller-magnitude argument when both share a sign, else 0.
#[inline]
pub fn limited_slope(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

/// Mass exchanged through the domain boundary and clipped during one step,
/// per phase, in scaled mass units.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// Global wave-speed bound the step was sized against.
    pub lambda_max: f64,
    pub inflow: [f64; 2],
    pub outflow: [f64; 2],
    pub clipped: [f64; 2],
}

#[derive(Debug, Clone, Copy, Default)]
struct StageCell {
    u: Conserved,
    clipped: [f64; 2],
    /// Coulomb impulse `dt · |s_d^s|` evaluated at the stage input.
    impulse: f64,
    /// Solid momentum of the update before the Coulomb cap.
    free_qs: [f64; 2],
    fault: Fault,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
enum Fault {
    #[default]
    None,
    NonFinite(usize),
    Negative(usize, f64),
}

#[derive(Debug, Default)]
struct Scratch {
    prim: Vec<CellState>,
    slopes: Vec<[[f64; 6]; 2]>,
    xflux: Vec<[f64; 6]>,
    yflux: Vec<[f64; 6]>,
    visc: Vec<[f64; 3]>,
    stage: Vec<StageCell>,
    base: Vec<Conserved>,
    /// Stage-1 `(impulse, free_qs)`, reused by the final combination.
    coulomb: Vec<(f64, [f64; 2])>,
}

/// Advances a [`MixtureState`] on fixed terrain.
#[derive(Debug)]
pub struct Solver {
    pub geom: TerrainGeometry,
    pub params: ModelParams,
    pub reg: Regularization,
    pub bc: BoundaryCondition,
    pub cfl: f64,
    backend: Backend,
    scratch: Scratch,
}

impl Solver {
    pub fn new(
        geom: TerrainGeometry,
        params: ModelParams,
        reg: Regularization,
        bc: BoundaryCondition,
        cfl: f64,
        backend: Backend,
    ) -> Self {
        Self {
            geom,
            params,
            reg,
            bc,
            cfl,
            backend,
            scratch: Scratch::default(),
        }
    }

    pub fn mesh(&self) -> Mesh {
        self.geom.mesh
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn apply_boundaries(&self, state: &mut MixtureState, t: f64) -> Result<()> {
        apply_boundaries(state, &self.geom, &self.bc, t)
    }

    /// Global maximum of the wave-speed bound over all cells, ghosts included.
    /// Expects filled ghost layers.
    pub fn max_wave_speed(&self, state: &MixtureState) -> Result<f64> {
        let geom = &self.geom;
        let reg = &self.reg;
        let params = &self.params;
        let lam = self.backend.map_reduce_max(state.cells.len(), |k| {
            let g = geom.at(k);
            let s = reg.primitive(&state.cells[k], g);
            let (lx, ly) = wave_speed_bound(&s, g, params);
            lx.max(ly)
        })?;
        if !lam.is_finite() {
            let k = state
                .cells
                .iter()
                .position(|u| !u.to_array().iter().all(|v| v.is_finite()))
                .unwrap_or(0);
            let (i, j) = interior_coords(&state.mesh, k);
            return Err(Error::NonFinite { field: "wave speed", i, j });
        }
        Ok(lam)
    }

    /// CFL-limited step at time `t`, truncated so that `remaining` (time to
    /// the next output) is hit exactly. Returns `(dt, λ_max)`; `λ_max` also
    /// covers inflow states prescribed during the step. A dry domain with no
    /// inflow steps straight to the output.
    pub fn compute_dt(&self, state: &MixtureState, t: f64, remaining: f64) -> Result<(f64, f64)> {
        let spacing = self.mesh().dx.min(self.mesh().dy);
        let eps = self.params.epsilon;
        let first = self.max_wave_speed(state)?.max(self.bc.max_inflow_speed(t, t, eps));
        let trial = cfl_step(self.cfl, spacing, first, remaining);
        let lambda = first.max(self.bc.max_inflow_speed(t, t + trial, eps));
        Ok((cfl_step(self.cfl, spacing, lambda, remaining), lambda))
    }

    /// One Heun step of size `dt` from time `t`.
    pub fn advance(&mut self, state: &mut MixtureState, t: f64, dt: f64) -> Result<StepReport> {
        let mut report = StepReport {
            dt,
            ..Default::default()
        };
        let n = state.cells.len();
        self.scratch.base.clear();
        self.scratch.base.extend_from_slice(&state.cells);

        apply_boundaries(state, &self.geom, &self.bc, t)?;
        self.stage(state, dt, false)?;
        let ex1 = self.boundary_exchange(dt);
        let c1 = self.commit(state)?;
        let sc = &mut self.scratch;
        sc.coulomb.clear();
        sc.coulomb.extend(sc.stage.iter().map(|c| (c.impulse, c.free_qs)));

        apply_boundaries(state, &self.geom, &self.bc, t + dt)?;
        self.stage(state, dt, true)?;
        let ex2 = self.boundary_exchange(dt);
        let c2 = self.commit(state)?;

        for k in 0..2 {
            report.inflow[k] = 0.5 * (ex1.0[k] + ex2.0[k]);
            report.outflow[k] = 0.5 * (ex1.1[k] + ex2.1[k]);
            report.clipped[k] = 0.5 * c1[k] + c2[k];
        }
        debug_assert_eq!(state.cells.len(), n);
        Ok(report)
    }

    /// Computes one stage into `scratch.stage`. With `average`, the result is
    /// the Heun combination `½(U^n + U¹ + dt R(U¹))`, with the Coulomb term
    /// applied once to the combination as a capped trapezoidal impulse.
    fn stage(&mut self, state: &MixtureState, dt: f64, average: bool) -> Result<()> {
        let mesh = self.geom.mesh;
        let n = mesh.padded_len();
        let sc = &mut self.scratch;
        sc.prim.resize(n, CellState::default());
        sc.slopes.resize(n, [[0.0; 6]; 2]);
        sc.xflux.resize(n, [0.0; 6]);
        sc.yflux.resize(n, [0.0; 6]);
        sc.visc.resize(n, [0.0; 3]);
        sc.stage.resize(n, StageCell::default());

        let geom = &self.geom;
        let params = &self.params;
        let reg = &self.reg;
        let cells = &state.cells;

        self.backend.fill(&mut sc.prim, |k| reg.primitive(&cells[k], geom.at(k)));

        let prim = &sc.prim;
        let stride = mesh.stride();
        let (x_lo, x_hi) = (GHOST - 1, GHOST + mesh.nx - 1);
        let (y_lo, y_hi) = (GHOST - 1, GHOST + mesh.ny - 1);

        self.backend.fill(&mut sc.slopes, |k| {
            let (pi, pj) = mesh.coords(k);
            if pi < x_lo || pi > x_hi + 1 || pj < y_lo || pj > y_hi + 1 {
                return [[0.0; 6]; 2];
            }
            [cell_slopes(prim, geom, k, 1), cell_slopes(prim, geom, k, stride)]
        });
        let slopes = &sc.slopes;

        self.backend.fill(&mut sc.xflux, |k| {
            let (pi, pj) = mesh.coords(k);
            if pi < x_lo || pi > x_hi || pj < GHOST || pj >= GHOST + mesh.ny {
                return [0.0; 6];
            }
            face_flux(prim, slopes, geom, params, k, 1, 0)
        });
        self.backend.fill(&mut sc.yflux, |k| {
            let (pi, pj) = mesh.coords(k);
            if pj < y_lo || pj > y_hi || pi < GHOST || pi >= GHOST + mesh.nx {
                return [0.0; 6];
            }
            face_flux(prim, slopes, geom, params, k, stride, 1)
        });
        let (dx, dy) = (mesh.dx, mesh.dy);
        self.backend.fill(&mut sc.visc, |k| {
            let (pi, pj) = mesh.coords(k);
            if pi < x_lo || pi > x_hi + 1 || pj < y_lo || pj > y_hi + 1 {
                return [0.0; 3];
            }
            let grad = |f: &dyn Fn(&CellState) -> f64| {
                let c = f(&prim[k]);
                [
                    limited_slope((f(&prim[k + 1]) - c) / dx, (c - f(&prim[k - 1])) / dx),
                    limited_slope((f(&prim[k + stride]) - c) / dy, (c - f(&prim[k - stride])) / dy),
                ]
            };
            let gx = grad(&|s| s.vf[0]);
            let gy = grad(&|s| s.vf[1]);
            viscous_stresses(geom.at(k), prim[k].h(), gx, gy)
        });

        let xflux = &sc.xflux;
        let yflux = &sc.yflux;
        let visc = &sc.visc;
        let base = &sc.base;
        let stage1 = &sc.coulomb;
        let tan_delta = params.tan_delta();
        self.backend.fill(&mut sc.stage, |k| {
            let (pi, pj) = mesh.coords(k);
            if !mesh.is_interior(pi, pj) {
                return StageCell {
                    u: cells[k],
                    ..Default::default()
                };
            }
            let g = geom.at(k);
            let s = &prim[k];
            let kappa_s = curvature_accel(g, s.vs);
            let kappa_f = curvature_accel(g, s.vf);
            let terms = hydrostatic_terms(s, g, params, kappa_s, kappa_f);

            let pressure = |m: usize| {
                let h = prim[m].h();
                geom.at(m).jac * h * (geom.at(m).c() * h / 2.0)
            };
            let grads = SourceGradients {
                pressure: [
                    (pressure(k + 1) - pressure(k - 1)) / (2.0 * dx),
                    (pressure(k + stride) - pressure(k - stride)) / (2.0 * dy),
                ],
                viscous: [
                    2.0 * (visc[k + 1][0] - visc[k - 1][0]) / (2.0 * dx)
                        + (visc[k + stride][1] - visc[k - stride][1]) / (2.0 * dy),
                    2.0 * (visc[k + stride][2] - visc[k - stride][2]) / (2.0 * dy)
                        + (visc[k + 1][1] - visc[k - 1][1]) / (2.0 * dx),
                ],
            };
            let src = momentum_sources_tan(s, g, params, tan_delta, &terms, &grads);
            let s_sol = src.solid_without_coulomb();
            let s_flu = src.fluid();
            let source = [0.0, s_sol[0], s_sol[1], 0.0, s_flu[0], s_flu[1]];

            let u = cells[k].to_array();
            let mut next = [0.0; 6];
            for c in 0..6 {
                let div = (xflux[k][c] - xflux[k - 1][c]) / dx + (yflux[k][c] - yflux[k - stride][c]) / dy;
                next[c] = u[c] + dt * (source[c] - div);
            }
            if let Some(c) = next.iter().position(|v| !v.is_finite()) {
                return StageCell {
                    u: cells[k],
                    fault: Fault::NonFinite(c),
                    ..Default::default()
                };
            }
            let impulse = dt * coulomb_magnitude_tan(g, tan_delta, &terms);
            let free_qs = [next[1], next[2]];
            let mut out = if average {
                // U¹ holds the capped stage-1 momentum; rebuild the combination
                // from the uncapped one so friction is applied exactly once.
                let b = base[k].to_array();
                let (impulse1, free1) = stage1[k];
                let mut avg = Conserved::from_array(std::array::from_fn(|c| 0.5 * (b[c] + next[c])));
                for d in 0..2 {
                    avg.qs[d] += 0.5 * (free1[d] - u[1 + d]);
                }
                avg.qs = capped_coulomb(avg.qs, avg.ms, 0.5 * (impulse1 + impulse));
                avg
            } else {
                let mut out = Conserved::from_array(next);
                out.qs = capped_coulomb(out.qs, out.ms, impulse);
                out
            };
            match reg.regularize_cell(&mut out, g.jac) {
                Ok(clipped) => StageCell {
                    u: out,
                    clipped,
                    impulse,
                    free_qs,
                    fault: Fault::None,
                },
                Err((field, value)) => StageCell {
                    u: out,
                    clipped: [0.0; 2],
                    impulse,
                    free_qs,
                    fault: Fault::Negative(field, value),
                },
            }
        });
        Ok(())
    }

    /// Mass crossing the outer faces during the current stage, as
    /// (inflow, outflow) per phase.
    fn boundary_exchange(&self, dt: f64) -> ([f64; 2], [f64; 2]) {
        let mesh = self.geom.mesh;
        let sc = &self.scratch;
        let mut inflow = [0.0; 2];
        let mut outflow = [0.0; 2];
        let mut tally = |flux: &[f64; 6], length: f64, inward_sign: f64| {
            for (k, c) in [0usize, 3].into_iter().enumerate() {
                let f = inward_sign * flux[c] * length * dt;
                if f > 0.0 {
                    inflow[k] += f;
                } else {
                    outflow[k] -= f;
                }
            }
        };
        for j in 0..mesh.ny {
            let pj = j + GHOST;
            tally(&sc.xflux[mesh.idx(GHOST - 1, pj)], mesh.dy, 1.0);
            tally(&sc.xflux[mesh.idx(GHOST + mesh.nx - 1, pj)], mesh.dy, -1.0);
        }
        for i in 0..mesh.nx {
            let pi = i + GHOST;
            tally(&sc.yflux[mesh.idx(pi, GHOST - 1)], mesh.dx, 1.0);
            tally(&sc.yflux[mesh.idx(pi, GHOST + mesh.ny - 1)], mesh.dx, -1.0);
        }
        (inflow, outflow)
    }

    /// Copies the stage result into `state`, surfacing the first fault.
    fn commit(&self, state: &mut MixtureState) -> Result<[f64; 2]> {
        let mesh = self.geom.mesh;
        let mut clipped = [0.0; 2];
        for k in mesh.interior_indices() {
            let cell = &self.scratch.stage[k];
            let (i, j) = interior_coords(&mesh, k);
            match cell.fault {
                Fault::None => {}
                Fault::NonFinite(c) => {
                    return Err(Error::NonFinite {
                        field: FIELD_NAMES[c],
                        i,
                        j,
                    })
                }
                Fault::Negative(c, value) => {
                    return Err(Error::NegativeThickness {
                        field: FIELD_NAMES[c],
                        value,
                        i,
                        j,
                    })
                }
            }
            clipped[0] += cell.clipped[0];
            clipped[1] += cell.clipped[1];
            state.cells[k] = cell.u;
        }
        let area = mesh.cell_area();
        Ok([clipped[0] * area, clipped[1] * area])
    }
}

/// `dt = cfl · Δ / λ_max`, truncated to `remaining`; a dry domain (λ = 0)
/// steps straight to `remaining`.
pub fn cfl_step(cfl: f64, spacing: f64, lambda_max: f64, remaining: f64) -> f64 {
    if lambda_max <= 0.0 {
        return remaining;
    }
    (cfl * spacing / lambda_max).min(remaining)
}

/// Removes a Coulomb impulse of size `impulse` from momentum `q` (with phase
/// mass `m`), stopping the phase instead of reversing it.
#[inline]
pub fn capped_coulomb(q: [f64; 2], m: f64, impulse: f64) -> [f64; 2] {
    if impulse <= 0.0 {
        return q;
    }
    let norm = (q[0] * q[0] + q[1] * q[1]).sqrt();
    let denom = norm.max(COULOMB_SPEED_FLOOR * m);
    if denom <= 0.0 {
        return [0.0; 2];
    }
    let factor = 1.0 - impulse / denom;
    if factor <= 0.0 {
        [0.0; 2]
    } else {
        [q[0] * factor, q[1] * factor]
    }
}

/// Reconstructed variables: phase masses `J h` and velocity components.
#[inline]
fn recon_vars(s: &CellState, jac: f64) -> [f64; 6] {
    [jac * s.hs, jac * s.hf, s.vs[0], s.vs[1], s.vf[0], s.vf[1]]
}

/// Minmod-limited undivided slopes of cell `k` along `step`.
#[inline]
fn cell_slopes(prim: &[CellState], geom: &TerrainGeometry, k: usize, step: usize) -> [f64; 6] {
    let c = recon_vars(&prim[k], geom.at(k).jac);
    let lo = recon_vars(&prim[k - step], geom.at(k - step).jac);
    let hi = recon_vars(&prim[k + step], geom.at(k + step).jac);
    std::array::from_fn(|m| limited_slope(c[m] - lo[m], hi[m] - c[m]))
}

/// Face state of a cell toward `+step` (`side = 1`) or `-step` (`side = -1`).
#[inline]
fn face_state(s: &CellState, jac: f64, slope: &[f64; 6], side: f64) -> CellState {
    let w = recon_vars(s, jac);
    let f: [f64; 6] = std::array::from_fn(|m| w[m] + side * 0.5 * slope[m]);
    CellState {
        hs: f[0] / jac,
        hf: f[1] / jac,
        vs: [f[2], f[3]],
        vf: [f[4], f[5]],
    }
}

/// Physical flux, conserved vector and speed bound of a one-sided face state
/// along direction `dir` (0 = ξ, 1 = η).
#[inline]
fn directional(s: &CellState, g: &CellGeometry, params: &ModelParams, dir: usize) -> ([f64; 6], [f64; 6], f64) {
    let terms = hydrostatic_terms(s, g, params, 0.0, 0.0);
    let ms = g.jac * s.hs;
    let mf = g.jac * s.hf;
    let (fs, gs) = phase_fluxes(s, g, params, &terms, Phase::Solid);
    let (ff, gf) = phase_fluxes(s, g, params, &terms, Phase::Fluid);
    let (ps, pf) = if dir == 0 { (fs, ff) } else { (gs, gf) };
    let flux = [ms * s.vs[dir], ps[0], ps[1], mf * s.vf[dir], pf[0], pf[1]];
    let cons = [ms, ms * s.vs[0], ms * s.vs[1], mf, mf * s.vf[0], mf * s.vf[1]];
    let (lx, ly) = wave_speed_bound(s, g, params);
    (flux, cons, if dir == 0 { lx } else { ly })
}

/// Central flux through the face between cell `k` and `k + step`.
#[inline]
fn face_flux(
    prim: &[CellState],
    slopes: &[[[f64; 6]; 2]],
    geom: &TerrainGeometry,
    params: &ModelParams,
    k: usize,
    step: usize,
    dir: usize,
) -> [f64; 6] {
    let left = face_state(&prim[k], geom.at(k).jac, &slopes[k][dir], 1.0);
    let right = face_state(&prim[k + step], geom.at(k + step).jac, &slopes[k + step][dir], -1.0);
    let (fl, ul, al) = directional(&left, geom.at(k), params, dir);
    let (fr, ur, ar) = directional(&right, geom.at(k + step), params, dir);
    let a = al.max(ar);
    std::array::from_fn(|c| 0.5 * (fl[c] + fr[c]) - 0.5 * a * (ur[c] - ul[c]))
}

/// One Heun step of passive advection of a scalar `w` (padded layout) with a
/// frozen uniform velocity, using the same reconstruction and central flux as
/// the model. Zero-gradient ghosts. Diagnostic for the non-oscillatory
/// property.
pub fn advect_scalar(mesh: &Mesh, w: &mut [f64], velocity: [f64; 2], dt: f64) {
    let stride = mesh.stride();
    let fill_ghosts = |w: &mut [f64]| {
        for pj in 0..mesh.rows() {
            for pi in 0..stride {
                if !mesh.is_interior(pi, pj) {
                    let (ci, cj) = mesh.clamp_interior(pi, pj);
                    w[mesh.idx(pi, pj)] = w[mesh.idx(ci, cj)];
                }
            }
        }
    };
    let rhs = |w: &[f64]| -> Vec<f64> {
        let face = |k: usize, step: usize, u: f64| {
            let lin = |c: usize, side: f64| w[c] + side * 0.5 * limited_slope(w[c] - w[c - step], w[c + step] - w[c]);
            let (l, r) = (lin(k, 1.0), lin(k + step, -1.0));
            0.5 * u * (l + r) - 0.5 * u.abs() * (r - l)
        };
        let mut out = vec![0.0; w.len()];
        for k in mesh.interior_indices() {
            out[k] = -(face(k, 1, velocity[0]) - face(k - 1, 1, velocity[0])) / mesh.dx
                - (face(k, stride, velocity[1]) - face(k - stride, stride, velocity[1])) / mesh.dy;
        }
        out
    };
    fill_ghosts(w);
    let base = w.to_vec();
    let r0 = rhs(w);
    for k in mesh.interior_indices() {
        w[k] += dt * r0[k];
    }
    fill_ghosts(w);
    let r1 = rhs(w);
    for k in mesh.interior_indices() {
        w[k] = 0.5 * (base[k] + w[k] + dt * r1[k]);
    }
}

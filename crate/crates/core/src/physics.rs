//! Per-cell algebraic terms of the two-phase depth-averaged model:
//! pressures, fluxes, momentum sources, curvature and wave-speed bounds.
//!
//! Everything here is a pure function of one cell's state and geometry (plus
//! neighbour gradients supplied by the solver). Variables are scaled; `h` is
//! thickness normal to the bed and velocities are horizontal projections,
//! which with projection-aligned axes are also the ξ/η components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::terrain::CellGeometry;

/// Lower bound on |v| used when normalising the Coulomb friction direction.
pub const COULOMB_SPEED_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Basal friction angle δ_b [degrees].
    pub delta_b: f64,
    /// Inter-phase drag coefficient c_D.
    pub c_d: f64,
    /// Viscosity number N_R.
    pub n_r: f64,
    /// Fluid basal friction coefficient ϑ_b.
    pub theta_b: f64,
    /// Initial / inflow solid fraction φ^s_0.
    pub phi_s0: f64,
    /// Density ratio ρ^f/ρ^s.
    pub alpha_rho: f64,
    /// Aspect ratio ε.
    pub epsilon: f64,
    /// Exponent on ε in the curvature term.
    pub chi: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::standard()
    }
}

impl ModelParams {
    /// Default debris parameters: δ_b = 16°, c_D = 6, N_R = 268, ϑ_b = 5,
    /// φ^s_0 = 0.5, with α_ρ = 0.4, ε = 1 and χ = 1.
    pub fn standard() -> Self {
        Self {
            delta_b: 16.0,
            c_d: 6.0,
            n_r: 268.0,
            theta_b: 5.0,
            phi_s0: 0.5,
            alpha_rho: 0.4,
            epsilon: 1.0,
            chi: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Config(what));
        if !(0.0..90.0).contains(&self.delta_b) {
            return bad(format!("delta_b must be in [0, 90) degrees, got {}", self.delta_b));
        }
        if !(self.c_d >= 0.0 && self.c_d.is_finite()) {
            return bad(format!("C_d must be >= 0, got {}", self.c_d));
        }
        if !(self.n_r > 0.0 && self.n_r.is_finite()) {
            return bad(format!("N_R must be > 0, got {}", self.n_r));
        }
        if !(self.theta_b >= 0.0 && self.theta_b.is_finite()) {
            return bad(format!("theta_b must be >= 0, got {}", self.theta_b));
        }
        if !(0.0..=1.0).contains(&self.phi_s0) {
            return bad(format!("phi_s0 must be in [0, 1], got {}", self.phi_s0));
        }
        if !(self.alpha_rho > 0.0 && self.alpha_rho <= 1.0) {
            return bad(format!("alpha_rho must be in (0, 1], got {}", self.alpha_rho));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !self.chi.is_finite() {
            return bad(format!("chi must be finite, got {}", self.chi));
        }
        Ok(())
    }

    pub fn tan_delta(&self) -> f64 {
        self.delta_b.to_radians().tan()
    }

    pub fn eps_chi(&self) -> f64 {
        if self.chi == 1.0 {
            return self.epsilon;
        }
        self.epsilon.powf(self.chi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Solid,
    Fluid,
}

/// Primitive state of one cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellState {
    /// h^s = h φ^s.
    pub hs: f64,
    /// h^f = h φ^f.
    pub hf: f64,
    /// Solid velocity (v_X, v_Y).
    pub vs: [f64; 2],
    /// Fluid velocity (v_X, v_Y).
    pub vf: [f64; 2],
}

impl CellState {
    #[inline]
    pub fn h(&self) -> f64 {
        self.hs + self.hf
    }

    #[inline]
    pub fn phi_s(&self) -> f64 {
        let h = self.h();
        if h > 0.0 {
            self.hs / h
        } else {
            0.0
        }
    }

    #[inline]
    pub fn phi_f(&self) -> f64 {
        let h = self.h();
        if h > 0.0 {
            self.hf / h
        } else {
            0.0
        }
    }

    #[inline]
    pub fn phase(&self, phase: Phase) -> (f64, [f64; 2]) {
        match phase {
            Phase::Solid => (self.hs, self.vs),
            Phase::Fluid => (self.hf, self.vf),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTerms {
    /// Depth-averaged solid pressure N̄^s.
    pub n_bar_s: f64,
    /// Mean fluid pressure p̄^f.
    pub p_bar_f: f64,
    /// Solid basal pressure p_b^s (clamped at 0).
    pub p_b_s: f64,
    /// Fluid basal pressure p_b^f (clamped at 0).
    pub p_b_f: f64,
    pub kappa_s: f64,
    pub kappa_f: f64,
}

pub fn hydrostatic_terms(
    state: &CellState,
    geom: &CellGeometry,
    params: &ModelParams,
    kappa_s: f64,
    kappa_f: f64,
) -> PhaseTerms {
    let c = geom.c();
    let buoyant = c * (1.0 - params.alpha_rho);
    let ec = params.eps_chi();
    PhaseTerms {
        n_bar_s: buoyant * state.hs / 2.0,
        p_bar_f: c * state.h() / 2.0,
        p_b_s: (state.hs * (buoyant - ec * kappa_s)).max(0.0),
        p_b_f: (state.hf * (c - ec * kappa_f)).max(0.0),
        kappa_s,
        kappa_f,
    }
}

/// Centripetal acceleration from basal curvature for a phase moving with
/// horizontal velocity `v`; the vertical component follows from tangency.
pub fn curvature_accel(geom: &CellGeometry, v: [f64; 2]) -> f64 {
    let [nx, ny, nz] = geom.n;
    let vz = -(nx * v[0] + ny * v[1]) / nz;
    let v3 = [v[0], v[1], vz];
    let along = |dn: &[f64; 3]| v3[0] * dn[0] + v3[1] * dn[1] + v3[2] * dn[2];
    along(&geom.dn_dxi) * v[0] + along(&geom.dn_deta) * v[1]
}

/// Momentum fluxes (F, G) of one phase. Each is a 2-vector over the X/Y
/// momentum components.
pub fn phase_fluxes(
    state: &CellState,
    geom: &CellGeometry,
    params: &ModelParams,
    terms: &PhaseTerms,
    phase: Phase,
) -> ([f64; 2], [f64; 2]) {
    let (hk, v) = state.phase(phase);
    let pressure = match phase {
        Phase::Solid => terms.n_bar_s,
        Phase::Fluid => terms.p_bar_f,
    };
    let jac = geom.jac;
    let adv = jac * hk;
    let p = params.epsilon * jac * state.h() * pressure;
    let a = &geom.a;
    let f = [adv * v[0] * v[0] + p * a[0][0], adv * v[1] * v[0] + p * a[0][1]];
    let g = [adv * v[0] * v[1] + p * a[1][0], adv * v[1] * v[1] + p * a[1][1]];
    (f, g)
}

/// Neighbour-derived inputs of the momentum sources.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SourceGradients {
    /// (∂/∂ξ, ∂/∂η) of J_b h p̄^f.
    pub pressure: [f64; 2],
    /// Divergence part of the viscous term, (s_vis,X, s_vis,Y) before the
    /// ε φ^f / N_R factor.
    pub viscous: [f64; 2],
}

/// Individual momentum source vectors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentumSources {
    pub normal_s: [f64; 2],
    pub coulomb_s: [f64; 2],
    pub pressure_s: [f64; 2],
    pub drag_s: [f64; 2],
    pub normal_f: [f64; 2],
    pub friction_f: [f64; 2],
    pub pressure_f: [f64; 2],
    pub drag_f: [f64; 2],
    pub viscous_f: [f64; 2],
}

impl MomentumSources {
    pub fn solid(&self) -> [f64; 2] {
        add4(self.normal_s, self.coulomb_s, self.pressure_s, self.drag_s)
    }

    /// Solid total without the Coulomb term (applied separately by the solver).
    pub fn solid_without_coulomb(&self) -> [f64; 2] {
        add4(self.normal_s, [0.0; 2], self.pressure_s, self.drag_s)
    }

    pub fn fluid(&self) -> [f64; 2] {
        let s = add4(self.normal_f, self.friction_f, self.pressure_f, self.drag_f);
        [s[0] + self.viscous_f[0], s[1] + self.viscous_f[1]]
    }
}

#[inline]
fn add4(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0] + c[0] + d[0], a[1] + b[1] + c[1] + d[1]]
}

/// Magnitude J_b p_b^s tan δ_b of the Coulomb basal friction.
#[inline]
pub fn coulomb_magnitude(geom: &CellGeometry, params: &ModelParams, terms: &PhaseTerms) -> f64 {
    coulomb_magnitude_tan(geom, params.tan_delta(), terms)
}

/// [`coulomb_magnitude`] with `tan δ_b` supplied by the caller.
#[inline]
pub(crate) fn coulomb_magnitude_tan(geom: &CellGeometry, tan_delta: f64, terms: &PhaseTerms) -> f64 {
    geom.jac * terms.p_b_s * tan_delta
}

/// Coulomb friction vector opposing `v`, with the direction regularised
/// near zero speed.
pub fn coulomb_friction(magnitude: f64, v: [f64; 2]) -> [f64; 2] {
    let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let scale = -magnitude / speed.max(COULOMB_SPEED_FLOOR);
    [scale * v[0], scale * v[1]]
}

/// Inter-phase drag acting on the fluid: −J_b c_D φ^s φ^f h (v^f − v^s).
/// The solid receives −α_ρ times this.
#[inline]
fn drag_on_fluid(state: &CellState, geom: &CellGeometry, params: &ModelParams) -> [f64; 2] {
    let k = geom.jac * params.c_d * state.phi_s() * state.phi_f() * state.h();
    [-k * (state.vf[0] - state.vs[0]), -k * (state.vf[1] - state.vs[1])]
}

pub fn momentum_sources(
    state: &CellState,
    geom: &CellGeometry,
    params: &ModelParams,
    terms: &PhaseTerms,
    grads: &SourceGradients,
) -> MomentumSources {
    momentum_sources_tan(state, geom, params, params.tan_delta(), terms, grads)
}

/// [`momentum_sources`] with `tan δ_b` supplied by the caller.
#[inline]
pub(crate) fn momentum_sources_tan(
    state: &CellState,
    geom: &CellGeometry,
    params: &ModelParams,
    tan_delta: f64,
    terms: &PhaseTerms,
    grads: &SourceGradients,
) -> MomentumSources {
    let jac = geom.jac;
    let [nx, ny, _] = geom.n;
    let phi_s = state.phi_s();
    let phi_f = state.phi_f();
    let eps = params.epsilon;
    let a = &geom.a;
    let [dp_xi, dp_eta] = grads.pressure;
    let grad = [
        a[0][0] * dp_xi + a[1][0] * dp_eta,
        a[0][1] * dp_xi + a[1][1] * dp_eta,
    ];

    let drag_f = drag_on_fluid(state, geom, params);
    let drag_s = [-params.alpha_rho * drag_f[0], -params.alpha_rho * drag_f[1]];

    let fluid_fric = -jac * phi_f * state.h() * params.theta_b / (eps * params.n_r);
    let vis = eps * phi_f / params.n_r;

    MomentumSources {
        normal_s: [jac * terms.p_b_s * nx, jac * terms.p_b_s * ny],
        coulomb_s: coulomb_friction(coulomb_magnitude_tan(geom, tan_delta, terms), state.vs),
        pressure_s: [
            -eps * params.alpha_rho * phi_s * grad[0],
            -eps * params.alpha_rho * phi_s * grad[1],
        ],
        drag_s,
        normal_f: [jac * terms.p_b_f * nx, jac * terms.p_b_f * ny],
        friction_f: [fluid_fric * state.vf[0], fluid_fric * state.vf[1]],
        pressure_f: [eps * phi_f * grad[0], eps * phi_f * grad[1]],
        drag_f,
        viscous_f: [vis * grads.viscous[0], vis * grads.viscous[1]],
    }
}

/// Inner viscous quantities of one cell, each already multiplied by J_b h:
/// `[T_ξξ, T_ξη, T_ηη]` where
/// `s_vis,X = 2 ∂ξ T_ξξ + ∂η T_ξη` and `s_vis,Y = 2 ∂η T_ηη + ∂ξ T_ξη`.
///
/// `grad_vxi` and `grad_veta` are (∂ξ, ∂η) of the fluid v_ξ and v_η.
pub fn viscous_stresses(geom: &CellGeometry, h: f64, grad_vxi: [f64; 2], grad_veta: [f64; 2]) -> [f64; 3] {
    let a = &geom.a;
    let jh = geom.jac * h;
    let t_xx = jh * (a[0][0] * grad_vxi[0] + a[1][0] * grad_vxi[1]);
    let t_yy = jh * (a[0][1] * grad_veta[0] + a[1][1] * grad_veta[1]);
    let t_xy = jh
        * ((a[0][1] * grad_vxi[0] + a[1][1] * grad_vxi[1])
            + (a[0][0] * grad_veta[0] + a[1][0] * grad_veta[1]));
    [t_xx, t_xy, t_yy]
}

/// Upper bounds (λ_ξ, λ_η) on the local signal speeds: `|v| + sqrt(ε c h)`
/// per direction, maximised over both phases. Zero for a dry cell.
pub fn wave_speed_bound(state: &CellState, geom: &CellGeometry, params: &ModelParams) -> (f64, f64) {
    let h = state.h();
    if h <= 0.0 {
        return (0.0, 0.0);
    }
    let celerity = (params.epsilon * geom.c() * h).sqrt();
    let lx = state.vs[0].abs().max(state.vf[0].abs()) + celerity;
    let ly = state.vs[1].abs().max(state.vf[1].abs()) + celerity;
    (lx, ly)
}

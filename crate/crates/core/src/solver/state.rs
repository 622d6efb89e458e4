//! Conserved two-phase state on the padded mesh, and wet/dry regularisation.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, GHOST};
use crate::physics::{CellState, Phase};
use crate::terrain::{CellGeometry, TerrainGeometry};

/// Negative thickness tolerated (and clipped) as round-off.
pub const CLIP_TOLERANCE: f64 = 1e-12;

/// Conserved variables of one cell: `J_b h^k` and `q^k = J_b h^k (v_X, v_Y)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Conserved {
    pub ms: f64,
    pub qs: [f64; 2],
    pub mf: f64,
    pub qf: [f64; 2],
}

impl Conserved {
    #[inline]
    pub fn to_array(self) -> [f64; 6] {
        [self.ms, self.qs[0], self.qs[1], self.mf, self.qf[0], self.qf[1]]
    }

    #[inline]
    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            ms: a[0],
            qs: [a[1], a[2]],
            mf: a[3],
            qf: [a[4], a[5]],
        }
    }

    /// Builds the conserved vector from primitive thicknesses and velocities.
    pub fn from_primitive(s: &CellState, geom: &CellGeometry) -> Self {
        let ms = geom.jac * s.hs;
        let mf = geom.jac * s.hf;
        Self {
            ms,
            qs: [ms * s.vs[0], ms * s.vs[1]],
            mf,
            qf: [mf * s.vf[0], mf * s.vf[1]],
        }
    }
}

pub(crate) const FIELD_NAMES: [&str; 6] = ["J h^s", "q^s_X", "q^s_Y", "J h^f", "q^f_X", "q^f_Y"];

/// Wet/dry thresholds in scaled thickness units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    /// Phase thickness below which a phase is treated as dry.
    pub h_dry: f64,
    /// Desingularisation scale for velocity recovery.
    pub eps_h: f64,
}

impl Default for Regularization {
    fn default() -> Self {
        Self {
            h_dry: 1e-10,
            eps_h: 1e-6,
        }
    }
}

impl Regularization {
    /// Velocity from `q / J_b` and a phase thickness, desingularised so it
    /// stays bounded as `h → 0`.
    #[inline]
    pub fn velocity(&self, q_over_j: f64, h: f64) -> f64 {
        let floor = h.max(self.eps_h);
        q_over_j * (2.0 * h / (h * h + floor * floor))
    }

    /// Primitive state of a cell.
    #[inline]
    pub fn primitive(&self, u: &Conserved, geom: &CellGeometry) -> CellState {
        let jac = geom.jac;
        let hs = u.ms / jac;
        let hf = u.mf / jac;
        let vel = |q: [f64; 2], h: f64| {
            if h < self.h_dry {
                [0.0; 2]
            } else {
                [self.velocity(q[0] / jac, h), self.velocity(q[1] / jac, h)]
            }
        };
        CellState {
            hs,
            hf,
            vs: vel(u.qs, hs),
            vf: vel(u.qf, hf),
        }
    }

    /// Clips round-off negatives and zeroes momentum of dry phases.
    ///
    /// Returns the mass added by clipping per phase (`J h` units, before
    /// multiplying by the cell area).
    #[inline]
    pub fn regularize_cell(&self, u: &mut Conserved, jac: f64) -> std::result::Result<[f64; 2], (usize, f64)> {
        let mut clipped = [0.0; 2];
        for (k, (m, q, field)) in [(&mut u.ms, &mut u.qs, 0usize), (&mut u.mf, &mut u.qf, 3usize)]
            .into_iter()
            .enumerate()
        {
            let h = *m / jac;
            if h < 0.0 {
                if h < -CLIP_TOLERANCE {
                    return Err((field, h));
                }
                clipped[k] = -*m;
                *m = 0.0;
            }
            if *m / jac < self.h_dry {
                *q = [0.0; 2];
            }
        }
        Ok(clipped)
    }
}

/// Conserved fields over the padded mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureState {
    pub mesh: Mesh,
    pub cells: Vec<Conserved>,
}

impl MixtureState {
    pub fn zeros(mesh: Mesh) -> Self {
        Self {
            mesh,
            cells: vec![Conserved::default(); mesh.padded_len()],
        }
    }

    /// Fills interior cells from a primitive-state function of `(i, j)`.
    pub fn from_fn(geom: &TerrainGeometry, f: impl Fn(usize, usize) -> CellState) -> Self {
        let mesh = geom.mesh;
        let mut state = Self::zeros(mesh);
        for j in 0..mesh.ny {
            for i in 0..mesh.nx {
                let idx = mesh.interior_idx(i, j);
                state.cells[idx] = Conserved::from_primitive(&f(i, j), geom.at(idx));
            }
        }
        state
    }

    #[inline]
    pub fn interior(&self, i: usize, j: usize) -> &Conserved {
        &self.cells[self.mesh.interior_idx(i, j)]
    }

    /// Total `Σ J_b h^k ΔξΔη` over interior cells, summed in a fixed order.
    pub fn mass(&self, phase: Phase) -> f64 {
        let sum: f64 = self
            .mesh
            .interior_indices()
            .map(|k| match phase {
                Phase::Solid => self.cells[k].ms,
                Phase::Fluid => self.cells[k].mf,
            })
            .sum();
        sum * self.mesh.cell_area()
    }

    pub fn masses(&self) -> [f64; 2] {
        [self.mass(Phase::Solid), self.mass(Phase::Fluid)]
    }

    /// Interior primitive states, south row first.
    pub fn primitives(&self, geom: &TerrainGeometry, reg: &Regularization) -> Vec<CellState> {
        self.mesh
            .interior_indices()
            .map(|k| reg.primitive(&self.cells[k], geom.at(k)))
            .collect()
    }
}

/// Applies [`Regularization::regularize_cell`] to every interior cell.
///
/// Returns the clipped mass per phase (scaled mass units).
pub fn regularize_state(state: &mut MixtureState, geom: &TerrainGeometry, reg: &Regularization) -> Result<[f64; 2]> {
    let mesh = state.mesh;
    let mut clipped = [0.0; 2];
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            let idx = mesh.interior_idx(i, j);
            let c = reg
                .regularize_cell(&mut state.cells[idx], geom.at(idx).jac)
                .map_err(|(field, value)| Error::NegativeThickness {
                    field: FIELD_NAMES[field],
                    value,
                    i,
                    j,
                })?;
            clipped[0] += c[0];
            clipped[1] += c[1];
        }
    }
    let area = mesh.cell_area();
    Ok([clipped[0] * area, clipped[1] * area])
}

/// Interior coordinates of a padded flat index.
#[inline]
pub(crate) fn interior_coords(mesh: &Mesh, idx: usize) -> (usize, usize) {
    let (pi, pj) = mesh.coords(idx);
    (pi.saturating_sub(GHOST), pj.saturating_sub(GHOST))
}

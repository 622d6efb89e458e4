//! Ghost-layer filling: open (zero-gradient) boundaries everywhere, with
//! hydrograph-driven inflow states on listed boundary cells.

use crate::error::{Error, Result};
use crate::io::hydrograph::{Hydrograph, InflowSample, Side};
use crate::mesh::GHOST;
use crate::physics::CellState;
use crate::scaling::ScalingConfig;
use crate::terrain::TerrainGeometry;

use super::state::{Conserved, MixtureState};

#[derive(Debug, Clone, Default, PartialEq)]
pub enum BoundaryCondition {
    /// Non-reflecting everywhere.
    #[default]
    Open,
    /// Open, except for hydrograph cells. The hydrograph is in scaled units.
    Inflow(Hydrograph),
}

impl BoundaryCondition {
    /// Converts a physical-unit hydrograph into a scaled inflow condition.
    pub fn inflow(hydrograph: &Hydrograph, scaling: &ScalingConfig) -> Self {
        let samples = hydrograph
            .samples
            .iter()
            .map(|s| InflowSample {
                t: scaling.time_to_scaled(s.t),
                h: scaling.thickness_to_scaled(s.h),
                phi_s: s.phi_s,
                speed: scaling.velocity_to_scaled(s.speed),
            })
            .collect();
        BoundaryCondition::Inflow(Hydrograph {
            cells: hydrograph.cells.clone(),
            samples,
        })
    }

    /// Bound on the wave speed of prescribed inflow states over `[t0, t1]`
    /// (`|v| + sqrt(ε h)`, using `c ≤ 1`). Zero for open boundaries.
    pub fn max_inflow_speed(&self, t0: f64, t1: f64, epsilon: f64) -> f64 {
        let BoundaryCondition::Inflow(hydro) = self else {
            return 0.0;
        };
        let speed = |s: &InflowSample| {
            if s.h > 0.0 {
                s.speed + (epsilon * s.h).sqrt()
            } else {
                0.0
            }
        };
        let ends = [t0, t1].into_iter().filter_map(|t| hydro.sample_at(t));
        let knots = hydro.samples.iter().filter(|s| s.t > t0 && s.t < t1).copied();
        ends.chain(knots).map(|s| speed(&s)).fold(0.0, f64::max)
    }
}

/// Fills all ghost layers of `state` for time `t` (scaled).
pub fn apply_boundaries(
    state: &mut MixtureState,
    geom: &TerrainGeometry,
    bc: &BoundaryCondition,
    t: f64,
) -> Result<()> {
    let mesh = state.mesh;
    for pj in 0..mesh.rows() {
        let ghost_row = pj < GHOST || pj >= GHOST + mesh.ny;
        for pi in 0..mesh.stride() {
            if !ghost_row && (GHOST..GHOST + mesh.nx).contains(&pi) {
                continue;
            }
            let (ci, cj) = mesh.clamp_interior(pi, pj);
            state.cells[mesh.idx(pi, pj)] = state.cells[mesh.idx(ci, cj)];
        }
    }

    let BoundaryCondition::Inflow(hydro) = bc else {
        return Ok(());
    };
    let Some(sample) = hydro.sample_at(t) else {
        return Ok(());
    };
    for cell in &hydro.cells {
        if !cell.side.contains(cell.i, cell.j, mesh.nx, mesh.ny) {
            return Err(Error::Hydrograph(format!(
                "inflow cell ({}, {}) not on the {} boundary",
                cell.i, cell.j, cell.side
            )));
        }
        let dir = cell.side.inward();
        let prim = CellState {
            hs: sample.h * sample.phi_s,
            hf: sample.h * (1.0 - sample.phi_s),
            vs: [sample.speed * dir[0], sample.speed * dir[1]],
            vf: [sample.speed * dir[0], sample.speed * dir[1]],
        };
        let (pi, pj) = (cell.i + GHOST, cell.j + GHOST);
        for layer in 1..=GHOST {
            let (gi, gj) = match cell.side {
                Side::West => (pi - layer, pj),
                Side::East => (pi + layer, pj),
                Side::South => (pi, pj - layer),
                Side::North => (pi, pj + layer),
            };
            let idx = mesh.idx(gi, gj);
            state.cells[idx] = Conserved::from_primitive(&prim, geom.at(idx));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::hydrograph::InflowCell;
    use crate::mesh::Mesh;

    fn uniform() -> (TerrainGeometry, MixtureState) {
        let geom = TerrainGeometry::flat(Mesh::new(5, 4, 1.0, 1.0));
        let state = MixtureState::from_fn(&geom, |i, j| CellState {
            hs: 0.3 + i as f64,
            hf: 0.2 + j as f64,
            vs: [0.1, -0.2],
            vf: [0.05, 0.0],
        });
        (geom, state)
    }

    #[test]
    fn open_boundaries_copy_edges() {
        let (geom, mut s) = uniform();
        apply_boundaries(&mut s, &geom, &BoundaryCondition::Open, 0.0).unwrap();
        let m = s.mesh;
        for pj in 0..m.rows() {
            for pi in 0..m.stride() {
                let (ci, cj) = m.clamp_interior(pi, pj);
                assert_eq!(s.cells[m.idx(pi, pj)], s.cells[m.idx(ci, cj)]);
            }
        }
    }

    #[test]
    fn inflow_ghosts_follow_hydrograph() {
        let (geom, mut s) = uniform();
        let hydro = Hydrograph::new(
            vec![InflowCell { i: 0, j: 2, side: Side::West }],
            vec![
                InflowSample { t: 0.0, h: 0.0, phi_s: 0.5, speed: 1.0 },
                InflowSample { t: 60.0, h: 2.0, phi_s: 0.5, speed: 3.0 },
            ],
            5,
            4,
        )
        .unwrap();
        let bc = BoundaryCondition::Inflow(hydro);
        apply_boundaries(&mut s, &geom, &bc, 30.0).unwrap();
        let m = s.mesh;
        for layer in 0..GHOST {
            let u = s.cells[m.idx(layer, GHOST + 2)];
            assert_eq!(u.ms + u.mf, 1.0);
            assert_eq!(u.qs, [0.5 * 2.0, 0.0]);
        }
        // after the last sample the boundary is open again
        apply_boundaries(&mut s, &geom, &bc, 120.0).unwrap();
        assert_eq!(s.cells[m.idx(0, GHOST + 2)], *s.interior(0, 2));
    }

    #[test]
    fn inflow_speed_covers_window() {
        let hydro = Hydrograph::new(
            vec![InflowCell { i: 0, j: 1, side: Side::West }],
            vec![
                InflowSample { t: 0.0, h: 0.0, phi_s: 0.5, speed: 1.0 },
                InflowSample { t: 10.0, h: 4.0, phi_s: 0.5, speed: 3.0 },
                InflowSample { t: 20.0, h: 0.0, phi_s: 0.5, speed: 1.0 },
            ],
            4,
            4,
        )
        .unwrap();
        let bc = BoundaryCondition::Inflow(hydro);
        assert_eq!(bc.max_inflow_speed(0.0, 0.0, 1.0), 0.0);
        assert_eq!(bc.max_inflow_speed(0.0, 30.0, 1.0), 5.0);
        assert_eq!(BoundaryCondition::Open.max_inflow_speed(0.0, 30.0, 1.0), 0.0);
    }
}

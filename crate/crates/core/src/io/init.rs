//! Mode-I initial conditions: a release-thickness grid congruent with the
//! DEM, split into phases by the initial solid fraction.

use std::path::Path;

use crate::error::{Error, Result};
use crate::physics::{CellState, ModelParams};
use crate::scaling::ScalingConfig;
use crate::solver::MixtureState;
use crate::terrain::{ElevationGrid, TerrainGeometry};

use super::asc::{read_asc, AscGrid};

fn load_congruent(path: &Path, dem: &ElevationGrid) -> Result<AscGrid> {
    let grid = read_asc(path)?;
    if !grid.header.congruent(&dem.header) {
        return Err(Error::Grid {
            path: path.to_path_buf(),
            msg: format!(
                "grid dimension/georeference mismatch with DEM ({}x{} vs {}x{})",
                grid.header.ncols,
                grid.header.nrows,
                dem.ncols(),
                dem.nrows()
            ),
        });
    }
    Ok(grid)
}

/// Reads thickness `h` [m, normal to the bed] and optional velocity grids
/// `(vX, vY)` [m/s]. `h^s = h φ^s_0`, `h^f = h (1 − φ^s_0)`; both phases
/// start with the same velocity (zero by default).
pub fn load_initial_state(
    path: &Path,
    velocity: Option<(&Path, &Path)>,
    dem: &ElevationGrid,
    geom: &TerrainGeometry,
    params: &ModelParams,
    scaling: &ScalingConfig,
) -> Result<MixtureState> {
    let h = load_congruent(path, dem)?;
    let ncols = dem.ncols();
    if let Some(k) = h.data.iter().position(|&v| v < 0.0) {
        return Err(Error::Grid {
            path: path.to_path_buf(),
            msg: format!("negative thickness {} at column {}, row {}", h.data[k], k % ncols, k / ncols),
        });
    }
    let vel = match velocity {
        Some((vx, vy)) => Some((load_congruent(vx, dem)?, load_congruent(vy, dem)?)),
        None => None,
    };
    let phi = params.phi_s0;
    Ok(MixtureState::from_fn(geom, |i, j| {
        let hk = scaling.thickness_to_scaled(h.get(i, j));
        let v = vel.as_ref().map_or([0.0; 2], |(vx, vy)| {
            [
                scaling.velocity_to_scaled(vx.get(i, j)),
                scaling.velocity_to_scaled(vy.get(i, j)),
            ]
        });
        CellState {
            hs: hk * phi,
            hf: hk * (1.0 - phi),
            vs: v,
            vf: v,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::asc::{write_asc, AscHeader};
    use crate::terrain::compute_geometry;

    fn setup(dir: &Path, n_init: usize, value: f64) -> (ElevationGrid, TerrainGeometry, std::path::PathBuf) {
        let dem = ElevationGrid::from_fn(4, 4, 10.0, |_, _| 0.0);
        let geom = compute_geometry(&dem, &ScalingConfig::default());
        let header = AscHeader::new(n_init, n_init, 0.0, 0.0, 10.0, -9999.0);
        let path = dir.join("h0.asc");
        write_asc(&path, &header, &vec![value; n_init * n_init]).unwrap();
        (dem, geom, path)
    }

    #[test]
    fn splits_by_initial_fraction() {
        let dir = tempfile::tempdir().unwrap();
        let (dem, geom, path) = setup(dir.path(), 4, 2.0);
        let s = load_initial_state(&path, None, &dem, &geom, &ModelParams::standard(), &ScalingConfig::default())
            .unwrap();
        let u = s.interior(1, 2);
        assert_eq!((u.ms, u.mf), (1.0, 1.0));
        assert_eq!((u.qs, u.qf), ([0.0; 2], [0.0; 2]));
    }

    #[test]
    fn rejects_mismatched_grid() {
        let dir = tempfile::tempdir().unwrap();
        let (dem, geom, path) = setup(dir.path(), 3, 1.0);
        let err = load_initial_state(&path, None, &dem, &geom, &ModelParams::standard(), &ScalingConfig::default())
            .unwrap_err();
        assert!(err.to_string().contains("mismatch"), "{err}");
    }

    #[test]
    fn rejects_negative_thickness() {
        let dir = tempfile::tempdir().unwrap();
        let (dem, geom, path) = setup(dir.path(), 4, -0.1);
        assert!(load_initial_state(&path, None, &dem, &geom, &ModelParams::standard(), &ScalingConfig::default())
            .is_err());
    }
}

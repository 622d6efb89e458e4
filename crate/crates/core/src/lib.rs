//! Two-phase (solid grains + interstitial fluid) depth-averaged flow over
//! general topography.
//!
//! Pipeline: [`terrain`] builds the basal geometry from a DEM, [`physics`]
//! evaluates the per-cell model terms, [`solver`] advances the conserved
//! fields with a second-order central finite-volume scheme on a
//! [`parallel::Backend`], and [`io`] handles every file format.

pub mod bench;
pub mod error;
pub mod io;
pub mod mesh;
pub mod parallel;
pub mod physics;
pub mod scaling;
pub mod solver;
pub mod terrain;
pub mod validate;

pub use error::{Error, ErrorKind, Result};
pub use mesh::{Mesh, GHOST};
pub use parallel::{Backend, BackendConfig, BackendKind};
pub use physics::{CellState, ModelParams, Phase};
pub use scaling::ScalingConfig;
pub use solver::{Mode, SimConfig, SimSnapshot, Simulation};
pub use terrain::{compute_geometry, ElevationGrid, TerrainGeometry};

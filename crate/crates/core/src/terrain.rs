//! Terrain-fitted basal geometry derived from a DEM.
//!
//! The curvilinear axes ξ and η project onto the horizontal X and Y axes, so
//! the basal transformation matrix has columns
//! `s_ξ = (1, 0, ∂b/∂ξ)`, `s_η = (0, 1, ∂b/∂η)` and the unit normal
//! `n = (-b_ξ, -b_η, 1) / |·|`. Its determinant is `J_b = 1 / n_Z`, and the
//! upper-left 2×2 block of its inverse is the inverse tangent metric.

use std::path::Path;

use crate::error::Result;
use crate::io::asc::{read_asc, AscGrid, AscHeader};
use crate::mesh::{Mesh, GHOST};
use crate::scaling::ScalingConfig;

/// DEM in physical units, stored south-to-north (`i` east, `j` north).
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationGrid {
    pub header: AscHeader,
    pub elevation: Vec<f64>,
}

impl ElevationGrid {
    pub fn ncols(&self) -> usize {
        self.header.ncols
    }

    pub fn nrows(&self) -> usize {
        self.header.nrows
    }

    pub fn cellsize(&self) -> f64 {
        self.header.cellsize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.elevation[j * self.header.ncols + i]
    }

    /// Synthetic DEM sampled at cell centres; `f` receives coordinates
    /// relative to the lower-left corner.
    pub fn from_fn(ncols: usize, nrows: usize, cellsize: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let header = AscHeader::new(ncols, nrows, 0.0, 0.0, cellsize, -9999.0);
        let mut elevation = Vec::with_capacity(ncols * nrows);
        for j in 0..nrows {
            for i in 0..ncols {
                elevation.push(f((i as f64 + 0.5) * cellsize, (j as f64 + 0.5) * cellsize));
            }
        }
        Self { header, elevation }
    }
}

impl From<AscGrid> for ElevationGrid {
    fn from(g: AscGrid) -> Self {
        Self {
            header: g.header,
            elevation: g.data,
        }
    }
}

pub fn load_dem(path: &Path) -> Result<ElevationGrid> {
    read_asc(path).map(ElevationGrid::from)
}

/// Geometric factors of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    /// Surface slopes (∂b/∂ξ, ∂b/∂η).
    pub slope: [f64; 2],
    /// Unit basal normal (n_X, n_Y, n_Z).
    pub n: [f64; 3],
    /// Jacobian determinant of the basal transformation.
    pub jac: f64,
    /// Upper-left block of the inverse transformation, `a[r][c] = A_{r+1,c+1}`.
    pub a: [[f64; 2]; 2],
    /// ∂n/∂ξ per scaled length.
    pub dn_dxi: [f64; 3],
    /// ∂n/∂η per scaled length.
    pub dn_deta: [f64; 3],
}

impl CellGeometry {
    pub const FLAT: CellGeometry = CellGeometry {
        slope: [0.0; 2],
        n: [0.0, 0.0, 1.0],
        jac: 1.0,
        a: [[1.0, 0.0], [0.0, 1.0]],
        dn_dxi: [0.0; 3],
        dn_deta: [0.0; 3],
    };

    /// `c = n_Z`.
    #[inline]
    pub fn c(&self) -> f64 {
        self.n[2]
    }

    /// Geometry of a planar cell with surface slopes `b_ξ`, `b_η`.
    pub fn from_slopes(b_xi: f64, b_eta: f64) -> Self {
        let norm = (1.0 + b_xi * b_xi + b_eta * b_eta).sqrt();
        let n = [-b_xi / norm, -b_eta / norm, 1.0 / norm];
        let omega = basal_matrix(b_xi, b_eta, n);
        let (inv, det) = invert3(&omega);
        CellGeometry {
            slope: [b_xi, b_eta],
            n,
            jac: det,
            a: [[inv[0][0], inv[0][1]], [inv[1][0], inv[1][1]]],
            dn_dxi: [0.0; 3],
            dn_deta: [0.0; 3],
        }
    }
}

/// `Ω_b` with columns `s_ξ`, `s_η`, `n`.
pub fn basal_matrix(b_xi: f64, b_eta: f64, n: [f64; 3]) -> [[f64; 3]; 3] {
    [[1.0, 0.0, n[0]], [0.0, 1.0, n[1]], [b_xi, b_eta, n[2]]]
}

/// Inverse and determinant of a 3×3 matrix by cofactors.
pub fn invert3(m: &[[f64; 3]; 3]) -> ([[f64; 3]; 3], f64) {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let c00 = cof(1, 2, 1, 2);
    let c01 = -cof(1, 2, 0, 2);
    let c02 = cof(1, 2, 0, 1);
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    let adj = [
        [c00, -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [c01, cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [c02, -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let inv = adj.map(|row| row.map(|v| v / det));
    (inv, det)
}

/// Per-cell basal geometry over the padded mesh; ghost cells repeat the
/// nearest interior cell.
#[derive(Debug, Clone)]
pub struct TerrainGeometry {
    pub mesh: Mesh,
    pub cells: Vec<CellGeometry>,
}

impl TerrainGeometry {
    #[inline]
    pub fn at(&self, idx: usize) -> &CellGeometry {
        &self.cells[idx]
    }

    #[inline]
    pub fn interior(&self, i: usize, j: usize) -> &CellGeometry {
        &self.cells[self.mesh.interior_idx(i, j)]
    }

    /// Uniform flat geometry, mostly for tests and benchmarks.
    pub fn flat(mesh: Mesh) -> Self {
        Self {
            mesh,
            cells: vec![CellGeometry::FLAT; mesh.padded_len()],
        }
    }
}

/// Second-order derivative of a sampled line: central inside, one-sided at
/// both ends (first order when only two samples exist).
fn derivative(f: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    if n == 2 {
        return (f(1) - f(0)) / h;
    }
    if k == 0 {
        ((-3.0 * f(0) + 4.0 * f(1)) - f(2)) / (2.0 * h)
    } else if k == n - 1 {
        ((3.0 * f(n - 1) - 4.0 * f(n - 2)) + f(n - 3)) / (2.0 * h)
    } else {
        (f(k + 1) - f(k - 1)) / (2.0 * h)
    }
}

pub fn compute_geometry(grid: &ElevationGrid, scaling: &ScalingConfig) -> TerrainGeometry {
    let nx = grid.ncols();
    let ny = grid.nrows();
    let h = scaling.length_to_scaled(grid.cellsize());
    let mesh = Mesh::new(nx, ny, h, h);
    let b: Vec<f64> = grid
        .elevation
        .iter()
        .map(|&z| scaling.length_to_scaled(z))
        .collect();
    let at = |i: usize, j: usize| j * nx + i;

    let mut interior = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let b_xi = derivative(|k| b[at(k, j)], i, nx, h);
            let b_eta = derivative(|k| b[at(i, k)], j, ny, h);
            interior.push(CellGeometry::from_slopes(b_xi, b_eta));
        }
    }

    let normals: Vec<[f64; 3]> = interior.iter().map(|g| g.n).collect();
    for j in 0..ny {
        for i in 0..nx {
            let mut dxi = [0.0; 3];
            let mut deta = [0.0; 3];
            for c in 0..3 {
                dxi[c] = derivative(|k| normals[at(k, j)][c], i, nx, h);
                deta[c] = derivative(|k| normals[at(i, k)][c], j, ny, h);
            }
            let cell = &mut interior[at(i, j)];
            cell.dn_dxi = dxi;
            cell.dn_deta = deta;
        }
    }

    let mut cells = Vec::with_capacity(mesh.padded_len());
    for pj in 0..mesh.rows() {
        for pi in 0..mesh.stride() {
            let (ci, cj) = mesh.clamp_interior(pi, pj);
            cells.push(interior[at(ci - GHOST, cj - GHOST)]);
        }
    }
    TerrainGeometry { mesh, cells }
}

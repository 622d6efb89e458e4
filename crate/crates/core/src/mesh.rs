//! Uniform cell-centred mesh with a ghost margin on every side.

/// Ghost layers on each side of the interior.
pub const GHOST: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    /// Interior cells along ξ (east).
    pub nx: usize,
    /// Interior cells along η (north).
    pub ny: usize,
    /// Scaled cell size along ξ.
    pub dx: f64,
    /// Scaled cell size along η.
    pub dy: f64,
}

impl Mesh {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Self {
        Self { nx, ny, dx, dy }
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.nx + 2 * GHOST
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.ny + 2 * GHOST
    }

    #[inline]
    pub fn padded_len(&self) -> usize {
        self.stride() * self.rows()
    }

    pub fn interior_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat index of padded coordinates `(pi, pj)`.
    #[inline]
    pub fn idx(&self, pi: usize, pj: usize) -> usize {
        pj * self.stride() + pi
    }

    /// Flat index of interior cell `(i, j)`.
    #[inline]
    pub fn interior_idx(&self, i: usize, j: usize) -> usize {
        self.idx(i + GHOST, j + GHOST)
    }

    /// Padded coordinates of a flat index.
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.stride(), idx / self.stride())
    }

    #[inline]
    pub fn is_interior(&self, pi: usize, pj: usize) -> bool {
        (GHOST..GHOST + self.nx).contains(&pi) && (GHOST..GHOST + self.ny).contains(&pj)
    }

    /// Nearest interior cell to a padded position (clamped).
    #[inline]
    pub fn clamp_interior(&self, pi: usize, pj: usize) -> (usize, usize) {
        (
            pi.clamp(GHOST, GHOST + self.nx - 1),
            pj.clamp(GHOST, GHOST + self.ny - 1),
        )
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    /// Flat indices of interior cells, south row first.
    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.interior_idx(i, j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let m = Mesh::new(4, 3, 1.0, 1.0);
        assert_eq!(m.padded_len(), 10 * 9);
        for idx in 0..m.padded_len() {
            let (pi, pj) = m.coords(idx);
            assert_eq!(m.idx(pi, pj), idx);
        }
        assert_eq!(m.interior_indices().count(), 12);
        assert!(m.interior_indices().all(|k| {
            let (pi, pj) = m.coords(k);
            m.is_interior(pi, pj)
        }));
        assert_eq!(m.clamp_interior(0, 100), (GHOST, GHOST + 2));
    }
}

//! Uniform, centered sampling grids.
//!
//! Sample `(i, j)` sits at `((i - nx/2) dx, (j - ny/2) dy)`; storage is row-major
//! with `x` varying fastest, so the flat index is `j * nx + i`.

use crate::error::{Error, Result};

/// Default operating wavelength (um).
pub const DEFAULT_WAVELENGTH_UM: f64 = 0.78;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    /// Sample pitch along x (um, or rad/um for far-field grids).
    pub dx: f64,
    pub dy: f64,
    /// Vacuum wavelength (um).
    pub wavelength: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, wavelength: f64) -> Result<Self> {
        if nx < 16 || ny < 16 || !nx.is_multiple_of(2) || !ny.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "sample counts must be even and >= 16, got {nx}x{ny}"
            )));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::InvalidGrid(format!("pitch must be positive, got {dx}, {dy}")));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidGrid(format!("wavelength must be positive, got {wavelength}")));
        }
        Ok(Grid { nx, ny, dx, dy, wavelength })
    }

    /// Square grid at the default wavelength.
    pub fn square(n: usize, d: f64) -> Result<Self> {
        Self::new(n, n, d, d, DEFAULT_WAVELENGTH_UM)
    }

    /// 300 x 300 samples at 0.2 um: a 60 um window at 780 nm.
    pub fn default_chip() -> Self {
        Grid { nx: 300, ny: 300, dx: 0.2, dy: 0.2, wavelength: DEFAULT_WAVELENGTH_UM }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.nx / 2) as f64) * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - (self.ny / 2) as f64) * self.dy
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    /// Smallest full window extent.
    pub fn window(&self) -> f64 {
        (self.nx as f64 * self.dx).min(self.ny as f64 * self.dy)
    }

    /// Largest radius whose circle stays on the grid on every side.
    pub fn max_radius(&self) -> f64 {
        ((self.nx / 2 - 1) as f64 * self.dx).min((self.ny / 2 - 1) as f64 * self.dy)
    }

    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// Iterator over `(flat_index, x, y)`.
    pub fn coords(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..self.ny).flat_map(move |j| {
            let y = self.y(j);
            (0..self.nx).map(move |i| (j * self.nx + i, self.x(i), y))
        })
    }

    /// Grid of the centered discrete Fourier transform: pitch `2 pi / (n d)`.
    pub fn reciprocal(&self) -> Grid {
        let tau = 2.0 * std::f64::consts::PI;
        Grid {
            nx: self.nx,
            ny: self.ny,
            dx: tau / (self.nx as f64 * self.dx),
            dy: tau / (self.ny as f64 * self.dy),
            wavelength: self.wavelength,
        }
    }

    /// Bilinear sample positions: fractional indices of coordinate `(x, y)`.
    #[inline]
    pub fn fractional_index(&self, x: f64, y: f64) -> (f64, f64) {
        (x / self.dx + (self.nx / 2) as f64, y / self.dy + (self.ny / 2) as f64)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::default_chip()
    }
}

pub(crate) fn check_same(a: &Grid, b: &Grid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small() {
        assert!(Grid::new(15, 16, 1.0, 1.0, 1.0).is_err());
        assert!(Grid::new(17, 16, 1.0, 1.0, 1.0).is_err());
        assert!(Grid::new(16, 16, 0.0, 1.0, 1.0).is_err());
        assert!(Grid::new(16, 16, 1.0, 1.0, -1.0).is_err());
        assert!(Grid::new(16, 16, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn centered_coordinates() {
        let g = Grid::default_chip();
        assert_eq!(g.x(150), 0.0);
        assert!((g.x(0) + 30.0).abs() < 1e-12);
        assert!((g.y(299) - 29.8).abs() < 1e-12);
        let (fi, fj) = g.fractional_index(4.0, -2.0);
        assert!((fi - 170.0).abs() < 1e-9 && (fj - 140.0).abs() < 1e-9);
    }

    #[test]
    fn reciprocal_pitch() {
        let g = Grid::default_chip();
        let r = g.reciprocal();
        assert!((r.dx - 2.0 * std::f64::consts::PI / 60.0).abs() < 1e-15);
        let back = r.reciprocal();
        assert!((back.dx - g.dx).abs() < 1e-15);
    }
}

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Background index of borosilicate glass at 780 nm.
pub const DEFAULT_BACKGROUND_INDEX: f64 = 1.51;

/// Track contrast of the default doughnut: the weakest value of order 1e-3
/// for which the Gaussian-track ring guides the first-order pair.
pub const DEFAULT_DOUGHNUT_DELTA_N: f64 = 2e-3;

/// A z-invariant transverse refractive-index map.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexProfile {
    grid: Grid,
    n: Vec<f64>,
    n0: f64,
    delta_n: f64,
}

impl IndexProfile {
    /// Checks `n0 <= n <= n0 + delta_n` (to rounding) on every sample.
    pub fn new(grid: Grid, n: Vec<f64>, n0: f64, delta_n: f64) -> Result<Self> {
        if n.len() != grid.len() {
            return Err(Error::Format(format!("expected {} index samples, got {}", grid.len(), n.len())));
        }
        if !(n0 > 0.0 && delta_n >= 0.0) {
            return Err(Error::InvalidSpec(format!("need n0 > 0 and delta_n >= 0, got {n0}, {delta_n}")));
        }
        let tol = 1e-12 * n0;
        if n.iter().any(|&v| !v.is_finite() || v < n0 - tol || v > n0 + delta_n + tol) {
            return Err(Error::InvalidSpec("index samples outside [n0, n0 + delta_n]".into()));
        }
        Ok(IndexProfile { grid, n, n0, delta_n })
    }

    pub fn uniform(grid: Grid, n0: f64) -> Self {
        IndexProfile { grid, n: vec![n0; grid.len()], n0, delta_n: 0.0 }
    }

    /// Builds from the actual sample range: `n0 = min`, `delta_n = max - min`.
    pub fn from_samples(grid: Grid, n: Vec<f64>) -> Result<Self> {
        let lo = n.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = n.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self::new(grid, n, lo, hi - lo)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.n
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn delta_n(&self) -> f64 {
        self.delta_n
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.n[self.grid.index(i, j)]
    }

    /// Index at a coordinate by bilinear interpolation; `n0` off the grid.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let (fi, fj) = self.grid.fractional_index(x, y);
        let inside = fi >= 0.0 && fj >= 0.0 && fi <= (self.grid.nx - 1) as f64 && fj <= (self.grid.ny - 1) as f64;
        if !inside {
            return self.n0;
        }
        crate::field::bilinear(&self.n, self.grid.nx, self.grid.ny, fi, fj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreShape {
    /// Gaussian with FWHM equal to the core diameter.
    Gaussian,
    /// Eighth-order super-Gaussian with the same FWHM.
    SuperGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoughnutGeometry {
    /// Diameter of the circle through the core centers (um).
    pub ring_diameter: f64,
    pub n_cores: usize,
    /// Core FWHM (um).
    pub core_diameter: f64,
    /// Adds a core on the axis.
    pub include_center: bool,
    pub delta_n: f64,
    pub background_index: f64,
    pub core_shape: CoreShape,
}

impl Default for DoughnutGeometry {
    fn default() -> Self {
        DoughnutGeometry {
            ring_diameter: 8.0,
            n_cores: 12,
            core_diameter: 2.5,
            include_center: false,
            delta_n: DEFAULT_DOUGHNUT_DELTA_N,
            background_index: DEFAULT_BACKGROUND_INDEX,
            core_shape: CoreShape::Gaussian,
        }
    }
}

impl DoughnutGeometry {
    pub fn core_centers(&self) -> Vec<(f64, f64)> {
        let r = self.ring_diameter / 2.0;
        let mut c: Vec<(f64, f64)> = (0..self.n_cores)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / self.n_cores as f64;
                (r * a.cos(), r * a.sin())
            })
            .collect();
        if self.include_center {
            c.push((0.0, 0.0));
        }
        c
    }

    /// Straight-line distance between adjacent core centers.
    pub fn core_spacing(&self) -> f64 {
        self.ring_diameter * (PI / self.n_cores as f64).sin()
    }

    /// Relative contrast of a core at distance `d` from its center.
    pub fn core_weight(&self, d: f64) -> f64 {
        let s = 2.0 * d / self.core_diameter;
        match self.core_shape {
            CoreShape::Gaussian => (-std::f64::consts::LN_2 * s * s).exp(),
            CoreShape::SuperGaussian => (-std::f64::consts::LN_2 * s.powi(8)).exp(),
        }
    }
}

/// Twelve (optionally thirteen) written tracks on a circle; overlapping tracks
/// combine by pointwise maximum.
pub fn doughnut_profile(grid: &Grid, geom: &DoughnutGeometry) -> Result<IndexProfile> {
    if geom.n_cores < 3 {
        return Err(Error::InvalidSpec(format!("need at least 3 cores, got {}", geom.n_cores)));
    }
    if !(geom.ring_diameter > geom.core_diameter && geom.core_diameter > 0.0) {
        return Err(Error::InvalidSpec("ring diameter must exceed the core diameter".into()));
    }
    if !(geom.delta_n >= 0.0 && geom.background_index > 0.0) {
        return Err(Error::InvalidSpec("need delta_n >= 0 and a positive background index".into()));
    }
    let extent = geom.ring_diameter / 2.0 + geom.core_diameter;
    if extent > grid.max_radius() {
        return Err(Error::GeometryExceedsWindow(format!(
            "structure radius {extent:.2} um exceeds {:.2} um",
            grid.max_radius()
        )));
    }
    let centers = geom.core_centers();
    let n = grid
        .coords()
        .map(|(_, x, y)| {
            let w = centers
                .iter()
                .map(|&(cx, cy)| geom.core_weight(((x - cx).powi(2) + (y - cy).powi(2)).sqrt()))
                .fold(0.0, f64::max);
            geom.background_index + geom.delta_n * w
        })
        .collect();
    IndexProfile::new(*grid, n, geom.background_index, geom.delta_n)
}

/// Circular step-index core of radius `core_radius` (pixel-center test).
pub fn step_fiber_profile(grid: &Grid, core_radius: f64, delta_n: f64, n0: f64) -> Result<IndexProfile> {
    if !(core_radius > 0.0) || core_radius > grid.max_radius() {
        return Err(Error::GeometryExceedsWindow(format!(
            "core radius {core_radius} um does not fit in {:.2} um",
            grid.max_radius()
        )));
    }
    let n = grid
        .coords()
        .map(|(_, x, y)| {
            // Relative slack keeps samples lying on the rim (up to rounding) inside.
            if x * x + y * y <= core_radius * core_radius * (1.0 + 1e-12) {
                n0 + delta_n
            } else {
                n0
            }
        })
        .collect();
    IndexProfile::new(*grid, n, n0, delta_n)
}

/// Normalized frequency `V = k0 a sqrt(2 n0 dn)` of a step fiber.
pub fn v_number(wavelength: f64, core_radius: f64, n0: f64, delta_n: f64) -> f64 {
    2.0 * PI / wavelength * core_radius * (2.0 * n0 * delta_n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doughnut_peak_on_core_center() {
        let g = Grid::default_chip();
        let geom = DoughnutGeometry { delta_n: 1e-3, ..Default::default() };
        let prof = doughnut_profile(&g, &geom).unwrap();
        let n = prof.at(170, 150);
        assert!((n - (DEFAULT_BACKGROUND_INDEX + 1e-3)).abs() < 1e-15);
        assert!((prof.at(150, 150) - DEFAULT_BACKGROUND_INDEX) < 1e-5);
        let max = prof.values().iter().cloned().fold(0.0, f64::max);
        let min = prof.values().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max <= prof.n0() + prof.delta_n() + 1e-15 && min >= prof.n0());
    }

    #[test]
    fn adjacent_spacing_close_to_written_value() {
        let geom = DoughnutGeometry::default();
        let chord = geom.core_spacing();
        assert!((chord - 2.0706).abs() < 1e-4);
        assert!((chord - 2.09).abs() / 2.09 < 0.01);
    }

    #[test]
    fn center_track() {
        let g = Grid::default_chip();
        let geom = DoughnutGeometry { include_center: true, delta_n: 1e-3, ..Default::default() };
        assert_eq!(geom.core_centers().len(), 13);
        let prof = doughnut_profile(&g, &geom).unwrap();
        assert!((prof.at(150, 150) - (DEFAULT_BACKGROUND_INDEX + 1e-3)).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_symmetry() {
        let g = Grid::default_chip();
        let prof = doughnut_profile(&g, &DoughnutGeometry::default()).unwrap();
        // (i, j) -> (-j, i) about the center, restricted to the paired interior.
        let mut worst: f64 = 0.0;
        for j in 1..g.ny {
            for i in 1..g.nx {
                let (x, y) = (i as isize - 150, j as isize - 150);
                let (xr, yr) = (-y + 150, x + 150);
                if xr < 1 || xr >= g.nx as isize || yr < 1 || yr >= g.ny as isize {
                    continue;
                }
                let d = prof.at(i, j) - prof.at(xr as usize, yr as usize);
                worst = worst.max(d.abs() / prof.delta_n());
            }
        }
        assert!(worst < 1e-6, "asymmetry {worst}");
    }

    #[test]
    fn rejects_bad_geometry() {
        let g = Grid::default_chip();
        let too_big = DoughnutGeometry { ring_diameter: 58.0, ..Default::default() };
        assert!(matches!(doughnut_profile(&g, &too_big), Err(Error::GeometryExceedsWindow(_))));
        let few = DoughnutGeometry { n_cores: 2, ..Default::default() };
        assert!(doughnut_profile(&g, &few).is_err());
        let fat = DoughnutGeometry { core_diameter: 9.0, ..Default::default() };
        assert!(doughnut_profile(&g, &fat).is_err());
    }

    #[test]
    fn step_fiber_edges_and_v() {
        let g = Grid::square(300, 0.1).unwrap();
        let n0 = DEFAULT_BACKGROUND_INDEX;
        let prof = step_fiber_profile(&g, 3.0, 1e-3, n0).unwrap();
        assert_eq!(prof.at(179, 150), n0 + 1e-3);
        assert_eq!(prof.at(181, 150), n0);
        assert_eq!(prof.at(150, 121), n0 + 1e-3);
        assert_eq!(prof.at(150, 119), n0);
        assert_eq!(prof.sample(0.0, 2.9), n0 + 1e-3);
        let v = v_number(0.78, 3.0, n0, 1e-3);
        assert!((v - 1.328).abs() < 1e-3, "V = {v}");
        assert!(v < 2.405);
        assert!(step_fiber_profile(&g, 20.0, 1e-3, n0).is_err());
    }
}

//! Laguerre-Gaussian beam synthesis, OAM Bloch-sphere states and focusing optics.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{superpose, ComplexField};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamKind {
    Lg,
    Gauss,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    pub kind: BeamKind,
    /// Topological charge.
    pub ell: i32,
    /// Radial index.
    pub p: u32,
    /// Waist radius (um).
    pub waist: f64,
    /// Transverse offset of the beam axis (um).
    pub center: (f64, f64),
    pub amplitude: f64,
    /// Global phase (rad).
    pub phase: f64,
}

impl BeamSpec {
    pub fn lg(ell: i32, p: u32, waist: f64) -> Self {
        BeamSpec {
            kind: BeamKind::Lg,
            ell,
            p,
            waist,
            center: (0.0, 0.0),
            amplitude: 1.0,
            phase: 0.0,
        }
    }

    pub fn gauss(waist: f64) -> Self {
        BeamSpec { kind: BeamKind::Gauss, ..Self::lg(0, 0, waist) }
    }

    pub fn with_center(mut self, x: f64, y: f64) -> Self {
        self.center = (x, y);
        self
    }

    pub fn weight(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }

    fn validate(&self) -> Result<()> {
        if !(self.waist > 0.0 && self.waist.is_finite()) {
            return Err(Error::InvalidSpec(format!("waist must be positive, got {}", self.waist)));
        }
        if !(self.amplitude.is_finite() && self.phase.is_finite()) {
            return Err(Error::InvalidSpec("non-finite complex weight".into()));
        }
        if !(self.center.0.is_finite() && self.center.1.is_finite()) {
            return Err(Error::InvalidSpec("non-finite center".into()));
        }
        if self.kind == BeamKind::Gauss && (self.ell != 0 || self.p != 0) {
            return Err(Error::InvalidSpec("a Gaussian beam has ell = 0 and p = 0".into()));
        }
        Ok(())
    }
}

/// Generalized Laguerre polynomial `L_p^alpha(x)` by the three-term recurrence.
pub fn laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `LG_{p,ell}` at its waist plane, normalized to unit power on the grid and
/// multiplied by the beam's complex weight.
pub fn lg_mode(grid: &Grid, spec: &BeamSpec) -> Result<ComplexField> {
    if spec.kind != BeamKind::Lg {
        return Err(Error::InvalidSpec("lg_mode needs kind = lg".into()));
    }
    beam_field(grid, spec)
}

/// Synthesizes either beam kind; a Gaussian is `LG_{0,0}`.
pub fn beam_field(grid: &Grid, spec: &BeamSpec) -> Result<ComplexField> {
    spec.validate()?;
    let window = grid.window();
    if window < 6.0 * spec.waist {
        return Err(Error::WindowTooSmall { window_um: window, waist_um: spec.waist });
    }
    let w = spec.waist;
    let m = spec.ell.unsigned_abs() as i32;
    let (cx, cy) = spec.center;
    let raw = ComplexField::from_fn(*grid, |x, y| {
        let (dx, dy) = (x - cx, y - cy);
        let r2 = dx * dx + dy * dy;
        let s = 2.0 * r2 / (w * w);
        let radial = s.sqrt().powi(m) * laguerre(spec.p, m as f64, s) * (-r2 / (w * w)).exp();
        let phi = dy.atan2(dx);
        Complex64::from_polar(radial, spec.ell as f64 * phi)
    });
    let p = raw.power();
    if !(p > 0.0) {
        return Err(Error::InvalidSpec("beam has no power on this grid".into()));
    }
    Ok(raw.scaled(spec.weight() / p.sqrt()))
}

/// `cos(theta/2) LG_{0,+ell} + e^{i phi} sin(theta/2) LG_{0,-ell}`, unit power.
pub fn bloch_state(theta: f64, phi: f64, ell: i32, grid: &Grid, waist: f64) -> Result<ComplexField> {
    let [a, b] = bloch_components(theta, phi, ell, waist)?;
    let plus = lg_mode(grid, &a)?;
    let minus = lg_mode(grid, &b)?;
    let one = Complex64::new(1.0, 0.0);
    superpose(&[(one, &plus), (one, &minus)], true)
}

/// The two weighted LG components of a Bloch-sphere state.
pub fn bloch_components(theta: f64, phi: f64, ell: i32, waist: f64) -> Result<[BeamSpec; 2]> {
    if ell <= 0 {
        return Err(Error::InvalidSpec(format!("Bloch states need ell > 0, got {ell}")));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidSpec(format!("theta must lie in [0, pi], got {theta}")));
    }
    let plus = BeamSpec { amplitude: (theta / 2.0).cos(), ..BeamSpec::lg(ell, 0, waist) };
    let minus = BeamSpec { amplitude: (theta / 2.0).sin(), phase: phi, ..BeamSpec::lg(-ell, 0, waist) };
    Ok([plus, minus])
}

/// The six cardinal states of the `ell` Bloch sphere as `(label, theta, phi)`.
pub fn cardinal_states() -> [(&'static str, f64, f64); 6] {
    [
        ("north", 0.0, 0.0),
        ("south", PI, 0.0),
        ("plus_x", PI / 2.0, 0.0),
        ("minus_x", PI / 2.0, PI),
        ("plus_y", PI / 2.0, PI / 2.0),
        ("minus_y", PI / 2.0, -PI / 2.0),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub label: String,
    /// Focal length (mm).
    pub focal_length: f64,
    pub numerical_aperture: f64,
}

impl ObjectiveSpec {
    pub fn new(label: &str, focal_length: f64, numerical_aperture: f64) -> Result<Self> {
        if !(focal_length > 0.0) || !(numerical_aperture > 0.0 && numerical_aperture < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "objective {label}: need f > 0 and 0 < NA < 1 (got {focal_length}, {numerical_aperture})"
            )));
        }
        Ok(ObjectiveSpec { label: label.to_string(), focal_length, numerical_aperture })
    }

    /// The three coupling objectives of the experiment (16X, 20X, 30X).
    pub fn table() -> Vec<ObjectiveSpec> {
        vec![
            ObjectiveSpec { label: "16X".into(), focal_length: 11.0, numerical_aperture: 0.25 },
            ObjectiveSpec { label: "20X".into(), focal_length: 8.0, numerical_aperture: 0.50 },
            ObjectiveSpec { label: "30X".into(), focal_length: 6.2, numerical_aperture: 0.40 },
        ]
    }
}

/// Gaussian focal waist `lambda f / (pi w_in)` in um, for `w_in` in mm and
/// `lambda` in um.
pub fn focused_waist(objective: &ObjectiveSpec, input_waist_mm: f64, wavelength_um: f64) -> f64 {
    wavelength_um * objective.focal_length / (PI * input_waist_mm)
}

/// Radius of peak intensity of `LG_{0,ell}` with waist `w`.
pub fn ring_radius(ell: i32, waist: f64) -> f64 {
    waist * (ell.unsigned_abs() as f64 / 2.0).sqrt()
}

/// Waist that puts the `LG_{0,ell}` intensity ring at `radius`.
pub fn ring_matched_waist(ell: i32, radius: f64) -> f64 {
    if ell == 0 {
        radius
    } else {
        radius * (2.0 / ell.unsigned_abs() as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::default_chip()
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert_eq!(laguerre(0, 2.0, x), 1.0);
        assert!((laguerre(1, 2.0, x) - (3.0 - x)).abs() < 1e-14);
        let l2 = x * x / 2.0 - 4.0 * x + 6.0;
        assert!((laguerre(2, 2.0, x) - l2).abs() < 1e-14);
    }

    #[test]
    fn unit_power() {
        let e = lg_mode(&grid(), &BeamSpec::lg(3, 2, 4.0)).unwrap();
        assert!((e.power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_peaks_at_center() {
        let g = grid();
        let e = lg_mode(&g, &BeamSpec::lg(0, 0, 5.0)).unwrap();
        let inten = e.intensity();
        let (k, _) = inten
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        assert_eq!(k, g.index(150, 150));
    }

    #[test]
    fn ring_peak_radius_matches_argmax() {
        // Brute-force argmax over all samples vs the analytic d|E|^2/dr = 0 root.
        let g = grid();
        let e = lg_mode(&g, &BeamSpec::lg(1, 0, 5.0)).unwrap();
        let (mut best, mut r_best) = (0.0, 0.0);
        for (k, x, y) in g.coords() {
            let v = e.samples()[k].norm_sqr();
            if v > best {
                best = v;
                r_best = (x * x + y * y).sqrt();
            }
        }
        let expect = ring_radius(1, 5.0);
        assert!((expect - 3.5355339).abs() < 1e-6);
        assert!((r_best - expect).abs() <= g.dx, "argmax radius {r_best}");
    }

    #[test]
    fn distinct_charges_orthogonal() {
        let g = grid();
        let a = lg_mode(&g, &BeamSpec::lg(1, 0, 5.0)).unwrap();
        let b = lg_mode(&g, &BeamSpec::lg(2, 0, 5.0)).unwrap();
        assert!(a.overlap(&b).unwrap().norm() < 1e-9);
        let c = lg_mode(&g, &BeamSpec::lg(-1, 0, 5.0)).unwrap();
        assert!(a.overlap(&c).unwrap().norm() < 1e-9);
        assert!((a.overlap(&a).unwrap().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn window_and_spec_errors() {
        let g = grid();
        assert!(matches!(
            lg_mode(&g, &BeamSpec::lg(1, 0, 11.0)),
            Err(Error::WindowTooSmall { .. })
        ));
        assert!(matches!(lg_mode(&g, &BeamSpec::lg(1, 0, -1.0)), Err(Error::InvalidSpec(_))));
        assert!(matches!(lg_mode(&g, &BeamSpec::gauss(3.0)), Err(Error::InvalidSpec(_))));
        assert!(beam_field(&g, &BeamSpec::gauss(3.0)).is_ok());
        assert!(matches!(bloch_state(1.0, 0.0, 0, &g, 5.0), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn focal_waists() {
        let t = ObjectiveSpec::table();
        let w16 = focused_waist(&t[0], 0.48, 0.78);
        let w30 = focused_waist(&t[2], 0.48, 0.78);
        assert!((w16 - 5.69).abs() < 0.005, "{w16}");
        assert!((w30 - 3.21).abs() < 0.005, "{w30}");
        assert_eq!(ring_radius(0, 5.0), 0.0);
    }

    #[test]
    fn objective_validation() {
        assert!(ObjectiveSpec::new("x", 0.0, 0.5).is_err());
        assert!(ObjectiveSpec::new("x", 1.0, 1.0).is_err());
        assert!(ObjectiveSpec::new("x", 1.0, 0.3).is_ok());
    }
}

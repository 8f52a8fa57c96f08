//! Spatial-light-modulator emulation: fork holograms, phase masks, the
//! Fraunhofer far field and the phase-flattening projection onto a
//! single-mode fiber.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::ComplexField;
use crate::grid::{check_same, Grid};

/// Default grating period of the generation hologram (um).
pub const DEFAULT_GRATING_PERIOD_UM: f64 = 2.0;

/// Far-field waist (rad/um) of the fiber mode that best collects a flattened
/// first-order beam whose ring sits on the 4 um guide radius.
pub const DEFAULT_SMF_WAIST: f64 = 0.25;

const TAU: f64 = 2.0 * PI;

/// Phase-only modulation with values wrapped into `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    grid: Grid,
    phase: Vec<f64>,
}

impl PhaseMask {
    pub fn new(grid: Grid, phase: Vec<f64>) -> Result<Self> {
        if phase.len() != grid.len() {
            return Err(Error::Format(format!("expected {} phase samples, got {}", grid.len(), phase.len())));
        }
        if phase.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("phase mask has non-finite samples".into()));
        }
        Ok(PhaseMask { grid, phase: phase.into_iter().map(wrap).collect() })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let phase = grid.coords().map(|(_, x, y)| f(x, y)).collect();
        Self::new(grid, phase)
    }

    pub fn constant(grid: Grid, theta: f64) -> Result<Self> {
        Self::new(grid, vec![theta; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.phase
    }
}

fn wrap(v: f64) -> f64 {
    let w = v.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2 pi for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// `mod(ell phi + 2 pi x / period, 2 pi)`.
pub fn fork_hologram(grid: &Grid, ell: i32, grating_period: f64) -> Result<PhaseMask> {
    if !(grating_period >= 4.0 * grid.dx) {
        return Err(Error::UnresolvablePeriod { period_um: grating_period, dx_um: grid.dx });
    }
    PhaseMask::from_fn(*grid, |x, y| ell as f64 * y.atan2(x) + TAU * x / grating_period)
}

/// Spiral phase `ell phi` without a carrier grating.
pub fn vortex_mask(grid: &Grid, ell: i32) -> PhaseMask {
    PhaseMask::from_fn(*grid, |x, y| ell as f64 * y.atan2(x)).expect("finite phase")
}

/// Pointwise `E exp(i phase)`.
pub fn apply_mask(field: &ComplexField, mask: &PhaseMask) -> Result<ComplexField> {
    check_same(field.grid(), mask.grid())?;
    let samples = field
        .samples()
        .iter()
        .zip(&mask.phase)
        .map(|(e, &p)| e * Complex64::from_polar(1.0, p))
        .collect();
    ComplexField::from_samples(*field.grid(), samples)
}

/// Unitary centered Fourier transform
/// `F(k) = (dx dy / 2 pi) sum E(x) exp(-i k.x)` on the reciprocal grid.
pub fn far_field(field: &ComplexField) -> ComplexField {
    let g = *field.grid();
    let mut data = field.samples().to_vec();
    Fft2::new(g.nx, g.ny).forward_centered(&mut data);
    let s = g.dx * g.dy / TAU;
    data.iter_mut().for_each(|c| *c *= s);
    ComplexField::from_samples(g.reciprocal(), data).expect("transform of finite data is finite")
}

/// Inverse of [`far_field`].
pub fn near_field(spectrum: &ComplexField) -> ComplexField {
    let k = *spectrum.grid();
    let mut data = spectrum.samples().to_vec();
    Fft2::new(k.nx, k.ny).inverse_centered(&mut data);
    let s = k.dx * k.dy / TAU;
    data.iter_mut().for_each(|c| *c *= s);
    ComplexField::from_samples(k.reciprocal(), data).expect("transform of finite data is finite")
}

/// Fundamental fiber mode in the far-field plane, unit power.
pub fn smf_mode(kgrid: &Grid, smf_waist: f64) -> ComplexField {
    ComplexField::from_fn(*kgrid, |kx, ky| {
        Complex64::new((-(kx * kx + ky * ky) / (smf_waist * smf_waist)).exp(), 0.0)
    })
    .normalized()
}

/// Fraction of the field power that the fiber collects after the hologram
/// `exp(-i ell phi)`: `|<SMF|FF(E exp(-i ell phi))>|^2 / power(E)`.
pub fn phase_flatten_project(field: &ComplexField, ell: i32, smf_waist: f64) -> Result<f64> {
    if !(smf_waist > 0.0 && smf_waist.is_finite()) {
        return Err(Error::InvalidSpec(format!("fiber waist must be positive, got {smf_waist}")));
    }
    let p = field.power();
    if !(p > 0.0) {
        return Ok(0.0);
    }
    let flat = apply_mask(field, &vortex_mask(field.grid(), -ell))?;
    let ff = far_field(&flat);
    let smf = smf_mode(ff.grid(), smf_waist);
    let c = smf.overlap(&ff)?;
    Ok((c.norm_sqr() / p).clamp(0.0, 1.0))
}

/// Fiber waist that maximizes the projection of `field` at charge `ell`
/// (golden-section search over `[lo, hi]` rad/um).
pub fn optimal_smf_waist(field: &ComplexField, ell: i32, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidSpec(format!("bad waist bracket [{lo}, {hi}]")));
    }
    let flat = apply_mask(field, &vortex_mask(field.grid(), -ell))?;
    let ff = far_field(&flat);
    let score = |w: f64| -> Result<f64> { Ok(smf_mode(ff.grid(), w).overlap(&ff)?.norm_sqr()) };
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (score(c)?, score(d)?);
    while b - a > 1e-7 * (a + b) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = score(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = score(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// First diffraction order behind a fork hologram of the given period: the
/// carrier is removed and the far field is windowed to radius `pi / period`
/// around the order. Returns the windowed far field.
pub fn first_order(field: &ComplexField, grating_period: f64) -> Result<ComplexField> {
    let g = *field.grid();
    if !(grating_period >= 4.0 * g.dx) {
        return Err(Error::UnresolvablePeriod { period_um: grating_period, dx_um: g.dx });
    }
    let carrier = 2.0 * PI / grating_period;
    let demod = field.modulated(|x, _| Complex64::from_polar(1.0, -carrier * x));
    let ff = far_field(&demod);
    let r2 = (PI / grating_period).powi(2);
    Ok(ff.modulated(|kx, ky| {
        if kx * kx + ky * ky <= r2 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

//! Scalar paraxial split-step propagation along a z-invariant chip.
//!
//! Each step applies half a diffraction step in the transverse Fourier domain,
//! the phase screen `exp(i k0 (n - n_ref) dz)` together with the edge absorber,
//! and the second diffraction half. Consecutive half steps are merged, so a
//! step costs one forward/inverse transform pair.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::beam::{beam_field, focused_waist, BeamKind, BeamSpec, ObjectiveSpec};
use crate::error::{Error, Result};
use crate::fft::{freq_index, Fft2};
use crate::field::ComplexField;
use crate::grid::check_same;
use crate::waveguide::IndexProfile;

/// Chip length of the fabricated doughnut waveguide (um).
pub const CHIP_LENGTH_UM: f64 = 19_640.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpmParams {
    /// Step length (um); the run uses `length / round(length / dz)`.
    pub dz: f64,
    /// Propagation distance (um).
    pub length: f64,
    /// Reference index of the paraxial split; `None` uses the profile background.
    pub n_ref: Option<f64>,
    /// Absorbing layer thickness at each window edge (um); 0 disables it.
    pub absorber_width: f64,
    /// Super-Gaussian order of the absorption ramp.
    pub absorber_exponent: f64,
    /// Amplitude attenuation rate at the outer edge (1/um).
    pub absorber_rate: f64,
    /// Power-trace sampling interval in steps.
    pub record_every: usize,
}

impl Default for BpmParams {
    fn default() -> Self {
        BpmParams {
            dz: 2.0,
            length: CHIP_LENGTH_UM,
            n_ref: None,
            absorber_width: 6.0,
            absorber_exponent: 8.0,
            absorber_rate: 0.5,
            record_every: 50,
        }
    }
}

impl BpmParams {
    pub fn without_absorber(mut self) -> Self {
        self.absorber_width = 0.0;
        self
    }

    pub fn steps(&self) -> usize {
        ((self.length / self.dz).round() as usize).max(1)
    }

    fn validate(&self, profile: &IndexProfile) -> Result<()> {
        let g = profile.grid();
        if !(self.dz > 0.0 && self.dz <= 5.0) {
            return Err(Error::InvalidParams(format!("dz must lie in (0, 5] um, got {}", self.dz)));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidParams(format!("length must be positive, got {}", self.length)));
        }
        let limit = (g.nx as f64 * g.dx).min(g.ny as f64 * g.dy) / 4.0;
        if !(self.absorber_width >= 0.0 && self.absorber_width < limit) {
            return Err(Error::InvalidParams(format!(
                "absorber width {} um must be below {limit} um",
                self.absorber_width
            )));
        }
        if self.absorber_width > 0.0 && !(self.absorber_exponent > 0.0 && self.absorber_rate >= 0.0) {
            return Err(Error::InvalidParams("absorber needs a positive exponent and a non-negative rate".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParams("record_every must be >= 1".into()));
        }
        if let Some(n) = self.n_ref {
            if !(n > 0.0) {
                return Err(Error::InvalidParams(format!("n_ref must be positive, got {n}")));
            }
        }
        Ok(())
    }

    /// Radius inside which the absorber leaves the field untouched.
    pub fn clear_radius(&self, profile: &IndexProfile) -> f64 {
        let g = profile.grid();
        (g.nx as f64 * g.dx).min(g.ny as f64 * g.dy) / 2.0 - self.absorber_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub output: ComplexField,
    /// `(z, power / input power)` samples, starting at `z = 0`.
    pub power_trace: Vec<(f64, f64)>,
    pub params: BpmParams,
}

/// Per-axis amplitude factor of the absorber for one step.
fn absorber_axis(n: usize, d: f64, params: &BpmParams, dz: f64) -> Vec<f64> {
    let half = n as f64 * d / 2.0;
    (0..n)
        .map(|i| {
            if params.absorber_width <= 0.0 {
                return 1.0;
            }
            let x = (i as f64 - (n / 2) as f64) * d;
            let depth = x.abs() - (half - params.absorber_width);
            if depth <= 0.0 {
                1.0
            } else {
                let s = depth / params.absorber_width;
                (-params.absorber_rate * dz * s.powf(params.absorber_exponent)).exp()
            }
        })
        .collect()
}

pub fn propagate(input: &ComplexField, profile: &IndexProfile, params: &BpmParams) -> Result<PropagationResult> {
    check_same(input.grid(), profile.grid())?;
    params.validate(profile)?;
    if !input.is_finite() {
        return Err(Error::InvalidSpec("input field has non-finite samples".into()));
    }
    let g = *input.grid();
    let (nx, ny) = (g.nx, g.ny);
    let n_steps = params.steps();
    let dz = params.length / n_steps as f64;
    let k0 = g.k0();
    let n_ref = params.n_ref.unwrap_or(profile.n0());
    let k = k0 * n_ref;

    // Diffraction factors in the transposed spectral layout (row = kx).
    let mut full = Vec::with_capacity(nx * ny);
    let mut half = Vec::with_capacity(nx * ny);
    let dkx = 2.0 * PI / (nx as f64 * g.dx);
    let dky = 2.0 * PI / (ny as f64 * g.dy);
    let norm = 1.0 / (nx * ny) as f64;
    for a in 0..nx {
        let kx = freq_index(a, nx) * dkx;
        for b in 0..ny {
            let ky = freq_index(b, ny) * dky;
            let phase = -(kx * kx + ky * ky) / (2.0 * k) * dz;
            full.push(Complex64::from_polar(norm, phase));
            half.push(Complex64::from_polar(norm, 0.5 * phase));
        }
    }

    let ax = absorber_axis(nx, g.dx, params, dz);
    let ay = absorber_axis(ny, g.dy, params, dz);
    let screen: Vec<Complex64> = g
        .coords()
        .map(|(idx, _, _)| {
            let (i, j) = (idx % nx, idx / nx);
            let n = profile.values()[idx];
            Complex64::from_polar(ax[i] * ay[j], k0 * (n - n_ref) * dz)
        })
        .collect();

    let p_in = input.power();
    let frac = |p: f64| if p_in > 0.0 { p / p_in } else { 0.0 };
    let mut trace = vec![(0.0, if p_in > 0.0 { 1.0 } else { 0.0 })];

    let mut fft = Fft2::new(nx, ny);
    let mut data = input.samples().to_vec();
    let mut spec = vec![Complex64::default(); nx * ny];

    let diffract = |fft: &mut Fft2, data: &mut Vec<Complex64>, spec: &mut Vec<Complex64>, factor: &[Complex64]| {
        fft.forward_t(data, spec);
        spec.iter_mut().zip(factor).for_each(|(s, f)| *s *= f);
        fft.inverse_t(spec, data);
    };

    diffract(&mut fft, &mut data, &mut spec, &half);
    for step in 1..=n_steps {
        data.iter_mut().zip(&screen).for_each(|(e, s)| *e *= s);
        let last = step == n_steps;
        if step % params.record_every == 0 || last {
            // Diffraction is unitary, so the power here equals the power at
            // the end of the step.
            let p: f64 = data.iter().map(|c| c.norm_sqr()).sum::<f64>() * g.cell_area();
            trace.push((step as f64 * dz, frac(p)));
        }
        diffract(&mut fft, &mut data, &mut spec, if last { &half } else { &full });
    }

    let output = ComplexField::from_samples(g, data)?;
    Ok(PropagationResult { output, power_trace: trace, params: *params })
}

/// Output power inside a centered aperture relative to the input power.
pub fn transmission(result: &PropagationResult, input: &ComplexField, aperture_radius: f64) -> Result<f64> {
    let g = result.output.grid();
    let half = (g.nx as f64 * g.dx).min(g.ny as f64 * g.dy) / 2.0;
    let clear = half - result.params.absorber_width;
    if !(aperture_radius > 0.0 && aperture_radius <= clear) {
        return Err(Error::InvalidRadii(format!(
            "aperture radius {aperture_radius} um must lie in (0, {clear}] um"
        )));
    }
    let p_in = input.power();
    if p_in <= 0.0 {
        return Ok(0.0);
    }
    let r2 = aperture_radius * aperture_radius;
    let s = result.output.samples();
    let inside: f64 = g
        .coords()
        .filter(|&(_, x, y)| x * x + y * y <= r2)
        .map(|(k, _, _)| s[k].norm_sqr())
        .sum::<f64>()
        * g.cell_area();
    Ok((inside / p_in).clamp(0.0, 1.0))
}

/// Efficiency aperture radius (um): the 8 um ring plus its evanescent tails.
pub const DEFAULT_APERTURE_UM: f64 = 10.0;

/// Imperfections of the free-space launch into the chip.
///
/// A perfectly centered beam in the rotationally symmetric guide cannot change
/// its charge, so any conversion of higher orders into the first-order pair
/// comes from the launch: a lateral misalignment of the focused spot and a
/// small first-order admixture left by the hologram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Launch {
    /// Beam-axis offset from the guide axis (um).
    pub offset: (f64, f64),
    /// Power fraction of `LG_{0, sign(ell)}` mixed into every component with
    /// `|ell| >= 2`, with the component's waist and center.
    pub first_order_admixture: f64,
}

impl Default for Launch {
    fn default() -> Self {
        Launch { offset: (1.5, 0.0), first_order_admixture: 0.0045 }
    }
}

impl Launch {
    pub fn ideal() -> Self {
        Launch { offset: (0.0, 0.0), first_order_admixture: 0.0 }
    }
}

/// Facet field of a weighted superposition of beams, normalized to unit power.
pub fn launch_field(grid: &crate::grid::Grid, beams: &[BeamSpec], launch: &Launch) -> Result<ComplexField> {
    let eps = launch.first_order_admixture;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParams(format!("admixture must lie in [0, 1), got {eps}")));
    }
    if beams.is_empty() {
        return Err(Error::EmptySuperposition);
    }
    let mut total = ComplexField::zeros(*grid);
    for b in beams {
        let center = (b.center.0 + launch.offset.0, b.center.1 + launch.offset.1);
        let spec = BeamSpec { center, ..*b };
        if spec.kind == BeamKind::Lg && spec.ell.abs() >= 2 && eps > 0.0 {
            let main = beam_field(grid, &spec)?;
            let stray = beam_field(grid, &BeamSpec { ell: spec.ell.signum(), p: 0, ..spec })?;
            total.add_scaled(Complex64::new((1.0 - eps).sqrt(), 0.0), &main)?;
            total.add_scaled(Complex64::new(eps.sqrt(), 0.0), &stray)?;
        } else {
            total.add_scaled(Complex64::new(1.0, 0.0), &beam_field(grid, &spec)?)?;
        }
    }
    if !(total.power() > 0.0) {
        return Err(Error::EmptySuperposition);
    }
    Ok(total.normalized())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beam: BeamSpec,
    pub objective: ObjectiveSpec,
    /// Beam waist at the chip facet (um).
    pub waist: f64,
    pub efficiency: f64,
    pub output: ComplexField,
}

/// Every beam focused by every objective and launched into the chip. Rows
/// follow `beams` outer, `objectives` inner, regardless of scheduling.
pub fn coupling_sweep(
    beams: &[BeamSpec],
    objectives: &[ObjectiveSpec],
    input_waist_mm: f64,
    profile: &IndexProfile,
    params: &BpmParams,
    launch: &Launch,
    aperture_radius: f64,
) -> Result<Vec<SweepRow>> {
    if beams.is_empty() || objectives.is_empty() {
        return Err(Error::InvalidParams("coupling sweep needs at least one beam and one objective".into()));
    }
    let g = *profile.grid();
    let jobs: Vec<(BeamSpec, ObjectiveSpec)> = beams
        .iter()
        .flat_map(|b| objectives.iter().map(move |o| (*b, o.clone())))
        .collect();
    jobs.into_par_iter()
        .map(|(beam, objective)| {
            let waist = focused_waist(&objective, input_waist_mm, g.wavelength);
            let spec = BeamSpec { waist, ..beam };
            let input = if beam.amplitude == 0.0 {
                ComplexField::zeros(g)
            } else {
                launch_field(&g, &[spec], launch)?
            };
            let res = propagate(&input, profile, params)?;
            let efficiency = transmission(&res, &input, aperture_radius)?;
            Ok(SweepRow { beam, objective, waist, efficiency, output: res.output })
        })
        .collect()
}

//! Measurement emulation: OAM power spectra, phase winding, interference with a
//! reference beam and ring-power integration.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;

/// Number of azimuthal samples per radius.
pub const AZIMUTHAL_SAMPLES: usize = 720;

/// Half-width (in samples) of the separable Lagrange interpolation stencil.
const STENCIL_HALF: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct OamSpectrum {
    pub l_min: i32,
    pub l_max: i32,
    /// Power fraction per charge, indexed from `l_min`.
    pub p: Vec<f64>,
}

impl OamSpectrum {
    pub fn get(&self, ell: i32) -> f64 {
        if ell < self.l_min || ell > self.l_max {
            0.0
        } else {
            self.p[(ell - self.l_min) as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Charge carrying the largest weight (lowest charge on ties).
    pub fn argmax(&self) -> i32 {
        let mut best = self.l_min;
        let mut val = f64::NEG_INFINITY;
        for (k, &v) in self.p.iter().enumerate() {
            if v > val {
                val = v;
                best = self.l_min + k as i32;
            }
        }
        best
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.p.iter().enumerate().map(move |(k, &v)| (self.l_min + k as i32, v))
    }

    /// Spectrum of the mirror field: `P'(ell) = P(-ell)`.
    pub fn reflected(&self) -> OamSpectrum {
        let mut p = self.p.clone();
        p.reverse();
        OamSpectrum { l_min: -self.l_max, l_max: -self.l_min, p }
    }
}

/// 6-point Lagrange weights for fractional offset `t` in `[0, 1)` at nodes
/// `-2..=3`.
fn lagrange_weights(t: f64) -> [f64; 2 * STENCIL_HALF] {
    let mut w = [0.0; 2 * STENCIL_HALF];
    for (a, wa) in w.iter_mut().enumerate() {
        let xa = a as f64 - (STENCIL_HALF as f64 - 1.0);
        let mut v = 1.0;
        for b in 0..2 * STENCIL_HALF {
            if b != a {
                let xb = b as f64 - (STENCIL_HALF as f64 - 1.0);
                v *= (t - xb) / (xa - xb);
            }
        }
        *wa = v;
    }
    w
}

/// High-order interpolation of a field at `(x, y)`; the stencil must lie on
/// the grid (callers restrict radii accordingly).
fn interpolate(field: &ComplexField, x: f64, y: f64) -> Complex64 {
    let g = field.grid();
    let (fi, fj) = g.fractional_index(x, y);
    let (i0, j0) = (fi.floor(), fj.floor());
    let wx = lagrange_weights(fi - i0);
    let wy = lagrange_weights(fj - j0);
    let ib = i0 as isize - (STENCIL_HALF as isize - 1);
    let jb = j0 as isize - (STENCIL_HALF as isize - 1);
    let s = field.samples();
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, &wyb) in wy.iter().enumerate() {
        let j = (jb + b as isize) as usize;
        let row = &s[j * g.nx..(j + 1) * g.nx];
        let mut racc = Complex64::new(0.0, 0.0);
        for (a, &wxa) in wx.iter().enumerate() {
            racc += row[(ib + a as isize) as usize] * wxa;
        }
        acc += racc * wyb;
    }
    acc
}

/// Largest radius at which the interpolation stencil stays on the grid.
pub fn analysis_radius(grid: &Grid) -> f64 {
    let hx = (grid.nx / 2 - STENCIL_HALF - 1) as f64 * grid.dx;
    let hy = (grid.ny / 2 - STENCIL_HALF - 1) as f64 * grid.dy;
    hx.min(hy)
}

/// Azimuthal Fourier decomposition about the grid center.
///
/// `P(ell) = 2 pi int r |c_ell(r)|^2 dr / P_total`, with
/// `c_ell(r) = (1/2pi) oint E(r, phi) e^{-i ell phi} dphi` evaluated from
/// [`AZIMUTHAL_SAMPLES`] interpolated samples per radius and one radius per
/// grid pitch. The radial trapezoid carries its leading endpoint correction.
pub fn oam_spectrum(field: &ComplexField, l_max: i32) -> Result<OamSpectrum> {
    if l_max < 1 {
        return Err(Error::InvalidSpec(format!("l_max must be >= 1, got {l_max}")));
    }
    let g = *field.grid();
    let n_phi = AZIMUTHAL_SAMPLES;
    let h = g.dx.min(g.dy);
    let n_r = (analysis_radius(&g) / h).floor() as usize;
    let n_l = (2 * l_max + 1) as usize;

    let fft = FftPlanner::new().plan_fft_forward(n_phi);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_phi];
    let trig: Vec<(f64, f64)> =
        (0..n_phi).map(|k| (2.0 * PI * k as f64 / n_phi as f64).sin_cos()).collect();

    let mut radial = vec![0.0; n_l];
    let mut total = 0.0;
    for m in 1..=n_r {
        let r = m as f64 * h;
        for (b, &(s, c)) in buf.iter_mut().zip(&trig) {
            *b = interpolate(field, r * c, r * s);
        }
        fft.process(&mut buf);
        let norm = 1.0 / (n_phi as f64 * n_phi as f64);
        // Trapezoid weight: the far endpoint gets half weight.
        let wt = if m == n_r { 0.5 } else { 1.0 } * r;
        for (k, acc) in radial.iter_mut().enumerate() {
            let ell = k as i64 - l_max as i64;
            let idx = ell.rem_euclid(n_phi as i64) as usize;
            *acc += wt * buf[idx].norm_sqr() * norm;
        }
        total += wt * buf.iter().map(|c| c.norm_sqr()).sum::<f64>() * norm;
    }
    // Euler-Maclaurin: int_0 r g(r) dr = h sum + (h^2/12) g(0) + O(h^4); only
    // ell = 0 survives at the origin, where c_0(0) = E(0).
    let g0 = interpolate(field, 0.0, 0.0).norm_sqr();
    let scale = 2.0 * PI * h;
    let mut p: Vec<f64> = radial.iter().map(|v| v * scale).collect();
    p[l_max as usize] += 2.0 * PI * h * h / 12.0 * g0;
    let polar_total = total * scale + 2.0 * PI * h * h / 12.0 * g0;

    let denom = field.power().max(polar_total);
    for v in p.iter_mut() {
        *v = if denom > 0.0 { (*v / denom).clamp(0.0, 1.0) } else { 0.0 };
    }
    Ok(OamSpectrum { l_min: -l_max, l_max, p })
}

/// Phase winding of the field along the circle of given radius, in units of 2 pi.
pub fn net_topological_charge(field: &ComplexField, radius: f64) -> Result<i32> {
    let g = field.grid();
    if !(radius > 0.0) || radius > analysis_radius(g) {
        return Err(Error::InvalidRadii(format!("sampling radius {radius} not inside the grid")));
    }
    let peak = field.samples().iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let floor = 1e-8 * peak;
    let n = 4 * AZIMUTHAL_SAMPLES;
    let mut vals = Vec::with_capacity(n);
    for k in 0..n {
        let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
        let v = interpolate(field, radius * c, radius * s);
        if !(v.norm_sqr() > floor) {
            return Err(Error::InsufficientIntensity { radius_um: radius });
        }
        vals.push(v);
    }
    let mut winding = 0.0;
    for k in 0..n {
        let a = vals[k];
        let b = vals[(k + 1) % n];
        winding += (b * a.conj()).arg();
    }
    Ok((winding / (2.0 * PI)).round() as i32)
}

/// Real-valued map on a grid (intensities, count images).
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl IntensityMap {
    pub fn of(field: &ComplexField) -> Self {
        IntensityMap { grid: *field.grid(), values: field.intensity() }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Reference beam for [`interfere`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    /// Waist (um).
    pub waist: f64,
    /// Wavefront radius of curvature (mm); zero means a flat wavefront.
    pub curvature_mm: f64,
    pub phase: f64,
    /// Amplitude relative to the field: the reference carries
    /// `amplitude^2 * power(field)`.
    pub amplitude: f64,
}

impl Reference {
    pub fn flat(waist: f64) -> Self {
        Reference { waist, curvature_mm: 0.0, phase: 0.0, amplitude: 1.0 }
    }
}

/// `|E + E_ref|^2` with a spherical-phase Gaussian reference on the grid axis.
pub fn interfere(field: &ComplexField, reference: &Reference) -> Result<IntensityMap> {
    if !(reference.waist > 0.0) {
        return Err(Error::InvalidSpec(format!("reference waist must be positive, got {}", reference.waist)));
    }
    let g = *field.grid();
    let k0 = g.k0();
    let w2 = reference.waist * reference.waist;
    let curv = if reference.curvature_mm != 0.0 {
        k0 / (2.0 * reference.curvature_mm * 1e3)
    } else {
        0.0
    };
    let raw = ComplexField::from_fn(g, |x, y| {
        let r2 = x * x + y * y;
        Complex64::from_polar((-r2 / w2).exp(), curv * r2 + reference.phase)
    });
    let rp = raw.power();
    let scale = if rp > 0.0 { reference.amplitude * (field.power() / rp).sqrt() } else { 0.0 };
    let values = field
        .samples()
        .iter()
        .zip(raw.samples())
        .map(|(e, r)| (e + r * scale).norm_sqr())
        .collect();
    Ok(IntensityMap { grid: g, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingMethod {
    RadialTrapezoid,
    AnnulusIntegral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingReport {
    pub inner_power: f64,
    pub outer_power: f64,
    pub ratio: f64,
    pub method: RingMethod,
    pub radii: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingAnalysis {
    pub trapezoid: RingReport,
    pub annulus: RingReport,
}

/// Outer/inner ring power by the two estimators: a trapezoid along the
/// radial cut at angle `cut_angle` scaled by the ring circumferences, and a
/// direct integral over the annuli `[r1, r2)` and `[r3, r4)`.
pub fn ring_power_ratio(field: &ComplexField, radii: [f64; 4], cut_angle: f64) -> Result<RingAnalysis> {
    let [r1, r2, r3, r4] = radii;
    if !(0.0 < r1 && r1 < r2 && r2 < r3 && r3 < r4) {
        return Err(Error::InvalidRadii(format!("need 0 < r1 < r2 < r3 < r4, got {radii:?}")));
    }
    let g = field.grid();
    if r4 > analysis_radius(g) {
        return Err(Error::InvalidRadii(format!("outer radius {r4} exceeds the window")));
    }

    let (mut a_in, mut a_out) = (0.0, 0.0);
    for (k, x, y) in g.coords() {
        let r = (x * x + y * y).sqrt();
        let v = field.samples()[k].norm_sqr();
        if r >= r1 && r < r2 {
            a_in += v;
        } else if r >= r3 && r < r4 {
            a_out += v;
        }
    }
    a_in *= g.cell_area();
    a_out *= g.cell_area();
    let annulus = RingReport {
        inner_power: a_in,
        outer_power: a_out,
        ratio: if a_in > 0.0 { a_out / a_in } else { 0.0 },
        method: RingMethod::AnnulusIntegral,
        radii,
    };

    let (s, c) = cut_angle.sin_cos();
    let h = g.dx.min(g.dy) / 2.0;
    let line = |lo: f64, hi: f64| -> f64 {
        let n = ((hi - lo) / h).ceil().max(1.0) as usize;
        let step = (hi - lo) / n as f64;
        (0..=n)
            .map(|k| {
                let r = lo + k as f64 * step;
                let v = interpolate(field, r * c, r * s).norm_sqr();
                if k == 0 || k == n {
                    0.5 * v
                } else {
                    v
                }
            })
            .sum::<f64>()
            * step
    };
    let t_in = 2.0 * PI * 0.5 * (r1 + r2) * line(r1, r2);
    let t_out = 2.0 * PI * 0.5 * (r3 + r4) * line(r3, r4);
    let trapezoid = RingReport {
        inner_power: t_in,
        outer_power: t_out,
        ratio: if t_in > 0.0 { t_out / t_in } else { 0.0 },
        method: RingMethod::RadialTrapezoid,
        radii,
    };
    Ok(RingAnalysis { trapezoid, annulus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::{lg_mode, BeamSpec};

    fn grid() -> Grid {
        Grid::default_chip()
    }

    #[test]
    fn lagrange_reproduces_quintics() {
        let w = lagrange_weights(0.37);
        let poly = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) + 0.1 * x.powi(5);
        let approx: f64 = w.iter().enumerate().map(|(a, wa)| wa * poly(a as f64 - 2.0)).sum();
        assert!((approx - poly(0.37)).abs() < 1e-12);
    }

    #[test]
    fn pure_charge_spectrum() {
        let e = lg_mode(&grid(), &BeamSpec::lg(1, 0, 5.0)).unwrap();
        let s = oam_spectrum(&e, 6).unwrap();
        assert!((s.get(1) - 1.0).abs() < 1e-6, "P(1) = {}", s.get(1));
        assert!(s.total() <= 1.0 + 1e-9);
    }

    #[test]
    fn gaussian_spectrum_uses_endpoint_correction() {
        let e = lg_mode(&grid(), &BeamSpec::lg(0, 0, 5.0)).unwrap();
        let s = oam_spectrum(&e, 3).unwrap();
        assert!((s.get(0) - 1.0).abs() < 1e-6, "P(0) = {}", s.get(0));
    }

    #[test]
    fn rejects_bad_l_max() {
        let e = ComplexField::zeros(grid());
        assert!(oam_spectrum(&e, 0).is_err());
    }

    #[test]
    fn winding_of_vortices() {
        let g = grid();
        let e = lg_mode(&g, &BeamSpec::lg(1, 0, 5.0)).unwrap();
        let r = crate::beam::ring_radius(1, 5.0);
        assert_eq!(net_topological_charge(&e, r).unwrap(), 1);
        assert_eq!(net_topological_charge(&e.conj(), r).unwrap(), -1);
        let e3 = lg_mode(&g, &BeamSpec::lg(-3, 0, 5.0)).unwrap();
        assert_eq!(net_topological_charge(&e3, 5.0).unwrap(), -3);
    }

    #[test]
    fn winding_needs_light() {
        let e = ComplexField::zeros(grid());
        assert!(matches!(
            net_topological_charge(&e, 3.0),
            Err(Error::InsufficientIntensity { .. })
        ));
    }

    #[test]
    fn self_interference_quadruples() {
        let g = grid();
        let w = 5.0;
        let e = crate::beam::beam_field(&g, &BeamSpec::gauss(w)).unwrap();
        let map = interfere(&e, &Reference::flat(w)).unwrap();
        for (v, s) in map.values.iter().zip(e.samples()) {
            assert!((v - 4.0 * s.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_radii_must_be_ordered() {
        let e = ComplexField::zeros(grid());
        assert!(ring_power_ratio(&e, [1.0, 3.0, 2.0, 4.0], 0.0).is_err());
        assert!(ring_power_ratio(&e, [0.0, 1.0, 2.0, 4.0], 0.0).is_err());
    }

    #[test]
    fn empty_outer_annulus() {
        let e = lg_mode(&grid(), &BeamSpec::lg(1, 0, 3.0)).unwrap();
        let rep = ring_power_ratio(&e, [0.5, 5.0, 20.0, 25.0], 0.0).unwrap();
        assert!(rep.annulus.ratio < 1e-3);
        assert!(rep.trapezoid.ratio < 1e-3);
    }
}

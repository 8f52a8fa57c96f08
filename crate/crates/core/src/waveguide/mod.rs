//! Index profiles of written waveguides and their scalar guided modes.
//!
//! Modes solve `(lap + k0^2 n^2) psi = beta^2 psi` with the 5-point Laplacian
//! and `psi = 0` on the outermost row and column of the grid, so that the
//! solved interior is symmetric under quarter turns about the grid center.

mod lobpcg;
mod profile;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{oam_spectrum, OamSpectrum};
use crate::error::{Error, Result};
use crate::fft::Dst2;
use crate::field::ComplexField;
use crate::grid::Grid;

pub use profile::{
    doughnut_profile, step_fiber_profile, v_number, CoreShape, DoughnutGeometry, IndexProfile,
    DEFAULT_BACKGROUND_INDEX, DEFAULT_DOUGHNUT_DELTA_N,
};

use lobpcg::{lobpcg, LobpcgOptions, Precond, SymOp};

#[derive(Debug, Clone, PartialEq)]
pub struct GuidedMode {
    /// Real-valued, unit-power mode field.
    pub field: ComplexField,
    pub n_eff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Seed for the random starting block.
    pub seed: u64,
    /// Residual target relative to `k0^2 n0^2`.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Extra block vectors beyond the requested count.
    pub guard: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { seed: 0x0a11_ce5e_ed00_0001, rel_tol: 1e-10, max_iter: 3000, guard: 3 }
    }
}

/// Shifted operator `-lap - k0^2 (n^2 - n0^2)` on the grid interior.
struct ShiftedHelmholtz {
    mx: usize,
    my: usize,
    cx: f64,
    cy: f64,
    potential: Vec<f64>,
}

impl SymOp for ShiftedHelmholtz {
    fn dim(&self) -> usize {
        self.mx * self.my
    }

    fn apply(&mut self, x: &[f64], out: &mut [f64]) {
        let (mx, my) = (self.mx, self.my);
        let diag = 2.0 * (self.cx + self.cy);
        for b in 0..my {
            let row = b * mx;
            for a in 0..mx {
                let k = row + a;
                let mut nb = 0.0;
                let mut nby = 0.0;
                if a > 0 {
                    nb += x[k - 1];
                }
                if a + 1 < mx {
                    nb += x[k + 1];
                }
                if b > 0 {
                    nby += x[k - mx];
                }
                if b + 1 < my {
                    nby += x[k + mx];
                }
                out[k] = (diag - self.potential[k]) * x[k] - self.cx * nb - self.cy * nby;
            }
        }
    }
}

/// Exact inverse of `-lap + tau` through the sine transform.
struct LaplaceInverse {
    dst: Dst2,
    inv_eig: Vec<f64>,
}

impl LaplaceInverse {
    fn new(mx: usize, my: usize, dx: f64, dy: f64, tau: f64) -> Self {
        let half = std::f64::consts::FRAC_PI_2;
        let ex: Vec<f64> = (1..=mx)
            .map(|k| 4.0 / (dx * dx) * (half * k as f64 / (mx + 1) as f64).sin().powi(2))
            .collect();
        let ey: Vec<f64> = (1..=my)
            .map(|k| 4.0 / (dy * dy) * (half * k as f64 / (my + 1) as f64).sin().powi(2))
            .collect();
        let norm = 4.0 / ((mx + 1) * (my + 1)) as f64;
        let mut inv_eig = Vec::with_capacity(mx * my);
        for eyk in &ey {
            for exk in &ex {
                inv_eig.push(norm / (exk + eyk + tau));
            }
        }
        LaplaceInverse { dst: Dst2::new(mx, my), inv_eig }
    }
}

impl Precond for LaplaceInverse {
    fn apply(&mut self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
        self.dst.apply(out);
        out.iter_mut().zip(&self.inv_eig).for_each(|(o, s)| *o *= s);
        self.dst.apply(out);
    }
}

fn potential(profile: &IndexProfile) -> (Vec<f64>, usize, usize) {
    let g = profile.grid();
    let k0 = g.k0();
    let n0 = profile.n0();
    let (mx, my) = (g.nx - 1, g.ny - 1);
    let mut v = Vec::with_capacity(mx * my);
    for j in 1..g.ny {
        for i in 1..g.nx {
            let n = profile.at(i, j);
            v.push(k0 * k0 * (n * n - n0 * n0));
        }
    }
    (v, mx, my)
}

/// Guided modes sorted by descending effective index.
pub fn solve_modes(profile: &IndexProfile, k_modes: usize) -> Result<Vec<GuidedMode>> {
    solve_modes_with(profile, k_modes, &SolverOptions::default())
}

pub fn solve_modes_with(
    profile: &IndexProfile,
    k_modes: usize,
    opts: &SolverOptions,
) -> Result<Vec<GuidedMode>> {
    if k_modes == 0 {
        return Err(Error::InvalidSpec("k_modes must be >= 1".into()));
    }
    let g = *profile.grid();
    let k0 = g.k0();
    let n0 = profile.n0();
    let (pot, mx, my) = potential(profile);
    let v_max = pot.iter().cloned().fold(0.0, f64::max);
    // Without a raised index the shifted operator is positive definite.
    if !(v_max > 0.0) {
        return Err(Error::NoGuidedMode);
    }

    let mut op = ShiftedHelmholtz {
        mx,
        my,
        cx: 1.0 / (g.dx * g.dx),
        cy: 1.0 / (g.dy * g.dy),
        potential: pot,
    };
    let mut pre = LaplaceInverse::new(mx, my, g.dx, g.dy, v_max);

    let block = k_modes + opts.guard;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let init: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..mx * my).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    let beta2_ref = k0 * k0 * n0 * n0;
    let tol = opts.rel_tol * beta2_ref;
    let lopts = LobpcgOptions {
        block,
        wanted: k_modes,
        tol,
        max_iter: opts.max_iter,
        cutoff: Some(0.0),
        min_iter: 30,
    };
    let res = lobpcg(&mut op, &mut pre, init, &lopts);

    let guided: Vec<usize> = (0..k_modes).filter(|&i| res.values[i] < 0.0).collect();
    if !res.converged {
        let worst = guided.iter().map(|&i| res.residuals[i]).fold(0.0, f64::max);
        if guided.is_empty() || worst >= tol {
            return Err(Error::NotConverged { iterations: res.iterations, residual: worst / beta2_ref });
        }
    }
    if guided.is_empty() {
        return Err(Error::NoGuidedMode);
    }

    let modes = guided
        .into_iter()
        .map(|i| {
            let v = &res.vectors[i];
            let mut samples = vec![Complex64::new(0.0, 0.0); g.len()];
            // Deterministic sign: the largest-magnitude sample is positive.
            let (_, big) = v.iter().fold((0.0, 0.0), |(m, s), &a| if a.abs() > m { (a.abs(), a) } else { (m, s) });
            let sign = if big < 0.0 { -1.0 } else { 1.0 };
            for b in 0..my {
                for a in 0..mx {
                    samples[g.index(a + 1, b + 1)] = Complex64::new(sign * v[b * mx + a], 0.0);
                }
            }
            let field = ComplexField::from_samples(g, samples)
                .expect("mode samples are finite")
                .normalized();
            let beta2 = beta2_ref - res.values[i];
            GuidedMode { field, n_eff: beta2.sqrt() / k0 }
        })
        .collect();
    Ok(modes)
}

/// `||(lap + k0^2 n^2) psi - beta^2 psi|| / ||beta^2 psi||` with the same
/// boundary convention as the solver.
pub fn helmholtz_residual(profile: &IndexProfile, mode: &GuidedMode) -> f64 {
    let g = profile.grid();
    let k0 = g.k0();
    let beta2 = (k0 * mode.n_eff).powi(2);
    let psi = mode.field.samples();
    let at = |i: usize, j: usize| -> Complex64 {
        if i == 0 || j == 0 || i >= g.nx || j >= g.ny {
            Complex64::new(0.0, 0.0)
        } else {
            psi[g.index(i, j)]
        }
    };
    let (mut num, mut den) = (0.0, 0.0);
    for j in 1..g.ny {
        for i in 1..g.nx {
            let c = at(i, j);
            let lap = (at(i + 1, j) + at(i - 1, j) - c * 2.0) / (g.dx * g.dx)
                + (at(i, j + 1) + at(i, j - 1) - c * 2.0) / (g.dy * g.dy);
            let n = profile.at(i, j);
            let r = lap + c * (k0 * k0 * n * n) - c * beta2;
            num += r.norm_sqr();
            den += (c * beta2).norm_sqr();
        }
    }
    (num / den).sqrt()
}

/// Azimuthal charge content of a mode field.
pub fn mode_charge_content(mode: &GuidedMode, l_max: i32) -> Result<OamSpectrum> {
    oam_spectrum(&mode.field, l_max)
}

/// Circular recombinations `(psi_a + i psi_b, psi_a - i psi_b) / sqrt(2)` of a
/// degenerate real pair, ordered so that the first carries the positive charge.
pub fn circular_pair(a: &GuidedMode, b: &GuidedMode) -> Result<(ComplexField, ComplexField)> {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let s = 1.0 / 2f64.sqrt();
    let mut plus = a.field.scaled(one * s);
    plus.add_scaled(i * s, &b.field)?;
    let mut minus = a.field.scaled(one * s);
    minus.add_scaled(-i * s, &b.field)?;
    let spec = oam_spectrum(&plus, 3)?;
    let pos: f64 = (1..=3).map(|l| spec.get(l)).sum();
    let neg: f64 = (1..=3).map(|l| spec.get(-l)).sum();
    Ok(if pos >= neg { (plus, minus) } else { (minus, plus) })
}

/// Grid used by [`solve_modes`] for a given profile; exposed for tests.
pub fn solver_grid(profile: &IndexProfile) -> Grid {
    *profile.grid()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_profile_has_no_guided_mode() {
        let p = IndexProfile::uniform(Grid::default_chip(), DEFAULT_BACKGROUND_INDEX);
        assert!(matches!(solve_modes(&p, 2), Err(Error::NoGuidedMode)));
    }

    #[test]
    fn zero_modes_rejected() {
        let p = IndexProfile::uniform(Grid::default_chip(), DEFAULT_BACKGROUND_INDEX);
        assert!(solve_modes(&p, 0).is_err());
    }

    #[test]
    fn preconditioner_inverts_laplacian() {
        let (mx, my, dx, dy, tau) = (9, 7, 0.3, 0.2, 0.5);
        let mut op = ShiftedHelmholtz { mx, my, cx: 1.0 / (dx * dx), cy: 1.0 / (dy * dy), potential: vec![-tau; mx * my] };
        let mut pre = LaplaceInverse::new(mx, my, dx, dy, tau);
        let x: Vec<f64> = (0..mx * my).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut ax = vec![0.0; mx * my];
        op.apply(&x, &mut ax);
        let mut back = vec![0.0; mx * my];
        pre.apply(&ax, &mut back);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

//! Complex scalar fields sampled on a [`Grid`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{check_same, Grid};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: Grid) -> Self {
        ComplexField { grid, samples: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_samples(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Format(format!(
                "expected {} samples for a {}x{} grid, got {}",
                grid.len(),
                grid.nx,
                grid.ny,
                samples.len()
            )));
        }
        if samples.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Format("non-finite sample".into()));
        }
        Ok(ComplexField { grid, samples })
    }

    /// Evaluates `f(x, y)` at every sample position.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let samples = grid.coords().map(|(_, x, y)| f(x, y)).collect();
        ComplexField { grid, samples }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[self.grid.index(i, j)]
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Discrete `sum |E|^2 dA`.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    /// Discrete `<self|other> = sum conj(self) * other dA`.
    pub fn overlap(&self, other: &ComplexField) -> Result<Complex64> {
        check_same(&self.grid, &other.grid)?;
        let s: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell_area())
    }

    /// `|<a|b>|^2 / (P_a P_b)`; zero when either field is empty.
    pub fn coupling_fraction(&self, other: &ComplexField) -> Result<f64> {
        let pa = self.power();
        let pb = other.power();
        let o = self.overlap(other)?;
        if pa <= 0.0 || pb <= 0.0 {
            return Ok(0.0);
        }
        Ok((o.norm_sqr() / (pa * pb)).min(1.0))
    }

    pub fn scaled(&self, c: Complex64) -> ComplexField {
        ComplexField {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s * c).collect(),
        }
    }

    pub fn conj(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s.conj()).collect(),
        }
    }

    /// Rescales to unit power. A zero field is returned unchanged.
    pub fn normalized(&self) -> ComplexField {
        let p = self.power();
        if p > 0.0 {
            self.scaled(Complex64::new(1.0 / p.sqrt(), 0.0))
        } else {
            self.clone()
        }
    }

    pub fn add_scaled(&mut self, c: Complex64, other: &ComplexField) -> Result<()> {
        check_same(&self.grid, &other.grid)?;
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += c * b;
        }
        Ok(())
    }

    /// Multiplies pointwise by `g(x, y)`.
    pub fn modulated(&self, mut g: impl FnMut(f64, f64) -> Complex64) -> ComplexField {
        let samples = self
            .grid
            .coords()
            .map(|(k, x, y)| self.samples[k] * g(x, y))
            .collect();
        ComplexField { grid: self.grid, samples }
    }

    /// Bilinear interpolation at `(x, y)`; zero outside the grid.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Complex64 {
        let (fi, fj) = self.grid.fractional_index(x, y);
        bilinear(&self.samples, self.grid.nx, self.grid.ny, fi, fj)
    }

    /// Active counter-clockwise rotation by `alpha` about the grid center,
    /// `out(r, phi) = in(r, phi - alpha)`, resampled bilinearly.
    pub fn rotated(&self, alpha: f64) -> ComplexField {
        let (s, c) = alpha.sin_cos();
        ComplexField::from_fn(self.grid, |x, y| {
            // Inverse map: rotate the output coordinate by -alpha.
            let xs = snap(c * x + s * y, self.grid.dx);
            let ys = snap(-s * x + c * y, self.grid.dy);
            self.sample_bilinear(xs, ys)
        })
    }
}

/// Removes rounding noise so that exact quarter turns land on grid nodes.
fn snap(v: f64, d: f64) -> f64 {
    let q = v / d;
    let r = q.round();
    if (q - r).abs() < 1e-9 {
        r * d
    } else {
        v
    }
}

pub(crate) fn bilinear<T>(data: &[T], nx: usize, ny: usize, fi: f64, fj: f64) -> T
where
    T: Copy + Default + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    if !(fi >= 0.0 && fj >= 0.0) {
        return T::default();
    }
    let i0 = fi.floor() as usize;
    let j0 = fj.floor() as usize;
    if i0 >= nx || j0 >= ny {
        return T::default();
    }
    let tx = fi - i0 as f64;
    let ty = fj - j0 as f64;
    let get = |i: usize, j: usize| -> T {
        if i < nx && j < ny {
            data[j * nx + i]
        } else {
            T::default()
        }
    };
    let mut acc = get(i0, j0) * ((1.0 - tx) * (1.0 - ty));
    if tx > 0.0 {
        acc = acc + get(i0 + 1, j0) * (tx * (1.0 - ty));
    }
    if ty > 0.0 {
        acc = acc + get(i0, j0 + 1) * ((1.0 - tx) * ty);
    }
    if tx > 0.0 && ty > 0.0 {
        acc = acc + get(i0 + 1, j0 + 1) * (tx * ty);
    }
    acc
}

/// Pointwise linear combination `sum c_k E_k`, optionally rescaled to unit power.
pub fn superpose(terms: &[(Complex64, &ComplexField)], normalize: bool) -> Result<ComplexField> {
    let (_, first) = terms.first().ok_or(Error::EmptySuperposition)?;
    let mut out = ComplexField::zeros(*first.grid());
    for (c, f) in terms {
        out.add_scaled(*c, f)?;
    }
    Ok(if normalize { out.normalized() } else { out })
}

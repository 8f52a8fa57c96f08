//! Two-dimensional transforms on row-major (`x` fastest) buffers.
//!
//! [`Fft2`] performs centered, unnormalized complex transforms. [`Dst2`] is a
//! type-I sine transform used to invert the Dirichlet Laplacian exactly.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Reusable plans and scratch space for `nx x ny` complex transforms.
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    transposed: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(nx);
        let inv_x = planner.plan_fft_inverse(nx);
        let fwd_y = planner.plan_fft_forward(ny);
        let inv_y = planner.plan_fft_inverse(ny);
        let scratch_len = [&fwd_x, &inv_x, &fwd_y, &inv_y]
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Fft2 {
            nx,
            ny,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
            scratch: vec![Complex64::default(); scratch_len],
            transposed: vec![Complex64::default(); nx * ny],
        }
    }

    /// Unnormalized forward transform in natural (uncentered) order.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// Unnormalized inverse transform in natural order.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    fn run(&mut self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.nx * self.ny);
        let (px, py) = if inverse {
            (&self.inv_x, &self.inv_y)
        } else {
            (&self.fwd_x, &self.fwd_y)
        };
        px.process_with_scratch(data, &mut self.scratch);
        transpose::transpose(data, &mut self.transposed, self.nx, self.ny);
        py.process_with_scratch(&mut self.transposed, &mut self.scratch);
        transpose::transpose(&self.transposed, data, self.ny, self.nx);
    }

    /// Forward transform leaving the spectrum transposed in `out`: row `kx`
    /// holds all `ky`. Saves one transpose per direction in step loops.
    pub fn forward_t(&mut self, data: &mut [Complex64], out: &mut [Complex64]) {
        assert_eq!(data.len(), self.nx * self.ny);
        self.fwd_x.process_with_scratch(data, &mut self.scratch);
        transpose::transpose(data, out, self.nx, self.ny);
        self.fwd_y.process_with_scratch(out, &mut self.scratch);
    }

    /// Inverse of [`Fft2::forward_t`] (unnormalized); `spec` is clobbered.
    pub fn inverse_t(&mut self, spec: &mut [Complex64], data: &mut [Complex64]) {
        assert_eq!(data.len(), self.nx * self.ny);
        self.inv_y.process_with_scratch(spec, &mut self.scratch);
        transpose::transpose(spec, data, self.ny, self.nx);
        self.inv_x.process_with_scratch(data, &mut self.scratch);
    }

    /// Transform of a field whose origin sits at index `(nx/2, ny/2)`, with
    /// the zero frequency placed at the same index on output.
    pub fn forward_centered(&mut self, data: &mut [Complex64]) {
        shift(data, self.nx, self.ny);
        self.forward(data);
        shift(data, self.nx, self.ny);
    }

    pub fn inverse_centered(&mut self, data: &mut [Complex64]) {
        shift(data, self.nx, self.ny);
        self.inverse(data);
        shift(data, self.nx, self.ny);
    }
}

/// Swaps quadrants. For even sizes this is its own inverse.
pub fn shift(data: &mut [Complex64], nx: usize, ny: usize) {
    let hx = nx / 2;
    let hy = ny / 2;
    for row in data.chunks_exact_mut(nx) {
        row.rotate_left(hx);
    }
    data.rotate_left(hy * nx);
}

/// Signed natural-order frequency index: `0, 1, .., n/2-1, -n/2, .., -1`.
#[inline]
pub fn freq_index(k: usize, n: usize) -> f64 {
    if k < n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Type-I discrete sine transform on the `(n-1) x (n-1)` interior of an
/// `n`-point Dirichlet grid, along both axes. Applying it twice scales by
/// `(nx/2) (ny/2)`.
pub struct Dst2 {
    mx: usize,
    my: usize,
    fft_x: Arc<dyn Fft<f64>>,
    fft_y: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    tmp: Vec<f64>,
}

impl Dst2 {
    /// `mx`, `my` are interior sizes; the odd extensions have length `2 (m + 1)`.
    pub fn new(mx: usize, my: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fft_x = planner.plan_fft_forward(2 * (mx + 1));
        let fft_y = planner.plan_fft_forward(2 * (my + 1));
        let scratch_len = fft_x.get_inplace_scratch_len().max(fft_y.get_inplace_scratch_len());
        Dst2 {
            mx,
            my,
            fft_x,
            fft_y,
            buf: vec![Complex64::default(); 2 * (mx.max(my) + 1)],
            scratch: vec![Complex64::default(); scratch_len],
            tmp: vec![0.0; mx * my],
        }
    }

    /// In-place 2-D DST-I of a row-major `mx x my` array.
    pub fn apply(&mut self, data: &mut [f64]) {
        assert_eq!(data.len(), self.mx * self.my);
        let (mx, my) = (self.mx, self.my);
        dst_rows(data, mx, my, &self.fft_x, &mut self.buf, &mut self.scratch);
        transpose::transpose(data, &mut self.tmp, mx, my);
        dst_rows(&mut self.tmp, my, mx, &self.fft_y, &mut self.buf, &mut self.scratch);
        transpose::transpose(&self.tmp, data, my, mx);
    }
}

/// `S_k = sum_j x_j sin(pi j k / (m + 1))`, two real rows packed per complex FFT.
fn dst_rows(
    data: &mut [f64],
    m: usize,
    rows: usize,
    fft: &Arc<dyn Fft<f64>>,
    buf: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    let n2 = 2 * (m + 1);
    let buf = &mut buf[..n2];
    let mut r = 0;
    while r < rows {
        let has_b = r + 1 < rows;
        buf.iter_mut().for_each(|c| *c = Complex64::default());
        for j in 0..m {
            let a = data[r * m + j];
            let b = if has_b { data[(r + 1) * m + j] } else { 0.0 };
            buf[j + 1] = Complex64::new(a, b);
            buf[n2 - 1 - j] = Complex64::new(-a, -b);
        }
        fft.process_with_scratch(buf, scratch);
        // FFT of an odd real sequence is -2i S; with z = a + i b, Z = -2i S_a + 2 S_b.
        for k in 0..m {
            let z = buf[k + 1];
            data[r * m + k] = -z.im / 2.0;
            if has_b {
                data[(r + 1) * m + k] = z.re / 2.0;
            }
        }
        r += 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_round_trip() {
        let (nx, ny) = (16, 20);
        let orig: Vec<Complex64> =
            (0..nx * ny).map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let mut data = orig.clone();
        let mut f = Fft2::new(nx, ny);
        f.forward_centered(&mut data);
        f.inverse_centered(&mut data);
        let n = (nx * ny) as f64;
        for (a, b) in orig.iter().zip(&data) {
            assert!((a - b / n).norm() < 1e-12);
        }
    }

    #[test]
    fn centered_delta_is_flat() {
        let (nx, ny) = (16, 16);
        let mut data = vec![Complex64::default(); nx * ny];
        data[(ny / 2) * nx + nx / 2] = Complex64::new(1.0, 0.0);
        Fft2::new(nx, ny).forward_centered(&mut data);
        for c in &data {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn dst_matches_direct_sum() {
        let (mx, my) = (7, 5);
        let x: Vec<f64> = (0..mx * my).map(|k| ((k * 37 % 11) as f64) - 5.0).collect();
        let mut y = x.clone();
        Dst2::new(mx, my).apply(&mut y);
        let pi = std::f64::consts::PI;
        for kj in 0..my {
            for ki in 0..mx {
                let mut s = 0.0;
                for j in 0..my {
                    for i in 0..mx {
                        s += x[j * mx + i]
                            * (pi * ((i + 1) * (ki + 1)) as f64 / (mx + 1) as f64).sin()
                            * (pi * ((j + 1) * (kj + 1)) as f64 / (my + 1) as f64).sin();
                    }
                }
                assert!((s - y[kj * mx + ki]).abs() < 1e-10, "{s} vs {}", y[kj * mx + ki]);
            }
        }
    }
}

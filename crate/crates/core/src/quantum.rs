//! Photon-number statistics of the down-conversion source and Monte-Carlo
//! formation of single-photon camera images.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;

/// Two-mode squeezed vacuum `sqrt(1 - lambda^2) sum lambda^n |n, n>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcSource {
    pub lambda: f64,
    /// Detection efficiency of the click detector that heralds arm A.
    pub herald_efficiency: f64,
}

impl SpdcSource {
    pub fn new(lambda: f64) -> Result<Self> {
        Self::with_efficiency(lambda, 1.0)
    }

    pub fn with_efficiency(lambda: f64, herald_efficiency: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::InvalidParams(format!("lambda must lie in [0, 1), got {lambda}")));
        }
        if !(herald_efficiency > 0.0 && herald_efficiency <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "herald efficiency must lie in (0, 1], got {herald_efficiency}"
            )));
        }
        Ok(SpdcSource { lambda, herald_efficiency })
    }

    /// Truncation with a neglected geometric tail below `1e-18`, which is
    /// well inside the `1e-10` requirement and keeps second moments accurate.
    pub fn default_n_max(&self) -> usize {
        let q = self.lambda * self.lambda;
        if q == 0.0 {
            return 1;
        }
        ((1e-18f64).ln() / q.ln()).ceil().max(1.0) as usize
    }
}

/// Probability mass on `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    pub p: Vec<f64>,
}

impl PhotonDistribution {
    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.p.iter().enumerate().map(|(n, p)| (n as f64 - m).powi(2) * p).sum()
    }

    /// `<n (n - 1)> / <n>^2`; zero for the vacuum.
    pub fn g2(&self) -> f64 {
        let m = self.mean();
        if m == 0.0 {
            return 0.0;
        }
        let f: f64 = self.p.iter().enumerate().map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p).sum();
        f / (m * m)
    }
}

/// Reduced state of one arm, `p(n) = (1 - lambda^2) lambda^(2n)`, truncated at
/// `n_max` (default from [`SpdcSource::default_n_max`]) and renormalized.
pub fn unheralded_distribution(source: &SpdcSource, n_max: Option<usize>) -> PhotonDistribution {
    let n_max = n_max.unwrap_or_else(|| source.default_n_max());
    let q = source.lambda * source.lambda;
    let mut p = Vec::with_capacity(n_max + 1);
    let mut term = 1.0 - q;
    for _ in 0..=n_max {
        p.push(term);
        term *= q;
    }
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    PhotonDistribution { p }
}

/// Arm-A distribution conditioned on a click in arm B, from the joint number
/// basis truncated at `n_max` in each mode.
pub fn heralded_distribution(source: &SpdcSource, n_max: Option<usize>) -> Result<PhotonDistribution> {
    let n_max = n_max.unwrap_or_else(|| source.default_n_max());
    let lambda = source.lambda;
    let eta = source.herald_efficiency;
    let norm = 1.0 - lambda * lambda;
    let mut p = vec![0.0; n_max + 1];
    for (na, pa) in p.iter_mut().enumerate() {
        for nb in 0..=n_max {
            // Joint amplitude of |na, nb>; the pair state is number-correlated.
            let amp = if na == nb { norm.sqrt() * lambda.powi(na as i32) } else { 0.0 };
            let click = 1.0 - (1.0 - eta).powi(nb as i32);
            *pa += amp * amp * click;
        }
    }
    let s: f64 = p.iter().sum();
    if !(s > 0.0) {
        return Err(Error::InvalidParams("the herald never fires for lambda = 0".into()));
    }
    p.iter_mut().for_each(|v| *v /= s);
    Ok(PhotonDistribution { p })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LightKind {
    Thermal,
    Coherent,
    Heralded,
}

/// Zero-delay second-order coherence.
pub fn g2_zero(kind: LightKind, source: &SpdcSource) -> f64 {
    match kind {
        LightKind::Thermal => 2.0,
        LightKind::Coherent => 1.0,
        LightKind::Heralded => {
            if source.lambda == 0.0 {
                0.0
            } else {
                heralded_distribution(source, None).map(|d| d.g2()).unwrap_or(0.0)
            }
        }
    }
}

/// Photon counts on the camera pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct CountImage {
    pub grid: Grid,
    pub counts: Vec<u32>,
    pub n_photons: u64,
    pub dark_counts: u64,
    pub dark_rate: f64,
    pub seed: u64,
}

impl CountImage {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Total-variation distance between the normalized counts and `|E|^2 / P`.
    pub fn total_variation(&self, field: &ComplexField) -> Result<f64> {
        if !self.grid.same_as(field.grid()) {
            return Err(Error::GridMismatch);
        }
        let total = self.total();
        let s: f64 = field.intensity().iter().sum();
        if total == 0 || !(s > 0.0) {
            return Err(Error::ZeroPowerField);
        }
        let tv = self
            .counts
            .iter()
            .zip(field.intensity())
            .map(|(&c, i)| (c as f64 / total as f64 - i / s).abs())
            .sum::<f64>();
        Ok(0.5 * tv)
    }
}

/// Monte-Carlo camera frame.
///
/// Draw order with `ChaCha8Rng::seed_from_u64(seed)`: `n_photons` uniform
/// `f64` values mapped through the cumulative pixel intensity, then one
/// Poisson draw for the dark-count total, then one uniform pixel index per
/// dark count.
pub fn iccd_image(field: &ComplexField, n_photons: u64, dark_rate: f64, seed: u64) -> Result<CountImage> {
    if !(dark_rate >= 0.0 && dark_rate.is_finite()) {
        return Err(Error::InvalidParams(format!("dark rate must be non-negative, got {dark_rate}")));
    }
    let g = *field.grid();
    let mut counts = vec![0u32; g.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if n_photons > 0 {
        let mut cdf = Vec::with_capacity(g.len());
        let mut acc = 0.0;
        for c in field.samples() {
            acc += c.norm_sqr();
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::ZeroPowerField);
        }
        for _ in 0..n_photons {
            let u = rng.random::<f64>() * acc;
            // First pixel whose cumulative intensity exceeds u.
            let k = cdf.partition_point(|&c| c <= u).min(g.len() - 1);
            counts[k] += 1;
        }
    }

    let mean = dark_rate * g.len() as f64;
    let mut dark_counts = 0u64;
    if mean > 0.0 {
        let poisson = Poisson::new(mean).map_err(|e| Error::InvalidParams(e.to_string()))?;
        dark_counts = poisson.sample(&mut rng) as u64;
        for _ in 0..dark_counts {
            counts[rng.random_range(0..g.len())] += 1;
        }
    }

    Ok(CountImage { grid: g, counts, n_photons, dark_counts, dark_rate, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_and_geometric() {
        let d = unheralded_distribution(&SpdcSource::new(0.0).unwrap(), None);
        assert_eq!(d.p[0], 1.0);
        let d = unheralded_distribution(&SpdcSource::new(0.5).unwrap(), None);
        for n in 0..10 {
            assert!((d.p[n] - 0.75 * 0.25f64.powi(n as i32)).abs() < 1e-15);
        }
        assert!((d.mean() - 1.0 / 3.0).abs() < 1e-12);
        assert!(SpdcSource::new(1.0).is_err());
    }

    #[test]
    fn truncation_rule() {
        for lambda in [0.1, 0.5, 0.9, 0.99] {
            let s = SpdcSource::new(lambda).unwrap();
            let n = s.default_n_max();
            let q: f64 = lambda * lambda;
            assert!(n as f64 >= (1e-10f64).ln() / q.ln());
            assert!(q.powi(n as i32 + 1) < 1e-10);
        }
    }

    #[test]
    fn fixed_kinds() {
        let s = SpdcSource::new(0.3).unwrap();
        assert_eq!(g2_zero(LightKind::Thermal, &s), 2.0);
        assert_eq!(g2_zero(LightKind::Coherent, &s), 1.0);
        assert_eq!(g2_zero(LightKind::Heralded, &SpdcSource::new(0.0).unwrap()), 0.0);
    }

    #[test]
    fn empty_exposure() {
        let e = ComplexField::zeros(Grid::square(16, 1.0).unwrap());
        let img = iccd_image(&e, 0, 0.0, 1).unwrap();
        assert!(img.counts.iter().all(|&c| c == 0));
        assert!(matches!(iccd_image(&e, 5, 0.0, 1), Err(Error::ZeroPowerField)));
    }
}

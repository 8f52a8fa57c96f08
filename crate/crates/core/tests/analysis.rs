use std::f64::consts::PI;

use oamchip::analysis::{interfere, net_topological_charge, oam_spectrum, ring_power_ratio, Reference};
use oamchip::beam::{beam_field, lg_mode, ring_radius, BeamSpec};
use oamchip::{Complex64, ComplexField, Grid};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::default_chip()
}

fn mixture(terms: &[(i32, u32, f64, f64, f64, f64)]) -> ComplexField {
    let g = grid();
    let mut e = ComplexField::zeros(g);
    for &(ell, p, w, cx, re, im) in terms {
        let f = beam_field(&g, &BeamSpec::lg(ell, p, w).with_center(cx, 0.3 * cx)).unwrap();
        e.add_scaled(Complex64::new(re, im), &f).unwrap();
    }
    e
}

fn term() -> impl Strategy<Value = (i32, u32, f64, f64, f64, f64)> {
    (-4i32..=4, 0u32..=1, 3.0f64..5.0, -1.5f64..1.5, -1.0f64..1.0, -1.0f64..1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn parseval_and_conjugation(terms in prop::collection::vec(term(), 1..4)) {
        let e = mixture(&terms);
        prop_assume!(e.power() > 1e-3);
        let s = oam_spectrum(&e, 12).unwrap();
        prop_assert!(s.total() >= 0.999, "sum {}", s.total());
        prop_assert!(s.total() <= 1.0 + 1e-9);
        let c = oam_spectrum(&e.conj(), 12).unwrap();
        for l in -12..=12 {
            prop_assert!((c.get(l) - s.get(-l)).abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_invariant_under_quarter_turns(terms in prop::collection::vec(term(), 1..3)) {
        let e = mixture(&terms);
        prop_assume!(e.power() > 1e-3);
        let s = oam_spectrum(&e, 8).unwrap();
        let r = oam_spectrum(&e.rotated(PI / 2.0), 8).unwrap();
        for l in -8..=8 {
            prop_assert!((s.get(l) - r.get(l)).abs() < 1e-6);
        }
    }

    #[test]
    fn winding_ignores_phase_and_scale(ell in -4i32..=4, theta in 0.0f64..std::f64::consts::TAU, scale in 0.01f64..100.0) {
        let w = 5.0;
        let e = lg_mode(&grid(), &BeamSpec::lg(ell, 0, w)).unwrap();
        let r = if ell == 0 { 2.0 } else { ring_radius(ell, w) };
        let base = net_topological_charge(&e, r).unwrap();
        prop_assert_eq!(base, ell);
        let moved = e.scaled(Complex64::from_polar(scale, theta));
        prop_assert_eq!(net_topological_charge(&moved, r).unwrap(), base);
    }
}

/// Two concentric Gaussian rings with a known power ratio.
fn two_rings(ratio: f64) -> ComplexField {
    let g = grid();
    let ring = |r0: f64| ComplexField::from_fn(g, |x, y| {
        let r = (x * x + y * y).sqrt();
        Complex64::new((-(r - r0).powi(2) / (2.0 * 0.4f64.powi(2))).exp(), 0.0)
    });
    let a = ring(3.0).normalized();
    let b = ring(8.0).normalized();
    let mut e = a;
    e.add_scaled(Complex64::new(ratio.sqrt(), 0.0), &b).unwrap();
    e
}

#[test]
fn synthetic_ring_ratio_recovered() {
    let e = two_rings(0.067);
    let a = ring_power_ratio(&e, [1.0, 5.0, 6.0, 10.5], 0.3).unwrap();
    assert!((a.annulus.ratio / 0.067 - 1.0).abs() < 0.01, "annulus ratio {}", a.annulus.ratio);
    let rel = (a.trapezoid.ratio - a.annulus.ratio).abs() / a.annulus.ratio;
    assert!(rel < 0.15, "methods differ by {rel}");
}

#[test]
fn single_ring_leaves_outer_annulus_empty() {
    let e = lg_mode(&grid(), &BeamSpec::lg(1, 0, 3.0)).unwrap();
    let a = ring_power_ratio(&e, [0.5, 6.0, 12.0, 20.0], 0.0).unwrap();
    assert!(a.annulus.ratio < 1e-3 && a.trapezoid.ratio < 1e-3);
}

/// Number of bright fringes crossed on a circle: upward crossings of the mean.
fn fringes_on_circle(map: &[f64], g: &Grid, r: f64) -> usize {
    let n = 720;
    let f = ComplexField::from_samples(*g, map.iter().map(|&v| Complex64::new(v, 0.0)).collect()).unwrap();
    let ring: Vec<f64> = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            f.sample_bilinear(r * a.cos(), r * a.sin()).re
        })
        .collect();
    let mean = ring.iter().sum::<f64>() / n as f64;
    (0..n).filter(|&k| ring[(k + n - 1) % n] < mean && ring[k] >= mean).count()
}

#[test]
fn spiral_fringes_count_the_charge_and_mirror_with_it() {
    let g = grid();
    let reference = Reference { curvature_mm: 0.05, ..Reference::flat(12.0) };
    for ell in [1, 2, 3] {
        let e = lg_mode(&g, &BeamSpec::lg(ell, 0, 5.0)).unwrap();
        let map = interfere(&e, &reference).unwrap();
        let r = ring_radius(ell, 5.0);
        assert_eq!(fringes_on_circle(&map.values, &g, r), ell as usize);
        assert_eq!(net_topological_charge(&e, r).unwrap(), ell);

        // The opposite charge gives the mirror image about the x axis.
        let m = interfere(&lg_mode(&g, &BeamSpec::lg(-ell, 0, 5.0)).unwrap(), &reference).unwrap();
        let peak = map.max();
        for j in 1..g.ny {
            for i in 0..g.nx {
                let a = map.values[g.index(i, j)];
                let b = m.values[g.index(i, g.ny - j)];
                assert!((a - b).abs() < 1e-9 * peak);
            }
        }
    }
}

use std::f64::consts::PI;

use oamchip::analysis::oam_spectrum;
use oamchip::beam::{bloch_state, lg_mode, BeamSpec};
use oamchip::{superpose, Complex64, ComplexField, Grid};
use proptest::prelude::*;

fn lg(ell: i32, p: u32) -> ComplexField {
    lg_mode(&Grid::default_chip(), &BeamSpec::lg(ell, p, 5.0)).unwrap()
}

#[test]
fn lg_family_is_orthonormal() {
    let modes: Vec<((u32, i32), ComplexField)> = (0..=3)
        .flat_map(|p| (-6..=6).map(move |l| (p, l)))
        .map(|(p, l)| ((p, l), lg(l, p)))
        .collect();
    let mut worst_off: f64 = 0.0;
    let mut worst_diag: f64 = 0.0;
    for (i, (_, a)) in modes.iter().enumerate() {
        for (_, b) in &modes[i..] {
            let o = a.overlap(b).unwrap();
            if std::ptr::eq(a, b) {
                worst_diag = worst_diag.max((o - 1.0).norm());
            } else {
                worst_off = worst_off.max(o.norm());
            }
        }
    }
    assert!(worst_diag < 1e-6, "diagonal deviation {worst_diag:e}");
    assert!(worst_off < 1e-6, "largest cross overlap {worst_off:e}");
}

#[test]
fn quarter_and_half_turns_multiply_overlap_by_charge_phase() {
    // Active counter-clockwise rotation: R E(r, phi) = E(r, phi - alpha).
    for ell in [-3, -1, 1, 2, 5] {
        let e = lg(ell, 0);
        for alpha in [PI / 2.0, PI] {
            let o = e.overlap(&e.rotated(alpha)).unwrap();
            let expected = Complex64::from_polar(1.0, -(ell as f64) * alpha);
            let dphase = (o / expected).arg().abs();
            assert!(dphase < 1e-3, "ell {ell} alpha {alpha}: phase off by {dphase}");
            assert!((o.norm() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn conjugation_flips_charge() {
    for ell in 1..=4 {
        let o = lg(-ell, 0).overlap(&lg(ell, 0).conj()).unwrap();
        assert!((o.norm() - 1.0).abs() < 1e-6 && (o.re - 1.0).abs() < 1e-6, "ell {ell}: {o}");
    }
}

#[test]
fn three_state_superposition_spectrum() {
    let (a, b, c) = (lg(0, 0), lg(1, 0), lg(-1, 0));
    let k = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let e = superpose(&[(k, &a), (k, &b), (k, &c)], false).unwrap();
    assert!((e.power() - 1.0).abs() < 1e-9);
    let s = oam_spectrum(&e, 6).unwrap();
    for l in [-1, 0, 1] {
        assert!((s.get(l) - 1.0 / 3.0).abs() < 1e-6, "P({l}) = {}", s.get(l));
    }
}

#[test]
fn two_lobe_superposition() {
    let k = Complex64::new(0.5f64.sqrt(), 0.0);
    let e = superpose(&[(k, &lg(1, 0)), (k, &lg(-1, 0))], true).unwrap();
    // Count azimuthal maxima of the intensity on the ring.
    let r = 5.0 / 2f64.sqrt();
    let n = 360;
    let ring: Vec<f64> = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            e.sample_bilinear(r * a.cos(), r * a.sin()).norm_sqr()
        })
        .collect();
    let maxima = (0..n)
        .filter(|&k| ring[k] > ring[(k + n - 1) % n] && ring[k] >= ring[(k + 1) % n])
        .count();
    assert_eq!(maxima, 2);
}

#[test]
fn bloch_poles_equator_and_phase_rotation() {
    let g = Grid::default_chip();
    let north = bloch_state(0.0, 0.0, 1, &g, 5.0).unwrap();
    assert!((oam_spectrum(&north, 4).unwrap().get(1) - 1.0).abs() < 1e-6);
    let eq0 = bloch_state(PI / 2.0, 0.0, 1, &g, 5.0).unwrap();
    let s = oam_spectrum(&eq0, 4).unwrap();
    assert!((s.get(1) - 0.5).abs() < 1e-6 && (s.get(-1) - 0.5).abs() < 1e-6);

    // A relative phase pi turns the two lobes by a quarter turn for ell = 1.
    let eq_pi = bloch_state(PI / 2.0, PI, 1, &g, 5.0).unwrap();
    let turned = eq0.rotated(PI / 2.0);
    let max = eq0.intensity().into_iter().fold(0.0, f64::max);
    let worst = eq_pi
        .intensity()
        .iter()
        .zip(turned.intensity())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9 * max.max(1.0), "mismatch {worst:e}");
}

fn small_grid() -> Grid {
    Grid::square(64, 0.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_scales_quadratically(re in -3.0f64..3.0, im in -3.0f64..3.0, ell in -3i32..=3) {
        let e = lg_mode(&small_grid(), &BeamSpec::lg(ell, 0, 4.0)).unwrap();
        let a = Complex64::new(re, im);
        let scaled = superpose(&[(a, &e)], false).unwrap();
        let expect = a.norm_sqr() * e.power();
        prop_assert!((scaled.power() - expect).abs() <= 1e-12 * expect.max(1e-300));
    }

    #[test]
    fn single_term_normalizes_to_same_ray(re in 0.1f64..3.0, im in -3.0f64..3.0, ell in -3i32..=3) {
        let e = lg_mode(&small_grid(), &BeamSpec::lg(ell, 1, 4.0)).unwrap();
        let n = superpose(&[(Complex64::new(re, im), &e)], true).unwrap();
        prop_assert!((n.power() - 1.0).abs() < 1e-12);
        prop_assert!((n.coupling_fraction(&e).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_is_hermitian(l1 in -3i32..=3, l2 in -3i32..=3, w1 in 2.0f64..5.0, w2 in 2.0f64..5.0) {
        let g = small_grid();
        let a = lg_mode(&g, &BeamSpec::lg(l1, 0, w1)).unwrap();
        let b = lg_mode(&g, &BeamSpec::lg(l2, 0, w2)).unwrap();
        let ab = a.overlap(&b).unwrap();
        let ba = b.overlap(&a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
        prop_assert!(ab.norm() <= 1.0 + 1e-12);
    }
}

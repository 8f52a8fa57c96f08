mod common;

use oamchip::beam::{beam_field, BeamSpec};
use oamchip::quantum::{
    g2_zero, heralded_distribution, iccd_image, unheralded_distribution, LightKind, SpdcSource,
};
use oamchip::Grid;

#[test]
fn thermal_statistics_of_one_arm() {
    for lambda in [0.05, 0.1, 0.3, 0.5, 0.7, 0.9] {
        let s = SpdcSource::new(lambda).unwrap();
        let d = unheralded_distribution(&s, None);
        let q = lambda * lambda;
        let mean = q / (1.0 - q);
        assert!((d.mean() - mean).abs() < 1e-10, "lambda {lambda}");
        assert!((d.variance() - mean * (1.0 + mean)).abs() < 1e-10 * (1.0 + mean * mean));
    }
    for lambda in [0.1, 0.5, 0.9] {
        let d = unheralded_distribution(&SpdcSource::new(lambda).unwrap(), None);
        assert!((d.g2() - 2.0).abs() < 1e-9, "lambda {lambda}: g2 {}", d.g2());
    }
}

#[test]
fn fixed_light_kinds() {
    let s = SpdcSource::new(0.4).unwrap();
    assert!((g2_zero(LightKind::Thermal, &s) - 2.0).abs() < 1e-9);
    assert_eq!(g2_zero(LightKind::Coherent, &s), 1.0);
}

#[test]
fn heralded_g2_matches_closed_form() {
    for eta in [1.0, 0.6, 0.1] {
        for lambda in [0.05, 0.1, 0.3, 0.5, 0.8] {
            let s = SpdcSource::with_efficiency(lambda, eta).unwrap();
            let got = heralded_distribution(&s, None).unwrap().g2();
            let want = common::heralded_g2_closed_form(lambda, eta);
            assert!((got - want).abs() < 1e-9 * want.max(1.0), "eta {eta} lambda {lambda}: {got} vs {want}");
        }
    }
}

#[test]
fn heralded_g2_rises_with_squeezing_and_vanishes_at_low_gain() {
    let ladder = [0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5];
    let g: Vec<f64> = ladder
        .iter()
        .map(|&l| g2_zero(LightKind::Heralded, &SpdcSource::new(l).unwrap()))
        .collect();
    assert!(g.windows(2).all(|w| w[1] > w[0]), "{g:?}");
    assert!(g[1] < 0.1);
    assert!(g2_zero(LightKind::Heralded, &SpdcSource::new(1e-4).unwrap()) < 1e-6);
}

#[test]
fn camera_frames() {
    let g = Grid::square(64, 1.0).unwrap();
    let e = beam_field(&g, &BeamSpec::lg(1, 0, 5.0)).unwrap();

    let img = iccd_image(&e, 1_000_000, 0.0, 42).unwrap();
    assert_eq!(img.total(), 1_000_000);
    let tv = img.total_variation(&e).unwrap();
    assert!(tv < 0.01, "total variation {tv}");

    let again = iccd_image(&e, 1_000_000, 0.0, 42).unwrap();
    assert_eq!(img, again);
    assert_ne!(img.counts, iccd_image(&e, 1_000_000, 0.0, 43).unwrap().counts);

    // Dark counts: Poisson with mean rate * pixels; check the frame average.
    let rate = 0.25;
    let frames = 400;
    let mean_expected = rate * g.len() as f64;
    let total: u64 = (0..frames).map(|s| iccd_image(&e, 10, rate, s).unwrap().dark_counts).sum();
    let mean = total as f64 / frames as f64;
    let sigma = (mean_expected / frames as f64).sqrt();
    assert!((mean - mean_expected).abs() < 5.0 * sigma, "dark mean {mean} vs {mean_expected}");
    let img = iccd_image(&e, 10, rate, 7).unwrap();
    assert_eq!(img.total(), 10 + img.dark_counts);
}

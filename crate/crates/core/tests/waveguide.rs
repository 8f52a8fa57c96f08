mod common;

use std::time::Instant;

use oamchip::analysis::oam_spectrum;
use oamchip::waveguide::{
    circular_pair, doughnut_profile, helmholtz_residual, mode_charge_content, solve_modes, step_fiber_profile,
    v_number, DoughnutGeometry, DEFAULT_BACKGROUND_INDEX,
};
use oamchip::{Error, Grid};

#[test]
fn step_fiber_matches_characteristic_equation() {
    let g = Grid::default_chip();
    let (a, dn, n0) = (3.0, 1e-3, DEFAULT_BACKGROUND_INDEX);
    assert!(v_number(g.wavelength, a, n0, dn) < 2.405);
    let profile = step_fiber_profile(&g, a, dn, n0).unwrap();
    let t = Instant::now();
    let modes = solve_modes(&profile, 2).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    assert_eq!(modes.len(), 1, "single-mode fiber returned {} modes", modes.len());
    let oracle = common::lp01_neff(g.wavelength, a, n0 + dn, n0);
    let got = modes[0].n_eff;
    assert!((got - oracle).abs() < 1e-5, "n_eff {got:.9} vs oracle {oracle:.9}");
    assert!(elapsed < 30.0, "solve took {elapsed:.1} s");
}

#[test]
fn doughnut_modes_are_converged_guided_and_paired() {
    let geom = DoughnutGeometry::default();
    let profile = doughnut_profile(&Grid::default_chip(), &geom).unwrap();
    let modes = solve_modes(&profile, 3).unwrap();
    assert!(modes.len() >= 3);
    for m in &modes {
        let r = helmholtz_residual(&profile, m);
        assert!(r < 1e-8, "residual {r:e}");
        assert!(m.n_eff > geom.background_index && m.n_eff < geom.background_index + geom.delta_n);
        // Real fields have mirror-symmetric charge content.
        let s = mode_charge_content(m, 12).unwrap();
        for l in 1..=12 {
            assert!((s.get(l) - s.get(-l)).abs() < 1e-9);
        }
    }
    for w in modes.windows(2) {
        assert!(w[0].n_eff >= w[1].n_eff);
    }
    assert!(mode_charge_content(&modes[0], 12).unwrap().get(0) >= 0.95);
    assert!((modes[1].n_eff - modes[2].n_eff).abs() < 1e-8);
    let (plus, minus) = circular_pair(&modes[1], &modes[2]).unwrap();
    assert!(oam_spectrum(&plus, 12).unwrap().get(1) >= 0.9);
    assert!(oam_spectrum(&minus, 12).unwrap().get(-1) >= 0.9);
}

#[test]
fn mode_count_grows_with_contrast() {
    let g = Grid::default_chip();
    let mut last = 0;
    for dn in [0.5e-3, 1.0e-3, 2.0e-3] {
        let geom = DoughnutGeometry { delta_n: dn, ..DoughnutGeometry::default() };
        let count = match solve_modes(&doughnut_profile(&g, &geom).unwrap(), 6) {
            Ok(m) => m.len(),
            Err(Error::NoGuidedMode) => 0,
            Err(e) => panic!("{e}"),
        };
        assert!(count >= last, "delta_n {dn}: {count} modes after {last}");
        last = count;
    }
    assert!(last >= 3);
}

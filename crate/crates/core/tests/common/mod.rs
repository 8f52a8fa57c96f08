//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `J_n(x)` from the Bessel integral over one full period; the trapezoid rule
/// converges geometrically for periodic analytic integrands.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = 256;
    (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum::<f64>()
        / m as f64
}

/// `K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt`, trapezoid on the half line.
pub fn bessel_k(n: i32, x: f64) -> f64 {
    let h = 1e-3;
    let mut sum = 0.5 * (-x).exp();
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        let v = (-x * t.cosh()).exp() * (n as f64 * t).cosh();
        sum += v;
        if v < 1e-300 || x * t.cosh() > 800.0 {
            break;
        }
        k += 1;
    }
    sum * h
}

/// Effective index of LP01 in a step fiber from the scalar characteristic
/// equation `u J1(u)/J0(u) = w K1(w)/K0(w)`, `u^2 + w^2 = V^2`, by bisection.
pub fn lp01_neff(wavelength: f64, a: f64, n_core: f64, n_clad: f64) -> f64 {
    let k0 = 2.0 * PI / wavelength;
    let v = k0 * a * (n_core * n_core - n_clad * n_clad).sqrt();
    let f = |u: f64| {
        let w = (v * v - u * u).sqrt();
        u * bessel_j(1, u) / bessel_j(0, u) - w * bessel_k(1, w) / bessel_k(0, w)
    };
    let (mut lo, mut hi) = (1e-9 * v, v * (1.0 - 1e-12));
    assert!(f(lo) < 0.0 && f(hi) > 0.0, "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    ((k0 * n_core).powi(2) - (u / a).powi(2)).sqrt() / k0
}

/// Closed-form heralded `g2` for a click herald of efficiency `eta`, from the
/// geometric moment sums `S0 = 1/(1-x)`, `S1 = x/(1-x)^2`, `S2 = 2x^2/(1-x)^3`
/// evaluated at `q = lambda^2` and `q (1 - eta)`.
pub fn heralded_g2_closed_form(lambda: f64, eta: f64) -> f64 {
    let q = lambda * lambda;
    let qp = q * (1.0 - eta);
    let s0 = |x: f64| 1.0 / (1.0 - x);
    let s1 = |x: f64| x / (1.0 - x).powi(2);
    let s2 = |x: f64| 2.0 * x * x / (1.0 - x).powi(3);
    (s2(q) - s2(qp)) * (s0(q) - s0(qp)) / (s1(q) - s1(qp)).powi(2)
}

//! Closed-form reference solutions for the benchmarks.

use std::f64::consts::PI;

/// Frequency factor applied to every mode of the bar series by default.
pub const DEFAULT_OMEGA_FACTOR: f64 = 1.0 / 0.95;

/// Longitudinal displacement of a bar fixed at `x = 0`, free at `x = l`, released with uniform
/// velocity `v0`; partial sum over at most `n_terms` modes.
pub fn analytical_bar_displacement(x: f64, t: f64, v0: f64, c: f64, l: f64, n_terms: usize) -> f64 {
    analytical_bar_displacement_with_factor(x, t, v0, c, l, n_terms, DEFAULT_OMEGA_FACTOR)
}

/// Series with `omega_n = factor (2n + 1) pi c / (2 l)`. Stops early once the
/// term bound `2 v0 c / (l omega_n^2)` drops below `1e-12 l`.
pub fn analytical_bar_displacement_with_factor(
    x: f64,
    t: f64,
    v0: f64,
    c: f64,
    l: f64,
    n_terms: usize,
    factor: f64,
) -> f64 {
    let mut u = 0.0;
    for n in 0..n_terms.max(1) {
        let w = factor * (2 * n + 1) as f64 * PI * c / (2.0 * l);
        let amp = 2.0 * v0 * c / (l * w * w);
        u += amp * (w * x / c).sin() * (w * t).sin();
        if amp.abs() < 1e-12 * l {
            break;
        }
    }
    u
}

/// Half-sine load period from the bending-stiffness formula, evaluated as printed:
/// `3.5156 / (2 pi l^2) * sqrt(12 rho / (E b h^3))`.
pub fn beam_force_period(e: f64, rho: f64, l: f64, b: f64, h: f64) -> f64 {
    3.5156 / (2.0 * PI * l * l) * (12.0 * rho / (e * b * h.powi(3))).sqrt()
}

/// First bending period of an Euler-Bernoulli cantilever,
/// `2 pi l^2 / 3.5156 * sqrt(12 rho / (E h^2))`.
pub fn cantilever_first_period(e: f64, rho: f64, l: f64, h: f64) -> f64 {
    2.0 * PI * l * l / 3.5156 * (12.0 * rho / (e * h * h)).sqrt()
}

/// Fundamental period of a thin square plate of side `a` clamped on all edges
/// (frequency parameter 35.99).
pub fn clamped_plate_first_period(e: f64, nu: f64, rho: f64, a: f64, h: f64) -> f64 {
    let d = e * h.powi(3) / (12.0 * (1.0 - nu * nu));
    let omega = 35.99 / (a * a) * (d / (rho * h)).sqrt();
    2.0 * PI / omega
}

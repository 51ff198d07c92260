//! Independent reference evaluations shared by the integration tests.
//! Power series are summed directly; they are accurate for moderate `|w|`.

#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn harmonic(k: u32) -> f64 {
    (1..=k).map(|j| 1.0 / f64::from(j)).sum()
}

/// `Σ_k s^k (w/2)^{2k+m}/(k!(k+m)!)` with `s = ±1`.
fn bessel_series(m: u32, w: Complex64, sign: f64) -> Complex64 {
    let q = sign * (0.5 * w) * (0.5 * w);
    let mut term = (0.5 * w).powu(m) / factorial(m);
    let mut sum = term;
    for k in 1..400u32 {
        term = term * q / (f64::from(k) * f64::from(k + m));
        sum += term;
        if term.norm() < 1e-18 * sum.norm() && f64::from(k) > w.norm() {
            break;
        }
    }
    sum
}

pub fn series_i(m: u32, w: Complex64) -> Complex64 {
    bessel_series(m, w, 1.0)
}

pub fn series_j(m: u32, w: Complex64) -> Complex64 {
    bessel_series(m, w, -1.0)
}

/// Neumann function of integer order from its ascending series.
pub fn series_y(n: u32, w: Complex64) -> Complex64 {
    let half = 0.5 * w;
    let q = half * half;
    let mut first = Complex64::new(0.0, 0.0);
    if n > 0 {
        let mut term = Complex64::new(factorial(n - 1), 0.0);
        first = term;
        for k in 1..n {
            term = term * q / (f64::from(k) * f64::from(n - k));
            first += term;
        }
        first = -(1.0 / PI) * first / half.powu(n);
    }
    let psi = |k: u32| -EULER_GAMMA + harmonic(k - 1);
    let mut base = Complex64::new(1.0 / factorial(n), 0.0);
    let mut third = (psi(1) + psi(n + 1)) * base;
    for k in 1..400u32 {
        base = base * (-q) / (f64::from(k) * f64::from(n + k));
        let t = (psi(k + 1) + psi(n + k + 1)) * base;
        third += t;
        if t.norm() < 1e-18 * third.norm() && f64::from(k) > w.norm() {
            break;
        }
    }
    first + (2.0 / PI) * half.ln() * series_j(n, w) - (1.0 / PI) * half.powu(n) * third
}

pub fn series_h1(m: u32, w: Complex64) -> Complex64 {
    series_j(m, w) + Complex64::new(0.0, 1.0) * series_y(m, w)
}

/// `I_m′/I_m` from the series and `I_m′ = I_{m+1} + (m/w) I_m`.
pub fn oracle_log_deriv_i(m: u32, w: Complex64) -> Complex64 {
    series_i(m + 1, w) / series_i(m, w) + f64::from(m) / w
}

/// `H_m′/H_m` from the series and `H_m′ = (m/w) H_m − H_{m+1}`.
pub fn oracle_log_deriv_h1(m: u32, w: Complex64) -> Complex64 {
    f64::from(m) / w - series_h1(m + 1, w) / series_h1(m, w)
}

/// Relative distance `|a − b| / max(|b|, floor)`.
pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Disk resonances `(m, λ)` of the index-3 cavity, computed to 17 digits with
/// an arbitrary-precision Bessel library.
pub const INDEX3_ROOTS: [(i64, f64, f64); 7] = [
    (8, 5.9774227168064476, -0.24968380797929922),
    (10, 7.5880584999389843, -0.21103723621932009),
    (12, 9.208317470019309, -0.17699614892787832),
    (16, 12.466579622645091, -0.12188620496457918),
    (20, 15.737829173896422, -0.081688430939750645),
    (24, 19.014778735137228, -0.053328487278714115),
    (30, 23.932806540743734, -0.026857496282165489),
];

/// Same for the coefficient set `ρ_O = ρ_I = τ = g_O = 1`, `g_I = 1/9`.
pub const CONTRAST9_ROOTS: [(i64, f64, f64); 2] =
    [(13, 8.4647975935944606, -0.010396839478790024), (20, 13.154910599116637, -0.00086404592238650382)];

pub fn index3_root(m: i64) -> Complex64 {
    let (_, re, im) = INDEX3_ROOTS.iter().find(|r| r.0 == m).expect("tabulated mode");
    c(*re, *im)
}

pub fn contrast9() -> plasmon::cavity::Coefficients {
    plasmon::cavity::Coefficients { rho_out: 1.0, rho_in: 1.0, tau: 1.0, g_out: 1.0, g_in: 1.0 / 9.0 }
}

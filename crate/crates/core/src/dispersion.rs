//! Surface symbol of the transmission problem, the plasmon dispersion
//! relation and principal quasi-eigenvalues.
//!
//! With `z` the semiclassical spectral parameter and `ξ` the fiber variable
//! dual to arclength,
//!
//! ```text
//! s(ξ; z) = ρ_O √(g_O ξ² − z²) − τρ_I √(g_I ξ² + z²).
//! ```
//!
//! At `z = 1` the real zero `ξ*` satisfies
//! `ξ*² = (ρ_O² + τ²ρ_I²)/(ρ_O² g_O − τ²ρ_I² g_I)`, which exists exactly in
//! the plasmonic regime.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{CavityModel, Coefficients};
use crate::error::{Error, Result};

/// A point of the boundary cotangent bundle: sample index and fiber value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CotangentPoint {
    pub index: usize,
    pub xi: f64,
}

/// Semiclassical spectral point; the physical frequency is `z/h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalPoint {
    pub z: Complex64,
    pub h: f64,
}

impl SemiclassicalPoint {
    pub fn from_lambda(lambda: Complex64, h: f64) -> Self {
        SemiclassicalPoint { z: lambda * h, h }
    }

    pub fn lambda(&self) -> Complex64 {
        self.z / self.h
    }
}

fn radicand_is_branch_point(r: Complex64) -> bool {
    r.im == 0.0 && r.re.abs() <= 1e-14 * (1.0 + r.re.abs())
}

/// `s(ξ; z)` for a coefficient tuple.
pub fn surface_symbol_coeffs(c: &Coefficients, xi: f64, z: Complex64) -> Result<Complex64> {
    let z2 = z * z;
    let outer = Complex64::new(c.g_out * xi * xi, 0.0) - z2;
    let inner = Complex64::new(c.g_in * xi * xi, 0.0) + z2;
    if radicand_is_branch_point(outer) || radicand_is_branch_point(inner) {
        return Err(Error::BranchPoint);
    }
    Ok(c.rho_out * outer.sqrt() - c.tau * c.rho_in * inner.sqrt())
}

pub fn surface_symbol(c: &CavityModel, p: &CotangentPoint, z: Complex64) -> Result<Complex64> {
    surface_symbol_coeffs(&c.coefficients_at(p.index), p.xi, z)
}

/// `(ρ_O² g_O ξ² − τ²ρ_I² g_I ξ²)/(ρ_O² + τ²ρ_I²)`.
pub fn band_hamiltonian_coeffs(c: &Coefficients, xi: f64) -> f64 {
    let t2 = (c.tau * c.rho_in).powi(2);
    let r2 = c.rho_out * c.rho_out;
    (r2 * c.g_out - t2 * c.g_in) * xi * xi / (r2 + t2)
}

pub fn band_hamiltonian(c: &CavityModel, p: &CotangentPoint) -> f64 {
    band_hamiltonian_coeffs(&c.coefficients_at(p.index), p.xi)
}

/// The positive zero of `s(·; 1)`, if any.
pub fn dispersion_zero(c: &Coefficients) -> Result<f64> {
    let t2 = (c.tau * c.rho_in).powi(2);
    let r2 = c.rho_out * c.rho_out;
    let den = r2 * c.g_out - t2 * c.g_in;
    if den <= 0.0 {
        return Err(Error::NoSolution("non-plasmonic coefficients".into()));
    }
    Ok(((r2 + t2) / den).sqrt())
}

/// `λ_m = |m|/(a ξ*)` for a constant-coefficient disk.
pub fn principal_quasi_eigenvalue(c: &CavityModel, m: i64) -> Result<f64> {
    let (coeffs, radius) = c.disk()?;
    principal_for(&coeffs, radius, m)
}

pub fn principal_for(coeffs: &Coefficients, radius: f64, m: i64) -> Result<f64> {
    Ok(m.unsigned_abs() as f64 / (radius * dispersion_zero(coeffs)?))
}

/// Literature comparison ladder `2πj(n−1)/(n|∂Ω|)`.
pub fn camo_quasi_eigenvalue(n: f64, boundary_length: f64, j: i64) -> f64 {
    std::f64::consts::TAU * j as f64 * (n - 1.0) / (n * boundary_length)
}

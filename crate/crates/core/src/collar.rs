//! Boundary-collar factorization at symbol level.
//!
//! In Fermi coordinates `(x¹, x')` on one side of the boundary the operator
//! takes the form `(hD₁)² + h ã hD₁ − R(x¹, x', hD')` with tangential symbol
//! `r = ω₀ − g(x¹, x') ξ²`. Writing it as `(hD₁ + hã − iE)(hD₁ + iE)` with
//! `σ(E) = e₁ + h e₀` gives
//!
//! ```text
//! e₁² = −r,
//! e₀  = −f₁/(2e₁),   f₁ = ∂₁e₁ + i ã e₁ + (1/i) ∂_ξ e₁ ∂_{x'} e₁.
//! ```
//!
//! Every first derivative of `e₁` follows from `2 e₁ ∂e₁ = −∂r`. Here
//! `ã = (1/i) ∂₁ log √|g|`, so `iã` is real for real coefficient data. The
//! outward normal derivative of a decaying solution has symbol
//! `h∂_ν ↦ −(e₁ + h e₀)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{CavityModel, Coefficients};
use crate::dispersion;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Interior,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

/// Boundary jet of the collar operator on one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarData {
    pub side: Side,
    /// `+1` outside, `−1` inside.
    pub omega0: f64,
    /// First-order coefficient `ã` at `x¹ = 0`.
    pub a_tilde: Complex64,
    /// Fiber coefficient `g` with `|ξ'|² = g ξ²`.
    pub g_fiber: f64,
    /// `∂₁ g` at the boundary.
    pub dg_dx1: f64,
    /// Tangential derivative `∂_{x'} g`.
    pub dg_dxt: f64,
    /// Signed curvature in the side's Fermi coordinates; `∂₁ g = −2κ g`.
    pub curvature: f64,
}

fn omega0(side: Side) -> f64 {
    match side {
        Side::Interior => -1.0,
        Side::Exterior => 1.0,
    }
}

impl CollarData {
    /// Half-space with constant coefficients.
    pub fn flat(side: Side, g_fiber: f64) -> Self {
        CollarData {
            side,
            omega0: omega0(side),
            a_tilde: Complex64::new(0.0, 0.0),
            g_fiber,
            dg_dx1: 0.0,
            dg_dxt: 0.0,
            curvature: 0.0,
        }
    }

    /// Boundary point with geometric curvature `kappa` (positive for a
    /// convex interior) and constant coefficients.
    pub fn curved(side: Side, coeffs: &Coefficients, kappa: f64) -> Self {
        let (g, k) = match side {
            Side::Exterior => (coeffs.g_out, coeffs.g_out.sqrt() * kappa),
            Side::Interior => (coeffs.g_in, -coeffs.g_in.sqrt() * kappa),
        };
        CollarData {
            side,
            omega0: omega0(side),
            a_tilde: Complex64::new(0.0, -k),
            g_fiber: g,
            dg_dx1: -2.0 * k * g,
            dg_dxt: 0.0,
            curvature: k,
        }
    }

    /// Disk of radius `radius`.
    pub fn disk(side: Side, coeffs: &Coefficients, radius: f64) -> Self {
        Self::curved(side, coeffs, 1.0 / radius)
    }

    /// Sample `i` of a sampled cavity; tangential derivatives of the fiber
    /// coefficient are taken by periodic central differences.
    pub fn at_sample(c: &CavityModel, i: usize, side: Side) -> Self {
        let n = c.sample_count();
        let samples = c.boundary.samples();
        let kappa = match c.boundary.disk_radius() {
            Some(r) => 1.0 / r,
            None => samples[i].curvature,
        };
        let mut cd = Self::curved(side, &c.coefficients_at(i), kappa);
        if n > 2 {
            let ds = c.boundary.length() / n as f64;
            let g = |j: usize| match side {
                Side::Exterior => c.g_out[j],
                Side::Interior => c.g_in[j],
            };
            cd.dg_dxt = (g((i + 1) % n) - g((i + n - 1) % n)) / (2.0 * ds);
        }
        cd
    }

    /// `r₀ = ω₀ − g ξ²`.
    pub fn r0(&self, xi: f64) -> f64 {
        self.omega0 - self.g_fiber * xi * xi
    }

    pub fn is_elliptic(&self, xi: f64) -> bool {
        self.r0(xi) < 0.0
    }
}

/// Truncated symbol expansion `e₁ + h e₀` at one cotangent point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolJet {
    pub xi: f64,
    pub e1: Complex64,
    pub e0: Complex64,
    pub order: u8,
}

/// Principal factor `e₁`: `±i√(ω₀ − g ξ²)` on the hyperbolic side and
/// `−√(g ξ² − ω₀)` on the elliptic side for either branch.
pub fn principal_factor(cd: &CollarData, xi: f64, branch: Branch) -> Complex64 {
    let r = cd.r0(xi);
    if r > 0.0 {
        let v = Complex64::new(0.0, r.sqrt());
        match branch {
            Branch::Plus => v,
            Branch::Minus => -v,
        }
    } else {
        Complex64::new(-(-r).sqrt(), 0.0)
    }
}

pub fn principal_jet(cd: &CollarData, xi: f64, branch: Branch) -> SymbolJet {
    SymbolJet { xi, e1: principal_factor(cd, xi, branch), e0: Complex64::new(0.0, 0.0), order: 1 }
}

/// First corrective symbol `e₀`.
pub fn next_order(cd: &CollarData, jet: &SymbolJet) -> Result<SymbolJet> {
    let e1 = jet.e1;
    if e1.norm() < 1e-8 {
        return Err(Error::DivisionNearZero(e1.norm()));
    }
    let xi = jet.xi;
    let dr_dx1 = -cd.dg_dx1 * xi * xi;
    let dr_dxt = -cd.dg_dxt * xi * xi;
    let dr_dxi = -2.0 * cd.g_fiber * xi;
    let d = |dr: f64| -dr / (2.0 * e1);
    let i = Complex64::new(0.0, 1.0);
    let f1 = d(dr_dx1) + i * cd.a_tilde * e1 - i * d(dr_dxi) * d(dr_dxt);
    Ok(SymbolJet { xi, e1, e0: -f1 / (2.0 * e1), order: 2 })
}

/// Outward normal-derivative symbol `−(e₁ + h e₀)` on the decaying branch.
pub fn corrected_dtn_symbol(cd: &CollarData, xi: f64, h: f64) -> Result<Complex64> {
    let jet = next_order(cd, &principal_jet(cd, xi, Branch::Minus))?;
    Ok(-(jet.e1 + h * jet.e0))
}

/// Corrected transmission balance for mode `m` of a disk at real `λ`:
/// `ρ_O d_O − τρ_I d_I` with `ξ = |m|/(aλ)` and `h = 1/λ`.
pub fn corrected_balance(coeffs: &Coefficients, radius: f64, m: i64, lambda: f64) -> Result<f64> {
    let xi = m.unsigned_abs() as f64 / (radius * lambda);
    let h = 1.0 / lambda;
    let outer = corrected_dtn_symbol(&CollarData::disk(Side::Exterior, coeffs, radius), xi, h)?;
    let inner = corrected_dtn_symbol(&CollarData::disk(Side::Interior, coeffs, radius), xi, h)?;
    Ok((coeffs.rho_out * outer - coeffs.tau * coeffs.rho_in * inner).re)
}

/// Root of the corrected balance in `[0.5, 1.5]·λ_principal`, clipped to the
/// exterior elliptic region.
pub fn corrected_for(coeffs: &Coefficients, radius: f64, m: i64) -> Result<f64> {
    if m == 0 {
        return Err(Error::NoSolution("mode 0 carries no surface wave".into()));
    }
    let principal = dispersion::principal_for(coeffs, radius, m)?;
    let glancing = m.unsigned_abs() as f64 * coeffs.g_out.sqrt() / radius;
    let lo = 0.5 * principal;
    let hi = (1.5 * principal).min(glancing * (1.0 - 1e-9));
    let g = |l: f64| corrected_balance(coeffs, radius, m, l);
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo.signum() == ghi.signum() {
        return Err(Error::NoBracket(lo, hi));
    }
    // Newton with a bisection fallback whenever the step leaves the bracket
    // or fails to halve it.
    let (mut neg, mut pos) = if glo < 0.0 { (lo, hi) } else { (hi, lo) };
    let slope = |x: f64| -> Result<f64> {
        let step = 1e-7 * x;
        Ok((g(x + step)? - g(x - step)?) / (2.0 * step))
    };
    let mut x = 0.5 * (lo + hi);
    let (mut dx, mut dx_old) = (hi - lo, hi - lo);
    let (mut gx, mut dg) = (g(x)?, slope(x)?);
    for _ in 0..200 {
        let outside = ((x - pos) * dg - gx) * ((x - neg) * dg - gx) > 0.0;
        if outside || (2.0 * gx).abs() > (dx_old * dg).abs() || !dg.is_finite() {
            dx_old = dx;
            dx = 0.5 * (pos - neg);
            x = neg + dx;
        } else {
            dx_old = dx;
            dx = gx / dg;
            x -= dx;
        }
        if dx.abs() <= 1e-15 * x.abs() {
            return Ok(x);
        }
        gx = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        dg = slope(x)?;
        if gx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
    }
    Ok(x)
}

pub fn corrected_quasi_eigenvalue(c: &CavityModel, m: i64) -> Result<f64> {
    let (coeffs, radius) = c.disk()?;
    corrected_for(&coeffs, radius, m)
}

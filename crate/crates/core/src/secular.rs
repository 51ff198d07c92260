//! Per-mode transmission determinant for a constant-coefficient disk.
//!
//! With fiber coefficients `g_O, g_I` the mode `e^{imθ}` has interior
//! profile `I_m(λr/√g_I)` and outgoing exterior profile `H_m^{(1)}(λr/√g_O)`.
//! Continuity plus the weighted normal-derivative condition reduce to
//!
//! ```text
//! F_m(λ) = L_H(m, aλ/√g_O) + (τρ_I/ρ_O)·L_I(m, aλ/√g_I) = 0,
//! ```
//!
//! where `L_H`, `L_I` are logarithmic derivatives. For the scalar index `n`
//! (`g_I = 1/n`, `τρ_I = n^{-1/2}`) this is the classical system
//! `(div n⁻¹∇ − λ²)u = 0` inside, `∂_r u_O = −n⁻¹∂_r u_I` on `r = a`.
//!
//! `F_m` has poles at zeros of `I_m` and `H_m`, so zero counting uses the
//! entire function `F̂ = I_m·H_m·F_m`, scaled by `e^{−w_I − i w_O}`.

use num_complex::Complex64;

use crate::cavity::{CavityModel, Coefficients};
use crate::error::{Error, Result};
use crate::rootfind::LogAnalytic;
use crate::specfun::{self, LogScaled, SpecfunConfig};

/// Minimum relative jump `|D|/scale` accepted for a solvable problem.
pub const MIN_JUMP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularContext {
    pub m: i64,
    pub coeffs: Coefficients,
    pub radius: f64,
    pub cfg: SpecfunConfig,
}

/// Mode eigenvalues of the weighted interior and exterior DtN maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtnPair {
    pub interior: Complex64,
    pub exterior: Complex64,
}

fn pole(e: Error) -> Error {
    match e {
        Error::NearPole(w) => Error::PoleProximity(w),
        other => other,
    }
}

impl SecularContext {
    /// Scalar-index disk of radius `radius`.
    pub fn new(m: i64, n: f64, radius: f64) -> Result<Self> {
        if (n - 1.0).abs() < MIN_JUMP {
            return Err(Error::InvalidInput(format!("index n = {n} violates the jump condition")));
        }
        Self::with_coefficients(m, Coefficients::from_index(n, 2)?, radius)
    }

    pub fn with_coefficients(m: i64, coeffs: Coefficients, radius: f64) -> Result<Self> {
        coeffs.validate()?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("radius {radius}")));
        }
        if coeffs.jump().abs() < MIN_JUMP * coeffs.scale() {
            return Err(Error::InvalidInput("coefficients violate the jump condition".into()));
        }
        Ok(SecularContext { m, coeffs, radius, cfg: SpecfunConfig::default() })
    }

    pub fn from_cavity(c: &CavityModel, m: i64) -> Result<Self> {
        if c.dimension != 2 {
            return Err(Error::InvalidInput("the exact solver is two-dimensional".into()));
        }
        let (coeffs, radius) = c.disk()?;
        Self::with_coefficients(m, coeffs, radius)
    }

    pub fn with_config(mut self, cfg: SpecfunConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn with_mode(mut self, m: i64) -> Self {
        self.m = m;
        self
    }

    pub fn order(&self) -> u32 {
        self.m.unsigned_abs() as u32
    }

    /// Radial wavenumber factor inside, `1/√g_I`.
    pub fn s_in(&self) -> f64 {
        self.coeffs.g_in.sqrt().recip()
    }

    /// Radial wavenumber factor outside, `1/√g_O`.
    pub fn s_out(&self) -> f64 {
        self.coeffs.g_out.sqrt().recip()
    }

    fn arguments(&self, lambda: Complex64) -> Result<(Complex64, Complex64)> {
        if lambda.norm() == 0.0 {
            return Err(Error::DomainError("λ = 0".into()));
        }
        Ok((self.radius * self.s_in() * lambda, self.radius * self.s_out() * lambda))
    }

    /// `F_m(λ)` in ratio form.
    pub fn eval_f(&self, lambda: Complex64) -> Result<Complex64> {
        let (wi, wo) = self.arguments(lambda)?;
        let m = self.order();
        let lh = specfun::log_deriv_h1(m, wo, &self.cfg).map_err(pole)?;
        let li = specfun::log_deriv_i(m, wi, &self.cfg)?;
        Ok(lh + self.coeffs.weight() * li)
    }

    /// `F̂ = I_m(w_I)·H_m(w_O)·F_m(λ)`, unscaled.
    pub fn eval_log_fhat(&self, lambda: Complex64) -> Result<LogScaled> {
        let (wi, wo) = self.arguments(lambda)?;
        let m = self.order();
        let li = specfun::log_deriv_i(m, wi, &self.cfg)?;
        let ival = specfun::log_i(m, wi, &self.cfg)?;
        let hs = specfun::hankel_state(m, wo, &self.cfg).map_err(pole)?;
        let g = hs.deriv_over_prev() + self.coeffs.weight() * li * hs.ratio;
        Ok(ival * LogScaled::from_log(hs.ln_prev).scale(g))
    }

    /// `F̂·e^{−w_I − i w_O}`, the bounded representative used for winding.
    pub fn eval_log_fhat_scaled(&self, lambda: Complex64) -> Result<LogScaled> {
        let (wi, wo) = self.arguments(lambda)?;
        let i = Complex64::new(0.0, 1.0);
        Ok(self.eval_log_fhat(lambda)? / LogScaled::from_log(wi + i * wo))
    }

    /// `d/dλ log F̂`.
    pub fn eval_logf_deriv(&self, lambda: Complex64) -> Result<Complex64> {
        let (wi, wo) = self.arguments(lambda)?;
        let m = self.order();
        let (ai, ao) = (self.radius * self.s_in(), self.radius * self.s_out());
        let c = self.coeffs.weight();
        let li = specfun::log_deriv_i(m, wi, &self.cfg)?;
        let dli = specfun::riccati_i(m, wi, li);
        let hs = specfun::hankel_state(m, wo, &self.cfg).map_err(pole)?;
        let h = hs.ratio;
        let hp = hs.deriv_over_prev();
        let mw = m as f64 / wo;
        let hpp = -hp / wo - (1.0 - mw * mw) * h;
        let g = hp + c * li * h;
        let dg = ao * hpp + c * (ai * dli * h + li * ao * hp);
        Ok(ai * li + dg / g)
    }

    pub fn dtn_eigenvalues(&self, lambda: Complex64) -> Result<DtnPair> {
        let (wi, wo) = self.arguments(lambda)?;
        let m = self.order();
        let li = specfun::log_deriv_i(m, wi, &self.cfg)?;
        let lh = specfun::log_deriv_h1(m, wo, &self.cfg).map_err(pole)?;
        Ok(DtnPair { interior: self.coeffs.weight() * lambda * li, exterior: -lambda * lh })
    }
}

impl LogAnalytic for SecularContext {
    fn log_value(&self, z: Complex64) -> Result<LogScaled> {
        self.eval_log_fhat_scaled(z)
    }

    fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let shift = self.radius * (self.s_in() + i * self.s_out());
        Ok(self.eval_logf_deriv(z)? - shift)
    }
}

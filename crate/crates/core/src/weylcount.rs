//! Phase-space volume of the plasmon region and the Weyl-type prediction
//! for the number of plasmon resonances, plus exact counts from disk scans.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::cavity::{BoundaryGeom, CavityModel, Coefficients};
use crate::error::{Error, Result};
use crate::rootfind::{self, MirrorPolicy, ModeFailure, ModeFamily, Rect, Resonance, RootConfig};

/// Default number of modes scanned beyond the predicted cutoff.
pub const DEFAULT_MARGIN: i64 = 8;

/// Default strip depth below the real axis.
pub const DEFAULT_DEPTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceRegion {
    pub fiber_radius: Vec<f64>,
    pub volume: f64,
    pub dimension: usize,
}

/// `ξ_max = √((ρ_O² + τ²ρ_I²)/(ρ_O² g_O − τ²ρ_I² g_I))`.
pub fn fiber_radius_coeffs(c: &Coefficients) -> Result<f64> {
    let t2 = (c.tau * c.rho_in).powi(2);
    let r2 = c.rho_out * c.rho_out;
    let den = r2 * c.g_out - t2 * c.g_in;
    if den <= 0.0 {
        return Err(Error::EmptyFiber);
    }
    Ok(((r2 + t2) / den).sqrt())
}

pub fn fiber_radius(c: &CavityModel, i: usize) -> Result<f64> {
    fiber_radius_coeffs(&c.coefficients_at(i))
}

/// Volume of the unit ball in `ℝ^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * TAU / k as f64,
    }
}

pub fn region_volume(c: &CavityModel) -> Result<PhaseSpaceRegion> {
    let radii = (0..c.sample_count()).map(|i| fiber_radius(c, i)).collect::<Result<Vec<_>>>()?;
    let volume = if c.dimension == 2 {
        // Periodic trapezoid rule on equispaced arclength nodes.
        let ds = c.boundary.length() / radii.len() as f64;
        radii.iter().map(|x| 2.0 * x * ds).sum()
    } else {
        let r = match c.boundary {
            BoundaryGeom::Disk { radius } => radius,
            BoundaryGeom::Curve { .. } => {
                return Err(Error::InvalidInput("dimension ≥ 3 requires a ball boundary".into()))
            }
        };
        let coeffs = c
            .constant_coefficients()
            .ok_or_else(|| Error::InvalidInput("dimension ≥ 3 requires constant coefficients".into()))?;
        let d = c.dimension;
        let area = d as f64 * unit_ball_volume(d) * r.powi(d as i32 - 1);
        area * unit_ball_volume(d - 1) * fiber_radius_coeffs(&coeffs)?.powi(d as i32 - 1)
    };
    Ok(PhaseSpaceRegion { fiber_radius: radii, volume, dimension: c.dimension })
}

/// `(λ/2π)^{d−1} vol`.
pub fn predicted_count(c: &CavityModel, lambda: f64) -> Result<f64> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("λ = {lambda}")));
    }
    let region = region_volume(c)?;
    Ok((lambda / (2.0 * PI)).powi(c.dimension as i32 - 1) * region.volume)
}

/// Resonances with `0 < Re λ ≤ lambda` and `Im λ ≥ −depth`, counting `±m`
/// separately.
pub fn exact_count(resonances: &[Resonance], lambda: f64, depth: f64) -> u64 {
    resonances
        .iter()
        .filter(|r| r.lambda.re > 0.0 && r.lambda.re <= lambda && r.lambda.im >= -depth)
        .map(|r| u64::from(r.degeneracy()))
        .sum()
}

/// Largest mode that can carry a plasmon resonance below `lambda`, plus
/// `margin`.
pub fn m_cutoff(coeffs: &Coefficients, radius: f64, lambda: f64, margin: i64) -> Result<i64> {
    Ok((lambda * radius * fiber_radius_coeffs(coeffs)?).ceil() as i64 + margin)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub lambda: f64,
    pub depth: f64,
    pub exact: u64,
    pub predicted: f64,
    pub ratio: Option<f64>,
    pub m_max: i64,
    pub resonances: Vec<Resonance>,
    pub failures: Vec<ModeFailure>,
}

/// Scans a constant-coefficient disk and compares the exact count with the
/// prediction. Modes in the margin must not contribute; modes that fail to
/// scan are listed in the report.
pub fn count_disk(
    family: &ModeFamily,
    lambda: f64,
    depth: f64,
    margin: i64,
    cfg: &RootConfig,
    threads: usize,
) -> Result<CountReport> {
    let c = CavityModel::from_coefficients(BoundaryGeom::disk(family.radius)?, 2, family.coeffs)?;
    let predicted = predicted_count(&c, lambda)?;
    if lambda == 0.0 {
        return Ok(CountReport {
            lambda,
            depth,
            exact: 0,
            predicted: 0.0,
            ratio: None,
            m_max: 0,
            resonances: Vec::new(),
            failures: Vec::new(),
        });
    }
    let core = m_cutoff(&family.coeffs, family.radius, lambda, 0)?;
    let m_max = core + margin;
    let rect = Rect::new(1e-2, lambda, -depth, -1e-9)?;
    let report = rootfind::scan_modes(family, 0..=m_max, &rect, cfg, MirrorPolicy::Flag, threads)?;
    if let Some(r) = report.resonances.iter().find(|r| r.m > core) {
        return Err(Error::IncompleteScan { m: r.m, re: r.lambda.re });
    }
    let exact = exact_count(&report.resonances, lambda, depth);
    Ok(CountReport {
        lambda,
        depth,
        exact,
        predicted,
        ratio: (predicted > 0.0).then(|| exact as f64 / predicted),
        m_max,
        resonances: report.resonances,
        failures: report.failures,
    })
}

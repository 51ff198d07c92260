//! Resonant-state synthesis for disk resonances and localization
//! diagnostics.
//!
//! The state of mode `m` is `u = e^{imθ} R(r)` with `R(a) = 1`:
//! `R(r) = I_m(s_I λ r)/I_m(s_I λ a)` inside and
//! `R(r) = H_m(s_O λ r)/H_m(s_O λ a)` outside. Ratios are accumulated
//! node to node in log-scaled form, so deep interior values never underflow.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::Coefficients;
use crate::error::{Error, Result};
use crate::rootfind::Resonance;
use crate::specfun::{self, LogScaled, SpecfunConfig};

/// Minimum radial samples inside the `3/Re λ` shell on each side.
pub const MIN_SHELL_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Outer radius in units of the disk radius.
    pub r_max_factor: f64,
    pub n_theta: usize,
    /// Intervals across each side of the boundary shell (even).
    pub collar_intervals: usize,
    /// Target spacing outside the shell, in units of the disk radius.
    pub bulk_step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { r_max_factor: 2.0, n_theta: 128, collar_intervals: 40, bulk_step: 1.0 / 64.0 }
    }
}

impl GridSpec {
    /// Same layout with every spacing divided by `k`.
    pub fn refined(&self, k: usize) -> Self {
        GridSpec {
            collar_intervals: self.collar_intervals * k,
            bulk_step: self.bulk_step / k as f64,
            n_theta: self.n_theta * k,
            ..*self
        }
    }
}

/// Sampled resonant state on a polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub lambda: Complex64,
    pub m: i64,
    pub radius: f64,
    pub coeffs: Coefficients,
    pub radii: Vec<f64>,
    pub thetas: Vec<f64>,
    /// `u(r, 0)` at every radius.
    pub radial: Vec<LogScaled>,
    /// Inclusive node ranges of the Simpson panels.
    pub segments: Vec<(usize, usize)>,
    /// Index of `r = a` in `radii`.
    pub boundary_index: usize,
    /// Shell half-width `3/Re λ` actually resolved on each side.
    pub shell_inner: f64,
    pub shell_outer: f64,
}

fn even(n: usize) -> usize {
    let n = n.max(2);
    n + n % 2
}

fn push_segment(radii: &mut Vec<f64>, segments: &mut Vec<(usize, usize)>, a: f64, b: f64, n: usize) {
    let start = radii.len() - 1;
    for k in 1..=n {
        radii.push(a + (b - a) * k as f64 / n as f64);
    }
    segments.push((start, radii.len() - 1));
}

/// Synthesizes the state of `res` for a constant-coefficient disk.
pub fn synthesize(coeffs: &Coefficients, radius: f64, res: &Resonance, spec: &GridSpec) -> Result<ModeField> {
    if res.lambda.re <= 0.0 {
        return Err(Error::InvalidInput("resonance with Re λ ≤ 0".into()));
    }
    if spec.collar_intervals < 2 || spec.n_theta < 1 || !(spec.bulk_step > 0.0) || !(spec.r_max_factor > 1.0) {
        return Err(Error::InvalidInput(format!("grid {spec:?}")));
    }
    let a = radius;
    let r_max = spec.r_max_factor * a;
    let width = 3.0 / res.lambda.re;
    let (w_in, w_out) = (width.min(a), width.min(r_max - a));
    let mut radii = vec![0.0];
    let mut segments = Vec::new();
    if a - w_in > 0.0 {
        push_segment(
            &mut radii,
            &mut segments,
            0.0,
            a - w_in,
            even(((a - w_in) / (spec.bulk_step * a)).ceil() as usize),
        );
    }
    push_segment(&mut radii, &mut segments, a - w_in, a, even(spec.collar_intervals));
    let boundary_index = radii.len() - 1;
    radii[boundary_index] = a;
    push_segment(&mut radii, &mut segments, a, a + w_out, even(spec.collar_intervals));
    if r_max - a - w_out > 0.0 {
        let len = r_max - a - w_out;
        push_segment(&mut radii, &mut segments, a + w_out, r_max, even((len / (spec.bulk_step * a)).ceil() as usize));
    }

    let cfg = SpecfunConfig::default();
    let m = res.m.unsigned_abs() as u32;
    let (s_in, s_out) = (coeffs.g_in.sqrt().recip(), coeffs.g_out.sqrt().recip());
    let lam = res.lambda;
    let inner = || -> Result<Vec<LogScaled>> {
        let mut vals = vec![LogScaled::ONE; boundary_index + 1];
        for k in (0..boundary_index).rev() {
            let step = specfun::scaled_ratio_i(m, s_in * lam * radii[k], s_in * lam * radii[k + 1], &cfg)?;
            vals[k] = vals[k + 1] * step;
        }
        Ok(vals)
    };
    let outer = || -> Result<Vec<LogScaled>> {
        let mut vals = vec![LogScaled::ONE; radii.len() - boundary_index];
        for k in 1..vals.len() {
            let (r0, r1) = (radii[boundary_index + k - 1], radii[boundary_index + k]);
            let step = specfun::scaled_ratio_h1(m, s_out * lam * r1, s_out * lam * r0, &cfg)?;
            vals[k] = vals[k - 1] * step;
        }
        Ok(vals)
    };
    let (inside, outside) = rayon::join(inner, outer);
    let mut radial = inside?;
    radial.extend_from_slice(&outside?[1..]);
    let thetas = (0..spec.n_theta).map(|k| TAU * k as f64 / spec.n_theta as f64).collect();
    Ok(ModeField {
        lambda: lam,
        m: res.m,
        radius: a,
        coeffs: *coeffs,
        radii,
        thetas,
        radial,
        segments,
        boundary_index,
        shell_inner: w_in,
        shell_outer: w_out,
    })
}

impl ModeField {
    pub fn sample(&self, ir: usize, itheta: usize) -> LogScaled {
        let theta = self.thetas[itheta];
        self.radial[ir] * LogScaled { log_mag: 0.0, phase: Complex64::from_polar(1.0, self.m as f64 * theta) }
    }

    /// Linear value with magnitude clamped to `cap`, for plotting.
    pub fn sample_clamped(&self, ir: usize, itheta: usize, cap: f64) -> Complex64 {
        self.sample(ir, itheta).to_complex_clamped(cap)
    }

    /// Factor `k` in the transmission condition `∂_r u_O = −k ∂_r u_I`.
    pub fn jump_factor(&self) -> f64 {
        let (s_in, s_out) = (self.coeffs.g_in.sqrt().recip(), self.coeffs.g_out.sqrt().recip());
        self.coeffs.weight() * s_out / s_in
    }

    /// Second-order one-sided radial derivatives at `r = a` from inside and
    /// outside.
    pub fn boundary_derivatives(&self) -> (Complex64, Complex64) {
        let b = self.boundary_index;
        let v = |i: usize| self.radial[i].to_complex();
        let hi = self.radii[b] - self.radii[b - 1];
        let ho = self.radii[b + 1] - self.radii[b];
        let inner = (3.0 * v(b) - 4.0 * v(b - 1) + v(b - 2)) / (2.0 * hi);
        let outer = (-3.0 * v(b) + 4.0 * v(b + 1) - v(b + 2)) / (2.0 * ho);
        (inner, outer)
    }

    fn density(&self, i: usize) -> f64 {
        (2.0 * self.radial[i].log_mag).exp() * self.radii[i]
    }

    fn simpson(&self, (s, e): (usize, usize)) -> f64 {
        let h = (self.radii[e] - self.radii[s]) / (e - s) as f64;
        let mut acc = self.density(s) + self.density(e);
        for i in s + 1..e {
            acc += if (i - s) % 2 == 1 { 4.0 } else { 2.0 } * self.density(i);
        }
        acc * h / 3.0
    }

    fn shell_samples(&self, width: f64) -> (usize, usize) {
        let a = self.radius;
        let inside = self.radii.iter().filter(|&&r| r <= a && a - r <= width * (1.0 + 1e-12)).count();
        let outside = self.radii.iter().filter(|&&r| r >= a && r - a <= width * (1.0 + 1e-12)).count();
        (inside, outside)
    }

    /// `‖u‖` over `dist(·, ∂Ω) ≥ δ` divided by `‖u‖_{L²(∂Ω)}`.
    pub fn trace_ratio(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta <= 0.5 * self.radius) {
            return Err(Error::InvalidInput(format!("offset δ = {delta}")));
        }
        let (si, so) = self.shell_samples(3.0 / self.lambda.re);
        if si < MIN_SHELL_SAMPLES || so < MIN_SHELL_SAMPLES {
            return Err(Error::GridTooCoarse(format!("{si}/{so} samples in the boundary shell")));
        }
        let a = self.radius;
        let mut mass = 0.0;
        for k in 0..self.radii.len() - 1 {
            let (r0, r1) = (self.radii[k], self.radii[k + 1]);
            let lo = if r1 <= a { r0 } else { r0.max(a + delta) };
            let hi = if r1 <= a { r1.min(a - delta) } else { r1 };
            if hi > lo {
                mass +=
                    log_linear_integral(r0, r1, 2.0 * self.radial[k].log_mag, 2.0 * self.radial[k + 1].log_mag, lo, hi);
            }
        }
        let boundary = (2.0 * self.radial[self.boundary_index].log_mag).exp() * a;
        Ok((mass / boundary).sqrt())
    }

    pub fn localization_report(&self) -> Result<LocalizationReport> {
        let width = 3.0 / self.lambda.re;
        let (si, so) = self.shell_samples(width);
        if si < MIN_SHELL_SAMPLES || so < MIN_SHELL_SAMPLES {
            return Err(Error::GridTooCoarse(format!("{si}/{so} samples in the boundary shell")));
        }
        let a = self.radius;
        let mut shell = 0.0;
        let mut total = 0.0;
        for &seg in &self.segments {
            let v = self.simpson(seg);
            let (r0, r1) = (self.radii[seg.0], self.radii[seg.1]);
            if r0 >= a - self.shell_inner - 1e-12 && r1 <= a + self.shell_outer + 1e-12 {
                shell += v;
            }
            total += v;
        }
        let window = 0.2 * a;
        let fit = |inside: bool| {
            let pts: Vec<(f64, f64)> = self
                .radii
                .iter()
                .zip(&self.radial)
                .filter(|(&r, _)| if inside { r <= a && a - r <= window } else { r >= a && r - a <= window })
                .map(|(&r, u)| ((r - a).abs(), u.log_mag))
                .collect();
            least_squares_slope(&pts)
        };
        Ok(LocalizationReport {
            shell_width: width,
            shell_mass_fraction: shell / total,
            interior_decay_rate: fit(true),
            exterior_decay_rate: fit(false),
        })
    }
}

/// `∫_lo^hi r·exp(p(r)) dr` with `p` linear through `(r0, p0)`, `(r1, p1)`.
fn log_linear_integral(r0: f64, r1: f64, p0: f64, p1: f64, lo: f64, hi: f64) -> f64 {
    if !(p0.is_finite() && p1.is_finite()) {
        let f = |r: f64| r * (p0.exp() + (p1.exp() - p0.exp()) * (r - r0) / (r1 - r0));
        return 0.5 * (hi - lo) * (f(lo) + f(hi));
    }
    let beta = (p1 - p0) / (r1 - r0);
    let base = p0 + beta * (lo - r0);
    let t = hi - lo;
    let x = beta * t;
    let (e1, e2) = if x.abs() < 1e-4 {
        (t * (1.0 + x / 2.0 + x * x / 6.0), t * t * (0.5 + x / 3.0 + x * x / 8.0))
    } else {
        let g = x.exp_m1();
        (g / beta, t * (g + 1.0) / beta - g / (beta * beta))
    };
    base.exp() * (lo * e1 + e2)
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub shell_width: f64,
    pub shell_mass_fraction: f64,
    /// Slope of `log|u|` against distance from the boundary, inside.
    pub interior_decay_rate: f64,
    pub exterior_decay_rate: f64,
}

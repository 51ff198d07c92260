//! Zero counting and localization in complex rectangles by phase tracking.
//!
//! Functions are supplied through [`LogAnalytic`], which returns values in
//! log-scaled form so that the dynamic range of Bessel products never
//! overflows. The winding number is the accumulated phase along the
//! boundary divided by `2π`.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::Coefficients;
use crate::error::{Error, Result};
use crate::secular::SecularContext;
use crate::specfun::{LogScaled, SpecfunConfig};

/// An analytic function evaluated in log-scaled form, with its logarithmic
/// derivative.
pub trait LogAnalytic: Sync {
    fn log_value(&self, z: Complex64) -> Result<LogScaled>;
    fn log_derivative(&self, z: Complex64) -> Result<Complex64>;
}

/// Adapter for plain closures `f` and `f'/f`.
pub struct FnAnalytic<F, G> {
    pub f: F,
    pub logderiv: G,
}

impl<F, G> LogAnalytic for FnAnalytic<F, G>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    G: Fn(Complex64) -> Complex64 + Sync,
{
    fn log_value(&self, z: Complex64) -> Result<LogScaled> {
        Ok(LogScaled::from_complex((self.f)(z)))
    }

    fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.logderiv)(z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !finite || re_min >= re_max || im_min >= im_max {
            return Err(Error::InvalidInput(format!("rectangle [{re_min}, {re_max}] × [{im_min}, {im_max}]")));
        }
        Ok(Rect { re_min, re_max, im_min, im_max })
    }

    /// Square of half-side `h` centred at `z`.
    pub fn square(z: Complex64, h: f64) -> Self {
        Rect { re_min: z.re - h, re_max: z.re + h, im_min: z.im - h, im_max: z.im + h }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.re_min - margin
            && z.re <= self.re_max + margin
            && z.im >= self.im_min - margin
            && z.im <= self.im_max + margin
    }

    /// Counterclockwise corners starting at the lower left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Split into four at fractions `(fx, fy)` of the width and height.
    pub fn quadrisect(&self, fx: f64, fy: f64) -> [Rect; 4] {
        let xm = self.re_min + fx * self.width();
        let ym = self.im_min + fy * self.height();
        [
            Rect { re_max: xm, im_max: ym, ..*self },
            Rect { re_min: xm, im_max: ym, ..*self },
            Rect { re_min: xm, im_min: ym, ..*self },
            Rect { re_max: xm, im_min: ym, ..*self },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    /// Newton stopping tolerance on `|Δz|`.
    pub tol: f64,
    pub max_newton: usize,
    /// Step floor relative to the edge length.
    pub step_floor: f64,
    /// Largest accepted distance of the winding from an integer.
    pub rounding_gap: f64,
    /// Largest step along an edge, in absolute units.
    pub max_step: f64,
    pub max_depth: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig { tol: 1e-10, max_newton: 50, step_floor: 1e-12, rounding_gap: 0.25, max_step: 1.0, max_depth: 60 }
    }
}

fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b * a.conj()).arg()
}

/// Accumulated phase of `f` along the segment `a → b`.
pub fn edge_phase<F: LogAnalytic + ?Sized>(f: &F, a: Complex64, b: Complex64, cfg: &RootConfig) -> Result<f64> {
    let len = (b - a).norm();
    let floor = cfg.step_floor;
    let cap = (cfg.max_step / len).min(0.125);
    let at = |t: f64| f.log_value(a + (b - a) * t).map(|v| v.phase);
    let mut t = 0.0f64;
    let mut p0 = at(0.0)?;
    let mut h = cap;
    let mut total = 0.0;
    while t < 1.0 {
        let step = h.min(1.0 - t);
        let p1 = at(t + step)?;
        let pm = at(t + 0.5 * step)?;
        let d = phase_step(p0, p1);
        let (d1, d2) = (phase_step(p0, pm), phase_step(pm, p1));
        let consistent = (d1 + d2 - d).abs() < 1e-9;
        if d.abs() < FRAC_PI_2 && d1.abs() < FRAC_PI_2 && d2.abs() < FRAC_PI_2 && consistent {
            total += d;
            t += step;
            p0 = p1;
            h = (2.0 * step).min(cap);
        } else {
            h = 0.5 * step;
            if h < floor {
                return Err(Error::BoundaryZero(format!("{}", a + (b - a) * t)));
            }
        }
    }
    Ok(total)
}

/// Number of zeros of `f` inside `rect`, counted with multiplicity.
pub fn winding_count<F: LogAnalytic + ?Sized>(f: &F, rect: &Rect, cfg: &RootConfig) -> Result<i64> {
    let c = rect.corners();
    let mut total = 0.0;
    for k in 0..4 {
        total += edge_phase(f, c[k], c[(k + 1) % 4], cfg)?;
    }
    let w = total / TAU;
    let r = w.round();
    if (w - r).abs() > cfg.rounding_gap {
        return Err(Error::AmbiguousWinding(w));
    }
    Ok(r as i64)
}

/// A zero of a generic analytic function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub z: Complex64,
    pub multiplicity: u32,
    /// `|f/f'|` at `z`, the size of the next Newton step.
    pub residual: f64,
    pub newton_iters: u32,
}

/// Newton iteration on `z ↦ z − 1/(log f)'(z)`.
pub fn newton<F: LogAnalytic + ?Sized>(f: &F, z0: Complex64, reach: f64, cfg: &RootConfig) -> Result<Root> {
    let mut z = z0;
    for k in 1..=cfg.max_newton {
        let ld = f.log_derivative(z)?;
        let step = ld.inv();
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(Error::NewtonDiverged(format!("{z0}")));
        }
        z -= step;
        if (z - z0).norm() > reach {
            return Err(Error::NewtonDiverged(format!("{z0}")));
        }
        if step.norm() <= cfg.tol {
            let ld = f.log_derivative(z)?;
            let residual = if ld.norm().is_finite() { ld.norm().recip() } else { 0.0 };
            return Ok(Root { z, multiplicity: 1, residual, newton_iters: k as u32 });
        }
    }
    Err(Error::NewtonDiverged(format!("{z0}")))
}

const SPLITS: [(f64, f64); 4] = [(0.5, 0.5), (0.4871, 0.5137), (0.5219, 0.4783), (0.4613, 0.4471)];

fn split_counts<F: LogAnalytic + ?Sized>(f: &F, rect: &Rect, count: i64, cfg: &RootConfig) -> Result<Vec<(Rect, i64)>> {
    let mut last = None;
    for (fx, fy) in SPLITS {
        let parts = rect.quadrisect(fx, fy);
        let mut out = Vec::with_capacity(4);
        let mut failed = None;
        for p in parts {
            match winding_count(f, &p, cfg) {
                Ok(n) => out.push((p, n)),
                Err(e @ (Error::BoundaryZero(_) | Error::AmbiguousWinding(_))) => {
                    failed = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        match failed {
            None if out.iter().map(|(_, n)| n).sum::<i64>() == count => return Ok(out),
            None => last = Some(Error::AmbiguousWinding(count as f64)),
            Some(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or(Error::AmbiguousWinding(count as f64)))
}

fn verified<F: LogAnalytic + ?Sized>(f: &F, root: &Root, cfg: &RootConfig) -> bool {
    let sq = Rect::square(root.z, 5.0 * cfg.tol);
    matches!(winding_count(f, &sq, cfg), Ok(n) if n >= 1)
}

fn refine<F: LogAnalytic + ?Sized>(
    f: &F,
    rect: Rect,
    count: i64,
    depth: usize,
    cfg: &RootConfig,
    out: &mut Vec<Root>,
) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    let small = rect.width().max(rect.height()) <= 10.0 * cfg.tol;
    if count == 1 || small {
        let reach = rect.width().hypot(rect.height()) + 10.0 * cfg.tol;
        match newton(f, rect.center(), reach, cfg) {
            Ok(mut root) if rect.contains(root.z, cfg.tol) => {
                if count == 1 && verified(f, &root, cfg) {
                    out.push(root);
                    return Ok(());
                }
                if small {
                    root.multiplicity = count as u32;
                    out.push(root);
                    return Ok(());
                }
            }
            // Divergence or leaving the supported domain: subdivide instead.
            Ok(_) | Err(_) => {}
        }
        if small {
            let z = rect.center();
            out.push(Root { z, multiplicity: count as u32, residual: f64::NAN, newton_iters: 0 });
            return Ok(());
        }
    }
    if depth >= cfg.max_depth {
        return Err(Error::NewtonDiverged(format!("{} (depth limit)", rect.center())));
    }
    for (sub, n) in split_counts(f, &rect, count, cfg)? {
        refine(f, sub, n, depth + 1, cfg, out)?;
    }
    Ok(())
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// All zeros of `f` in `rect`, sorted by real part.
pub fn localize<F: LogAnalytic + ?Sized>(f: &F, rect: &Rect, cfg: &RootConfig) -> Result<Vec<Root>> {
    let count = winding_count(f, rect, cfg)?;
    let mut roots = Vec::new();
    refine(f, *rect, count, 0, cfg, &mut roots)?;
    roots.sort_by(|a, b| cmp_complex(&a.z, &b.z));
    let mut merged: Vec<Root> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last_mut() {
            Some(last) if (last.z - r.z).norm() <= 10.0 * cfg.tol => {
                last.multiplicity += r.multiplicity;
            }
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

/// A disk resonance carried by angular mode `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub lambda: Complex64,
    pub m: i64,
    pub multiplicity: u32,
    pub residual: f64,
    pub newton_iters: u32,
    /// Set when the same value is also a resonance of mode `−m`.
    pub mirrored: bool,
}

impl Resonance {
    /// Number of resonant states represented, counting `±m` separately.
    pub fn degeneracy(&self) -> u32 {
        if self.mirrored {
            2 * self.multiplicity
        } else {
            self.multiplicity
        }
    }
}

/// How the `±m` symmetry is reported by [`scan_modes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MirrorPolicy {
    /// One row per `|m|` with `mirrored = true` when `m ≠ 0`.
    #[default]
    Flag,
    /// Separate rows for `m` and `−m`.
    Duplicate,
}

/// Constant-coefficient disk whose modes are scanned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFamily {
    pub coeffs: Coefficients,
    pub radius: f64,
    pub specfun: SpecfunConfig,
}

impl ModeFamily {
    pub fn new(coeffs: Coefficients, radius: f64) -> Self {
        ModeFamily { coeffs, radius, specfun: SpecfunConfig::default() }
    }

    pub fn from_index(n: f64, radius: f64) -> Result<Self> {
        Ok(Self::new(Coefficients::from_index(n, 2)?, radius))
    }

    pub fn context(&self, m: i64) -> Result<SecularContext> {
        Ok(SecularContext::with_coefficients(m, self.coeffs, self.radius)?.with_config(self.specfun))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFailure {
    pub m: i64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScanReport {
    pub resonances: Vec<Resonance>,
    pub failures: Vec<ModeFailure>,
}

/// Resonances of one mode inside `rect`.
pub fn mode_resonances(family: &ModeFamily, m: i64, rect: &Rect, cfg: &RootConfig) -> Result<Vec<Resonance>> {
    let ctx = family.context(m)?;
    Ok(localize(&ctx, rect, cfg)?
        .into_iter()
        .map(|r| Resonance {
            lambda: r.z,
            m,
            multiplicity: r.multiplicity,
            residual: r.residual,
            newton_iters: r.newton_iters,
            mirrored: false,
        })
        .collect())
}

/// Localizes every mode `|m|` in `modes` over `rect` on a pool of `threads`
/// workers. Output is sorted by `(Re λ, m)` and independent of the width.
pub fn scan_modes(
    family: &ModeFamily,
    modes: impl IntoIterator<Item = i64>,
    rect: &Rect,
    cfg: &RootConfig,
    policy: MirrorPolicy,
    threads: usize,
) -> Result<ScanReport> {
    let mut ms: Vec<i64> = modes.into_iter().map(i64::abs).collect();
    ms.sort_unstable();
    ms.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let results: Vec<(i64, Result<Vec<Resonance>>)> =
        pool.install(|| ms.par_iter().map(|&m| (m, mode_resonances(family, m, rect, cfg))).collect());
    let mut report = ScanReport::default();
    for (m, res) in results {
        match res {
            Ok(list) => {
                for r in list {
                    match policy {
                        MirrorPolicy::Flag => report.resonances.push(Resonance { mirrored: m != 0, ..r }),
                        MirrorPolicy::Duplicate => {
                            report.resonances.push(r);
                            if m != 0 {
                                report.resonances.push(Resonance { m: -m, ..r });
                            }
                        }
                    }
                }
            }
            Err(e) => report.failures.push(ModeFailure { m, message: e.to_string() }),
        }
    }
    report.resonances.sort_by(|a, b| {
        a.lambda.re.total_cmp(&b.lambda.re).then(a.m.cmp(&b.m)).then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    Ok(report)
}

//! Complex Bessel machinery: logarithmic derivatives and overflow-free values
//! and ratios of `I_m` and `H_m^{(1)}` for integer order.
//!
//! Values are carried as [`LogScaled`] numbers (log-magnitude plus unit
//! phase). `I_m` uses the continued fraction for `I_{m+1}/I_m` and Miller's
//! backward recurrence; `H_m^{(1)}` is seeded at order zero (power series or
//! Hankel expansion for the value, Steed's continued fraction for the
//! log-derivative) and carried upward as a chain of ratios, which is stable
//! because `H` is the dominant solution.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::ops::{Div, Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TINY: f64 = 1e-300;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecfunConfig {
    /// Continued-fraction convergence tolerance.
    pub cf_tol: f64,
    /// Iteration cap for continued fractions and series.
    pub max_iter: usize,
    /// `|w|` above which the Hankel expansion seeds `H_0`.
    pub w_switch: f64,
    /// Supported depth below the real axis: `Im w ≥ −im_depth`.
    pub im_depth: f64,
}

impl Default for SpecfunConfig {
    fn default() -> Self {
        SpecfunConfig { cf_tol: 1e-14, max_iter: 10_000, w_switch: 12.0, im_depth: 5.0 }
    }
}

/// A complex number stored as `exp(log_mag)·phase` with `|phase| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScaled {
    pub log_mag: f64,
    pub phase: Complex64,
}

impl LogScaled {
    pub const ONE: LogScaled = LogScaled { log_mag: 0.0, phase: Complex64::new(1.0, 0.0) };
    pub const ZERO: LogScaled = LogScaled { log_mag: f64::NEG_INFINITY, phase: Complex64::new(1.0, 0.0) };

    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            LogScaled::ZERO
        } else {
            LogScaled { log_mag: r.ln(), phase: z / r }
        }
    }

    /// `exp(l)` for a complex logarithm `l`.
    pub fn from_log(l: Complex64) -> Self {
        LogScaled { log_mag: l.re, phase: Complex64::from_polar(1.0, l.im) }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.log_mag, self.phase.arg())
    }

    pub fn arg(&self) -> f64 {
        self.phase.arg()
    }

    pub fn to_complex(&self) -> Complex64 {
        self.phase * self.log_mag.exp()
    }

    /// Linear value with the magnitude clamped to `[0, cap]`.
    pub fn to_complex_clamped(&self, cap: f64) -> Complex64 {
        self.phase * self.log_mag.exp().min(cap)
    }

    pub fn is_finite(&self) -> bool {
        self.log_mag.is_finite() && self.phase.re.is_finite() && self.phase.im.is_finite()
    }

    pub fn scale(self, z: Complex64) -> Self {
        self * LogScaled::from_complex(z)
    }

    fn renormalized(log_mag: f64, phase: Complex64) -> Self {
        let r = phase.norm();
        LogScaled { log_mag, phase: phase / r }
    }
}

impl Mul for LogScaled {
    type Output = LogScaled;
    fn mul(self, rhs: LogScaled) -> LogScaled {
        LogScaled::renormalized(self.log_mag + rhs.log_mag, self.phase * rhs.phase)
    }
}

impl Div for LogScaled {
    type Output = LogScaled;
    fn div(self, rhs: LogScaled) -> LogScaled {
        LogScaled::renormalized(self.log_mag - rhs.log_mag, self.phase * rhs.phase.conj())
    }
}

impl Neg for LogScaled {
    type Output = LogScaled;
    fn neg(self) -> LogScaled {
        LogScaled { log_mag: self.log_mag, phase: -self.phase }
    }
}

/// Complex division without intermediate overflow or underflow (Smith).
fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let den = b.re + b.im * r;
        Complex64::new((a.re + a.im * r) / den, (a.im - a.re * r) / den)
    } else {
        let r = b.re / b.im;
        let den = b.re * r + b.im;
        Complex64::new((a.re * r + a.im) / den, (a.im * r - a.re) / den)
    }
}

/// Modified Lentz evaluation of `b0 + a1/(b1 + a2/(b2 + …))`.
fn lentz<A, B>(b0: Complex64, a: A, b: B, cfg: &SpecfunConfig, what: &'static str) -> Result<Complex64>
where
    A: Fn(usize) -> Complex64,
    B: Fn(usize) -> Complex64,
{
    if b0.norm() < TINY {
        // Evaluate the tail b1 + a2/(b2 + …) and divide once.
        let tail = lentz_nonzero(b(1), |k| a(k + 1), |k| b(k + 1), cfg, what)?;
        return Ok(cdiv(a(1), tail));
    }
    lentz_nonzero(b0, a, b, cfg, what)
}

fn lentz_nonzero<A, B>(b0: Complex64, a: A, b: B, cfg: &SpecfunConfig, what: &'static str) -> Result<Complex64>
where
    A: Fn(usize) -> Complex64,
    B: Fn(usize) -> Complex64,
{
    let one = Complex64::new(1.0, 0.0);
    let tiny = Complex64::new(TINY, 0.0);
    let mut f = b0;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..=cfg.max_iter {
        let (ak, bk) = (a(k), b(k));
        d = bk + ak * d;
        if d.norm() < TINY {
            d = tiny;
        }
        c = bk + cdiv(ak, c);
        if c.norm() < TINY {
            c = tiny;
        }
        d = cdiv(one, d);
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < cfg.cf_tol {
            return Ok(f);
        }
    }
    Err(Error::NoConvergence { what, iterations: cfg.max_iter })
}

fn check_nonzero(w: Complex64) -> Result<()> {
    if w.norm() == 0.0 || !w.re.is_finite() || !w.im.is_finite() {
        Err(Error::DomainError(format!("w = {w}")))
    } else {
        Ok(())
    }
}

/// `I_{m+1}(w)/I_m(w)` from its continued fraction.
pub fn ratio_i(m: u32, w: Complex64, cfg: &SpecfunConfig) -> Result<Complex64> {
    check_nonzero(w)?;
    let inv = w.inv();
    lentz(
        Complex64::new(0.0, 0.0),
        |_| Complex64::new(1.0, 0.0),
        |k| 2.0 * (m as f64 + k as f64) * inv,
        cfg,
        "continued fraction for I_{m+1}/I_m",
    )
}

/// `I'_m(w)/I_m(w)`.
pub fn log_deriv_i(m: u32, w: Complex64, cfg: &SpecfunConfig) -> Result<Complex64> {
    Ok(ratio_i(m, w, cfg)? + m as f64 / w)
}

/// `I_m(w)` in log-scaled form, by Miller's backward recurrence normalized
/// with `e^w = I_0 + 2 Σ I_k`.
pub fn log_i(m: u32, w: Complex64, cfg: &SpecfunConfig) -> Result<LogScaled> {
    if w.norm() == 0.0 {
        return Ok(if m == 0 { LogScaled::ONE } else { LogScaled::ZERO });
    }
    if w.re < 0.0 {
        let v = log_i(m, -w, cfg)?;
        return Ok(if m % 2 == 1 { -v } else { v });
    }
    let big = w.norm();
    let top = (m as usize).max(big.ceil() as usize) + 30 + (10.0 * big.sqrt()).ceil() as usize;
    let mut next = ratio_i(top as u32, w, cfg)?;
    let mut cur = Complex64::new(1.0, 0.0);
    let mut sum = 2.0 * (cur + next);
    let mut saved = if top == m as usize { Some(cur) } else { None };
    let inv = w.inv();
    for k in (1..=top).rev() {
        let prev = 2.0 * k as f64 * inv * cur + next;
        next = cur;
        cur = prev;
        sum += if k > 1 { 2.0 * cur } else { cur };
        if k - 1 == m as usize {
            saved = Some(cur);
        }
        let s = cur.norm();
        if s > 1e200 {
            cur /= s;
            next /= s;
            sum /= s;
            saved = saved.map(|v| v / s);
        }
    }
    let saved = saved.expect("backward recurrence passes through order m");
    let rel = LogScaled::from_complex(saved) / LogScaled::from_complex(sum);
    Ok(rel * LogScaled::from_log(w))
}

/// Power series for `(J_0, J_1, Y_0, Y_1)`.
fn series_jy01(w: Complex64, cfg: &SpecfunConfig) -> Result<[Complex64; 4]> {
    let half = 0.5 * w;
    let q = -(half * half);
    let mut t0 = Complex64::new(1.0, 0.0); // (−z²/4)^k/(k!)²
    let mut t1 = Complex64::new(1.0, 0.0); // (−z²/4)^k/(k!(k+1)!)
    let (mut j0, mut j1) = (t0, t1);
    let mut y0s = Complex64::new(0.0, 0.0);
    let mut y1s = t1 * (-EULER_GAMMA + (1.0 - EULER_GAMMA)); // ψ(1)+ψ(2)
    let mut hk = 0.0;
    let mut converged = false;
    for k in 1..cfg.max_iter {
        let kf = k as f64;
        t0 = t0 * q / (kf * kf);
        t1 = t1 * q / (kf * (kf + 1.0));
        let hk_next = hk + 1.0 / kf;
        j0 += t0;
        j1 += t1;
        y0s += hk_next * t0;
        // ψ(k+1) + ψ(k+2) = 2H_k + 1/(k+1) − 2γ
        y1s += (2.0 * hk_next + 1.0 / (kf + 1.0) - 2.0 * EULER_GAMMA) * t1;
        hk = hk_next;
        let scale = j0.norm().max(j1.norm()).max(y0s.norm()).max(1e-300);
        if kf > w.norm() && (t0.norm() + t1.norm()) * (1.0 + hk) < 1e-17 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "J/Y power series", iterations: cfg.max_iter });
    }
    let j1 = half * j1;
    let lg = half.ln();
    let y0 = (2.0 / PI) * ((lg + EULER_GAMMA) * j0 - y0s);
    let y1 = -2.0 / (PI * w) + (2.0 / PI) * lg * j1 - (1.0 / PI) * half * y1s;
    Ok([j0, j1, y0, y1])
}

/// Complex logarithm of `H_ν^{(1)}(w)`, `ν ∈ {0, 1}`, from the Hankel
/// expansion.
fn asymptotic_ln_h(nu: u32, w: Complex64) -> Complex64 {
    let mu = 4.0 * (nu * nu) as f64;
    let inv = w.inv();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let i = Complex64::new(0.0, 1.0);
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = term * i * (mu - odd * odd) / (8.0 * k as f64) * inv;
        if next.norm() >= term.norm() {
            break;
        }
        term = next;
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    let prefactor = 0.5 * (Complex64::new((2.0 / PI).ln(), 0.0) - w.ln());
    prefactor + i * (w - nu as f64 * FRAC_PI_2 - FRAC_PI_4) + sum.ln()
}

/// `H_0^{(1)′}/H_0^{(1)}` from Steed's continued fraction.
fn steed_gamma0(w: Complex64, cfg: &SpecfunConfig) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let f = lentz(
        Complex64::new(0.0, 0.0),
        |k| Complex64::new((k as f64 - 0.5).powi(2), 0.0),
        |k| 2.0 * (w + i * k as f64),
        cfg,
        "Steed continued fraction for H_0",
    )?;
    Ok(-0.5 / w + i + i / w * f)
}

/// `H_m^{(1)}(w)` held as `ln H_{m−1}` plus the ratio `H_m/H_{m−1}`
/// (with `H_{−1} = −H_1`). Products with `H_m` and `H_m′` can be formed
/// without dividing by `H_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelState {
    pub m: u32,
    pub w: Complex64,
    pub ln_prev: Complex64,
    pub ratio: Complex64,
}

impl HankelState {
    pub fn log_value(&self) -> LogScaled {
        LogScaled::from_log(self.ln_prev).scale(self.ratio)
    }

    pub fn log_deriv(&self) -> Result<Complex64> {
        if self.ratio.norm() < TINY || !self.ratio.norm().is_finite() {
            return Err(Error::NearPole(format!("{}", self.w)));
        }
        Ok(self.ratio.inv() - self.m as f64 / self.w)
    }

    /// `H_m′/H_{m−1}`.
    pub fn deriv_over_prev(&self) -> Complex64 {
        1.0 - self.m as f64 / self.w * self.ratio
    }
}

pub fn hankel_state(m: u32, w: Complex64, cfg: &SpecfunConfig) -> Result<HankelState> {
    check_nonzero(w)?;
    if w.im < -cfg.im_depth {
        return Err(Error::DomainError(format!("Im w = {} below −{}", w.im, cfg.im_depth)));
    }
    let big = w.norm();
    let (ln_h0, series_ratio) = if big <= cfg.w_switch {
        let [j0, j1, y0, y1] = series_jy01(w, cfg)?;
        let i = Complex64::new(0.0, 1.0);
        let (h0, h1) = (j0 + i * y0, j1 + i * y1);
        (h0.ln(), Some(h1 / h0))
    } else {
        (asymptotic_ln_h(0, w), None)
    };
    let r1 = if big >= 2.0 && w.re >= 1.0 {
        -steed_gamma0(w, cfg)?
    } else if let Some(r) = series_ratio {
        r
    } else {
        (asymptotic_ln_h(1, w) - ln_h0).exp()
    };
    let bad = |r: Complex64| r.norm() < TINY || !r.norm().is_finite();
    if bad(r1) {
        return Err(Error::NearPole(format!("{w}")));
    }
    if m == 0 {
        return Ok(HankelState { m, w, ln_prev: ln_h0 + (-r1).ln(), ratio: -r1.inv() });
    }
    let inv = w.inv();
    let mut ln_prev = ln_h0;
    let mut r = r1;
    for k in 1..m {
        ln_prev += r.ln();
        r = 2.0 * k as f64 * inv - r.inv();
        if bad(r) {
            return Err(Error::NearPole(format!("{w}")));
        }
    }
    Ok(HankelState { m, w, ln_prev, ratio: r })
}

/// `H_m^{(1)′}(w)/H_m^{(1)}(w)`.
pub fn log_deriv_h1(m: u32, w: Complex64, cfg: &SpecfunConfig) -> Result<Complex64> {
    hankel_state(m, w, cfg)?.log_deriv()
}

/// `H_m^{(1)}(w)` in log-scaled form.
pub fn log_h1(m: u32, w: Complex64, cfg: &SpecfunConfig) -> Result<LogScaled> {
    Ok(hankel_state(m, w, cfg)?.log_value())
}

/// Derivative of `L = I_m′/I_m` from the Riccati equation.
pub fn riccati_i(m: u32, w: Complex64, l: Complex64) -> Complex64 {
    let mw = m as f64 / w;
    -l / w - l * l + 1.0 + mw * mw
}

/// Derivative of `L = H_m′/H_m` from the Riccati equation.
pub fn riccati_h(m: u32, w: Complex64, l: Complex64) -> Complex64 {
    let mw = m as f64 / w;
    -l / w - l * l - (1.0 - mw * mw)
}

const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// `∫ L dw` along the straight segment `from → to`, with steps small enough
/// that `|L|·|Δw| ≤ 0.5`.
fn integrate_log_deriv<F>(l: F, from: Complex64, to: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let delta = to - from;
    let len = delta.norm();
    if len == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut dt = (0.25 / (l(from)?.norm() * len + 1e-300)).min(0.25);
    let (mut t, mut total) = (0.0f64, Complex64::new(0.0, 0.0));
    let mut steps = 0usize;
    while t < 1.0 {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::NoConvergence { what: "log-derivative integration", iterations: steps });
        }
        let step = dt.min(1.0 - t);
        let (c, h) = (t + 0.5 * step, 0.5 * step);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut lmax = 0.0f64;
        for (x, wt) in GL8_X.iter().zip(GL8_W) {
            let v = l(from + delta * (c + h * x))?;
            lmax = lmax.max(v.norm());
            sum += wt * v;
        }
        let piece = sum * delta * h;
        if (lmax * len * step > 0.5 || piece.norm() > 0.5) && step > 1e-14 {
            dt = 0.5 * step;
            continue;
        }
        total += piece;
        t += step;
        dt = 2.0 * step;
    }
    Ok(total)
}

/// `I_m(w1)/I_m(w2)` by integrating the log-derivative from `w2` to `w1`.
pub fn scaled_ratio_i(m: u32, w1: Complex64, w2: Complex64, cfg: &SpecfunConfig) -> Result<LogScaled> {
    check_nonzero(w2)?;
    if w1.norm() == 0.0 {
        if m > 0 {
            return Ok(LogScaled::ZERO);
        }
        let near = w2 * 1e-12;
        return Ok(LogScaled::from_log(integrate_log_deriv(|w| log_deriv_i(0, w, cfg), w2, near)?));
    }
    Ok(LogScaled::from_log(integrate_log_deriv(|w| log_deriv_i(m, w, cfg), w2, w1)?))
}

/// `H_m^{(1)}(w1)/H_m^{(1)}(w2)` by integrating the log-derivative.
pub fn scaled_ratio_h1(m: u32, w1: Complex64, w2: Complex64, cfg: &SpecfunConfig) -> Result<LogScaled> {
    check_nonzero(w1)?;
    check_nonzero(w2)?;
    Ok(LogScaled::from_log(integrate_log_deriv(|w| log_deriv_h1(m, w, cfg), w2, w1)?))
}

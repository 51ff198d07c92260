//! Cavity data model: boundary geometry plus the coefficient fields of the
//! transmission problem, sampled at equispaced arclength nodes.
//!
//! In two dimensions the tangential dual metrics reduce to scalars, so
//! `|ξ'|²_g = g·ξ²` with `ξ` dual to Euclidean arclength.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples used to represent a disk boundary.
pub const DISK_SAMPLES: usize = 64;

/// Default relative margin for the jump condition.
pub const DEFAULT_JUMP_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryGeom {
    Disk {
        radius: f64,
    },
    /// Closed curve sampled at equispaced arclength nodes, counterclockwise.
    Curve {
        samples: Vec<BoundarySample>,
        length: f64,
    },
}

impl BoundaryGeom {
    pub fn disk(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("disk radius {radius}")));
        }
        Ok(BoundaryGeom::Disk { radius })
    }

    /// Circle of the given radius represented as a sampled curve.
    pub fn circle(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || n < 3 {
            return Err(Error::InvalidInput(format!("circle radius {radius}, samples {n}")));
        }
        let samples = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                BoundarySample {
                    point: [radius * t.cos(), radius * t.sin()],
                    tangent: [-t.sin(), t.cos()],
                    curvature: 1.0 / radius,
                }
            })
            .collect();
        Ok(BoundaryGeom::Curve { samples, length: std::f64::consts::TAU * radius })
    }

    /// Closed curve from a periodic parametrization on `[0, 2π)` given by
    /// position, first and second derivatives. Nodes are placed at equal
    /// arclength.
    pub fn from_parametric<F>(gamma: F, n: usize) -> Result<Self>
    where
        F: Fn(f64) -> ([f64; 2], [f64; 2], [f64; 2]),
    {
        if n < 3 {
            return Err(Error::InvalidInput(format!("curve needs at least 3 samples, got {n}")));
        }
        let speed = |t: f64| {
            let (_, d, _) = gamma(t);
            d[0].hypot(d[1])
        };
        let panels = 64 * n;
        let dt = std::f64::consts::TAU / panels as f64;
        let mut cumulative = Vec::with_capacity(panels + 1);
        cumulative.push(0.0);
        for k in 0..panels {
            let t0 = k as f64 * dt;
            cumulative.push(cumulative[k] + gauss5(&speed, t0, t0 + dt));
        }
        let length = cumulative[panels];
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput("degenerate parametrization".into()));
        }
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            let target = length * k as f64 / n as f64;
            let j = cumulative.partition_point(|&c| c <= target).clamp(1, panels) - 1;
            let mut t = j as f64 * dt;
            let mut s = cumulative[j];
            for _ in 0..50 {
                let v = speed(t);
                if v <= 0.0 {
                    return Err(Error::InvalidInput("parametrization has zero speed".into()));
                }
                let step = (target - s) / v;
                if step.abs() < 1e-15 * length {
                    break;
                }
                let t_new = t + step;
                s += if t_new > t { gauss5(&speed, t, t_new) } else { -gauss5(&speed, t_new, t) };
                t = t_new;
            }
            let (p, d, dd) = gamma(t);
            let v = d[0].hypot(d[1]);
            samples.push(BoundarySample {
                point: p,
                tangent: [d[0] / v, d[1] / v],
                curvature: (d[0] * dd[1] - d[1] * dd[0]) / (v * v * v),
            });
        }
        Ok(BoundaryGeom::Curve { samples, length })
    }

    /// Ellipse with semi-axes `a` (along x) and `b` (along y).
    pub fn ellipse(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidInput(format!("ellipse semi-axes {a}, {b}")));
        }
        Self::from_parametric(
            |t| {
                let (s, c) = t.sin_cos();
                ([a * c, b * s], [-a * s, b * c], [-a * c, -b * s])
            },
            n,
        )
    }

    pub fn sample_count(&self) -> usize {
        match self {
            BoundaryGeom::Disk { .. } => DISK_SAMPLES,
            BoundaryGeom::Curve { samples, .. } => samples.len(),
        }
    }

    /// Total Euclidean length of the boundary.
    pub fn length(&self) -> f64 {
        match self {
            BoundaryGeom::Disk { radius } => std::f64::consts::TAU * radius,
            BoundaryGeom::Curve { length, .. } => *length,
        }
    }

    /// Arclength position of every sample node.
    pub fn arclength_nodes(&self) -> Vec<f64> {
        let n = self.sample_count();
        let l = self.length();
        (0..n).map(|k| l * k as f64 / n as f64).collect()
    }

    pub fn samples(&self) -> Vec<BoundarySample> {
        match self {
            BoundaryGeom::Disk { radius } => match BoundaryGeom::circle(*radius, DISK_SAMPLES) {
                Ok(BoundaryGeom::Curve { samples, .. }) => samples,
                _ => unreachable!("positive radius is validated at construction"),
            },
            BoundaryGeom::Curve { samples, .. } => samples.clone(),
        }
    }

    pub fn disk_radius(&self) -> Option<f64> {
        match self {
            BoundaryGeom::Disk { radius } => Some(*radius),
            BoundaryGeom::Curve { .. } => None,
        }
    }
}

fn gauss5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    const X: [f64; 5] =
        [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * X.iter().zip(W).map(|(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// Constant coefficient tuple at one boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub rho_out: f64,
    pub rho_in: f64,
    pub tau: f64,
    pub g_out: f64,
    pub g_in: f64,
}

impl Coefficients {
    /// Coefficients of the scalar-index problem `(div n⁻¹∇ − λ²)u = 0` in
    /// dimension `d`.
    pub fn from_index(n: f64, d: usize) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NonPositiveIndex(n));
        }
        if d < 2 {
            return Err(Error::InvalidInput(format!("dimension {d} < 2")));
        }
        let d = d as f64;
        Ok(Coefficients {
            rho_out: 1.0,
            rho_in: n.powf(-d / 2.0),
            tau: n.powf((d - 1.0) / 2.0),
            g_out: 1.0,
            g_in: 1.0 / n,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.rho_out, self.rho_in, self.tau, self.g_out, self.g_in];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("coefficients must be positive and finite: {self:?}")))
        }
    }

    /// Weight `τρ_I/ρ_O` multiplying the interior log-derivative.
    pub fn weight(&self) -> f64 {
        self.tau * self.rho_in / self.rho_out
    }

    /// `D = ρ_O²g_O − τ²ρ_I²g_I`; positive in the plasmonic regime.
    pub fn jump(&self) -> f64 {
        self.exterior_strength() - self.interior_strength()
    }

    pub fn exterior_strength(&self) -> f64 {
        self.rho_out * self.rho_out * self.g_out
    }

    pub fn interior_strength(&self) -> f64 {
        let t = self.tau * self.rho_in;
        t * t * self.g_in
    }

    pub fn scale(&self) -> f64 {
        self.exterior_strength().max(self.interior_strength())
    }

    fn approx_eq(&self, other: &Coefficients) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * a.abs().max(b.abs());
        close(self.rho_out, other.rho_out)
            && close(self.rho_in, other.rho_in)
            && close(self.tau, other.tau)
            && close(self.g_out, other.g_out)
            && close(self.g_in, other.g_in)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Plasmonic,
    NonPlasmonic,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub d_min: f64,
    pub d_max: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavityModel {
    pub dimension: usize,
    pub boundary: BoundaryGeom,
    pub rho_out: Vec<f64>,
    pub rho_in: Vec<f64>,
    pub tau: Vec<f64>,
    pub g_out: Vec<f64>,
    pub g_in: Vec<f64>,
    pub index_n: Option<Vec<f64>>,
}

impl CavityModel {
    /// Scalar-index cavity from per-sample index values. A single value is
    /// broadcast to every sample.
    pub fn from_index(n: &[f64], boundary: BoundaryGeom, d: usize) -> Result<Self> {
        let count = boundary.sample_count();
        let values: Vec<f64> = match n.len() {
            1 => vec![n[0]; count],
            len if len == count => n.to_vec(),
            len => return Err(Error::InvalidInput(format!("index has {len} samples, boundary has {count}"))),
        };
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositiveIndex(*bad));
        }
        let coeffs = values.iter().map(|&v| Coefficients::from_index(v, d)).collect::<Result<Vec<_>>>()?;
        let mut model = Self::assemble(boundary, d, &coeffs)?;
        model.index_n = Some(values);
        Ok(model)
    }

    pub fn from_index_const(n: f64, boundary: BoundaryGeom, d: usize) -> Result<Self> {
        Self::from_index(&[n], boundary, d)
    }

    /// Scalar-index cavity with the index given as a function of arclength.
    pub fn from_index_fn<F: Fn(f64) -> f64>(boundary: BoundaryGeom, d: usize, n: F) -> Result<Self> {
        let values: Vec<f64> = boundary.arclength_nodes().into_iter().map(n).collect();
        Self::from_index(&values, boundary, d)
    }

    /// Cavity with the same coefficient tuple at every boundary point.
    pub fn from_coefficients(boundary: BoundaryGeom, d: usize, c: Coefficients) -> Result<Self> {
        let coeffs = vec![c; boundary.sample_count()];
        Self::assemble(boundary, d, &coeffs)
    }

    /// Cavity with per-sample coefficient tuples.
    pub fn from_fields(boundary: BoundaryGeom, d: usize, fields: &[Coefficients]) -> Result<Self> {
        if fields.len() != boundary.sample_count() {
            return Err(Error::InvalidInput(format!(
                "{} coefficient samples for {} boundary samples",
                fields.len(),
                boundary.sample_count()
            )));
        }
        Self::assemble(boundary, d, fields)
    }

    fn assemble(boundary: BoundaryGeom, d: usize, coeffs: &[Coefficients]) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!("dimension {d} < 2")));
        }
        for c in coeffs {
            c.validate()?;
        }
        if matches!(boundary, BoundaryGeom::Disk { .. }) && coeffs.iter().any(|c| !c.approx_eq(&coeffs[0])) {
            return Err(Error::InvalidInput("disk geometry requires constant coefficients".into()));
        }
        Ok(CavityModel {
            dimension: d,
            boundary,
            rho_out: coeffs.iter().map(|c| c.rho_out).collect(),
            rho_in: coeffs.iter().map(|c| c.rho_in).collect(),
            tau: coeffs.iter().map(|c| c.tau).collect(),
            g_out: coeffs.iter().map(|c| c.g_out).collect(),
            g_in: coeffs.iter().map(|c| c.g_in).collect(),
            index_n: None,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.rho_out.len()
    }

    pub fn coefficients_at(&self, i: usize) -> Coefficients {
        Coefficients {
            rho_out: self.rho_out[i],
            rho_in: self.rho_in[i],
            tau: self.tau[i],
            g_out: self.g_out[i],
            g_in: self.g_in[i],
        }
    }

    /// The common coefficient tuple if the fields are constant.
    pub fn constant_coefficients(&self) -> Option<Coefficients> {
        let first = self.coefficients_at(0);
        (1..self.sample_count()).all(|i| self.coefficients_at(i).approx_eq(&first)).then_some(first)
    }

    /// Coefficients and radius of a constant-coefficient disk.
    pub fn disk(&self) -> Result<(Coefficients, f64)> {
        let radius = self.boundary.disk_radius().ok_or_else(|| Error::InvalidInput("disk geometry required".into()))?;
        let c =
            self.constant_coefficients().ok_or_else(|| Error::InvalidInput("constant coefficients required".into()))?;
        Ok((c, radius))
    }

    pub fn jump_at(&self, i: usize) -> f64 {
        self.coefficients_at(i).jump()
    }

    pub fn coefficient_scale(&self) -> f64 {
        (0..self.sample_count()).map(|i| self.coefficients_at(i).scale()).fold(0.0, f64::max)
    }

    pub fn validate_jump(&self) -> RegimeReport {
        self.validate_jump_with(DEFAULT_JUMP_DELTA)
    }

    /// Classifies the regime with threshold `delta_rel` times the coefficient
    /// scale.
    pub fn validate_jump_with(&self, delta_rel: f64) -> RegimeReport {
        let threshold = delta_rel * self.coefficient_scale();
        let (mut d_min, mut d_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..self.sample_count() {
            let d = self.jump_at(i);
            d_min = d_min.min(d);
            d_max = d_max.max(d);
        }
        let regime = if d_min > threshold {
            Regime::Plasmonic
        } else if d_max < -threshold {
            Regime::NonPlasmonic
        } else {
            Regime::Degenerate
        };
        RegimeReport { regime, d_min, d_max, threshold }
    }
}

/// Regime of the cavity under the default jump margin.
pub fn validate_jump(c: &CavityModel) -> Regime {
    c.validate_jump().regime
}

use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;

use super::config::{Format, RunConfig};
use super::output::{field_svg, num, Emitter};
use super::{Common, Failure};
use crate::cavity::{CavityModel, Coefficients, Regime, RegimeReport};
use crate::error::Error;
use crate::modes::{self, GridSpec};
use crate::rootfind::{self, MirrorPolicy, ModeFailure, ModeFamily, Rect, Resonance};
use crate::{collar, dispersion, secular, specfun, weylcount};

type CmdResult = Result<(), Failure>;

struct Session {
    cfg: RunConfig,
    config_path: PathBuf,
    threads: usize,
    out: Emitter,
}

impl Session {
    fn open(c: &Common) -> Result<Self, Failure> {
        let cfg = RunConfig::load(&c.config)?;
        let dir = c
            .out
            .clone()
            .or_else(|| std::env::var_os("OUTPUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| cfg.output.dir.clone());
        let threads = c.threads.unwrap_or(cfg.run.threads);
        if threads == 0 {
            return Err(Failure::Config(anyhow::anyhow!("threads must be at least 1")));
        }
        Ok(Session { config_path: c.config.clone(), threads, out: Emitter::new(dir)?, cfg })
    }

    fn wants(&self, f: Format) -> bool {
        self.cfg.output.formats.contains(&f)
    }

    fn regime(&self, cavity: &CavityModel) -> RegimeReport {
        cavity.validate_jump_with(self.cfg.tolerances.jump_delta)
    }

    /// Rejects degenerate cavities.
    fn guard(&self, cavity: &CavityModel) -> Result<RegimeReport, Failure> {
        let report = self.regime(cavity);
        if report.regime == Regime::Degenerate {
            return Err(degenerate(&report));
        }
        Ok(report)
    }

    fn disk(&self, cavity: &CavityModel) -> Result<ModeFamily, Failure> {
        if cavity.dimension != 2 {
            return Err(Failure::Config(anyhow::anyhow!("this command needs dimension = 2")));
        }
        let (coeffs, radius) = cavity
            .disk()
            .map_err(|e| Failure::Config(anyhow::anyhow!("this command needs a constant-coefficient disk: {e}")))?;
        Ok(ModeFamily { coeffs, radius, specfun: self.cfg.specfun_config() })
    }

    fn finish(self, command: &str) -> CmdResult {
        self.out.finish(command, &self.config_path, self.threads)?;
        Ok(())
    }
}

fn degenerate(r: &RegimeReport) -> Failure {
    Failure::Domain(Error::DomainError(format!(
        "jump condition violated: ρ_O²g_O − τ²ρ_I²g_I ranges over [{:e}, {:e}] within threshold {:e}",
        r.d_min, r.d_max, r.threshold
    )))
}

#[derive(Serialize)]
struct ClassifyOutput {
    regime: Regime,
    d_min: f64,
    d_max: f64,
    threshold: f64,
    samples: usize,
}

pub fn classify(c: &Common) -> CmdResult {
    let mut s = Session::open(c)?;
    let cavity = s.cfg.cavity()?;
    let r = s.regime(&cavity);
    let payload = ClassifyOutput {
        regime: r.regime,
        d_min: r.d_min,
        d_max: r.d_max,
        threshold: r.threshold,
        samples: cavity.sample_count(),
    };
    println!("{}", serde_json::to_string(&payload).map_err(anyhow::Error::from)?);
    s.out.json("classify.json", &payload)?;
    s.finish("classify")?;
    if r.regime == Regime::Degenerate {
        return Err(degenerate(&r));
    }
    Ok(())
}

#[derive(Serialize)]
struct ResonanceRow {
    m: i64,
    re_lambda: f64,
    im_lambda: f64,
    multiplicity: u32,
    residual: f64,
    newton_iters: u32,
    mirrored: bool,
}

impl From<&Resonance> for ResonanceRow {
    fn from(r: &Resonance) -> Self {
        ResonanceRow {
            m: r.m,
            re_lambda: r.lambda.re,
            im_lambda: r.lambda.im,
            multiplicity: r.multiplicity,
            residual: r.residual,
            newton_iters: r.newton_iters,
            mirrored: r.mirrored,
        }
    }
}

fn partial(failures: &[ModeFailure]) -> CmdResult {
    if failures.is_empty() {
        return Ok(());
    }
    let modes: Vec<String> = failures.iter().map(|f| f.m.to_string()).collect();
    Err(Failure::Partial(format!("modes {} failed", modes.join(", "))))
}

pub fn solve(c: &Common) -> CmdResult {
    let mut s = Session::open(c)?;
    let cavity = s.cfg.cavity()?;
    s.guard(&cavity)?;
    let family = s.disk(&cavity)?;
    let rect = s.cfg.window()?;
    let scan = &s.cfg.scan;
    let report = rootfind::scan_modes(
        &family,
        scan.m_min..=scan.m_max,
        &rect,
        &s.cfg.root_config(),
        MirrorPolicy::Flag,
        s.threads,
    )?;
    let rows: Vec<ResonanceRow> = report.resonances.iter().map(ResonanceRow::from).collect();
    if s.wants(Format::Csv) {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.m.to_string(),
                    num(r.re_lambda),
                    num(r.im_lambda),
                    r.multiplicity.to_string(),
                    num(r.residual),
                    r.newton_iters.to_string(),
                ]
            })
            .collect();
        s.out.csv(
            "resonances.csv",
            &["m", "re_lambda", "im_lambda", "multiplicity", "residual", "newton_iters"],
            &table,
        )?;
    }
    if s.wants(Format::Json) {
        s.out.json("resonances.json", &rows)?;
    }
    s.out.json("solve.failures.json", &report.failures)?;
    println!("{} resonances, {} failed modes", rows.len(), report.failures.len());
    s.finish("solve")?;
    partial(&report.failures)
}

#[derive(Serialize)]
struct CountOutput {
    lambda: f64,
    depth: f64,
    exact: Option<u64>,
    predicted: f64,
    ratio: Option<f64>,
    m_max: Option<i64>,
    failures: Vec<ModeFailure>,
}

pub fn count(c: &Common) -> CmdResult {
    let mut s = Session::open(c)?;
    let spec = s.cfg.count.clone().ok_or_else(|| anyhow::anyhow!("missing [count] section"))?;
    if !(spec.lambda >= 0.0 && spec.depth > 0.0 && spec.margin >= 0) {
        return Err(Failure::Config(anyhow::anyhow!("[count] needs lambda ≥ 0, depth > 0, margin ≥ 0")));
    }
    let cavity = s.cfg.cavity()?;
    s.guard(&cavity)?;
    let predicted = weylcount::predicted_count(&cavity, spec.lambda)?;
    let payload = if cavity.boundary.disk_radius().is_some() && cavity.dimension == 2 {
        let family = s.disk(&cavity)?;
        let r = weylcount::count_disk(&family, spec.lambda, spec.depth, spec.margin, &s.cfg.root_config(), s.threads)?;
        CountOutput {
            lambda: r.lambda,
            depth: r.depth,
            exact: Some(r.exact),
            predicted: r.predicted,
            ratio: r.ratio,
            m_max: Some(r.m_max),
            failures: r.failures,
        }
    } else {
        CountOutput {
            lambda: spec.lambda,
            depth: spec.depth,
            exact: None,
            predicted,
            ratio: None,
            m_max: None,
            failures: vec![],
        }
    };
    println!("{}", serde_json::to_string(&payload).map_err(anyhow::Error::from)?);
    s.out.json("count.json", &payload)?;
    s.finish("count")?;
    partial(&payload.failures)
}

#[derive(Serialize)]
struct DispRow {
    m: i64,
    principal: f64,
    corrected: Option<f64>,
    camo_formula: Option<f64>,
    exact_re: Option<f64>,
    exact_im: Option<f64>,
}

fn nearest(list: &[Resonance], target: Complex64) -> Option<Resonance> {
    list.iter().copied().min_by(|a, b| (a.lambda - target).norm().total_cmp(&(b.lambda - target).norm()))
}

pub fn disp(c: &Common) -> CmdResult {
    let mut s = Session::open(c)?;
    let spec = s.cfg.disp.clone().ok_or_else(|| anyhow::anyhow!("missing [disp] section"))?;
    let cavity = s.cfg.cavity()?;
    s.guard(&cavity)?;
    let family = s.disk(&cavity)?;
    let index = cavity.index_n.as_ref().map(|n| n[0]);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &m in &spec.modes {
        let principal = dispersion::principal_for(&family.coeffs, family.radius, m)?;
        let corrected = collar::corrected_for(&family.coeffs, family.radius, m).ok();
        let camo_formula =
            index.map(|n| dispersion::camo_quasi_eigenvalue(n, std::f64::consts::TAU * family.radius, m.abs()));
        let mut exact = None;
        if spec.exact && m != 0 {
            let rect = Rect::new(0.5 * principal, 1.5 * principal, s.cfg.scan.im_min, -1e-9)?;
            match rootfind::mode_resonances(&family, m, &rect, &s.cfg.root_config()) {
                Ok(list) => exact = nearest(&list, principal.into()).map(|r| r.lambda),
                Err(e) => failures.push(ModeFailure { m, message: e.to_string() }),
            }
        }
        rows.push(DispRow {
            m,
            principal,
            corrected,
            camo_formula,
            exact_re: exact.map(|z| z.re),
            exact_im: exact.map(|z| z.im),
        });
    }
    if s.wants(Format::Csv) {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.m.to_string(),
                    num(r.principal),
                    opt(r.corrected),
                    opt(r.camo_formula),
                    opt(r.exact_re),
                    opt(r.exact_im),
                ]
            })
            .collect();
        s.out.csv("disp.csv", &["m", "principal", "corrected", "camo_formula", "exact_re", "exact_im"], &table)?;
    }
    if s.wants(Format::Json) {
        s.out.json("disp.json", &rows)?;
    }
    s.finish("disp")?;
    partial(&failures)
}

#[derive(Serialize)]
struct LocalizationOutput {
    m: i64,
    re_lambda: f64,
    im_lambda: f64,
    shell_width: f64,
    shell_mass_fraction: f64,
    interior_decay_rate: f64,
    exterior_decay_rate: f64,
    delta: f64,
    trace_ratio: f64,
}

pub fn field(c: &Common) -> CmdResult {
    let mut s = Session::open(c)?;
    let spec = s.cfg.field.clone().unwrap_or_default();
    let m = spec.m.ok_or_else(|| anyhow::anyhow!("missing resonance selector: [field] m"))?;
    let cavity = s.cfg.cavity()?;
    s.guard(&cavity)?;
    let family = s.disk(&cavity)?;
    let rect = s.cfg.window()?;
    let list = rootfind::mode_resonances(&family, m, &rect, &s.cfg.root_config())?;
    let chosen = match spec.near {
        Some([re, im]) => nearest(&list, Complex64::new(re, im)),
        None => list.first().copied(),
    }
    .ok_or_else(|| Error::NoSolution(format!("no resonance of mode {m} in the scan window")))?;
    let grid = GridSpec {
        r_max_factor: spec.r_max_factor,
        n_theta: spec.n_theta,
        collar_intervals: spec.collar_intervals,
        bulk_step: spec.bulk_step,
    };
    let f = modes::synthesize(&family.coeffs, family.radius, &chosen, &grid)?;
    let loc = f.localization_report()?;
    let delta = spec.delta * family.radius;
    let payload = LocalizationOutput {
        m,
        re_lambda: chosen.lambda.re,
        im_lambda: chosen.lambda.im,
        shell_width: loc.shell_width,
        shell_mass_fraction: loc.shell_mass_fraction,
        interior_decay_rate: loc.interior_decay_rate,
        exterior_decay_rate: loc.exterior_decay_rate,
        delta,
        trace_ratio: f.trace_ratio(delta)?,
    };
    if s.wants(Format::Csv) {
        let mut table = Vec::with_capacity(f.radii.len() * f.thetas.len());
        for (ir, &r) in f.radii.iter().enumerate() {
            for (it, &theta) in f.thetas.iter().enumerate() {
                let u = f.sample(ir, it);
                let z = u.to_complex();
                table.push(vec![num(r), num(theta), num(z.re), num(z.im), num(u.log_mag)]);
            }
        }
        s.out.csv("field.csv", &["r", "theta", "re_u", "im_u", "log_abs_u"], &table)?;
    }
    s.out.json("localization.json", &payload)?;
    if s.wants(Format::Svg) {
        s.out.text("field.svg", &field_svg(&f, spec.svg_cells.max(1), spec.clamp))?;
    }
    println!("{}", serde_json::to_string(&payload).map_err(anyhow::Error::from)?);
    s.finish("field")
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn riccati_check(
    name: &'static str,
    l: impl Fn(Complex64) -> crate::Result<Complex64>,
    rhs: impl Fn(Complex64, Complex64) -> Complex64,
) -> Check {
    let points = [Complex64::new(3.0, -0.2), Complex64::new(12.5, -0.1), Complex64::new(30.0, 0.5)];
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for &w in &points {
        let r = (|| -> crate::Result<f64> {
            let fd = (l(w + h)? - l(w - h)?) / (2.0 * h);
            let exact = rhs(w, l(w)?);
            Ok((fd - exact).norm() / exact.norm().max(1.0))
        })();
        worst = worst.max(r.unwrap_or(f64::INFINITY));
    }
    Check { name, pass: worst <= 1e-7, detail: format!("max residual {worst:.2e}") }
}

fn shown<T>(r: &crate::Result<T>, f: impl FnOnce(&T) -> String) -> String {
    match r {
        Ok(v) => f(v),
        Err(e) => format!("error: {e}"),
    }
}

/// Runs a short battery of internal consistency checks.
pub fn selftest() -> CmdResult {
    let cfg = specfun::SpecfunConfig::default();
    let mut checks = vec![
        riccati_check("riccati_i", |w| specfun::log_deriv_i(16, w, &cfg), |w, l| specfun::riccati_i(16, w, l)),
        riccati_check("riccati_h1", |w| specfun::log_deriv_h1(16, w, &cfg), |w, l| specfun::riccati_h(16, w, l)),
    ];

    let flat = collar::CollarData::flat(collar::Side::Exterior, 1.0);
    let e0 = collar::next_order(&flat, &collar::principal_jet(&flat, 1.7, collar::Branch::Minus)).map(|j| j.e0);
    checks.push(Check {
        name: "flat_jet",
        pass: e0 == Ok(Complex64::new(0.0, 0.0)),
        detail: shown(&e0, |e| format!("e0 = {e}")),
    });

    let root = (|| -> crate::Result<(Complex64, f64, f64)> {
        let family = ModeFamily::from_index(3.0, 1.0)?;
        let list = rootfind::mode_resonances(&family, 16, &Rect::new(10.0, 15.0, -0.5, -1e-9)?, &Default::default())?;
        let r = list.first().ok_or_else(|| Error::NoSolution("mode 16".into()))?;
        let ctx = secular::SecularContext::new(16, 3.0, 1.0)?;
        let dtn = ctx.dtn_eigenvalues(r.lambda)?;
        Ok((r.lambda, r.residual, (r.lambda * r.lambda).im.signum() * dtn.interior.im))
    })();
    checks.push(match root {
        Ok((z, res, sign)) => Check {
            name: "resonance_m16",
            pass: res <= 1e-8 && sign > 0.0 && z.im < 0.0,
            detail: format!("λ = {z}, residual {res:.1e}"),
        },
        Err(e) => Check { name: "resonance_m16", pass: false, detail: e.to_string() },
    });

    let predicted = Coefficients::from_index(3.0, 2)
        .and_then(|c| CavityModel::from_coefficients(crate::cavity::BoundaryGeom::disk(1.0)?, 2, c))
        .and_then(|c| weylcount::predicted_count(&c, 40.0));
    let expect = 80.0 * 1.5f64.sqrt();
    checks.push(Check {
        name: "weyl_prediction",
        pass: predicted.as_ref().is_ok_and(|p| (p - expect).abs() <= 1e-10 * expect),
        detail: shown(&predicted, |p| format!("predicted {p:.6} at λ = 40")),
    });

    let jump = (|| -> crate::Result<f64> {
        let family = ModeFamily::from_index(3.0, 1.0)?;
        let list = rootfind::mode_resonances(&family, 8, &Rect::new(4.0, 8.0, -0.5, -1e-9)?, &Default::default())?;
        let r = list.first().ok_or_else(|| Error::NoSolution("mode 8".into()))?;
        let f = modes::synthesize(&family.coeffs, 1.0, r, &GridSpec::default())?;
        let (inner, outer) = f.boundary_derivatives();
        Ok(((outer / inner).re + f.jump_factor()).abs() / f.jump_factor())
    })();
    checks.push(Check {
        name: "transmission_jump",
        pass: jump.as_ref().is_ok_and(|e| *e <= 0.02),
        detail: shown(&jump, |e| format!("relative jump error {e:.2e}")),
    });

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    for c in &checks {
        println!("{} {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Partial(format!("self-test failures: {}", failed.join(", "))))
    }
}

//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion plus
//! informational lines, then a summary. The process exits non-zero on a
//! failed criterion only when `ACCEPTANCE_STRICT=1` is set, so that the
//! remaining test targets still run under a plain `cargo test`.

mod common;

use std::fs;
use std::process::Command;
use std::time::Instant;

use common::*;
use num_complex::Complex64;
use plasmon::collar::{self, next_order, principal_jet, Branch, CollarData, Side};
use plasmon::dispersion::principal_for;
use plasmon::modes::{synthesize, GridSpec};
use plasmon::rootfind::{
    mode_resonances, scan_modes, winding_count, MirrorPolicy, ModeFamily, Rect, Resonance, RootConfig,
};
use plasmon::secular::SecularContext;
use plasmon::specfun::*;
use plasmon::weylcount::count_disk;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

type Outcome = anyhow::Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

const REF_LOW: Complex64 = Complex64::new(8.4647, -1.0396e-2);
const REF_HIGH: Complex64 = Complex64::new(13.145, -8.5412e-4);

fn index3() -> ModeFamily {
    ModeFamily::from_index(3.0, 1.0).unwrap()
}

fn root(fam: &ModeFamily, m: i64) -> anyhow::Result<Resonance> {
    let rect = Rect::new(0.05, 40.0, -0.5, -1e-9)?;
    let r = mode_resonances(fam, m, &rect, &RootConfig::default())?;
    anyhow::ensure!(r.len() == 1, "mode {m}: {} roots in window", r.len());
    Ok(r[0])
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ")
}

fn nearest(rows: &[Complex64], target: Complex64) -> Option<(Complex64, f64)> {
    rows.iter().map(|&z| (z, (z - target).norm())).min_by(|a, b| a.1.total_cmp(&b.1))
}

fn solve_rows(config: &str) -> anyhow::Result<(Vec<Complex64>, f64)> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("run.toml");
    fs::write(&path, config)?;
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_plasmon"))
        .args(["solve", "-j", "1", "-c"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env_remove("OUTPUT_DIR")
        .output()?;
    let secs = start.elapsed().as_secs_f64();
    anyhow::ensure!(out.status.success(), "solve exited with {:?}", out.status.code());
    let text = fs::read_to_string(dir.path().join("out/resonances.csv"))?;
    let rows = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Ok(Complex64::new(f[1].parse()?, f[2].parse()?))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok((rows, secs))
}

const REF_WINDOW: &str = "[scan]\nre_min = 8.0\nre_max = 14.0\nim_min = -0.1\nim_max = -1e-9\nm_max = 30\n";

fn criterion_1() -> Outcome {
    let (rows, secs) = solve_rows(&format!("[cavity]\nn = 3.0\n{REF_WINDOW}"))?;
    let dist = |t| nearest(&rows, t).map_or(f64::INFINITY, |p| p.1);
    let (d_low, d_high) = (dist(REF_LOW), dist(REF_HIGH));
    let pass = d_low <= 1e-2 && d_high <= 1e-2 && secs <= 60.0;
    info(&format!("1   stretch 1e-3: {}", if d_low <= 1e-3 && d_high <= 1e-3 { "met" } else { "not met" }));
    Ok((pass, format!("{} rows, distances {d_low:.3e} / {d_high:.3e} (≤ 1e-2), {secs:.1} s (≤ 60 s)", rows.len())))
}

fn criterion_1_contrast9() -> anyhow::Result<String> {
    let config = format!(
        "[cavity]\n[cavity.coefficients]\nrho_out = 1.0\nrho_in = 1.0\ntau = 1.0\ng_out = 1.0\ng_in = 0.1111111111111111\n{REF_WINDOW}"
    );
    let (rows, _) = solve_rows(&config)?;
    let (a, da) = nearest(&rows, REF_LOW).ok_or_else(|| anyhow::anyhow!("no rows"))?;
    let (b, db) = nearest(&rows, REF_HIGH).ok_or_else(|| anyhow::anyhow!("no rows"))?;
    Ok(format!("unit densities, g_I = 1/9: {a:.6} at {da:.2e}, {b:.6} at {db:.2e}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let cfg = RootConfig::default();
    let at40 = count_disk(&index3(), 40.0, 0.5, 8, &cfg, 4)?;
    let at20 = count_disk(&index3(), 20.0, 0.5, 8, &cfg, 4)?;
    let secs = start.elapsed().as_secs_f64();
    let dev = |r: &plasmon::weylcount::CountReport| (r.exact as f64 / r.predicted - 1.0).abs();
    let (d40, d20) = (dev(&at40), dev(&at20));
    let pass = d40 <= 0.1 && d40 <= d20 && secs <= 300.0 && at40.failures.is_empty();
    Ok((
        pass,
        format!(
            "λ=40: {} vs {:.2} (dev {d40:.4}); λ=20: {} vs {:.2} (dev {d20:.4}); {secs:.1} s",
            at40.exact, at40.predicted, at20.exact, at20.predicted
        ),
    ))
}

fn criterion_3() -> Outcome {
    let fam = ModeFamily::from_index(0.5, 1.0)?;
    let rect = Rect::new(5.0, 40.0, -0.5, -1e-6)?;
    let mut nonzero = Vec::new();
    for m in -60..=60 {
        let w = winding_count(&fam.context(m)?, &rect, &RootConfig::default())?;
        if w != 0 {
            nonzero.push((m, w));
        }
    }
    Ok((nonzero.is_empty(), format!("121 modes, nonzero windings: {nonzero:?}")))
}

fn criterion_4() -> Outcome {
    let rect = Rect::new(5.0, 40.0, -0.5, -1e-9)?;
    let report = scan_modes(&index3(), 0..=60, &rect, &RootConfig::default(), MirrorPolicy::Flag, 4)?;
    anyhow::ensure!(report.failures.is_empty(), "scan failures: {:?}", report.failures);
    let deep: Vec<_> = report.resonances.iter().filter(|r| r.lambda.im <= -0.05).collect();
    let im = |m: i64| report.resonances.iter().find(|r| r.m == m).map(|r| r.lambda.im.abs());
    let mut ratios = Vec::new();
    let mut width_ok = true;
    for m in 8..=28 {
        match (im(m), im(m + 4)) {
            (Some(a), Some(b)) => {
                ratios.push(b / a);
                width_ok &= b < a / 4.0;
            }
            _ => width_ok = false,
        }
    }
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let deepest = report.resonances.iter().map(|r| r.lambda.im).fold(0.0, f64::min);
    Ok((
        deep.is_empty() && width_ok,
        format!(
            "{} roots, {} with Im λ ≤ -0.05 (min {deepest:.4}); max |Im λ_(m+4)|/|Im λ_m| over m=8..28 = {worst:.3} (< 0.25)",
            report.resonances.len(),
            deep.len()
        ),
    ))
}

fn criterion_5() -> Outcome {
    let slope = (2.0f64 / 3.0).sqrt();
    let mut errs = Vec::new();
    for m in [8, 12, 16, 20, 24, 30] {
        let l = root(&index3(), m)?.lambda;
        errs.push((l - m as f64 * slope).norm() / l.norm());
    }
    let last = *errs.last().unwrap();
    Ok((
        last <= 0.02 && strictly_decreasing(&errs),
        format!("relative errors m=8..30: [{}]; m=30 {last:.4} (≤ 0.02)", fmt_list(&errs)),
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut bad_int, mut bad_ext, mut ext_cases) = (0, 0, 0);
    let mut offenders = Vec::new();
    for _ in 0..100 {
        let m: i64 = rng.random_range(0..=40);
        let modulus: f64 = rng.random_range(5.0..30.0);
        let im = rng.random_range(1e-3..1e-1) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let lambda = Complex64::new((modulus * modulus - im * im).sqrt(), im);
        let d = SecularContext::new(m, 3.0, 1.0)?.dtn_eigenvalues(lambda)?;
        let s = (lambda * lambda).im.signum();
        if s * d.interior.im <= 0.0 {
            bad_int += 1;
        }
        if m as f64 >= 1.2 * modulus {
            ext_cases += 1;
            if s * d.exterior.im >= 0.0 {
                bad_ext += 1;
                offenders.push(format!("m={m} λ={lambda:.4} ext={:.3e}", d.exterior));
            }
        }
    }
    Ok((
        bad_int == 0 && bad_ext == 0,
        format!("100 samples: interior violations {bad_int}; exterior violations {bad_ext} of {ext_cases} with m ≥ 1.2|λ| {offenders:?}"),
    ))
}

fn criterion_7() -> Outcome {
    let grid = GridSpec::default();
    let coeffs = plasmon::cavity::Coefficients::from_index(3.0, 2)?;
    let field = |m| -> anyhow::Result<_> { Ok(synthesize(&coeffs, 1.0, &root(&index3(), m)?, &grid)?) };
    let shell = field(16)?.localization_report()?.shell_mass_fraction;
    let mut traces = Vec::new();
    for m in [8, 12, 16, 20, 24] {
        let f = field(m)?;
        traces.push((f.lambda.re, f.trace_ratio(0.3)?));
    }
    let weighted = |n: i32| traces.iter().map(|&(re, t)| re.powi(n) * t).collect::<Vec<_>>();
    for n in 0..=3 {
        let w = weighted(n);
        info(&format!(
            "7   N={n}: (Re λ)^N·trace_ratio(0.3) over m=8..24 [{}] {}",
            fmt_list(&w),
            if strictly_decreasing(&w) { "decreasing" } else { "not decreasing" }
        ));
    }
    let cubed = weighted(3);
    Ok((
        shell >= 0.9 && strictly_decreasing(&cubed),
        format!("m=16 shell fraction {shell:.4} (≥ 0.9); (Re λ)^3·trace decreasing: {}", strictly_decreasing(&cubed)),
    ))
}

fn criterion_7_contrast9() -> anyhow::Result<String> {
    let fam = ModeFamily::new(contrast9(), 1.0);
    let r = mode_resonances(&fam, 20, &Rect::new(12.5, 13.5, -0.1, -1e-8)?, &RootConfig::default())?;
    anyhow::ensure!(r.len() == 1, "no mode 20 root");
    let f = synthesize(&contrast9(), 1.0, &r[0], &GridSpec::default())?;
    Ok(format!(
        "unit densities, g_I = 1/9, m=20: shell fraction {:.4}, trace_ratio(0.3) {:.4e}",
        f.localization_report()?.shell_mass_fraction,
        f.trace_ratio(0.3)?
    ))
}

fn criterion_8() -> Outcome {
    let cfg = SpecfunConfig::default();
    let mut rng = StdRng::seed_from_u64(0x0b5e);
    let fd = |f: &dyn Fn(Complex64) -> anyhow::Result<Complex64>, w: Complex64| -> anyhow::Result<Complex64> {
        let h = 1e-5 * w.norm();
        Ok((f(w + h)? - f(w - h)?) / (2.0 * h))
    };
    let (mut worst_i, mut worst_h) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let m: u32 = rng.random_range(0..=40);
        let w = Complex64::new(rng.random_range(1.0..30.0), rng.random_range(-1.0..1.0));
        let li = log_deriv_i(m, w, &cfg)?;
        let di = fd(&|z| Ok(log_deriv_i(m, z, &cfg)?), w)?;
        worst_i = worst_i.max((di - riccati_i(m, w, li)).norm());
        let lh = log_deriv_h1(m, w, &cfg)?;
        let dh = fd(&|z| Ok(log_deriv_h1(m, z, &cfg)?), w)?;
        worst_h = worst_h.max((dh - riccati_h(m, w, lh)).norm());
    }
    let mut worst_oracle = 0.0f64;
    for (m, w) in [(0, c(1.0, 0.0)), (5, c(10.0, 0.0)), (3, c(0.5, 0.0)), (12, c(6.0, -0.4))] {
        worst_oracle = worst_oracle.max(rel(log_deriv_i(m, w, &cfg)?, oracle_log_deriv_i(m, w)));
    }
    for (m, w) in [(3, c(5.0, 0.1)), (0, c(0.3, 0.0)), (7, c(4.0, -0.5)), (12, c(9.0, 0.2))] {
        worst_oracle = worst_oracle.max(rel(log_deriv_h1(m, w, &cfg)?, oracle_log_deriv_h1(m, w)));
    }
    let h_ratio = scaled_ratio_h1(0, c(2.0, 0.0), c(1.0, 0.0), &cfg)?.to_complex();
    worst_oracle = worst_oracle.max(rel(h_ratio, series_h1(0, c(2.0, 0.0)) / series_h1(0, c(1.0, 0.0))));
    let i_ratio = scaled_ratio_i(0, c(2.0, 0.0), c(1.0, 0.0), &cfg)?.to_complex();
    worst_oracle = worst_oracle.max(rel(i_ratio, series_i(0, c(2.0, 0.0)) / series_i(0, c(1.0, 0.0))));
    Ok((
        worst_i <= 1e-8 && worst_h <= 1e-8 && worst_oracle <= 1e-10,
        format!("Riccati residual max I {worst_i:.2e}, H {worst_h:.2e} (≤ 1e-8); series oracle max rel {worst_oracle:.2e} (≤ 1e-10)"),
    ))
}

fn criterion_9() -> Outcome {
    let mut flat_ok = true;
    for side in [Side::Exterior, Side::Interior] {
        for g in [1.0f64, 1.0 / 3.0, 0.2, 2.5] {
            for k in 0..40 {
                let xi = 1.01 / g.sqrt() + 0.25 * k as f64;
                let cd = CollarData::flat(side, g);
                let jet = next_order(&cd, &principal_jet(&cd, xi, Branch::Minus))?;
                flat_ok &= jet.e0 == Complex64::new(0.0, 0.0);
            }
        }
    }
    let coeffs = plasmon::cavity::Coefficients::from_index(3.0, 2)?;
    let exact = root(&index3(), 24)?.lambda.re;
    let principal = principal_for(&coeffs, 1.0, 24)?;
    let corrected = collar::corrected_for(&coeffs, 1.0, 24)?;
    let (e_p, e_c) = ((principal - exact).abs(), (corrected - exact).abs());
    Ok((
        flat_ok && e_c <= 0.5 * e_p,
        format!(
            "flat e0 = 0 exactly: {flat_ok}; m=24: exact {exact:.4}, principal {principal:.4} (err {e_p:.4}), corrected {corrected:.4} (err {e_c:.4}, ratio {:.3} ≤ 0.5)",
            e_c / e_p
        ),
    ))
}

fn info(line: &str) {
    println!("info      {line}");
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
        ("9", criterion_9),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        let start = Instant::now();
        let (pass, detail) = run().unwrap_or_else(|e| (false, format!("error: {e:#}")));
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("criterion {id} {tag} [{:.1} s] {detail}", start.elapsed().as_secs_f64());
        if !pass {
            failed.push(id);
        }
        let extra = match id {
            "1" => Some(criterion_1_contrast9()),
            "7" => Some(criterion_7_contrast9()),
            _ => None,
        };
        if let Some(r) = extra {
            info(&format!("{id}   {}", r.unwrap_or_else(|e| format!("error: {e:#}"))));
        }
    }
    println!("acceptance: {} of 9 criteria passed; failed: {failed:?}", 9 - failed.len());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}

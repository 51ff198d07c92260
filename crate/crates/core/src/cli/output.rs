//! File emission: CSV with fixed 17-digit formatting and LF endings, pretty
//! JSON, SVG heatmaps and the timestamped metadata sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;

use crate::modes::ModeField;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Emitter {
    pub dir: PathBuf,
    written: Vec<String>,
}

impl Emitter {
    pub fn new(dir: PathBuf) -> anyhow::Result<Self> {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Emitter { dir, written: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
        let path = self.path(name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn text(&mut self, name: &str, body: &str) -> anyhow::Result<()> {
        let path = self.path(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes `<command>.meta.json`, the only file carrying a timestamp.
    pub fn finish(mut self, command: &str, config: &Path, threads: usize) -> anyhow::Result<()> {
        let unix_time = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = Metadata {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.display().to_string(),
            threads,
            unix_time,
            outputs: std::mem::take(&mut self.written),
        };
        self.json(&format!("{command}.meta.json"), &meta)
    }
}

#[derive(Serialize)]
struct Metadata {
    command: String,
    version: String,
    config: String,
    threads: usize,
    unix_time: u64,
    outputs: Vec<String>,
}

/// Blue-white-red map of `v ∈ [−1, 1]`.
fn diverging(v: f64) -> (u8, u8, u8) {
    let v = v.clamp(-1.0, 1.0);
    let fade = |t: f64| (255.0 * (1.0 - t)).round() as u8;
    if v >= 0.0 {
        (255, fade(v), fade(v))
    } else {
        (fade(-v), fade(-v), 255)
    }
}

/// Heatmap of `Re u` on a square raster covering the grid disk.
pub fn field_svg(f: &ModeField, cells: usize, clamp: f64) -> String {
    let r_max = *f.radii.last().expect("non-empty grid");
    let px = 4usize;
    let size = cells * px;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(out, "<rect width=\"{size}\" height=\"{size}\" fill=\"#808080\"/>");
    let n_theta = f.thetas.len();
    for row in 0..cells {
        for col in 0..cells {
            let x = ((col as f64 + 0.5) / cells as f64 * 2.0 - 1.0) * r_max;
            let y = (1.0 - (row as f64 + 0.5) / cells as f64 * 2.0) * r_max;
            let r = x.hypot(y);
            if r > r_max {
                continue;
            }
            let ir = f.radii.partition_point(|&g| g < r).min(f.radii.len() - 1);
            let ir = if ir > 0 && r - f.radii[ir - 1] < f.radii[ir] - r { ir - 1 } else { ir };
            let theta = y.atan2(x).rem_euclid(std::f64::consts::TAU);
            let it = ((theta / std::f64::consts::TAU * n_theta as f64).round() as usize) % n_theta;
            let v = f.sample_clamped(ir, it, clamp).re / clamp;
            let (cr, cg, cb) = diverging(v);
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{px}\" height=\"{px}\" fill=\"#{cr:02x}{cg:02x}{cb:02x}\"/>",
                col * px,
                row * px
            );
        }
    }
    let c = size as f64 / 2.0;
    let rb = f.radius / r_max * c;
    let _ =
        writeln!(out, "<circle cx=\"{c}\" cy=\"{c}\" r=\"{rb}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>");
    out.push_str("</svg>\n");
    out
}

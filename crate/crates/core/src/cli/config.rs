//! Run configuration: a TOML document of flat `key = value` pairs grouped
//! under section headers.
//!
//! ```toml
//! [cavity]
//! n = 3.0              # or n_table = [...], or [cavity.coefficients]
//! geometry = "disk"    # disk | circle | ellipse
//! radius = 1.0
//!
//! [scan]
//! re_min = 8.0
//! re_max = 14.0
//! im_min = -0.1
//! im_max = -1e-9
//! m_max = 30
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use serde::Deserialize;

use crate::cavity::{BoundaryGeom, CavityModel, Coefficients, DISK_SAMPLES};
use crate::error::Error;
use crate::rootfind::{Rect, RootConfig};
use crate::specfun::SpecfunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    #[default]
    Disk,
    Circle,
    Ellipse,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySpec {
    pub n: Option<f64>,
    pub n_table: Option<Vec<f64>>,
    pub coefficients: Option<Coefficients>,
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default = "one")]
    pub radius: f64,
    pub semi_axes: Option<[f64; 2]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "two")]
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub m_min: i64,
    pub m_max: i64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec { re_min: 0.05, re_max: 40.0, im_min: -0.5, im_max: -1e-9, m_min: 0, m_max: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub root_tol: f64,
    pub cf_tol: f64,
    pub jump_delta: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { root_tol: 1e-10, cf_tol: 1e-14, jump_delta: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json] }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    pub threads: usize,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec { threads: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountSpec {
    pub lambda: f64,
    #[serde(default = "default_depth")]
    pub depth: f64,
    #[serde(default = "default_margin")]
    pub margin: i64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispSpec {
    pub modes: Vec<i64>,
    #[serde(default = "yes")]
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    pub m: Option<i64>,
    /// Picks the root of mode `m` closest to `re + i im`.
    pub near: Option<[f64; 2]>,
    pub r_max_factor: f64,
    pub n_theta: usize,
    pub collar_intervals: usize,
    pub bulk_step: f64,
    pub delta: f64,
    /// Magnitude cap for plotted values.
    pub clamp: f64,
    pub svg_cells: usize,
}

impl Default for FieldSpec {
    fn default() -> Self {
        let g = crate::modes::GridSpec::default();
        FieldSpec {
            m: None,
            near: None,
            r_max_factor: g.r_max_factor,
            n_theta: g.n_theta,
            collar_intervals: g.collar_intervals,
            bulk_step: g.bulk_step,
            delta: 0.3,
            clamp: 1.0,
            svg_cells: 160,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cavity: CavitySpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub run: RunSpec,
    pub count: Option<CountSpec>,
    pub disp: Option<DispSpec>,
    pub field: Option<FieldSpec>,
}

fn one() -> f64 {
    1.0
}
fn two() -> usize {
    2
}
fn yes() -> bool {
    true
}
fn default_samples() -> usize {
    DISK_SAMPLES
}
fn default_depth() -> f64 {
    crate::weylcount::DEFAULT_DEPTH
}
fn default_margin() -> i64 {
    crate::weylcount::DEFAULT_MARGIN
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    fn check(&self) -> anyhow::Result<()> {
        let c = &self.cavity;
        let given = [c.n.is_some(), c.n_table.is_some(), c.coefficients.is_some()];
        ensure!(given.iter().filter(|g| **g).count() == 1, "[cavity] needs exactly one of n, n_table, coefficients");
        let t = &self.tolerances;
        ensure!(t.root_tol > 0.0 && t.cf_tol > 0.0 && t.jump_delta > 0.0, "tolerances must be positive");
        ensure!(self.run.threads >= 1, "threads must be at least 1");
        ensure!(self.scan.m_min <= self.scan.m_max, "m_min > m_max");
        Ok(())
    }

    /// Scan window; solve commands require it strictly below the real axis.
    pub fn window(&self) -> anyhow::Result<Rect> {
        let s = &self.scan;
        ensure!(s.im_max <= -1e-9, "scan window must satisfy im_max ≤ -1e-9");
        Rect::new(s.re_min, s.re_max, s.im_min, s.im_max).map_err(|e| anyhow::anyhow!("scan window: {e}"))
    }

    pub fn root_config(&self) -> RootConfig {
        RootConfig { tol: self.tolerances.root_tol, ..RootConfig::default() }
    }

    pub fn specfun_config(&self) -> SpecfunConfig {
        SpecfunConfig { cf_tol: self.tolerances.cf_tol, ..SpecfunConfig::default() }
    }

    fn boundary(&self) -> anyhow::Result<BoundaryGeom> {
        let c = &self.cavity;
        let geom = match c.geometry {
            Geometry::Disk => BoundaryGeom::disk(c.radius),
            Geometry::Circle => BoundaryGeom::circle(c.radius, c.samples),
            Geometry::Ellipse => {
                let Some([a, b]) = c.semi_axes else { bail!("ellipse geometry needs semi_axes = [a, b]") };
                BoundaryGeom::ellipse(a, b, c.samples)
            }
        };
        geom.map_err(|e| anyhow::anyhow!("geometry: {e}"))
    }

    /// Builds the cavity. Invalid input is a configuration error; other
    /// library errors (for example a non-positive index) are domain errors.
    pub fn cavity(&self) -> std::result::Result<CavityModel, super::Failure> {
        let boundary = self.boundary().map_err(super::Failure::Config)?;
        let c = &self.cavity;
        let built = if let Some(n) = c.n {
            CavityModel::from_index_const(n, boundary, c.dimension)
        } else if let Some(table) = &c.n_table {
            CavityModel::from_index(table, boundary, c.dimension)
        } else {
            CavityModel::from_coefficients(boundary, c.dimension, c.coefficients.expect("checked"))
        };
        built.map_err(|e| match e {
            Error::InvalidInput(_) => super::Failure::Config(anyhow::anyhow!("cavity: {e}")),
            other => super::Failure::Domain(other),
        })
    }
}

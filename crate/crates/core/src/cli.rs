//! Command-line front end: a JSON run configuration plus flag overrides,
//! with one subcommand per computation. Output is deterministic: identical
//! configurations produce byte-identical files.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::coeffs::{make_preset, ArcProfile, CoefficientSpec, Preset, DEFAULT_QUAD_TOL};
use crate::completeness::{classify_profile, cone_spec};
use crate::curvature::{revolution_profile, sectional, validity_condition};
use crate::error::Error;
use crate::expr::{Coef, Expr};
use crate::geodesics::{
    connect_with, shoot_with, Chart, GeodesicInitial, GeodesicPath, Integrator, ShootOptions,
};
use crate::manifold::{orthogonal_unit, Grid, ScalarField, SpherePoint};
use crate::transforms::PolarPoint;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientConfig {
    Preset {
        preset: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<f64>,
    },
    Expression {
        c1: Expr,
        c2: Expr,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass_domain: Option<(f64, f64)>,
    },
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        CoefficientConfig::Preset {
            preset: "reciprocal".into(),
            k: None,
        }
    }
}

impl CoefficientConfig {
    pub fn build(&self) -> Result<CoefficientSpec, CliError> {
        match self {
            CoefficientConfig::Preset { preset, k } => {
                let p = Preset::from_name(preset, *k).map_err(|e| CliError::Config(e.to_string()))?;
                match p {
                    Preset::Cone { k } => Ok(cone_spec(k).map_err(|e| CliError::Config(e.to_string()))?.spec),
                    p => make_preset(p).map_err(|e| CliError::Config(e.to_string())),
                }
            }
            CoefficientConfig::Expression { c1, c2, mass_domain } => {
                let spec = CoefficientSpec::from_exprs(c1.clone(), c2.clone());
                match mass_domain {
                    Some((lo, hi)) => spec.with_mass_domain(*lo, *hi).map_err(|e| CliError::Config(e.to_string())),
                    None => Ok(spec),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    /// `"uniform"`.
    Named(String),
    /// Positive weights, normalized to sum 1.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_points: usize,
    pub weights: Weights,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_points: 16,
            weights: Weights::Named("uniform".into()),
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Arc<Grid>, CliError> {
        let grid = match &self.weights {
            Weights::Named(name) if name == "uniform" => Grid::uniform(self.n_points),
            Weights::Named(name) => return Err(CliError::Config(format!("unknown weights `{name}`"))),
            Weights::Values(w) => {
                if w.len() != self.n_points {
                    return Err(CliError::Config(format!(
                        "grid has n_points = {} but {} weights",
                        self.n_points,
                        w.len()
                    )));
                }
                Grid::from_unnormalized(w.clone())
            }
        };
        grid.map_err(|e| CliError::Config(e.to_string()))
    }
}

fn default_one() -> f64 {
    1.0
}

fn default_t_end() -> f64 {
    2.0 * std::f64::consts::PI
}

fn default_steps() -> usize {
    1000
}

fn default_fan() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootConfig {
    #[serde(default = "default_one")]
    pub r0: f64,
    /// `‖ψ₀‖`.
    #[serde(default = "default_one")]
    pub psi_norm: f64,
    /// One geodesic per entry.
    #[serde(default = "default_fan")]
    pub r_t0: Vec<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    /// Switch to the adaptive integrator with this local tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive_tol: Option<f64>,
    /// `"auto"`, `"radial"` or `"arc"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    /// Include the per-grid-point field values in each CSV.
    #[serde(default)]
    pub write_fields: bool,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            r0: 1.0,
            psi_norm: 1.0,
            r_t0: default_fan(),
            t_end: default_t_end(),
            n_steps: default_steps(),
            adaptive_tol: None,
            chart: None,
            write_fields: false,
        }
    }
}

/// An endpoint: explicit field values, or `(r, θ)` in the plane spanned by
/// the constant field and its deterministic orthogonal direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointConfig {
    Field { field: Vec<f64> },
    Plane { r: f64, theta: f64 },
}

impl PointConfig {
    fn build(&self, grid: &Arc<Grid>) -> Result<PolarPoint, CliError> {
        let cfg = |e: Error| CliError::Config(e.to_string());
        match self {
            PointConfig::Field { field } => {
                let f = ScalarField::new(grid.clone(), field.clone()).map_err(cfg)?;
                crate::transforms::polar(&f).map_err(cfg)
            }
            PointConfig::Plane { r, theta } => {
                let phi0 = SpherePoint::new(ScalarField::constant(grid.clone(), 1.0)).map_err(cfg)?;
                let psi = orthogonal_unit(&phi0).map_err(cfg)?;
                let phi = phi0.field().lin_comb(theta.cos(), psi.field(), theta.sin()).map_err(cfg)?;
                PolarPoint::new(*r, SpherePoint::normalize(phi).map_err(cfg)?).map_err(cfg)
            }
        }
    }
}

fn default_tol() -> f64 {
    1e-10
}

fn default_fan_size() -> usize {
    crate::geodesics::FAN_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectConfig {
    pub p0: PointConfig,
    pub p1: PointConfig,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_fan_size")]
    pub fan: usize,
}

impl Default for ConnectConfig {
    fn default() -> Self {
        Self {
            p0: PointConfig::Plane { r: 1.0, theta: 0.0 },
            p1: PointConfig::Plane {
                r: std::f64::consts::E,
                theta: std::f64::consts::FRAC_PI_2,
            },
            tol: default_tol(),
            fan: default_fan_size(),
        }
    }
}

fn default_samples() -> usize {
    21
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    #[serde(default = "default_samples")]
    pub s_samples: usize,
    /// Defaults to the profile domain clipped to `[-5, 5]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_range: Option<(f64, f64)>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            s_samples: default_samples(),
            s_range: None,
        }
    }
}

fn default_profile_n() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_range: Option<(f64, f64)>,
    #[serde(default = "default_profile_n")]
    pub n: usize,
    /// Warping function `a(s)` given directly, overriding the coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Expr>,
    /// Domain of a direct `a(s)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<(f64, f64)>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            s_range: None,
            n: default_profile_n(),
            a: None,
            domain: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub coefficients: CoefficientConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default)]
    pub shoot: ShootConfig,
    #[serde(default)]
    pub connect: ConnectConfig,
    #[serde(default)]
    pub report: ReportConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Canonical pretty-printed JSON; parsing it back gives the same config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    fn arc_profile(&self) -> Result<ArcProfile, CliError> {
        let spec = self.coefficients.build()?;
        Ok(spec.radial_functions().arc_profile(self.quad_tol.unwrap_or(DEFAULT_QUAD_TOL))?)
    }
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(name = "densgeo", version, about = "Geodesics, curvature and completeness of Diff-invariant metrics on densities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the coefficient preset (e.g. `fisher_rao`, `cone(0.5)`).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Override the step count of `shoot`.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Override the tolerance of `connect`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Also render `shoot` trajectories as SVG.
    #[arg(long, global = true)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Integrate a fan of geodesics and write trajectories.
    Shoot,
    /// Solve the two-point problem between two endpoints.
    Connect,
    /// Completeness, completions and curvature summary.
    Report,
    /// Export the surface-of-revolution generating curve.
    Profile,
    /// Print the effective configuration as canonical JSON.
    Config,
}

/// Resolve the configuration: file (or defaults), then flag overrides.
pub fn effective_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &common.preset {
        cfg.coefficients = CoefficientConfig::Preset {
            preset: p.clone(),
            k: None,
        };
    }
    if let Some(n) = common.steps {
        cfg.shoot.n_steps = n;
    }
    if let Some(t) = common.tol {
        cfg.connect.tol = t;
    }
    Ok(cfg)
}

/// Run a parsed command line; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = effective_config(&cli.common)?;
    let out = &cli.common.out;
    match cli.command {
        Command::Shoot => cmd_shoot(&cfg, out, cli.common.svg),
        Command::Connect => cmd_connect(&cfg, out),
        Command::Report => cmd_report(&cfg, out),
        Command::Profile => cmd_profile(&cfg, out),
        Command::Config => {
            println!("{}", cfg.to_json());
            Ok(Vec::new())
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(io_err(&path))?;
    Ok((path, BufWriter::new(file)))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let (path, mut w) = create(dir, name)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(io_err(&path))?;
    Ok(path)
}

/// Integrate the `r_t0` fan. Every trajectory is written, including the
/// partial ones that hit the domain boundary; those make the command fail
/// afterwards.
pub fn cmd_shoot(cfg: &RunConfig, out: &Path, svg: bool) -> Result<Vec<PathBuf>, CliError> {
    let sc = &cfg.shoot;
    let grid = cfg.grid.build()?;
    let profile = cfg.arc_profile()?;
    let opts = ShootOptions {
        integrator: match sc.adaptive_tol {
            Some(tol) => Integrator::Adaptive { tol },
            None => Integrator::Rk4,
        },
        chart: match sc.chart.as_deref() {
            None | Some("auto") => Chart::Auto,
            Some("radial") => Chart::Radial,
            Some("arc") => Chart::Arc,
            Some(other) => return Err(CliError::Config(format!("unknown chart `{other}`"))),
        },
    };
    let phi0 = SpherePoint::new(ScalarField::constant(grid, 1.0)).map_err(|e| CliError::Config(e.to_string()))?;

    let mut written = Vec::new();
    let mut paths = Vec::with_capacity(sc.r_t0.len());
    let mut failure = None;
    for (i, &rt) in sc.r_t0.iter().enumerate() {
        let init = GeodesicInitial::in_plane(sc.r0, phi0.clone(), rt, sc.psi_norm)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let path = match shoot_with(&init, &profile, sc.t_end, sc.n_steps, opts) {
            Ok(p) => p,
            Err(Error::BoundaryHit { time, partial }) => {
                eprintln!("geodesic {i} (r_t0 = {rt}) left the domain at t = {time:.6}");
                failure.get_or_insert(Error::BoundaryHit {
                    time,
                    partial: partial.clone(),
                });
                *partial
            }
            Err(e) => return Err(e.into()),
        };
        let (p, mut w) = create(out, &format!("shoot_{i:02}.csv"))?;
        path.write_csv(&mut w, sc.write_fields)
            .and_then(|_| w.flush())
            .map_err(io_err(&p))?;
        written.push(p);
        println!(
            "geodesic {i}: r_t0 = {rt}, samples = {}, drift A0 = {:.3e}, energy = {:.3e}, first integral = {:.3e}",
            path.len(),
            path.drift.a0,
            path.drift.energy,
            path.drift.first_integral
        );
        paths.push((rt, path));
    }

    let mut planar = String::from("geodesic,r_t0,t,x,y\n");
    for (i, (rt, path)) in paths.iter().enumerate() {
        for k in 0..path.len() {
            let (x, y) = path.planar(k);
            let _ = writeln!(planar, "{i},{rt:.16e},{:.16e},{x:.16e},{y:.16e}", path.times[k]);
        }
    }
    written.push(write_text(out, "planar.csv", &planar)?);
    if svg {
        written.push(write_text(out, "shoot.svg", &render_svg(&paths))?);
    }
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(written),
    }
}

/// Polylines of the planar projections with coordinate axes.
pub fn render_svg(paths: &[(f64, GeodesicPath)]) -> String {
    let mut pts: Vec<Vec<(f64, f64)>> = Vec::with_capacity(paths.len());
    let (mut lo, mut hi) = ((0.0f64, 0.0f64), (0.0f64, 0.0f64));
    for (_, p) in paths {
        let v: Vec<(f64, f64)> = (0..p.len()).map(|k| p.planar(k)).filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
        for &(x, y) in &v {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        pts.push(v);
    }
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-9);
    let pad = 0.05 * span;
    let size = 600.0;
    let scale = size / (span + 2.0 * pad);
    let tx = |x: f64| (x - lo.0 + pad) * scale;
    let ty = |y: f64| (hi.1 + pad - y) * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="0" y1="{y:.3}" x2="{size}" y2="{y:.3}" stroke="gray" stroke-width="1"/>"#,
        y = ty(0.0)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x:.3}" y1="0" x2="{x:.3}" y2="{size}" stroke="gray" stroke-width="1"/>"#,
        x = tx(0.0)
    );
    let n = pts.len().max(1);
    for (i, v) in pts.iter().enumerate() {
        let hue = 360.0 * i as f64 / n as f64;
        let mut poly = String::new();
        for &(x, y) in v {
            let _ = write!(poly, "{:.3},{:.3} ", tx(x), ty(y));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="hsl({hue:.0},70%,40%)" stroke-width="1.5" points="{}"/>"#,
            poly.trim_end()
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn cmd_connect(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let grid = cfg.grid.build()?;
    let profile = cfg.arc_profile()?;
    let cc = &cfg.connect;
    let p0 = cc.p0.build(&grid)?;
    let p1 = cc.p1.build(&grid)?;
    let c = connect_with(&p0, &p1, &profile, cc.tol, cc.fan)?;
    let (p, mut w) = create(out, "connect.csv")?;
    c.path.write_csv(&mut w, true).and_then(|_| w.flush()).map_err(io_err(&p))?;
    let summary = format!(
        "distance = {:.16e}\nshooting evaluations = {}\nendpoint mismatch = {:.3e}\nsamples = {}\ndrift A0 = {:.3e}\ndrift energy = {:.3e}\ndrift first integral = {:.3e}\n",
        c.distance,
        c.evaluations,
        c.mismatch,
        c.path.len(),
        c.path.drift.a0,
        c.path.drift.energy,
        c.path.drift.first_integral
    );
    print!("{summary}");
    let s = write_text(out, "connect_summary.txt", &summary)?;
    Ok(vec![p, s])
}

/// Report text: completeness, completions, curvature table.
pub fn report_text(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = cfg.coefficients.build()?;
    let profile = spec.radial_functions().arc_profile(cfg.quad_tol.unwrap_or(DEFAULT_QUAD_TOL))?;
    let report = classify_profile(&spec, &profile)?;
    let mut t = String::new();
    let name = match spec.preset() {
        Some(p) => p.to_string(),
        None => format!("C1 = {}, C2 = {}", expr_label(spec.c1_coef()), expr_label(spec.c2_coef())),
    };
    let _ = writeln!(t, "coefficients: {name}");
    let (m_lo, m_hi) = spec.mass_domain();
    let _ = writeln!(t, "mass domain: ({m_lo}, {m_hi})");
    t.push_str(&report.to_string());

    let rc = &cfg.report;
    let (lo, hi) = rc.s_range.unwrap_or_else(|| {
        let lo = profile.w_minus().max(-5.0);
        let hi = profile.w_plus().min(5.0);
        let m = 1e-3 * (hi - lo);
        (lo + m, hi - m)
    });
    let n = rc.s_samples.max(2);
    let _ = writeln!(t, "\ncurvature table");
    let _ = writeln!(t, "{:>22} {:>22} {:>22} {:>6}", "s", "sec_sphere", "sec_mixed", "valid");
    let mut n_valid = 0;
    for k in 0..n {
        let s = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let c = sectional(&profile, s)?;
        let v = validity_condition(&profile, s)?;
        n_valid += v as usize;
        let _ = writeln!(t, "{s:>22.12e} {:>22.12e} {:>22.12e} {:>6}", c.sec_sphere, c.sec_mixed, v);
    }
    let _ = writeln!(t, "revolution embedding valid at {n_valid} of {n} samples");
    Ok(t)
}

fn expr_label(c: &Coef) -> String {
    match c {
        Coef::Expr(e) => e.to_string(),
        Coef::BlackBox(b) => format!("{b:?}"),
    }
}

pub fn cmd_report(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let text = report_text(cfg)?;
    print!("{text}");
    Ok(vec![write_text(out, "report.txt", &text)?])
}

pub fn cmd_profile(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let pc = &cfg.profile;
    let profile = match &pc.a {
        Some(a) => {
            let (lo, hi) = pc
                .domain
                .ok_or_else(|| CliError::Config("a direct `a` needs a `domain`".into()))?;
            ArcProfile::direct(Coef::Expr(a.clone()), lo, hi).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => cfg.arc_profile()?,
    };
    let range = pc.s_range.unwrap_or_else(|| {
        let lo = profile.w_minus().max(-5.0);
        let hi = profile.w_plus().min(5.0);
        let m = 1e-3 * (hi - lo);
        (lo + m, hi - m)
    });
    let curve = revolution_profile(&profile, range, pc.n)?;
    let (p, mut w) = create(out, "profile.csv")?;
    curve.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_err(&p))?;
    println!("profile: {} samples, {} valid", curve.s_samples.len(), curve.n_valid());
    Ok(vec![p])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let text = r#"{
            "coefficients": {"c1": {"pow": ["var", -1.0]}, "c2": {"const": 0.0}},
            "grid": {"n_points": 3, "weights": [1.0, 2.0, 1.0]},
            "shoot": {"r_t0": [-0.5, 0.0, 0.5], "n_steps": 200},
            "connect": {"p0": {"r": 1.0, "theta": 0.0}, "p1": {"field": [1.0, 2.0, 3.0]}}
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let canon = cfg.to_json();
        let again = RunConfig::from_json(&canon).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(canon, again.to_json());
        assert_eq!(cfg.grid.build().unwrap().weights(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn config_errors_map_to_exit_code() {
        let e = RunConfig::from_json(r#"{"bogus": 1}"#).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        let cfg = RunConfig {
            coefficients: CoefficientConfig::Preset {
                preset: "nope".into(),
                k: None,
            },
            ..Default::default()
        };
        assert_eq!(cfg.coefficients.build().unwrap_err().exit_code(), EXIT_CONFIG);
        let bad = GridConfig {
            n_points: 3,
            weights: Weights::Values(vec![1.0, 1.0]),
        };
        assert!(bad.build().is_err());
    }

    #[test]
    fn cone_from_config() {
        let c = CoefficientConfig::Preset {
            preset: "cone".into(),
            k: Some(0.5),
        };
        let spec = c.build().unwrap();
        assert_eq!(spec.c1(3.0), 0.25);
    }
}

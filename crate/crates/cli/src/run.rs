//! Command dispatch. [`execute`] is pure: it returns the report bundle and
//! leaves writing to [`ReportBundle::write`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use spinlab::bodies::BodyModel;
use spinlab::harmonics::{self, HarmonicCoeffs};
use spinlab::spheregrid::{fibonacci_directions, gauss_legendre_rule};
use spinlab::transforms::{self, SpinOptions};
use spinlab::zonoid;
use spinlab::{Body, SphereGrid, SpinError, ZonalProfile};

use crate::config::{Command, ConfigError, ExperimentConfig};
use crate::report;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Compute(SpinError),
    Io(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Compute(e) => write!(f, "computation failed: {e}"),
            RunError::Io(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<SpinError> for RunError {
    fn from(e: SpinError) -> Self {
        RunError::Compute(e)
    }
}

impl RunError {
    /// 2 for configuration problems, 1 for anything that failed afterwards.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Summary record plus CSV tables keyed by file suffix (`_profile.csv`, `_scan.csv`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub summary: Value,
    pub tables: Vec<(&'static str, String)>,
}

impl ReportBundle {
    pub fn table(&self, suffix: &str) -> Option<&str> {
        self.tables.iter().find(|(s, _)| *s == suffix).map(|(_, t)| t.as_str())
    }

    /// Writes `<prefix>.json` and `<prefix><suffix>` for every table; returns the paths.
    pub fn write(&self, prefix: &str) -> Result<Vec<PathBuf>, RunError> {
        let json_path = PathBuf::from(format!("{prefix}.json"));
        if let Some(dir) = json_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
        }
        let mut text = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        text.push('\n');
        let mut written = vec![json_path.clone()];
        write_file(&json_path, &text)?;
        for (suffix, body) in &self.tables {
            let path = PathBuf::from(format!("{prefix}{suffix}"));
            write_file(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

pub const PROFILE_SUFFIX: &str = "_profile.csv";
pub const SCAN_SUFFIX: &str = "_scan.csv";

/// Validates, runs `command` and assembles the bundle. The metadata block
/// (wall time, thread count) lives only in the JSON summary.
pub fn execute(config: &ExperimentConfig, command: Command) -> Result<ReportBundle, RunError> {
    config.validate(command)?;
    let body = config.body.build(config.label.as_deref()).map_err(|e| {
        RunError::Config(ConfigError::Invalid(format!("body: {e}")))
    })?;
    let start = Instant::now();
    let (result, tables) = match command {
        Command::Spin => spin(config, &body)?,
        Command::Cosine => cosine(config, &body)?,
        Command::Invert => invert(config, &body)?,
        Command::Certify => certify(config, &body)?,
        Command::Scan => scan(config, &body)?,
        Command::Fit => (fit(config, &body)?, Vec::new()),
    };
    let summary = json!({
        "command": command.as_str(),
        "result": result,
        "metadata": {
            "tool": "spinlab",
            "version": env!("CARGO_PKG_VERSION"),
            "threads": rayon::current_num_threads(),
            "seed": config.seed,
            "wall_time_s": start.elapsed().as_secs_f64(),
            "config": config,
        },
    });
    Ok(ReportBundle { summary, tables })
}

type Output = (Value, Vec<(&'static str, String)>);

fn nodes(config: &ExperimentConfig) -> Vec<f64> {
    gauss_legendre_rule(config.nodes).expect("validated node count").nodes
}

fn spectral_source(body: &Body) -> Option<&HarmonicCoeffs> {
    match body.model() {
        BodyModel::BandLimited(c) => Some(c),
        _ => None,
    }
}

fn spin(config: &ExperimentConfig, body: &Body) -> Result<Output, RunError> {
    body.require_even()?;
    let u = config.unit_axis();
    let t = nodes(config);
    let (profile, values, pole) = match spectral_source(body) {
        Some(c) => {
            let p = transforms::spin_spectral(&c.resized(config.l), &u)?;
            let values = t.iter().map(|&x| p.eval(x)).collect();
            let pole = p.eval(1.0);
            (p, values, pole)
        }
        None => {
            let options = SpinOptions {
                degree: config.l,
                ..SpinOptions::default()
            };
            let p = transforms::spin_orbit(body, &u, &t, &options)?;
            let nodal = p.nodal().expect("orbit spin keeps nodal samples").clone();
            (p, nodal.values, nodal.pole)
        }
    };
    let csv = report::profile_csv(&profile, &t, &values, &config.r_ladder)?;
    let result = json!({
        "label": body.label(),
        "axis": u,
        "degree": profile.degree(),
        "legendre": profile.legendre(),
        "pole": pole,
    });
    Ok((result, vec![(PROFILE_SUFFIX, csv)]))
}

fn tabulate(config: &ExperimentConfig, profile: &ZonalProfile) -> Result<String, RunError> {
    let t = nodes(config);
    let values: Vec<f64> = t.iter().map(|&x| profile.eval(x)).collect();
    Ok(report::profile_csv(profile, &t, &values, &config.r_ladder)?)
}

fn cosine(config: &ExperimentConfig, body: &Body) -> Result<Output, RunError> {
    let h = body.harmonic_coeffs(config.l)?;
    let ch = transforms::cosine_spectral(&h)?;
    let u = config.unit_axis();
    let profile = harmonics::project_zonal(&ch, &u)?;
    let result = json!({
        "label": body.label(),
        "l": config.l,
        "coefficients": ch.as_slice(),
        "axis": u,
        "value_at_axis": profile.eval(1.0),
    });
    Ok((result, vec![(PROFILE_SUFFIX, tabulate(config, &profile)?)]))
}

fn density_grid(config: &ExperimentConfig) -> Result<SphereGrid, RunError> {
    let n_theta = config.n_theta.unwrap_or(2 * config.l + 2);
    let n_phi = config.n_phi.unwrap_or(2 * n_theta);
    Ok(SphereGrid::product(n_theta, n_phi)?)
}

fn invert(config: &ExperimentConfig, body: &Body) -> Result<Output, RunError> {
    let h = body.harmonic_coeffs(config.l)?;
    let g = transforms::inverse_cosine_spectral(&h, config.guard)?;
    let grid = density_grid(config)?;
    let values = harmonics::synthesize_grid(&g.coeffs, &grid);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let u = config.unit_axis();
    let profile = harmonics::project_zonal(&g.coeffs, &u)?;
    let result = json!({
        "label": body.label(),
        "l": config.l,
        "coefficients": g.coeffs.as_slice(),
        "suppressed": g.suppressed,
        "density_min": min,
        "density_max": max,
        "grid": [grid.n_theta(), grid.n_phi()],
    });
    Ok((result, vec![(PROFILE_SUFFIX, tabulate(config, &profile)?)]))
}

fn fit_grid(config: &ExperimentConfig) -> Result<SphereGrid, RunError> {
    let n_theta = config.n_theta.unwrap_or(24);
    let n_phi = config.n_phi.unwrap_or(2 * n_theta);
    Ok(SphereGrid::product(n_theta, n_phi)?)
}

fn certify(config: &ExperimentConfig, body: &Body) -> Result<Output, RunError> {
    let mut certificate = zonoid::certify_body(body, &config.certify_params())?;
    if let Some(n) = config.candidates {
        let fit = zonoid::nnls_zonotope_fit(
            body,
            &fibonacci_directions(n, true),
            &fit_grid(config)?,
            config.max_iter,
            config.nnls_tol,
        )?;
        certificate = certificate.with_nnls_residual(fit.residual);
    }
    // generating density of the spin about the axis, for plotting
    let h = body.harmonic_coeffs(config.l)?;
    let density = transforms::inverse_cosine_spectral(&h, config.guard)?.coeffs;
    let profile = harmonics::project_zonal(&density, &config.unit_axis())?;
    let result = report::certificate_json(&certificate);
    Ok((result, vec![(PROFILE_SUFFIX, tabulate(config, &profile)?)]))
}

fn scan(config: &ExperimentConfig, body: &Body) -> Result<Output, RunError> {
    let directions = fibonacci_directions(config.directions, true);
    let report = zonoid::theorem_scan(body, &directions, &config.certify_params())?;
    let csv = report::scan_csv(&report, &config.r_ladder);
    let mut result = report::scan_json(&report);
    result["elapsed_s"] = json!(report.elapsed.as_secs_f64());
    Ok((result, vec![(SCAN_SUFFIX, csv)]))
}

fn fit(config: &ExperimentConfig, body: &Body) -> Result<Value, RunError> {
    let candidates = fibonacci_directions(config.candidates.unwrap_or(200), true);
    let grid = fit_grid(config)?;
    let fit = zonoid::nnls_zonotope_fit(body, &candidates, &grid, config.max_iter, config.nnls_tol)?;
    let atoms: Vec<Value> = candidates
        .iter()
        .zip(&fit.weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(v, w)| json!({ "direction": v, "weight": w }))
        .collect();
    Ok(json!({
        "label": body.label(),
        "candidates": candidates.len(),
        "grid": [grid.n_theta(), grid.n_phi()],
        "residual": fit.residual,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "objective": fit.objective_trace.last(),
        "atoms": atoms,
    }))
}

//! Experiment configuration: one strict JSON document per run.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use spinlab::harmonics::sh_count;
use spinlab::vec3::{self, Vec3};
use spinlab::{Body, HarmonicCoeffs, SphereGrid, MAX_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spin,
    Cosine,
    Invert,
    Certify,
    Scan,
    Fit,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Spin => "spin",
            Command::Cosine => "cosine",
            Command::Invert => "invert",
            Command::Certify => "certify",
            Command::Scan => "scan",
            Command::Fit => "fit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        radius: f64,
    },
    Cube {
        half_width: f64,
    },
    Octahedron {
        scale: f64,
    },
    Ellipsoid {
        matrix: [[f64; 3]; 3],
    },
    Zonotope {
        generators: Vec<Vec3>,
        weights: Vec<f64>,
    },
    /// Real harmonic coefficients in flat order (k² + k + m).
    Bandlimited {
        l_max: usize,
        coeffs: Vec<f64>,
    },
    /// Support values on the product grid with `n_theta` Gauss rings and `n_phi` longitudes,
    /// ring-major.
    Sampled {
        n_theta: usize,
        n_phi: usize,
        values: Vec<f64>,
    },
}

impl BodySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            BodySpec::Ball { .. } => "ball",
            BodySpec::Cube { .. } => "cube",
            BodySpec::Octahedron { .. } => "octahedron",
            BodySpec::Ellipsoid { .. } => "ellipsoid",
            BodySpec::Zonotope { .. } => "zonotope",
            BodySpec::Bandlimited { .. } => "bandlimited",
            BodySpec::Sampled { .. } => "sampled",
        }
    }

    pub fn build(&self, label: Option<&str>) -> spinlab::Result<Body> {
        let body = match self {
            BodySpec::Ball { radius } => Body::ball(*radius)?,
            BodySpec::Cube { half_width } => Body::cube(*half_width)?,
            BodySpec::Octahedron { scale } => Body::octahedron(*scale)?,
            BodySpec::Ellipsoid { matrix } => Body::ellipsoid(*matrix)?,
            BodySpec::Zonotope { generators, weights } => Body::zonotope(generators, weights)?,
            BodySpec::Bandlimited { l_max, coeffs } => Body::bandlimited(HarmonicCoeffs::from_vec(*l_max, coeffs.clone())?)?,
            BodySpec::Sampled { n_theta, n_phi, values } => Body::sampled(&SphereGrid::product(*n_theta, *n_phi)?, values)?,
        };
        Ok(body.with_label(label.unwrap_or(self.kind())))
    }
}

fn default_l() -> usize {
    64
}
fn default_ladder() -> Vec<f64> {
    vec![0.90, 0.95, 0.99]
}
fn default_directions() -> usize {
    100
}
fn default_axis() -> Vec3 {
    vec3::E3
}
fn default_nodes() -> usize {
    64
}
fn default_eps_pos() -> f64 {
    1e-6
}
fn default_eps_neg() -> f64 {
    1e-3
}
fn default_t_grid() -> usize {
    2001
}
fn default_guard() -> f64 {
    1e-14
}
fn default_max_iter() -> usize {
    5000
}
fn default_nnls_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; the command given on the command line takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub body: BodySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Band limit L.
    #[serde(default = "default_l")]
    pub l: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_phi: Option<usize>,
    #[serde(default = "default_ladder")]
    pub r_ladder: Vec<f64>,
    /// Number of hemisphere scan directions.
    #[serde(default = "default_directions")]
    pub directions: usize,
    /// Spin axis u (normalized on load).
    #[serde(default = "default_axis")]
    pub axis: Vec3,
    /// Gauss nodes at which profiles are tabulated.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_eps_pos")]
    pub eps_pos: f64,
    #[serde(default = "default_eps_neg")]
    pub eps_neg: f64,
    #[serde(default = "default_t_grid")]
    pub t_grid: usize,
    #[serde(default = "default_guard")]
    pub guard: f64,
    /// NNLS candidate count; `certify` runs the fit only when this is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<usize>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_nnls_tol")]
    pub nnls_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "malformed config: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        // serde_json reports line and column, and names the offending field
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every cap and range for `command` before anything is computed.
    pub fn validate(&self, command: Command) -> Result<(), ConfigError> {
        if self.l > MAX_DEGREE {
            return Err(invalid(format!("l = {} exceeds the cap {MAX_DEGREE}", self.l)));
        }
        if matches!(command, Command::Certify | Command::Scan) && self.l < 2 {
            return Err(invalid(format!("{} needs l >= 2", command.as_str())));
        }
        if let Some(n) = self.n_theta {
            if n < self.l + 1 {
                return Err(invalid(format!("n_theta = {n} must be at least l + 1 = {}", self.l + 1)));
            }
        }
        if let Some(n) = self.n_phi {
            if n < 2 * self.l + 1 {
                return Err(invalid(format!("n_phi = {n} must be at least 2l + 1 = {}", 2 * self.l + 1)));
            }
        }
        if self.r_ladder.is_empty() {
            return Err(invalid("r_ladder is empty"));
        }
        if let Some(r) = self.r_ladder.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(invalid(format!("r_ladder entries must lie in (0, 1), got {r}")));
        }
        if self.directions == 0 || self.directions > 100_000 {
            return Err(invalid(format!("directions must lie in 1..=100000, got {}", self.directions)));
        }
        if vec3::normalize(&self.axis).is_err() {
            return Err(invalid(format!("axis {:?} cannot be normalized", self.axis)));
        }
        if self.nodes == 0 || self.nodes > 10_000 {
            return Err(invalid(format!("nodes must lie in 1..=10000, got {}", self.nodes)));
        }
        if !(self.eps_pos > 0.0 && self.eps_pos < self.eps_neg) {
            return Err(invalid("need 0 < eps_pos < eps_neg"));
        }
        if self.t_grid < 3 {
            return Err(invalid("t_grid needs at least 3 points"));
        }
        if !(self.guard > 0.0) {
            return Err(invalid("guard must be positive"));
        }
        if self.candidates == Some(0) {
            return Err(invalid("candidates must be positive"));
        }
        if self.max_iter == 0 || !(self.nnls_tol > 0.0) {
            return Err(invalid("need max_iter > 0 and nnls_tol > 0"));
        }
        self.validate_body()
    }

    fn validate_body(&self) -> Result<(), ConfigError> {
        match &self.body {
            BodySpec::Bandlimited { l_max, coeffs } => {
                if *l_max > MAX_DEGREE {
                    return Err(invalid(format!("body l_max = {l_max} exceeds the cap {MAX_DEGREE}")));
                }
                if coeffs.len() != sh_count(*l_max) {
                    return Err(invalid(format!(
                        "body l_max = {l_max} needs {} coeffs, got {}",
                        sh_count(*l_max),
                        coeffs.len()
                    )));
                }
            }
            BodySpec::Sampled { n_theta, n_phi, values } => {
                if n_theta * n_phi != values.len() {
                    return Err(invalid(format!(
                        "sampled body needs n_theta·n_phi = {} values, got {}",
                        n_theta * n_phi,
                        values.len()
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn unit_axis(&self) -> Vec3 {
        vec3::normalize(&self.axis).expect("validated")
    }

    pub fn certify_params(&self) -> spinlab::CertifyParams {
        spinlab::CertifyParams {
            l_max: self.l,
            r_ladder: self.r_ladder.clone(),
            eps_pos: self.eps_pos,
            eps_neg: self.eps_neg,
            t_grid: self.t_grid,
            guard: self.guard,
        }
    }
}

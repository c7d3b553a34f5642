//! Run configuration: one JSON document plus dotted `--set` overrides.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use psmet::analysis::{Likelihood, MleOptions, MIN_REPLICATIONS};
use psmet::model::{Scheme, SensorModel};

use crate::error::CliError;

pub const MAX_AXES: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sweep,
    Verify,
    Simulate,
    ClosedForm,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sweep => "sweep",
            Self::Verify => "verify",
            Self::Simulate => "simulate",
            Self::ClosedForm => "closed-form",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MaConfig {
    Qubit {
        #[serde(default = "half_pi")]
        theta: f64,
        #[serde(default = "half_pi")]
        theta_meas: f64,
    },
    Gaussian {
        sigma: f64,
        #[serde(default = "default_grid_points")]
        grid_points: usize,
    },
}

impl MaConfig {
    fn axis_names(&self) -> &'static [&'static str] {
        match self {
            Self::Qubit { .. } => &["theta", "theta_meas", "phi", "gamma_fluct", "gamma_ps", "coupling"],
            Self::Gaussian { .. } => &["sigma", "phi", "gamma_fluct", "gamma_ps", "coupling"],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Qubit { .. } => "qubit",
            Self::Gaussian { .. } => "gaussian",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixed {
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default = "default_gamma_fluct")]
    pub gamma_fluct: f64,
    #[serde(default = "half_pi")]
    pub gamma_ps: f64,
    #[serde(default = "half_pi")]
    pub coupling: f64,
}

impl Default for Fixed {
    fn default() -> Self {
        Self {
            phi: default_phi(),
            gamma_fluct: default_gamma_fluct(),
            gamma_ps: half_pi(),
            coupling: half_pi(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    /// Evenly spaced values including both ends.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_chain")]
    pub chain: f64,
    #[serde(default = "default_weight_information")]
    pub weight_information: f64,
    #[serde(default = "default_oracle_qubit")]
    pub oracle_qubit: f64,
    #[serde(default = "default_oracle_gaussian")]
    pub oracle_gaussian: f64,
    #[serde(default = "default_covariance_rel")]
    pub covariance_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            chain: default_chain(),
            weight_information: default_weight_information(),
            oracle_qubit: default_oracle_qubit(),
            oracle_gaussian: default_oracle_gaussian(),
            covariance_rel: default_covariance_rel(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Debug {
    /// Multiplies the computed Q before verification; fault injection only.
    #[serde(default = "one")]
    pub scale_q: f64,
}

impl Default for Debug {
    fn default() -> Self {
        Self { scale_q: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodConfig {
    Joint,
    Conditional,
}

impl From<LikelihoodConfig> for Likelihood {
    fn from(l: LikelihoodConfig) -> Self {
        match l {
            LikelihoodConfig::Joint => Likelihood::Joint,
            LikelihoodConfig::Conditional => Likelihood::Conditional,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present it must agree with the subcommand.
    #[serde(default)]
    pub command: Option<Command>,
    pub ma: MaConfig,
    #[serde(default)]
    pub fixed: Fixed,
    #[serde(default)]
    pub axes: Vec<Axis>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_likelihood")]
    pub likelihood: LikelihoodConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub debug: Debug,
}

fn half_pi() -> f64 {
    FRAC_PI_2
}
fn one() -> f64 {
    1.0
}
fn default_phi() -> f64 {
    1e-6
}
fn default_gamma_fluct() -> f64 {
    0.3
}
fn default_grid_points() -> usize {
    2048
}
fn default_seed() -> u64 {
    42
}
fn default_shots() -> usize {
    100_000
}
fn default_replications() -> usize {
    200
}
fn default_likelihood() -> LikelihoodConfig {
    LikelihoodConfig::Joint
}
fn default_chain() -> f64 {
    1e-9
}
fn default_weight_information() -> f64 {
    1e-10
}
fn default_oracle_qubit() -> f64 {
    1e-8
}
fn default_oracle_gaussian() -> f64 {
    1e-6
}
fn default_covariance_rel() -> f64 {
    0.15
}

/// All free parameters at one point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_meas: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip)]
    pub grid_points: usize,
    pub phi: f64,
    pub gamma_fluct: f64,
    pub gamma_ps: f64,
    pub coupling: f64,
}

impl Point {
    fn set(&mut self, name: &str, v: f64) {
        match name {
            "theta" => self.theta = Some(v),
            "theta_meas" => self.theta_meas = Some(v),
            "sigma" => self.sigma = Some(v),
            "phi" => self.phi = v,
            "gamma_fluct" => self.gamma_fluct = v,
            "gamma_ps" => self.gamma_ps = v,
            "coupling" => self.coupling = v,
            _ => unreachable!("axis names are validated"),
        }
    }

    pub fn scheme(&self) -> psmet::Result<Scheme> {
        let scheme = match (self.theta, self.theta_meas, self.sigma) {
            (Some(theta), Some(theta_meas), None) => Scheme::qubit(theta, self.gamma_ps, theta_meas)?,
            (None, None, Some(sigma)) => Scheme::gaussian(sigma, self.gamma_ps, self.grid_points)?,
            _ => unreachable!("points are built from a single pointer model"),
        };
        scheme.with_coupling(self.coupling)
    }

    pub fn sensor(&self) -> psmet::Result<SensorModel> {
        SensorModel::new(self.phi, self.gamma_fluct)
    }
}

impl RunConfig {
    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_value(value, overrides)
    }

    pub fn from_value(mut value: Value, overrides: &[String]) -> Result<Self, CliError> {
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks structure and stamps the command; parameter ranges are left to the model.
    pub fn resolve(mut self, command: Command) -> Result<Self, CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(CliError::Config(format!(
                    "config is for `{}` but `{}` was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        self.command = Some(command);
        if self.axes.len() > MAX_AXES {
            return Err(CliError::Config(format!("at most {MAX_AXES} axes, got {}", self.axes.len())));
        }
        let allowed = self.ma.axis_names();
        for (i, a) in self.axes.iter().enumerate() {
            if !allowed.contains(&a.name.as_str()) {
                return Err(CliError::Config(format!(
                    "axis `{}` is not a parameter of the {} pointer (expected one of {})",
                    a.name,
                    self.ma.kind(),
                    allowed.join(", ")
                )));
            }
            if self.axes[..i].iter().any(|b| b.name == a.name) {
                return Err(CliError::Config(format!("axis `{}` given twice", a.name)));
            }
            if a.steps < 2 {
                return Err(CliError::Config(format!("axis `{}` needs at least 2 steps", a.name)));
            }
            if !a.min.is_finite() || !a.max.is_finite() {
                return Err(CliError::Config(format!("axis `{}` has a non-finite bound", a.name)));
            }
        }
        if command == Command::Simulate {
            if !self.axes.is_empty() {
                return Err(CliError::Config("simulate runs at a single point; remove `axes`".into()));
            }
            if self.shots == 0 {
                return Err(CliError::Config("`shots` must be at least 1".into()));
            }
            if self.replications < MIN_REPLICATIONS {
                return Err(CliError::Config(format!(
                    "`replications` must be at least {MIN_REPLICATIONS} to compare a covariance with the bound"
                )));
            }
        }
        if !(self.debug.scale_q.is_finite()) {
            return Err(CliError::Config("`debug.scale_q` must be finite".into()));
        }
        // every grid point shares the pointer construction, so a bad fixed
        // point is reported once here rather than per row
        self.base_point()
            .scheme()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(self)
    }

    pub fn base_point(&self) -> Point {
        let f = &self.fixed;
        let mut p = Point {
            theta: None,
            theta_meas: None,
            sigma: None,
            grid_points: 0,
            phi: f.phi,
            gamma_fluct: f.gamma_fluct,
            gamma_ps: f.gamma_ps,
            coupling: f.coupling,
        };
        match self.ma {
            MaConfig::Qubit { theta, theta_meas } => {
                p.theta = Some(theta);
                p.theta_meas = Some(theta_meas);
            }
            MaConfig::Gaussian { sigma, grid_points } => {
                p.sigma = Some(sigma);
                p.grid_points = grid_points;
            }
        }
        p
    }

    /// Grid points in row-major order over the axes; a single point without axes.
    pub fn points(&self) -> Vec<(Vec<f64>, Point)> {
        let base = self.base_point();
        let grids: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut out = vec![(Vec::new(), base)];
        for (axis, grid) in self.axes.iter().zip(&grids) {
            out = out
                .into_iter()
                .flat_map(|(coords, point)| {
                    grid.iter().map(move |&v| {
                        let mut c = coords.clone();
                        c.push(v);
                        let mut p = point;
                        p.set(&axis.name, v);
                        (c, p)
                    })
                })
                .collect();
        }
        out
    }

    pub fn mle_options(&self) -> MleOptions {
        MleOptions {
            likelihood: self.likelihood.into(),
            ..MleOptions::default()
        }
    }

    /// SHA-256 of the canonical JSON of the resolved config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `a.b.c=value`: the value is parsed as JSON, falling back to a string.
fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("override key `{path}` has an empty segment")));
    }
    let mut node = root;
    for (i, key) in keys.iter().enumerate() {
        let last = i + 1 == keys.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = key
                    .parse()
                    .map_err(|_| CliError::Config(format!("override `{path}`: `{key}` is not an index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::Config(format!("override `{path}`: index {idx} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(CliError::Config(format!(
                    "override `{path}`: `{}` is not an object",
                    keys[..i].join(".")
                )))
            }
        };
    }
    unreachable!("the loop returns on the last key")
}

//! Run configuration: a TOML file with `[network]`, `[mobility]`, `[sim]`,
//! `[quad]` and `[run]` sections, plus `section.key=value` overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use srwpnet::model::{MobilityConfig, NetworkConfig};
use srwpnet::montecarlo::{validate_grid, MarginPolicy, SimConfig};
use srwpnet::quadrature::QuadratureSpec;
use srwpnet::rate::ServiceModel;
use srwpnet::Error;

use crate::grid::Grid;

/// A configuration problem, located in the source text when possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Uim,
    Udm,
    Both,
}

impl ModelChoice {
    pub fn models(self) -> &'static [ServiceModel] {
        match self {
            ModelChoice::Uim => &[ServiceModel::Uim],
            ModelChoice::Udm => &[ServiceModel::Udm],
            ModelChoice::Both => &[ServiceModel::Uim, ServiceModel::Udm],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }

    /// Converts a rate in nats.
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

impl FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nats" => Ok(Units::Nats),
            "bits" => Ok(Units::Bits),
            other => Err(format!("unknown units {other:?}; expected nats or bits")),
        }
    }
}

/// Validation runs either a quick pass or the full trial budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub r_obs: f64,
    pub margin: MarginPolicy,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            r_obs: 50_000.0,
            margin: MarginPolicy::default(),
            trials: 100_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    /// Initial serving distance for density profiles (m).
    pub u_0: f64,
    pub times: Grid,
    pub u_x: Grid,
    pub model: ModelChoice,
    /// Altitudes swept by the rate command; empty means `network.h`.
    pub heights: Vec<f64>,
    pub units: Units,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub profile: Profile,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            u_0: 500.0,
            times: Grid::new(vec![0.0, 60.0, 120.0]),
            u_x: Grid::range(0.0, 3000.0, 25.0).expect("static range"),
            model: ModelChoice::Both,
            heights: Vec::new(),
            units: Units::Nats,
            out: None,
            profile: Profile::Fast,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub mobility: MobilityConfig,
    #[serde(default)]
    pub sim: SimSettings,
    #[serde(default)]
    pub quad: QuadratureSpec,
    #[serde(default)]
    pub run: RunSettings,
}

impl RunConfig {
    /// Parses and validates. Errors carry the line they refer to.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg = Self::parse_unvalidated(text)?;
        cfg.validate().map_err(|e| locate(text, e))?;
        Ok(cfg)
    }

    /// Parses without checking values.
    pub fn parse_unvalidated(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e: toml::de::Error| ConfigError {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().trim().to_string(),
        })
    }

    /// Parses `text`, applies `section.key=value` overrides in order, then
    /// validates. Errors in overridden keys name the override.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut cfg = Self::parse_unvalidated(text)?;
        let mut touched = Vec::new();
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| ConfigError::new(format!("override {o:?} must read section.key=value")))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|m| ConfigError::new(format!("override {o:?}: {m}")))?;
            touched.push(key.trim().to_string());
        }
        if let Err(e) = cfg.validate() {
            if touched.iter().any(|k| e.message.starts_with(k.as_str())) {
                return Err(ConfigError::new(format!("after overrides: {}", e.message)));
            }
            return Err(locate(text, e));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("cannot parse {v:?}"))
        }
        let unquoted = value.trim_matches('"');
        match key {
            "network.lambda0" => self.network.lambda0 = num(value)?,
            "network.h" => self.network.h = num(value)?,
            "network.alpha" => self.network.alpha = num(value)?,
            "network.power" => self.network.power = num(value)?,
            "mobility.v" => self.mobility.v = num(value)?,
            "mobility.w" => self.mobility.w = num(value)?,
            "mobility.s" => self.mobility.s = num(value)?,
            "sim.r_obs" => self.sim.r_obs = num(value)?,
            "sim.trials" => self.sim.trials = num(value)?,
            "sim.seed" => self.sim.seed = num(value)?,
            "quad.rel_tol" => self.quad.rel_tol = num(value)?,
            "quad.abs_tol" => self.quad.abs_tol = num(value)?,
            "quad.max_subdivisions" => self.quad.max_subdivisions = num(value)?,
            "quad.tail_epsilon" => self.quad.tail_epsilon = num(value)?,
            "run.u_0" => self.run.u_0 = num(value)?,
            "run.times" => self.run.times = unquoted.parse()?,
            "run.u_x" => self.run.u_x = unquoted.parse()?,
            "run.heights" => self.run.heights = unquoted.parse::<Grid>()?.into(),
            "run.model" => {
                self.run.model = match unquoted {
                    "uim" => ModelChoice::Uim,
                    "udm" => ModelChoice::Udm,
                    "both" => ModelChoice::Both,
                    other => return Err(format!("unknown model {other:?}; expected uim, udm or both")),
                }
            }
            "run.units" => self.run.units = unquoted.parse()?,
            "run.out" => self.run.out = Some(PathBuf::from(unquoted)),
            "run.profile" => {
                self.run.profile = match unquoted {
                    "fast" => Profile::Fast,
                    "full" => Profile::Full,
                    other => return Err(format!("unknown profile {other:?}; expected fast or full")),
                }
            }
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Every component invariant. Messages start with the offending
    /// `section.key`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let core = |e: Error| match e {
            Error::Divergence { .. } => ConfigError::new(format!("network.alpha: {e}")),
            Error::Config(m) => ConfigError::new(m),
            other => ConfigError::new(other.to_string()),
        };
        self.network.validate().map_err(core)?;
        self.mobility.validate().map_err(core)?;
        self.quad.validate().map_err(core)?;
        let s = &self.sim;
        if !(s.r_obs.is_finite() && s.r_obs > 0.0) {
            return Err(ConfigError::new(format!("sim.r_obs must be positive, got {}", s.r_obs)));
        }
        if s.trials == 0 {
            return Err(ConfigError::new("sim.trials must be at least 1"));
        }
        let guard = match s.margin {
            MarginPolicy::Legs(x) | MarginPolicy::Metres(x) => x,
        };
        if !(guard.is_finite() && guard >= 0.0) {
            return Err(ConfigError::new(format!(
                "sim.margin must be non-negative, got {guard}"
            )));
        }
        let r = &self.run;
        if !(r.u_0.is_finite() && r.u_0 >= 0.0) {
            return Err(ConfigError::new(format!("run.u_0 must be non-negative, got {}", r.u_0)));
        }
        validate_grid(r.times.points(), "run.times").map_err(core_grid)?;
        validate_grid(r.u_x.points(), "run.u_x").map_err(core_grid)?;
        if let Some(h) = r.heights.iter().find(|h| !(h.is_finite() && **h >= 0.0)) {
            return Err(ConfigError::new(format!("run.heights must be non-negative, got {h}")));
        }
        Ok(())
    }

    /// Network parameters at each altitude of the sweep.
    pub fn networks(&self) -> Vec<NetworkConfig> {
        if self.run.heights.is_empty() {
            vec![self.network]
        } else {
            self.run.heights.iter().map(|&h| self.network.with_height(h)).collect()
        }
    }

    /// Simulation settings on the given time grid.
    pub fn sim_config(&self, time_grid: Vec<f64>) -> SimConfig {
        SimConfig {
            r_obs: self.sim.r_obs,
            margin: self.sim.margin,
            trials: self.sim.trials,
            seed: self.sim.seed,
            time_grid,
        }
    }
}

fn core_grid(e: Error) -> ConfigError {
    match e {
        Error::Domain(m) => ConfigError::new(m),
        other => ConfigError::new(other.to_string()),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Attaches the line of the `section.key` a message starts with.
fn locate(text: &str, mut e: ConfigError) -> ConfigError {
    let head = e.message.split([' ', ':']).next().unwrap_or("");
    if let Some((section, key)) = head.split_once('.') {
        e.line = find_key(text, section, key);
    }
    e
}

/// Line of `key` inside `[section]`, or of the section header when the
/// key is absent there.
pub fn find_key(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

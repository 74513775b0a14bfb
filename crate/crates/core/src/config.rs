//! Experiment configuration, read from TOML.
//!
//! ```toml
//! version = 1
//!
//! [model]            # any ModelParams field; omitted fields take defaults
//! delta = 0.0
//! mu_l = 4.0
//! mu_r = -4.0
//!
//! [grid]
//! bounds = { x = [-8.0, 8.0], y = [-8.0, 8.0] }
//! spacing = 0.1
//!
//! [quadrature]
//! n_nodes = 600      # omit for panels of width min(πkT, Γ̃)
//!
//! [dynamics]
//! n_traj = 1000
//! init = { kind = "fixed", position = [-2.0, 2.0], momentum = [-1.0, 0.0] }
//!
//! [sweep]
//! mu_l = [0.0, 1.0, 2.0, 3.0, 4.0]
//! drives = [{ c = 0.0, omega = 1.0 }, { c = 3.0, omega = 1.0 }]
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::DynamicsConfig;
use crate::error::{Error, Result};
use crate::model::Rect;
use crate::negf::{EnergyGrid, MIN_NODES};
use crate::params::ModelParams;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub bounds: Rect,
    pub spacing: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            bounds: Rect::default(),
            spacing: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    /// Core nodes of the energy grid; `None` picks the panel width from kT and Γ̃.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_nodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drive {
    pub c: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub mu_l: Vec<f64>,
    /// Explicit right-lead potentials; `−mu_l` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_r: Option<Vec<f64>>,
    /// One output file per drive; the model's own drive when empty.
    pub drives: Vec<Drive>,
}

impl SweepSpec {
    pub fn biases(&self) -> Vec<(f64, f64)> {
        match &self.mu_r {
            Some(r) => self.mu_l.iter().copied().zip(r.iter().copied()).collect(),
            None => self.mu_l.iter().map(|&m| (m, -m)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub version: u32,
    pub model: ModelParams,
    pub grid: GridSpec,
    pub quadrature: QuadratureSpec,
    pub dynamics: DynamicsConfig,
    pub sweep: SweepSpec,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            model: ModelParams::default(),
            grid: GridSpec::default(),
            quadrature: QuadratureSpec::default(),
            dynamics: DynamicsConfig::default(),
            sweep: SweepSpec::default(),
            output: OutputSpec::default(),
        }
    }
}

fn config_error(key: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let key = e
                .message()
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "<config>".into());
            config_error(key, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks every section; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(config_error(
                "version",
                format!("unsupported version {} (expected {CONFIG_VERSION})", self.version),
            ));
        }
        let prefixed = |section: &str, e: Error| match e {
            Error::InvalidParameter { key, reason } => config_error(format!("{section}.{key}"), reason),
            other => other,
        };
        self.model.validate().map_err(|e| prefixed("model", e))?;
        self.dynamics.validate().map_err(|e| prefixed("dynamics", e))?;
        let g = &self.grid;
        if !(g.spacing > 0.0) || !g.spacing.is_finite() {
            return Err(config_error("grid.spacing", "must be > 0"));
        }
        for (key, [lo, hi]) in [("grid.bounds.x", g.bounds.x), ("grid.bounds.y", g.bounds.y)] {
            if !(lo.is_finite() && hi.is_finite() && hi - lo >= g.spacing) {
                return Err(config_error(key, "must span at least one grid spacing"));
            }
        }
        if let Some(n) = self.quadrature.n_nodes {
            if n < MIN_NODES {
                return Err(config_error("quadrature.n_nodes", format!("must be >= {MIN_NODES}")));
            }
        }
        if let Some(r) = &self.sweep.mu_r {
            if r.len() != self.sweep.mu_l.len() {
                return Err(config_error("sweep.mu_r", "must have the same length as sweep.mu_l"));
            }
        }
        if self.sweep.mu_l.iter().any(|m| !m.is_finite()) {
            return Err(config_error("sweep.mu_l", "must be finite"));
        }
        for (k, d) in self.sweep.drives.iter().enumerate() {
            let p = self.model.with_drive(d.c, d.omega);
            p.validate()
                .map_err(|e| prefixed(&format!("sweep.drives[{k}]"), e))?;
        }
        Ok(())
    }

    /// Energy grid for parameters `p` over the configured spatial window.
    pub fn energy_grid(&self, p: &ModelParams) -> Result<EnergyGrid> {
        EnergyGrid::for_region(p, self.quadrature.n_nodes, &self.grid.bounds)
    }

    /// Hash of everything that affects computed data (the output directory
    /// does not).
    pub fn hash(&self) -> String {
        let data = serde_json::to_vec(&(
            self.version,
            &self.model,
            &self.grid,
            &self.quadrature,
            &self.dynamics,
            &self.sweep,
        ))
        .expect("configuration serializes");
        hex(&Sha256::digest(&data))
    }
}

/// Hash of the inputs a field grid depends on.
pub fn field_hash(p: &ModelParams, grid: &GridSpec, quad: &QuadratureSpec) -> String {
    let data = serde_json::to_vec(&(CONFIG_VERSION, p, grid, quad)).expect("serializes");
    hex(&Sha256::digest(&data))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

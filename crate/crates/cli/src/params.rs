//! Run parameters shared by flags and config files.
//!
//! Every field is optional. A command starts from its own defaults, layers
//! the config file on top and then the command-line flags.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dephase_core::{BathSpec, QuadratureConfig, QubitBloch};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Bath coupling strength
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Bath cutoff frequency
    #[arg(long)]
    pub omega_c: Option<f64>,
    /// Qubit level splitting (phase only)
    #[arg(long)]
    pub omega_q: Option<f64>,

    /// Single temperature
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Explicit temperature list, comma separated
    #[arg(long, value_delimiter = ',')]
    pub temperatures: Option<Vec<f64>>,
    #[arg(long)]
    pub temp_min: Option<f64>,
    #[arg(long)]
    pub temp_max: Option<f64>,
    #[arg(long)]
    pub temp_count: Option<usize>,
    #[arg(long, value_enum)]
    pub temp_spacing: Option<Spacing>,

    /// Explicit time list, comma separated
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long)]
    pub time_min: Option<f64>,
    #[arg(long)]
    pub time_max: Option<f64>,
    #[arg(long)]
    pub time_count: Option<usize>,
    #[arg(long, value_enum)]
    pub time_spacing: Option<Spacing>,

    /// Bloch radius (with z and phi)
    #[arg(long)]
    pub r: Option<f64>,
    /// Bloch z coordinate
    #[arg(long)]
    pub z: Option<f64>,
    /// Azimuth (with r and z)
    #[arg(long)]
    pub phi: Option<f64>,
    /// Bloch x coordinate; setting x or y selects Cartesian input
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,

    /// Number of z values across the Bloch cut
    #[arg(long)]
    pub z_count: Option<usize>,
    /// Add the decoherence time column to the phase diagram
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub with_tau_dec: Option<bool>,
    #[arg(long)]
    pub mc_samples: Option<usize>,

    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_subdivisions: Option<usize>,

    /// Single-mode coupling
    #[arg(long)]
    pub g: Option<f64>,
    /// Single-mode frequency
    #[arg(long)]
    pub omega: Option<f64>,
    /// Fock truncation override
    #[arg(long)]
    pub n_trunc: Option<usize>,
    /// Uniform scan points for the crossing search
    #[arg(long)]
    pub scan_points: Option<usize>,

    #[arg(skip)]
    pub out: Option<PathBuf>,
    #[arg(skip)]
    pub format: Option<Format>,
    #[arg(skip)]
    pub seed: Option<u64>,
    #[arg(skip)]
    pub threads: Option<usize>,
}

impl Params {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {}", e.message())))
    }

    /// Fields set in `over` replace those of `self`.
    pub fn overlay(self, over: &Params) -> Params {
        let mut base = serde_json::to_value(self).expect("params serialize");
        let top = serde_json::to_value(over).expect("params serialize");
        if let (Some(b), Some(t)) = (base.as_object_mut(), top.as_object()) {
            for (k, v) in t {
                if !v.is_null() {
                    b.insert(k.clone(), v.clone());
                }
            }
        }
        serde_json::from_value(base).expect("params round trip")
    }

    pub fn bath(&self) -> Result<BathSpec, CliError> {
        let temperature = require(self.temperature, "temperature")?;
        Ok(BathSpec::new(
            require(self.kappa, "kappa")?,
            self.omega_c.unwrap_or(1.0),
            temperature,
        )?)
    }

    /// Bath at a placeholder temperature; grids replace it per point.
    pub fn bath_template(&self, temperature: f64) -> Result<BathSpec, CliError> {
        Ok(BathSpec::new(require(self.kappa, "kappa")?, self.omega_c.unwrap_or(1.0), temperature)?)
    }

    pub fn state(&self) -> Result<QubitBloch, CliError> {
        let z = self.z.unwrap_or(0.0);
        if self.x.is_some() || self.y.is_some() {
            if self.r.is_some() || self.phi.is_some() {
                return Err(CliError::Config("state: give either (x, y, z) or (r, z, phi), not both".into()));
            }
            return Ok(QubitBloch::new(self.x.unwrap_or(0.0), self.y.unwrap_or(0.0), z)?);
        }
        Ok(QubitBloch::from_polar(require(self.r, "r")?, z, self.phi.unwrap_or(0.0))?)
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig, CliError> {
        let d = QuadratureConfig::default();
        Ok(QuadratureConfig::new(
            self.rel_tol.unwrap_or(d.rel_tol),
            self.abs_tol.unwrap_or(d.abs_tol),
            self.max_subdivisions.unwrap_or(d.max_subdivisions),
        )?)
    }

    pub fn temperature_axis(&self) -> Result<Vec<f64>, CliError> {
        if let Some(list) = &self.temperatures {
            return checked_list(list, "temperatures");
        }
        if let Some(t) = self.temperature {
            return Ok(vec![t]);
        }
        axis(
            "temp",
            self.temp_min,
            self.temp_max,
            self.temp_count,
            self.temp_spacing.unwrap_or(Spacing::Log),
        )
    }

    pub fn time_axis(&self) -> Result<Vec<f64>, CliError> {
        if let Some(list) = &self.times {
            return checked_list(list, "times");
        }
        axis(
            "time",
            self.time_min,
            self.time_max,
            self.time_count,
            self.time_spacing.unwrap_or(Spacing::Linear),
        )
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}

pub fn require<T>(value: Option<T>, field: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing parameter `{field}`")))
}

fn checked_list(list: &[f64], field: &str) -> Result<Vec<f64>, CliError> {
    if list.is_empty() {
        return Err(CliError::Config(format!("`{field}` is empty")));
    }
    if let Some(v) = list.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Config(format!("`{field}` contains {v}")));
    }
    Ok(list.to_vec())
}

fn axis(prefix: &str, min: Option<f64>, max: Option<f64>, count: Option<usize>, spacing: Spacing) -> Result<Vec<f64>, CliError> {
    let min = require(min, &format!("{prefix}_min"))?;
    let max = require(max, &format!("{prefix}_max"))?;
    let count = require(count, &format!("{prefix}_count"))?;
    if count == 0 {
        return Err(CliError::Config(format!("`{prefix}_count` must be positive")));
    }
    if !(min.is_finite() && max.is_finite() && min <= max) || (count > 1 && min == max) {
        return Err(CliError::Config(format!("`{prefix}_min`/`{prefix}_max`: need min < max, got {min}, {max}")));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let step = |k: usize| k as f64 / (count - 1) as f64;
    Ok(match spacing {
        Spacing::Linear => (0..count).map(|k| min + (max - min) * step(k)).collect(),
        Spacing::Log => {
            if min <= 0.0 {
                return Err(CliError::Config(format!("`{prefix}_min` must be positive for log spacing")));
            }
            let ratio = max / min;
            (0..count).map(|k| min * ratio.powf(step(k))).collect()
        }
    })
}

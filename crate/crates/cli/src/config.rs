//! Run configuration: command-line flags over a TOML file over the
//! environment over built-in defaults.

use std::path::Path;

use serde::Deserialize;

use crate::spec::{parse_k_rule, KRule};
use crate::CliError;

/// Environment variable holding the default degree cap.
pub const DEGREE_CAP_ENV: &str = "DYNPAIR_DEGREE_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// Fields a config file may set. Every field is optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub tol: Option<f64>,
    pub format: Option<String>,
    pub seed: Option<u64>,
    pub degree_cap: Option<u64>,
    pub n_max: Option<u32>,
    pub k: Option<String>,
    pub stability_tol: Option<f64>,
    pub target_radius: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }
}

/// Resolved settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub format: Format,
    pub seed: u64,
    pub degree_cap: u64,
    pub n_max: u32,
    pub k: KRule,
    /// Whether `k` came from a flag or the config file rather than the default.
    pub k_explicit: bool,
    pub stability_tol: f64,
    pub target_radius: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: 1e-9,
            format: Format::Json,
            seed: 7,
            degree_cap: dynpair::DEFAULT_DEGREE_CAP,
            n_max: 6,
            k: KRule::EqualsN,
            k_explicit: false,
            stability_tol: 0.03,
            target_radius: dynpair::mahler::DEFAULT_TARGET_RADIUS,
        }
    }
}

pub fn parse_format(s: &str) -> Result<Format, CliError> {
    match s {
        "json" => Ok(Format::Json),
        "table" => Ok(Format::Table),
        other => Err(CliError::Usage(format!(
            "unknown format {other:?} (json, table)"
        ))),
    }
}

impl RunConfig {
    /// Layers `file`, then `overrides`, over the environment and defaults.
    pub fn resolve(
        file: &ConfigFile,
        overrides: &ConfigFile,
        env_cap: Option<&str>,
    ) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(s) = env_cap {
            cfg.degree_cap = s.trim().parse().map_err(|_| {
                CliError::Usage(format!(
                    "{DEGREE_CAP_ENV} must be a positive integer, got {s:?}"
                ))
            })?;
        }
        for layer in [file, overrides] {
            if let Some(v) = layer.tol {
                cfg.tol = v;
            }
            if let Some(v) = &layer.format {
                cfg.format = parse_format(v)?;
            }
            if let Some(v) = layer.seed {
                cfg.seed = v;
            }
            if let Some(v) = layer.degree_cap {
                cfg.degree_cap = v;
            }
            if let Some(v) = layer.n_max {
                cfg.n_max = v;
            }
            if let Some(v) = &layer.k {
                cfg.k = parse_k_rule(v).map_err(|e| CliError::Usage(e.0))?;
                cfg.k_explicit = true;
            }
            if let Some(v) = layer.stability_tol {
                cfg.stability_tol = v;
            }
            if let Some(v) = layer.target_radius {
                cfg.target_radius = v;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{name} must be positive, got {v}")))
            }
        };
        positive("tol", self.tol)?;
        positive("stability_tol", self.stability_tol)?;
        positive("target_radius", self.target_radius)?;
        if self.n_max == 0 {
            return Err(CliError::Usage("n_max must be at least 1".into()));
        }
        if self.degree_cap == 0 {
            return Err(CliError::Usage("degree_cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn pairing_options(&self) -> dynpair::pairing::PairingOptions {
        dynpair::pairing::PairingOptions {
            degree_cap: self.degree_cap,
            target_radius: self.target_radius,
        }
    }
}

//! Flat `key = value` model files.
//!
//! ```text
//! # comment
//! mu = 0.2
//! sigma = 0.6
//! beta = 0.01
//! k = 0.85
//! K1 = 4
//! K2 = 7
//! Q = 3
//! g.kind = piecewise_linear
//! g.h = 0.08
//! g.p = 0.12
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use impulse_band_core::{HoldingCost, Model, ModelParams};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: `{value}` is not a finite number")]
    BadNumber { key: String, value: String },
    #[error("g.kind `{0}` is not one of piecewise_linear, quadratic")]
    BadKind(String),
    #[error("key `{key}` does not apply to g.kind = {kind}")]
    UnusedKey { key: &'static str, kind: &'static str },
}

const KEYS: [&str; 11] = ["mu", "sigma", "beta", "k", "K1", "K2", "Q", "g.kind", "g.h", "g.p", "g.alpha"];

/// A parsed model file; the threshold may be left for the command line.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub drift: f64,
    pub volatility: f64,
    pub discount: f64,
    pub unit_cost: f64,
    pub setup_low: f64,
    pub setup_high: f64,
    pub threshold: Option<f64>,
    pub holding: HoldingCost,
}

impl ModelConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        text.parse()
    }

    /// Model at `threshold`, falling back to the file's `Q`.
    pub fn model(&self, threshold: Option<f64>) -> Result<Model, ConfigError> {
        let threshold = threshold.or(self.threshold).ok_or(ConfigError::Missing("Q"))?;
        Ok(Model::new(self.params(threshold), self.holding.clone()))
    }

    pub fn params(&self, threshold: f64) -> ModelParams {
        ModelParams {
            drift: self.drift,
            volatility: self.volatility,
            discount: self.discount,
            unit_cost: self.unit_cost,
            setup_low: self.setup_low,
            setup_high: self.setup_high,
            threshold,
        }
    }
}

impl std::str::FromStr for ModelConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<&str, &str> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
            let key = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| ConfigError::UnknownKey { line: i + 1, key: key.to_string() })?;
            if entries.insert(key, value).is_some() {
                return Err(ConfigError::DuplicateKey { line: i + 1, key: key.to_string() });
            }
        }
        let number = |key: &'static str| -> Result<Option<f64>, ConfigError> {
            entries
                .get(key)
                .map(|v| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| ConfigError::BadNumber { key: key.to_string(), value: v.to_string() })
                })
                .transpose()
        };
        let required = |key: &'static str| number(key)?.ok_or(ConfigError::Missing(key));
        let kind = *entries.get("g.kind").ok_or(ConfigError::Missing("g.kind"))?;
        let holding = match kind {
            "piecewise_linear" | "linear" => {
                if entries.contains_key("g.alpha") {
                    return Err(ConfigError::UnusedKey { key: "g.alpha", kind: "piecewise_linear" });
                }
                HoldingCost::PiecewiseLinear { h: required("g.h")?, p: required("g.p")? }
            }
            "quadratic" => {
                for key in ["g.h", "g.p"] {
                    if entries.contains_key(key) {
                        return Err(ConfigError::UnusedKey { key, kind: "quadratic" });
                    }
                }
                HoldingCost::Quadratic { alpha: required("g.alpha")? }
            }
            other => return Err(ConfigError::BadKind(other.to_string())),
        };
        Ok(ModelConfig {
            drift: required("mu")?,
            volatility: required("sigma")?,
            discount: required("beta")?,
            unit_cost: required("k")?,
            setup_low: required("K1")?,
            setup_high: required("K2")?,
            threshold: number("Q")?,
            holding,
        })
    }
}

//! Problem configuration from a TOML file, overridden by command-line flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use gridshift_core::{PeakCap, ProblemOptions};
use serde::{Deserialize, Serialize};

/// Keys accepted in the `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma_lo: Option<f64>,
    pub gamma_hi: Option<f64>,
    pub peak_cap: Option<CapValue>,
}

/// A peak cap is either a number of kWh or a percentage string such as `"85%"`
/// (fraction of the predicted peak).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CapValue {
    Kwh(f64),
    Text(String),
}

impl CapValue {
    fn resolve(&self) -> Result<PeakCap> {
        match self {
            CapValue::Kwh(v) => Ok(PeakCap::Absolute(*v)),
            CapValue::Text(s) => parse_peak_cap(s),
        }
    }
}

pub fn parse_peak_cap(s: &str) -> Result<PeakCap> {
    let s = s.trim();
    let cap = if let Some(pct) = s.strip_suffix('%') {
        let pct: f64 = pct
            .trim()
            .parse()
            .with_context(|| format!("bad peak cap `{s}`"))?;
        PeakCap::FractionOfPeak(pct / 100.0)
    } else {
        PeakCap::Absolute(s.parse().with_context(|| format!("bad peak cap `{s}`"))?)
    };
    match cap {
        PeakCap::Absolute(v) | PeakCap::FractionOfPeak(v) if !(v > 0.0 && v.is_finite()) => {
            bail!("peak cap must be positive, got `{s}`")
        }
        _ => Ok(cap),
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// Cost weight [default: 0.4]
    #[arg(long)]
    pub w1: Option<f64>,
    /// Load-shift weight [default: 0.6]
    #[arg(long)]
    pub w2: Option<f64>,
    /// Violation penalty coefficient [default: 100]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Lower bound as a multiple of the predicted load [default: 0.5]
    #[arg(long)]
    pub gamma_lo: Option<f64>,
    /// Upper bound as a multiple of the predicted load [default: 1.5]
    #[arg(long)]
    pub gamma_hi: Option<f64>,
    /// Cap on every hour: kWh, or a percentage of the predicted peak such as `85%`
    #[arg(long)]
    pub peak_cap: Option<String>,
}

/// Fully resolved problem parameters, as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemParams {
    pub w1: f64,
    pub w2: f64,
    pub options: ProblemOptions,
}

impl ProblemArgs {
    pub fn resolve(&self, file: &FileConfig) -> Result<ProblemParams> {
        let defaults = ProblemOptions::default();
        let peak_cap = match (&self.peak_cap, &file.peak_cap) {
            (Some(s), _) => Some(parse_peak_cap(s)?),
            (None, Some(v)) => Some(v.resolve()?),
            (None, None) => None,
        };
        Ok(ProblemParams {
            w1: self.w1.or(file.w1).unwrap_or(0.4),
            w2: self.w2.or(file.w2).unwrap_or(0.6),
            options: ProblemOptions {
                alpha: self.alpha.or(file.alpha).unwrap_or(defaults.alpha),
                gamma_lo: self.gamma_lo.or(file.gamma_lo).unwrap_or(defaults.gamma_lo),
                gamma_hi: self.gamma_hi.or(file.gamma_hi).unwrap_or(defaults.gamma_hi),
                peak_cap,
                ..defaults
            },
        })
    }
}

//! Hourly profiles for a single calendar day.
//!
//! Hours are 0..23 in memory; files and reports number them 1..24.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of hourly slots in a scheduling day.
pub const HOURS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// kWh per hour.
    Load,
    /// ¢/kWh.
    Price,
}

/// 24 finite, nonnegative hourly values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct HourlyProfile {
    values: [f64; HOURS],
    kind: ProfileKind,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    kind: ProfileKind,
    values: Vec<f64>,
}

impl TryFrom<RawProfile> for HourlyProfile {
    type Error = Error;
    fn try_from(raw: RawProfile) -> Result<Self> {
        HourlyProfile::from_slice(&raw.values, raw.kind)
    }
}

impl From<HourlyProfile> for RawProfile {
    fn from(p: HourlyProfile) -> Self {
        RawProfile {
            kind: p.kind,
            values: p.values.to_vec(),
        }
    }
}

impl HourlyProfile {
    pub fn new(values: [f64; HOURS], kind: ProfileKind) -> Result<Self> {
        if let Some((h, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidProfile(format!(
                "hour {} has value {v}; entries must be finite and >= 0",
                h + 1
            )));
        }
        Ok(Self { values, kind })
    }

    pub fn from_slice(values: &[f64], kind: ProfileKind) -> Result<Self> {
        let values: [f64; HOURS] = values.try_into().map_err(|_| {
            Error::InvalidProfile(format!(
                "expected {HOURS} hourly values, got {}",
                values.len()
            ))
        })?;
        Self::new(values, kind)
    }

    pub fn load(values: [f64; HOURS]) -> Result<Self> {
        Self::new(values, ProfileKind::Load)
    }

    pub fn price(values: [f64; HOURS]) -> Result<Self> {
        Self::new(values, ProfileKind::Price)
    }

    pub fn constant(value: f64, kind: ProfileKind) -> Result<Self> {
        Self::new([value; HOURS], kind)
    }

    pub fn values(&self) -> &[f64; HOURS] {
        &self.values
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Maximum hourly value.
    pub fn peak(&self) -> f64 {
        peak(&self.values)
    }

    /// Sum of the hourly values.
    pub fn total(&self) -> f64 {
        total(&self.values)
    }

    /// Multiplies every hour by `k >= 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.values.map(|v| v * k), self.kind)
    }
}

impl std::ops::Index<usize> for HourlyProfile {
    type Output = f64;
    fn index(&self, hour: usize) -> &f64 {
        &self.values[hour]
    }
}

pub(crate) fn peak(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn total(values: &[f64]) -> f64 {
    values.iter().sum()
}

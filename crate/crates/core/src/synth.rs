//! Seeded synthetic stand-in for hourly load, weather and day-ahead prices.
//!
//! Load is a base level plus a morning/evening daily shape, a temperature
//! coupled term and small autocorrelated noise. Prices follow the same daily
//! rhythm with a pronounced evening peak.

use std::f64::consts::TAU;

use chrono::{Datelike, NaiveDate, TimeDelta};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, Record, WeatherRecord};
use crate::profile::{HourlyProfile, HOURS};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub days: usize,
    pub seed: u64,
    pub start: NaiveDate,
    /// kWh
    pub base_load: f64,
    /// kWh at the top of the daily shape.
    pub daily_amplitude: f64,
    /// kWh per °C.
    pub temperature_coupling: f64,
    /// Relative standard deviation of the load noise.
    pub load_noise: f64,
    /// ¢/kWh
    pub base_price: f64,
    /// ¢/kWh added at the evening price peak.
    pub evening_peak: f64,
    /// Hour (0-23) of the evening price peak.
    pub evening_peak_hour: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            days: 120,
            seed: 0,
            start: NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
            base_load: 22_000.0,
            daily_amplitude: 20_000.0,
            temperature_coupling: 600.0,
            load_noise: 0.01,
            base_price: 2.5,
            evening_peak: 4.0,
            evening_peak_hour: 19.0,
        }
    }
}

fn bump(h: f64, center: f64, width: f64) -> f64 {
    let x = (h - center) / width;
    (-x * x).exp()
}

/// Normalized daily load shape with a morning shoulder and an evening peak.
fn load_shape(h: f64) -> f64 {
    0.35 + 0.25 * bump(h, 8.0, 2.0) + 0.65 * bump(h, 19.0, 3.0)
}

pub fn generate(config: &SynthConfig) -> Result<Vec<Record>> {
    if config.days < 3 {
        return Err(Error::InvalidConfig(
            "synthetic data needs at least 3 days".into(),
        ));
    }
    let mut rng = seed::rng(config.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let start = config.start.and_hms_opt(0, 0, 0).unwrap();

    let (mut temp_noise, mut wind_noise, mut load_noise) = (0.0, 0.0, 0.0);
    let mut records = Vec::with_capacity(config.days * HOURS);
    for i in 0..config.days * HOURS {
        let timestamp = start + TimeDelta::hours(i as i64);
        let h = (i % HOURS) as f64;
        let doy = f64::from(timestamp.ordinal0());

        temp_noise = 0.97 * temp_noise + 0.35 * unit.sample(&mut rng);
        wind_noise = 0.9 * wind_noise + 0.4 * unit.sample(&mut rng);
        load_noise = 0.7 * load_noise + config.load_noise * unit.sample(&mut rng);

        let temperature = 16.0
            + 8.0 * (TAU * (doy - 110.0) / 365.0).sin()
            + 5.0 * (TAU * (h - 9.0) / 24.0).sin()
            + temp_noise;
        let dew_point = temperature - 6.0 + 1.5 * (TAU * (doy + h / 24.0) / 7.0).sin();
        let wind_speed = (4.0 + 1.5 * (TAU * (h - 14.0) / 24.0).sin() + wind_noise).max(0.0);
        let heat_index =
            temperature + 0.35 * (temperature - 20.0).max(0.0) + 0.05 * dew_point.max(0.0);
        let cold_index = if temperature < 10.0 {
            temperature - 0.6 * wind_speed
        } else {
            temperature
        };

        let load = (config.base_load
            + config.daily_amplitude * load_shape(h)
            + config.temperature_coupling * (temperature - 15.0))
            * (1.0 + load_noise);
        let price = config.base_price
            + 1.0 * bump(h, 8.0, 2.0)
            + config.evening_peak * bump(h, config.evening_peak_hour, 2.0)
            + 0.06 * (temperature - 15.0).max(0.0)
            + 0.08 * unit.sample(&mut rng);

        records.push(Record {
            timestamp,
            weather: WeatherRecord {
                wind_speed,
                temperature,
                heat_index,
                cold_index,
                dew_point,
            },
            load_kwh: load.max(0.0),
            price: Some(price.max(0.5)),
        });
    }
    Ok(records)
}

pub fn generate_dataset(config: &SynthConfig) -> Result<Dataset> {
    Dataset::new(generate(config)?, false)
}

/// Load and price profiles of the final synthetic day of a short series.
/// The price curve peaks in the evening together with the load.
pub fn synthetic_day(seed: u64) -> Result<(HourlyProfile, HourlyProfile)> {
    let cfg = SynthConfig {
        days: 3,
        seed,
        start: NaiveDate::from_ymd_opt(2010, 7, 8).unwrap(),
        ..Default::default()
    };
    let records = generate(&cfg)?;
    let last = &records[records.len() - HOURS..];
    let load: Vec<f64> = last.iter().map(|r| r.load_kwh).collect();
    let price: Vec<f64> = last.iter().map(|r| r.price.unwrap_or_default()).collect();
    Ok((
        HourlyProfile::from_slice(&load, crate::profile::ProfileKind::Load)?,
        HourlyProfile::from_slice(&price, crate::profile::ProfileKind::Price)?,
    ))
}

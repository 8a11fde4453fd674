//! Day-ahead load forecaster: a small tanh MLP on scaled weather and lagged loads.

mod mlp;
mod persist;
mod train;

pub use mlp::{Gradients, Mlp};
pub use train::{metrics, train, FitReport, Metrics, TrainConfig};

use chrono::{NaiveDate, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{window_features, Dataset, NormalizationStats, HORIZON};
use crate::profile::{HourlyProfile, HOURS};

pub const DEFAULT_HIDDEN: [usize; 3] = [25, 20, 15];

/// A network together with the scaling it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub net: Mlp,
    pub stats: NormalizationStats,
    pub lag: usize,
}

impl MlpModel {
    /// Layer sizes are `[5 + lag, hidden.., 1]`.
    pub fn new(stats: NormalizationStats, lag: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        if lag == 0 {
            return Err(Error::InvalidConfig("lag must be >= 1".into()));
        }
        let mut sizes = vec![5 + lag];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Ok(Self {
            net: Mlp::new(&sizes, seed)?,
            stats,
            lag,
        })
    }

    /// Prediction in raw load units for a raw (unscaled) feature vector.
    pub fn predict_raw(&self, features: &[f64]) -> Result<f64> {
        let x = self.stats.normalize_features(features);
        Ok(self.stats.load.denormalize(self.net.forward(&x)?))
    }

    /// Forecasts the 24 hours of `day`. Each hour uses the weather row at that
    /// hour and the `lag` loads ending 24 hours earlier. Negative outputs are
    /// clamped to zero.
    pub fn predict_day(&self, dataset: &Dataset, day: NaiveDate) -> Result<HourlyProfile> {
        let idx = dataset
            .day_indices(day)
            .ok_or_else(|| Error::InsufficientHistory(format!("{day} is not fully covered")))?;
        let records = dataset.records();
        let span = self.lag + HORIZON - 1;
        let mut out = [0.0; HOURS];
        for (h, &target) in idx.iter().enumerate() {
            let contiguous = target >= span
                && records[target].timestamp - records[target - span].timestamp
                    == TimeDelta::hours(span as i64);
            if !contiguous {
                return Err(Error::InsufficientHistory(format!(
                    "hour {} of {day} needs {} hours of gap-free history",
                    h + 1,
                    span
                )));
            }
            out[h] = self
                .predict_raw(&window_features(records, target, self.lag))?
                .max(0.0);
        }
        HourlyProfile::load(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{FeatureRange, Record, WeatherRecord};
    use chrono::NaiveDateTime;

    fn range(name: &str, min: f64, max: f64) -> FeatureRange {
        FeatureRange {
            name: name.into(),
            min,
            max,
        }
    }

    fn stats() -> NormalizationStats {
        NormalizationStats {
            weather: [
                range("wind_speed", 0.0, 10.0),
                range("temperature", -10.0, 40.0),
                range("heat_index", -10.0, 45.0),
                range("cold_index", -20.0, 40.0),
                range("dew_point", -15.0, 30.0),
            ],
            load: range("load_kwh", 100.0, 300.0),
        }
    }

    fn dataset(days: usize) -> Dataset {
        let start: NaiveDateTime = NaiveDate::from_ymd_opt(2010, 3, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        let rows = (0..days * 24)
            .map(|i| Record {
                timestamp: start + TimeDelta::hours(i as i64),
                weather: WeatherRecord {
                    wind_speed: 3.0,
                    temperature: 20.0,
                    heat_index: 21.0,
                    cold_index: 19.0,
                    dew_point: 10.0,
                },
                load_kwh: 200.0,
                price: None,
            })
            .collect();
        Dataset::new(rows, false).unwrap()
    }

    /// Zero weights with output bias `b` always predicts `denormalize(b)`.
    fn constant_model(normalized: f64) -> MlpModel {
        let mut model = MlpModel::new(stats(), 24, &[4], 1).unwrap();
        let mut p = vec![0.0; model.net.num_params()];
        *p.last_mut().unwrap() = normalized;
        model.net.set_params(&p).unwrap();
        model
    }

    #[test]
    fn constant_model_predicts_constant_day() {
        let c = 250.0;
        let model = constant_model(stats().load.normalize(c));
        let day = NaiveDate::from_ymd_opt(2010, 3, 3).unwrap();
        let p = model.predict_day(&dataset(3), day).unwrap();
        assert!(p.values().iter().all(|v| (v - c).abs() < 1e-9));
    }

    #[test]
    fn negative_predictions_clamp_to_zero() {
        let model = constant_model(-5.0);
        let day = NaiveDate::from_ymd_opt(2010, 3, 3).unwrap();
        let p = model.predict_day(&dataset(3), day).unwrap();
        assert_eq!(p.total(), 0.0);
    }

    #[test]
    fn missing_prior_day_is_rejected() {
        let model = constant_model(0.0);
        // with 24 lags ending a day before each target, day 2 lacks history
        let second = NaiveDate::from_ymd_opt(2010, 3, 2).unwrap();
        assert!(matches!(
            model.predict_day(&dataset(3), second),
            Err(Error::InsufficientHistory(_))
        ));
        let absent = NaiveDate::from_ymd_opt(2010, 3, 9).unwrap();
        assert!(matches!(
            model.predict_day(&dataset(3), absent),
            Err(Error::InsufficientHistory(_))
        ));
    }
}

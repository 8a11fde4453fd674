//! Where the predicted day and its prices come from.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::Args;
use gridshift_core::forecaster::MlpModel;
use gridshift_core::ingest::{load_dataset, load_hourly_profile, Dataset, LoadOptions};
use gridshift_core::{Error, HourlyProfile, ProfileKind};
use serde::Serialize;

pub const PREDICTED_COLUMN: &str = "predicted_kwh";
pub const PRICE_COLUMN: &str = "price_c_per_kwh";

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct DayInputs {
    /// 24-row `hour,predicted_kwh` file (hours 1-24)
    #[arg(long, conflicts_with = "model")]
    pub predicted: Option<PathBuf>,
    /// Trained model file; forecasts `--day` from `--data`
    #[arg(long, requires_all = ["data", "day"])]
    pub model: Option<PathBuf>,
    /// Dataset CSV (history for the model, and prices when `--prices` is absent)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Target day, YYYY-MM-DD
    #[arg(long)]
    pub day: Option<NaiveDate>,
    /// 24-row `hour,price_c_per_kwh` file (hours 1-24)
    #[arg(long)]
    pub prices: Option<PathBuf>,
}

pub struct Day {
    pub predicted: HourlyProfile,
    pub prices: HourlyProfile,
}

impl DayInputs {
    fn dataset(&self) -> Result<Option<Dataset>> {
        self.data
            .as_ref()
            .map(|p| {
                load_dataset(p, &LoadOptions::default())
                    .with_context(|| format!("loading {}", p.display()))
            })
            .transpose()
    }

    pub fn load(&self) -> Result<Day> {
        let dataset = self.dataset()?;
        let predicted = match (&self.predicted, &self.model) {
            (Some(path), _) => load_hourly_profile(path, PREDICTED_COLUMN, ProfileKind::Load)
                .with_context(|| format!("reading predicted profile {}", path.display()))?,
            (None, Some(path)) => {
                let model = MlpModel::load(path)?;
                let (Some(ds), Some(day)) = (&dataset, self.day) else {
                    bail!("--model needs --data and --day");
                };
                model.predict_day(ds, day)?
            }
            (None, None) => {
                bail!("no predicted load: pass --predicted, or --model with --data and --day")
            }
        };
        let prices = match (&self.prices, &dataset, self.day) {
            (Some(path), _, _) => load_hourly_profile(path, PRICE_COLUMN, ProfileKind::Price)
                .with_context(|| format!("reading prices {}", path.display()))?,
            (None, Some(ds), Some(day)) => ds.day_prices(day)?,
            _ => {
                return Err(Error::MissingPrices(
                    "pass --prices, or --data and --day for a dataset with a price column".into(),
                )
                .into())
            }
        };
        Ok(Day { predicted, prices })
    }
}

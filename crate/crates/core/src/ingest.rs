//! CSV ingestion, cadence validation, min/max scaling and supervised windows.
//!
//! File schema (header required, column order free):
//!
//! ```text
//! timestamp,wind_speed,temperature,heat_index,cold_index,dew_point,load_kwh[,price_c_per_kwh]
//! ```
//!
//! Timestamps are naive local ISO-8601 hours, e.g. `2010-01-01T00:00:00`.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{HourlyProfile, ProfileKind, HOURS};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";
const TIMESTAMP_FALLBACKS: [&str; 4] = [
    TIMESTAMP_FORMAT,
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
];

/// Weather columns, in feature order.
pub const WEATHER_FEATURES: [&str; 5] = [
    "wind_speed",
    "temperature",
    "heat_index",
    "cold_index",
    "dew_point",
];
pub const LOAD_FEATURE: &str = "load_kwh";
pub const DEFAULT_LAG: usize = 24;
/// Forecast horizon in hours between the last lagged load and the target.
pub const HORIZON: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherRecord {
    pub wind_speed: f64,
    pub temperature: f64,
    pub heat_index: f64,
    pub cold_index: f64,
    pub dew_point: f64,
}

impl WeatherRecord {
    pub fn to_array(&self) -> [f64; 5] {
        [
            self.wind_speed,
            self.temperature,
            self.heat_index,
            self.cold_index,
            self.dew_point,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub timestamp: NaiveDateTime,
    pub weather: WeatherRecord,
    pub load_kwh: f64,
    pub price: Option<f64>,
}

/// Column names to read each field from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub timestamp: String,
    pub weather: [String; 5],
    pub load: String,
    pub price: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            weather: WEATHER_FEATURES.map(String::from),
            load: LOAD_FEATURE.into(),
            price: "price_c_per_kwh".into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub columns: ColumnMapping,
    /// Accept gaps in the hourly cadence; windows spanning a gap are dropped.
    pub allow_gaps: bool,
    /// Fraction of rows (chronologically) used for training.
    /// Defaults to [`Dataset::DEFAULT_TRAIN_FRACTION`].
    pub train_fraction: Option<f64>,
}

/// Hourly rows sorted by timestamp with a chronological train/test boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<Record>,
    split_boundary: NaiveDateTime,
    allow_gaps: bool,
}

impl Dataset {
    pub const DEFAULT_TRAIN_FRACTION: f64 = 0.85;

    /// Sorts, validates cadence, and splits at [`Self::DEFAULT_TRAIN_FRACTION`].
    pub fn new(mut records: Vec<Record>, allow_gaps: bool) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InsufficientData("dataset has no rows".into()));
        }
        records.sort_by_key(|r| r.timestamp);
        for pair in records.windows(2) {
            let step = pair[1].timestamp - pair[0].timestamp;
            let ok = if allow_gaps {
                step >= TimeDelta::hours(1) && step.num_seconds() % 3600 == 0
            } else {
                step == TimeDelta::hours(1)
            };
            if !ok {
                return Err(Error::NonHourlyCadence(pair[1].timestamp));
            }
        }
        for r in &records {
            let finite = r.weather.to_array().iter().all(|v| v.is_finite())
                && r.load_kwh.is_finite()
                && r.price.is_none_or(f64::is_finite);
            if !finite {
                return Err(Error::InvalidProfile(format!(
                    "non-finite value at {}",
                    r.timestamp
                )));
            }
        }
        let split_boundary = split_at_fraction(&records, Self::DEFAULT_TRAIN_FRACTION);
        Ok(Self {
            records,
            split_boundary,
            allow_gaps,
        })
    }

    /// Rows strictly before `boundary` are training rows.
    pub fn with_split(mut self, boundary: NaiveDateTime) -> Self {
        self.split_boundary = boundary;
        self
    }

    pub fn with_train_fraction(mut self, fraction: f64) -> Result<Self> {
        if !(0.0 < fraction && fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train fraction must be in (0, 1], got {fraction}"
            )));
        }
        self.split_boundary = split_at_fraction(&self.records, fraction);
        Ok(self)
    }

    pub fn from_reader<R: Read>(reader: R, options: &LoadOptions) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let cols = &options.columns;
        let ts_col = col(&cols.timestamp)?;
        let weather_cols = [
            col(&cols.weather[0])?,
            col(&cols.weather[1])?,
            col(&cols.weather[2])?,
            col(&cols.weather[3])?,
            col(&cols.weather[4])?,
        ];
        let load_col = col(&cols.load)?;
        let price_col = headers.iter().position(|h| h == cols.price);

        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            let field = |i: usize| row.get(i).unwrap_or("");
            let number = |i: usize| -> Result<f64> {
                field(i).parse::<f64>().map_err(|_| Error::UnparseableRow {
                    line,
                    reason: format!("`{}` in column `{}` is not a number", field(i), &headers[i]),
                })
            };
            let timestamp =
                parse_timestamp(field(ts_col)).ok_or_else(|| Error::UnparseableRow {
                    line,
                    reason: format!("bad timestamp `{}`", field(ts_col)),
                })?;
            let weather = WeatherRecord {
                wind_speed: number(weather_cols[0])?,
                temperature: number(weather_cols[1])?,
                heat_index: number(weather_cols[2])?,
                cold_index: number(weather_cols[3])?,
                dew_point: number(weather_cols[4])?,
            };
            let load_kwh = number(load_col)?;
            let price = match price_col {
                Some(i) if !field(i).is_empty() => Some(number(i)?),
                _ => None,
            };
            records.push(Record {
                timestamp,
                weather,
                load_kwh,
                price,
            });
        }
        let ds = Self::new(records, options.allow_gaps)?;
        match options.train_fraction {
            Some(f) => ds.with_train_fraction(f),
            None => Ok(ds),
        }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn split_boundary(&self) -> NaiveDateTime {
        self.split_boundary
    }

    pub fn allows_gaps(&self) -> bool {
        self.allow_gaps
    }

    pub fn train_rows(&self) -> &[Record] {
        let n = self
            .records
            .partition_point(|r| r.timestamp < self.split_boundary);
        &self.records[..n]
    }

    pub fn test_rows(&self) -> &[Record] {
        let n = self
            .records
            .partition_point(|r| r.timestamp < self.split_boundary);
        &self.records[n..]
    }

    pub fn index_of(&self, timestamp: NaiveDateTime) -> Option<usize> {
        self.records
            .binary_search_by_key(&timestamp, |r| r.timestamp)
            .ok()
    }

    /// Row indices for hours 0..24 of `day`, if all are present.
    pub fn day_indices(&self, day: NaiveDate) -> Option<[usize; 24]> {
        let start = self.index_of(day.and_hms_opt(0, 0, 0)?)?;
        let end = start + 23;
        if end < self.records.len() && self.records[end].timestamp == day.and_hms_opt(23, 0, 0)? {
            Some(std::array::from_fn(|h| start + h))
        } else {
            None
        }
    }

    /// Observed load for the 24 hours of `day`.
    pub fn day_loads(&self, day: NaiveDate) -> Result<HourlyProfile> {
        let idx = self
            .day_indices(day)
            .ok_or_else(|| Error::InsufficientData(format!("{day} is not fully covered")))?;
        HourlyProfile::load(idx.map(|i| self.records[i].load_kwh))
    }

    /// Prices for the 24 hours of `day` from the optional price column.
    pub fn day_prices(&self, day: NaiveDate) -> Result<HourlyProfile> {
        let idx = self
            .day_indices(day)
            .ok_or_else(|| Error::MissingPrices(format!("{day} is not fully covered")))?;
        let mut values = [0.0; HOURS];
        for (h, &i) in idx.iter().enumerate() {
            values[h] = self.records[i].price.ok_or_else(|| {
                Error::MissingPrices(format!("no price for {day} hour {}", h + 1))
            })?;
        }
        HourlyProfile::price(values)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_records(&self.records, out)
    }
}

/// Reads a 24-row `hour,<column>` file with hours 1..=24, each exactly once.
///
/// A short or malformed price file is reported as [`Error::MissingPrices`],
/// a load file as [`Error::InvalidProfile`].
pub fn read_hourly_profile<R: Read>(
    input: R,
    column: &str,
    kind: ProfileKind,
) -> Result<HourlyProfile> {
    let shape_error = |msg: String| match kind {
        ProfileKind::Price => Error::MissingPrices(msg),
        ProfileKind::Load => Error::InvalidProfile(msg),
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (hour_col, value_col) = (find("hour")?, find(column)?);

    let mut values = [None; HOURS];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = row as u64 + 2;
        let parse = |col: usize| -> Result<f64> {
            record
                .get(col)
                .unwrap_or_default()
                .parse::<f64>()
                .map_err(|e| Error::UnparseableRow {
                    line,
                    reason: e.to_string(),
                })
        };
        let hour = parse(hour_col)?;
        if hour.fract() != 0.0 || !(1.0..=HOURS as f64).contains(&hour) {
            return Err(shape_error(format!(
                "line {line}: hour {hour} outside 1..=24"
            )));
        }
        let slot = &mut values[hour as usize - 1];
        if slot.is_some() {
            return Err(shape_error(format!("line {line}: hour {hour} repeated")));
        }
        *slot = Some(parse(value_col)?);
    }
    let present = values.iter().filter(|v| v.is_some()).count();
    if present != HOURS {
        return Err(shape_error(format!(
            "expected 24 hourly rows, found {present}"
        )));
    }
    HourlyProfile::new(values.map(Option::unwrap_or_default), kind)
}

pub fn load_hourly_profile(
    path: impl AsRef<Path>,
    column: &str,
    kind: ProfileKind,
) -> Result<HourlyProfile> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_hourly_profile(std::io::BufReader::new(file), column, kind)
}

/// Writes `hour,<column>` with hours 1..=24.
pub fn write_hourly_profile<W: Write>(profile: &HourlyProfile, column: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["hour", column])?;
    for (h, v) in profile.values().iter().enumerate() {
        w.write_record([(h + 1).to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_reader(std::io::BufReader::new(file), options)
}

/// Writes rows in the default schema; the price column is emitted when any row has one.
pub fn write_records<W: Write>(records: &[Record], out: W) -> Result<()> {
    let with_price = records.iter().any(|r| r.price.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = vec!["timestamp"];
    header.extend(WEATHER_FEATURES);
    header.push(LOAD_FEATURE);
    if with_price {
        header.push("price_c_per_kwh");
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.timestamp.format(TIMESTAMP_FORMAT).to_string()];
        row.extend(r.weather.to_array().iter().map(|v| v.to_string()));
        row.push(r.load_kwh.to_string());
        if with_price {
            row.push(r.price.map(|p| p.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    TIMESTAMP_FALLBACKS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

fn split_at_fraction(records: &[Record], fraction: f64) -> NaiveDateTime {
    let n = records.len();
    let k = ((n as f64) * fraction).floor() as usize;
    if k >= n {
        records[n - 1].timestamp + TimeDelta::hours(1)
    } else {
        records[k].timestamp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    /// Maps `min -> -1`, `max -> +1`; values outside the range are not clamped.
    pub fn normalize(&self, x: f64) -> f64 {
        normalize(x, self.min, self.max)
    }

    pub fn denormalize(&self, y: f64) -> f64 {
        denormalize(y, self.min, self.max)
    }
}

pub fn normalize(x: f64, min: f64, max: f64) -> f64 {
    2.0 * (x - min) / (max - min) - 1.0
}

pub fn denormalize(y: f64, min: f64, max: f64) -> f64 {
    min + (y + 1.0) * 0.5 * (max - min)
}

/// Per-feature ranges: the five weather columns followed by load.
/// Lagged loads and targets share the load range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub weather: [FeatureRange; 5],
    pub load: FeatureRange,
}

impl NormalizationStats {
    pub fn ranges(&self) -> impl Iterator<Item = &FeatureRange> {
        self.weather.iter().chain(std::iter::once(&self.load))
    }

    /// Scales a raw window's features (weather then lags) into [-1, 1] units.
    pub fn normalize_features(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .enumerate()
            .map(|(i, &x)| match self.weather.get(i) {
                Some(range) => range.normalize(x),
                None => self.load.normalize(x),
            })
            .collect()
    }
}

/// Fits ranges on training rows only.
pub fn fit_normalizer(train_rows: &[Record]) -> Result<NormalizationStats> {
    if train_rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 training rows to fit the normalizer, got {}",
            train_rows.len()
        )));
    }
    let fit = |name: &str, values: &mut dyn Iterator<Item = f64>| -> Result<FeatureRange> {
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if max <= min {
            return Err(Error::DegenerateFeature(name.to_string()));
        }
        Ok(FeatureRange {
            name: name.to_string(),
            min,
            max,
        })
    };
    let weather_range = |i: usize| {
        fit(
            WEATHER_FEATURES[i],
            &mut train_rows.iter().map(|r| r.weather.to_array()[i]),
        )
    };
    Ok(NormalizationStats {
        weather: [
            weather_range(0)?,
            weather_range(1)?,
            weather_range(2)?,
            weather_range(3)?,
            weather_range(4)?,
        ],
        load: fit(LOAD_FEATURE, &mut train_rows.iter().map(|r| r.load_kwh))?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Test,
}

/// Raw-unit supervised example: target-hour weather plus `lag` loads ending
/// 24 hours before the target.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingWindow {
    pub features: Vec<f64>,
    pub target: f64,
    pub target_time: NaiveDateTime,
    pub partition: Partition,
}

/// Raw feature vector for the window whose target is row `target`.
/// The caller guarantees `target >= lag + HORIZON - 1`.
pub(crate) fn window_features(records: &[Record], target: usize, lag: usize) -> Vec<f64> {
    let last = target - HORIZON;
    let mut features = Vec::with_capacity(5 + lag);
    features.extend(records[target].weather.to_array());
    features.extend(records[last + 1 - lag..=last].iter().map(|r| r.load_kwh));
    features
}

/// All windows in chronological order. A window is `Train` only if every row
/// it touches precedes the split boundary.
pub fn build_windows(dataset: &Dataset, lag: usize) -> Result<Vec<TrainingWindow>> {
    if lag == 0 {
        return Err(Error::InvalidConfig("lag must be >= 1".into()));
    }
    let records = dataset.records();
    let span = lag + HORIZON;
    if records.len() < span {
        return Err(Error::InsufficientData(format!(
            "{} rows cannot hold a window of {lag} lags plus a {HORIZON}-hour horizon",
            records.len()
        )));
    }
    // run[i]: id of the gap-free stretch containing row i
    let mut run = vec![0usize; records.len()];
    for i in 1..records.len() {
        let contiguous = records[i].timestamp - records[i - 1].timestamp == TimeDelta::hours(1);
        run[i] = run[i - 1] + usize::from(!contiguous);
    }
    let windows: Vec<_> = (span - 1..records.len())
        .filter(|&t| run[t + 1 - span] == run[t])
        .map(|target| {
            let first = target + 1 - span;
            TrainingWindow {
                features: window_features(records, target, lag),
                target: records[target].load_kwh,
                target_time: records[target].timestamp,
                partition: if records[target].timestamp < dataset.split_boundary()
                    && records[first].timestamp < dataset.split_boundary()
                {
                    Partition::Train
                } else {
                    Partition::Test
                },
            }
        })
        .collect();
    if windows.is_empty() {
        return Err(Error::InsufficientData(
            "no gap-free stretch is long enough for a window".into(),
        ));
    }
    Ok(windows)
}

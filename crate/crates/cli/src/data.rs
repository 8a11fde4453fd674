use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use clap::Args;
use gridshift_core::forecaster::{train as fit, MlpModel, TrainConfig, DEFAULT_HIDDEN};
use gridshift_core::ingest::{
    build_windows, fit_normalizer, load_dataset, write_hourly_profile, write_records, LoadOptions,
    DEFAULT_LAG,
};
use gridshift_core::report::{write_forecast_csv, write_training_curve_csv};
use gridshift_core::synth::{generate, SynthConfig};
use serde::Serialize;

use crate::inputs::PREDICTED_COLUMN;
use crate::run::Run;
use crate::Globals;

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Number of days (at least 3)
    #[arg(long, default_value_t = 120)]
    pub days: usize,
    /// First day, YYYY-MM-DD
    #[arg(long, default_value = "2010-01-01")]
    pub start: NaiveDate,
    /// Output file name inside --out
    #[arg(long, default_value = "synthetic.csv")]
    pub file: String,
}

pub fn synth(g: &Globals, args: &SynthArgs) -> Result<()> {
    let mut run = Run::new("synth", &g.out, g.seed)?;
    let config = SynthConfig {
        days: args.days,
        start: args.start,
        seed: run.seed("synth", 0),
        ..Default::default()
    };
    let records = generate(&config)?;
    let mut w = run.create(&args.file)?;
    write_records(&records, &mut w)?;
    w.flush()?;
    println!(
        "wrote {} hourly rows to {}",
        records.len(),
        g.out.join(&args.file).display()
    );
    run.finish(&config)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Dataset CSV
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Chronological fraction of rows used for training
    #[arg(long, default_value_t = 0.85)]
    pub train_fraction: f64,
    /// Lagged load hours fed to the network
    #[arg(long, default_value_t = DEFAULT_LAG)]
    pub lag: usize,
    /// Hidden layer sizes
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_HIDDEN)]
    pub hidden: Vec<usize>,
    /// Model file name inside --out
    #[arg(long, default_value = "model.txt")]
    pub model_file: String,
}

#[derive(Serialize)]
struct TrainParams<'a> {
    args: &'a TrainArgs,
    train_config: TrainConfig,
    init_seed: u64,
}

pub fn train(g: &Globals, args: &TrainArgs) -> Result<()> {
    let mut run = Run::new("train", &g.out, g.seed)?;
    let options = LoadOptions {
        train_fraction: Some(args.train_fraction),
        ..Default::default()
    };
    let dataset = load_dataset(&args.data, &options)
        .with_context(|| format!("loading {}", args.data.display()))?;
    let windows = build_windows(&dataset, args.lag)?;
    let stats = fit_normalizer(dataset.train_rows())?;
    let init_seed = run.seed("init", 0);
    let model = MlpModel::new(stats, args.lag, &args.hidden, init_seed)?;
    let config = TrainConfig {
        epochs: args.epochs,
        learning_rate: args.learning_rate,
        momentum: args.momentum,
        batch_size: args.batch_size,
        seed: run.seed("train", 0),
        shuffle: true,
    };
    let (model, report) = fit(model, &windows, &config)?;

    model.save(run.output(&args.model_file))?;
    run.write_json("fit_report.json", &report)?;
    let mut w = run.create("training_curve.csv")?;
    write_training_curve_csv(&report.train_trace, &mut w)?;
    w.flush()?;

    let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
    println!(
        "train windows {}, test windows {}",
        report.train_windows, report.test_windows
    );
    println!(
        "train mse {:.6}  r {}",
        report.train_mse,
        show(report.train_correlation)
    );
    println!(
        "test  mse {}  r {}",
        show(report.test_mse),
        show(report.test_correlation)
    );
    run.finish(&TrainParams {
        args,
        train_config: config,
        init_seed,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    /// Trained model file
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset CSV holding the history before --day
    #[arg(long)]
    pub data: PathBuf,
    /// Target day, YYYY-MM-DD
    #[arg(long)]
    pub day: NaiveDate,
}

pub fn predict(g: &Globals, args: &PredictArgs) -> Result<()> {
    let mut run = Run::new("predict", &g.out, g.seed)?;
    let model = MlpModel::load(&args.model)?;
    let dataset = load_dataset(&args.data, &LoadOptions::default())
        .with_context(|| format!("loading {}", args.data.display()))?;
    let predicted = model.predict_day(&dataset, args.day)?;

    let mut w = run.create("prediction.csv")?;
    write_hourly_profile(&predicted, PREDICTED_COLUMN, &mut w)?;
    w.flush()?;
    // The actual load is only available when the dataset covers the day.
    if let Ok(real) = dataset.day_loads(args.day) {
        let mut w = run.create("forecast.csv")?;
        write_forecast_csv(real.values(), predicted.values(), &mut w)?;
        w.flush()?;
        let err: f64 = real
            .values()
            .iter()
            .zip(predicted.values())
            .map(|(r, p)| (r - p).abs() / r.abs().max(f64::MIN_POSITIVE))
            .sum::<f64>()
            / 24.0;
        println!("mean absolute percentage error {:.3}%", 100.0 * err);
    }
    println!(
        "predicted total {:.3} kWh, peak {:.3} kWh",
        predicted.total(),
        predicted.peak()
    );
    run.finish(args)
}

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Scratch};
use super::MlpModel;
use crate::error::{Error, Result};
use crate::ingest::{Partition, TrainingWindow};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig("momentum must be in [0, 1)".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Fit quality in normalized ([-1, 1]) target units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub train_mse: f64,
    pub test_mse: Option<f64>,
    pub train_correlation: Option<f64>,
    pub test_correlation: Option<f64>,
    pub train_windows: usize,
    pub test_windows: usize,
    /// Mean squared error over each epoch's mini-batches.
    pub train_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub correlation: f64,
}

/// Mean squared error and Pearson correlation.
pub fn metrics(predicted: &[f64], actual: &[f64]) -> Result<Metrics> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InsufficientData(
            "metrics need at least one point".into(),
        ));
    }
    let n = actual.len() as f64;
    let mse = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).powi(2))
        .sum::<f64>()
        / n;
    let mean_p = predicted.iter().sum::<f64>() / n;
    let mean_a = actual.iter().sum::<f64>() / n;
    let (mut cov, mut var_p, mut var_a) = (0.0, 0.0, 0.0);
    for (p, a) in predicted.iter().zip(actual) {
        let (dp, da) = (p - mean_p, a - mean_a);
        cov += dp * da;
        var_p += dp * dp;
        var_a += da * da;
    }
    if var_a == 0.0 || var_p == 0.0 {
        return Err(Error::ZeroVariance { mse });
    }
    let correlation = (cov / (var_p.sqrt() * var_a.sqrt())).clamp(-1.0, 1.0);
    Ok(Metrics { mse, correlation })
}

struct Sample {
    x: Vec<f64>,
    y: f64,
}

fn evaluate(model: &MlpModel, samples: &[Sample]) -> (Option<f64>, Option<f64>) {
    if samples.is_empty() {
        return (None, None);
    }
    let mut scratch = Scratch::new(&model.net);
    let predicted: Vec<f64> = samples
        .iter()
        .map(|s| model.net.forward_into(&s.x, &mut scratch))
        .collect();
    let actual: Vec<f64> = samples.iter().map(|s| s.y).collect();
    match metrics(&predicted, &actual) {
        Ok(m) => (Some(m.mse), Some(m.correlation)),
        Err(Error::ZeroVariance { mse }) => (Some(mse), None),
        Err(_) => (None, None),
    }
}

/// Mini-batch gradient descent with momentum on the scaled MSE.
///
/// Windows marked [`Partition::Train`] are fitted; [`Partition::Test`] windows
/// only feed the report. Single-threaded, so a given seed always yields the
/// same parameters.
pub fn train(
    mut model: MlpModel,
    windows: &[TrainingWindow],
    config: &TrainConfig,
) -> Result<(MlpModel, FitReport)> {
    config.validate()?;
    let width = model.net.input_size();
    let to_sample = |w: &TrainingWindow| -> Result<Sample> {
        if w.features.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                got: w.features.len(),
            });
        }
        Ok(Sample {
            x: model.stats.normalize_features(&w.features),
            y: model.stats.load.normalize(w.target),
        })
    };
    let mut train_set = Vec::new();
    let mut test_set = Vec::new();
    for w in windows {
        match w.partition {
            Partition::Train => train_set.push(to_sample(w)?),
            Partition::Test => test_set.push(to_sample(w)?),
        }
    }
    if train_set.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }

    let mut rng = seed::rng(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut grad = Gradients::zeros_like(&model.net);
    let mut velocity = Gradients::zeros_like(&model.net);
    let mut scratch = Scratch::new(&model.net);
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut sq_err = 0.0;
        for batch in order.chunks(config.batch_size) {
            grad.fill_zero();
            for &i in batch {
                let s = &train_set[i];
                sq_err += model
                    .net
                    .accumulate_gradient(&s.x, s.y, &mut grad, &mut scratch);
            }
            let step = config.learning_rate / batch.len() as f64;
            for (v, g) in velocity.weights.iter_mut().zip(&grad.weights) {
                v.iter_mut()
                    .zip(g)
                    .for_each(|(v, g)| *v = config.momentum * *v - step * g);
            }
            for (v, g) in velocity.biases.iter_mut().zip(&grad.biases) {
                v.iter_mut()
                    .zip(g)
                    .for_each(|(v, g)| *v = config.momentum * *v - step * g);
            }
            model.net.apply_step(&velocity);
        }
        let epoch_mse = sq_err / train_set.len() as f64;
        if !epoch_mse.is_finite() {
            return Err(Error::DivergedTraining(epoch));
        }
        trace.push(epoch_mse);
    }

    let (train_mse, train_correlation) = evaluate(&model, &train_set);
    let (test_mse, test_correlation) = evaluate(&model, &test_set);
    let train_mse = train_mse.unwrap_or(f64::NAN);
    if !train_mse.is_finite() {
        return Err(Error::DivergedTraining(config.epochs));
    }
    let report = FitReport {
        train_mse,
        test_mse,
        train_correlation,
        test_correlation,
        train_windows: train_set.len(),
        test_windows: test_set.len(),
        train_trace: trace,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{FeatureRange, NormalizationStats, WEATHER_FEATURES};
    use chrono::{NaiveDate, TimeDelta};
    use rand::Rng;

    fn unit_stats() -> NormalizationStats {
        let r = |name: &str| FeatureRange {
            name: name.into(),
            min: -1.0,
            max: 1.0,
        };
        NormalizationStats {
            weather: WEATHER_FEATURES.map(r),
            load: r("load_kwh"),
        }
    }

    /// Targets are an exact linear function of the temperature feature.
    fn linear_windows(n: usize, seed: u64) -> Vec<TrainingWindow> {
        let mut rng = seed::rng(seed);
        let t0 = NaiveDate::from_ymd_opt(2010, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        (0..n)
            .map(|i| {
                let features: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
                TrainingWindow {
                    target: 0.6 * features[1] - 0.1,
                    features,
                    target_time: t0 + TimeDelta::hours(i as i64),
                    partition: if i < n * 4 / 5 {
                        Partition::Train
                    } else {
                        Partition::Test
                    },
                }
            })
            .collect()
    }

    #[test]
    fn metrics_examples() {
        let a = [1.0, -2.0, 3.0, -2.0];
        let m = metrics(&a, &a).unwrap();
        assert_eq!(m.mse, 0.0);
        assert!((m.correlation - 1.0).abs() < 1e-12);

        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((metrics(&neg, &a).unwrap().correlation + 1.0).abs() < 1e-12);

        let shifted: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        let m = metrics(&shifted, &a).unwrap();
        assert!((m.correlation - 1.0).abs() < 1e-12);
        assert!((m.mse - 0.25).abs() < 1e-12);

        assert!(matches!(
            metrics(&[1.0, 2.0], &[3.0, 3.0]),
            Err(Error::ZeroVariance { mse }) if (mse - 2.5).abs() < 1e-12
        ));
        assert!(metrics(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_invalid_configs() {
        let model = MlpModel::new(unit_stats(), 1, &[4], 0).unwrap();
        for bad in [
            TrainConfig {
                epochs: 0,
                ..Default::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..Default::default()
            },
            TrainConfig {
                batch_size: 0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                train(model.clone(), &linear_windows(10, 0), &bad),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn empty_training_set_is_rejected() {
        let model = MlpModel::new(unit_stats(), 1, &[4], 0).unwrap();
        let mut w = linear_windows(10, 0);
        w.iter_mut().for_each(|x| x.partition = Partition::Test);
        assert!(matches!(
            train(model, &w, &TrainConfig::default()),
            Err(Error::EmptyTrainingSet)
        ));
    }

    #[test]
    fn fits_linear_target() {
        let model = MlpModel::new(unit_stats(), 1, &[8, 6], 3).unwrap();
        let cfg = TrainConfig {
            epochs: 1000,
            seed: 5,
            ..Default::default()
        };
        let (_, report) = train(model, &linear_windows(400, 1), &cfg).unwrap();
        assert!(report.train_mse < 1e-3, "train mse {}", report.train_mse);
        assert!(report.test_mse.unwrap() < 1e-3);
        assert_eq!(report.train_trace.len(), 1000);
        assert!(report.train_trace.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = TrainConfig {
            epochs: 20,
            seed: 42,
            ..Default::default()
        };
        let w = linear_windows(120, 7);
        let run = || train(MlpModel::new(unit_stats(), 1, &[5], 9).unwrap(), &w, &cfg).unwrap();
        let (m1, r1) = run();
        let (m2, r2) = run();
        assert_eq!(m1, m2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn divergence_is_reported() {
        let model = MlpModel::new(unit_stats(), 1, &[8], 3).unwrap();
        let mut w = linear_windows(64, 2);
        w.iter_mut().for_each(|x| x.target *= 1e200);
        let cfg = TrainConfig {
            epochs: 50,
            learning_rate: 10.0,
            ..Default::default()
        };
        assert!(matches!(
            train(model, &w, &cfg),
            Err(Error::DivergedTraining(_))
        ));
    }
}

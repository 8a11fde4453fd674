//! Summary statistics, weight sweeps, PSO-vs-DE comparisons and plot-ready CSVs.
//!
//! Costs are carried in ¢ by the optimizers and reported here in $.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::de::{self, DeConfig};
use crate::error::{Error, Result};
use crate::objective::{build_problem, energy_cost, ProblemOptions};
use crate::problem::{DrProblem, OptimizationResult};
use crate::profile::{HourlyProfile, HOURS};
use crate::pso::{self, PsoConfig};
use crate::seed::derive_seed;

pub fn cents_to_dollars(cents: f64) -> f64 {
    cents / 100.0
}

/// `100 · (before − after) / before`.
pub fn cost_reduction(before: f64, after: f64) -> Result<f64> {
    percent_reduction(before, after)
}

/// Same formula as [`cost_reduction`], applied to peak loads.
pub fn peak_reduction(before: f64, after: f64) -> Result<f64> {
    percent_reduction(before, after)
}

fn percent_reduction(before: f64, after: f64) -> Result<f64> {
    if before.is_nan() || before <= 0.0 {
        return Err(Error::ZeroBaseline(before));
    }
    Ok(100.0 * (before - after) / before)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSweepRow {
    pub w1: f64,
    pub w2: f64,
    /// $
    pub cost: f64,
    pub cost_reduction_pct: f64,
    pub peak_reduction_pct: f64,
    pub objective: f64,
    pub violation: f64,
    pub seed: u64,
}

/// `(0, 1), (0.1, 0.9), …, (1, 0)`.
pub fn standard_weight_grid() -> Vec<(f64, f64)> {
    (0..=10)
        .map(|i| {
            let w1 = f64::from(i) / 10.0;
            (w1, f64::from(10 - i) / 10.0)
        })
        .collect()
}

/// Row seed for a sweep; lets any single row be rerun in isolation.
pub fn sweep_seed(master_seed: u64, row: usize) -> u64 {
    derive_seed(master_seed, "sweep", row as u64)
}

/// One PSO run per weight pair. Rows may be computed concurrently but are
/// returned in input order.
pub fn weight_sweep(
    predicted: &HourlyProfile,
    prices: &HourlyProfile,
    weights: &[(f64, f64)],
    options: &ProblemOptions,
    pso_config: &PsoConfig,
    master_seed: u64,
) -> Result<Vec<WeightSweepRow>> {
    let baseline_cost = energy_cost(predicted, prices);
    weights
        .par_iter()
        .enumerate()
        .map(|(row, &(w1, w2))| {
            if w1 < 0.0 || w2 < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "negative weight pair ({w1}, {w2})"
                )));
            }
            let problem = build_problem(predicted, prices, w1, w2, options)?;
            let seed = sweep_seed(master_seed, row);
            let r = pso::optimize(
                &problem,
                &PsoConfig {
                    seed,
                    ..*pso_config
                },
            )?;
            Ok(WeightSweepRow {
                w1,
                w2,
                cost: cents_to_dollars(r.cost),
                cost_reduction_pct: cost_reduction(baseline_cost, r.cost)?,
                peak_reduction_pct: peak_reduction(r.peak_before, r.peak_after)?,
                objective: r.objective,
                violation: r.violation,
                seed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    /// $
    pub total_cost: f64,
    pub cost_reduction_pct: f64,
    pub peak_reduction_pct: f64,
    pub objective: f64,
    pub evaluations: usize,
    /// False when the algorithms were not given equal evaluation budgets.
    pub budget_matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// $
    pub baseline_cost: f64,
    pub baseline_peak: f64,
    pub budget_matched: bool,
    pub rows: Vec<ComparisonRow>,
}

pub fn comparison_row(result: &OptimizationResult, budget_matched: bool) -> Result<ComparisonRow> {
    Ok(ComparisonRow {
        algorithm: result.algorithm.clone(),
        total_cost: cents_to_dollars(result.cost),
        cost_reduction_pct: cost_reduction(result.baseline_cost, result.cost)?,
        peak_reduction_pct: peak_reduction(result.peak_before, result.peak_after)?,
        objective: result.objective,
        evaluations: result.evaluations,
        budget_matched,
    })
}

/// Runs PSO and DE on the same problem. A budget mismatch does not abort the
/// comparison; it is recorded on every row.
pub fn compare_algorithms(
    problem: &DrProblem,
    pso_config: &PsoConfig,
    de_config: &DeConfig,
) -> Result<Comparison> {
    let budget_matched = pso_config.budget() == de_config.budget();
    let (pso_result, de_result) = rayon::join(
        || pso::optimize(problem, pso_config),
        || de::optimize(problem, de_config),
    );
    let rows = vec![
        comparison_row(&pso_result?, budget_matched)?,
        comparison_row(&de_result?, budget_matched)?,
    ];
    Ok(Comparison {
        baseline_cost: cents_to_dollars(energy_cost(problem.predicted(), problem.prices())),
        baseline_peak: problem.predicted().peak(),
        budget_matched,
        rows,
    })
}

pub fn render_sweep_table(rows: &[WeightSweepRow]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:>5} {:>5} {:>14} {:>10} {:>10}",
        "w1", "w2", "cost ($)", "cost red%", "peak red%"
    )
    .unwrap();
    for r in rows {
        writeln!(
            s,
            "{:>5.1} {:>5.1} {:>14.3} {:>10.2} {:>10.2}",
            r.w1, r.w2, r.cost, r.cost_reduction_pct, r.peak_reduction_pct
        )
        .unwrap();
    }
    s
}

pub fn render_comparison_table(cmp: &Comparison) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "baseline cost ${:.3}, baseline peak {:.3} kW, budgets {}",
        cmp.baseline_cost,
        cmp.baseline_peak,
        if cmp.budget_matched {
            "matched"
        } else {
            "MISMATCHED"
        }
    )
    .unwrap();
    writeln!(
        s,
        "{:<9} {:>14} {:>10} {:>10} {:>12}",
        "algorithm", "total ($)", "cost red%", "peak red%", "objective"
    )
    .unwrap();
    for r in &cmp.rows {
        writeln!(
            s,
            "{:<9} {:>14.3} {:>10.2} {:>10.2} {:>12.6}",
            r.algorithm.to_uppercase(),
            r.total_cost,
            r.cost_reduction_pct,
            r.peak_reduction_pct,
            r.objective
        )
        .unwrap();
    }
    s
}

pub fn write_rows_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_rows_csv<T: serde::de::DeserializeOwned, R: std::io::Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

fn write_hourly<W: Write>(header: [&str; 3], a: &[f64], b: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for h in 0..a.len().min(b.len()) {
        w.write_record([(h + 1).to_string(), a[h].to_string(), b[h].to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// `hour,predicted_kwh,optimized_kwh`
pub fn write_load_comparison_csv<W: Write>(
    predicted: &HourlyProfile,
    optimized: &HourlyProfile,
    out: W,
) -> Result<()> {
    write_hourly(
        ["hour", "predicted_kwh", "optimized_kwh"],
        predicted.values(),
        optimized.values(),
        out,
    )
}

/// `hour,predicted_cost,optimized_cost` in $ per hour.
pub fn write_cost_comparison_csv<W: Write>(
    predicted: &HourlyProfile,
    optimized: &HourlyProfile,
    prices: &HourlyProfile,
    out: W,
) -> Result<()> {
    let cost = |p: &HourlyProfile| -> Vec<f64> {
        (0..HOURS)
            .map(|h| cents_to_dollars(p[h] * prices[h]))
            .collect()
    };
    write_hourly(
        ["hour", "predicted_cost", "optimized_cost"],
        &cost(predicted),
        &cost(optimized),
        out,
    )
}

/// `hour,real,predicted`
pub fn write_forecast_csv<W: Write>(real: &[f64], predicted: &[f64], out: W) -> Result<()> {
    write_hourly(["hour", "real", "predicted"], real, predicted, out)
}

/// `epoch,train_mse` with 1-based epochs.
pub fn write_training_curve_csv<W: Write>(trace: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "train_mse"])?;
    for (i, mse) in trace.iter().enumerate() {
        w.write_record([(i + 1).to_string(), mse.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

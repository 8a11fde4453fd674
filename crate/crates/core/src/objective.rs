//! Weighted demand-response objective:
//!
//! `OF = w1 * E_c / E_cmax + w2 * L_sh / L_shmax + alpha * violation`
//!
//! where `E_c = Σ L_h P_h`, `L_sh = Σ |L_h - L_hpre|` and
//! `violation = max(L / L_pre - 1, 0)` on daily totals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{DrProblem, ViolationMode};
use crate::profile::{self, HourlyProfile, HOURS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    /// ¢
    pub cost: f64,
    /// kWh
    pub load_shift: f64,
    pub violation: f64,
    pub objective: f64,
}

/// `Σ L_h · P_h` in ¢.
pub fn energy_cost(schedule: &HourlyProfile, prices: &HourlyProfile) -> f64 {
    cost_of(schedule.values(), prices.values())
}

/// `Σ |L_h − L_hpre|` in kWh.
pub fn load_shift(schedule: &HourlyProfile, predicted: &HourlyProfile) -> f64 {
    shift_of(schedule.values(), predicted.values())
}

/// One-sided excess of the daily total over the predicted total.
pub fn violation(schedule: &HourlyProfile, predicted: &HourlyProfile) -> Result<f64> {
    violation_of(
        schedule.values(),
        predicted.values(),
        ViolationMode::OneSided,
    )
}

pub fn evaluate(problem: &DrProblem, schedule: &HourlyProfile) -> Result<ObjectiveBreakdown> {
    evaluate_slice(problem, schedule.values())
}

/// [`evaluate`] on a raw 24-slot schedule, used on optimizer hot paths.
pub fn evaluate_slice(problem: &DrProblem, schedule: &[f64]) -> Result<ObjectiveBreakdown> {
    if schedule.len() != HOURS {
        return Err(Error::DimensionMismatch {
            expected: HOURS,
            got: schedule.len(),
        });
    }
    let cost = cost_of(schedule, problem.prices().values());
    let load_shift = shift_of(schedule, problem.predicted().values());
    let violation = violation_of(
        schedule,
        problem.predicted().values(),
        problem.violation_mode(),
    )?;
    let objective = problem.w1() * cost / problem.e_cmax()
        + problem.w2() * load_shift / problem.l_shmax()
        + problem.alpha() * violation;
    Ok(ObjectiveBreakdown {
        cost,
        load_shift,
        violation,
        objective,
    })
}

fn cost_of(schedule: &[f64], prices: &[f64]) -> f64 {
    schedule.iter().zip(prices).map(|(l, p)| l * p).sum()
}

fn shift_of(schedule: &[f64], predicted: &[f64]) -> f64 {
    schedule
        .iter()
        .zip(predicted)
        .map(|(l, p)| (l - p).abs())
        .sum()
}

fn violation_of(schedule: &[f64], predicted: &[f64], mode: ViolationMode) -> Result<f64> {
    let predicted_total = profile::total(predicted);
    if predicted_total <= 0.0 {
        return Err(Error::ZeroPredictedTotal);
    }
    let excess = profile::total(schedule) / predicted_total - 1.0;
    Ok(match mode {
        ViolationMode::OneSided => excess.max(0.0),
        ViolationMode::Symmetric => excess.abs(),
    })
}

/// Global cap on any single hour of the optimized schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakCap {
    /// kWh
    Absolute(f64),
    /// Fraction of the predicted profile's peak.
    FractionOfPeak(f64),
}

/// Knobs for deriving box bounds and normalizers from a predicted day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProblemOptions {
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub peak_cap: Option<PeakCap>,
    pub alpha: f64,
    pub violation_mode: ViolationMode,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        Self {
            gamma_lo: 0.5,
            gamma_hi: 1.5,
            peak_cap: None,
            alpha: 100.0,
            violation_mode: ViolationMode::OneSided,
        }
    }
}

/// Builds the box `[γ_lo·L_pre, min(γ_hi·L_pre, cap)]` and normalizes both
/// objective terms by their largest in-box value.
pub fn build_problem(
    predicted: &HourlyProfile,
    prices: &HourlyProfile,
    w1: f64,
    w2: f64,
    options: &ProblemOptions,
) -> Result<DrProblem> {
    let ProblemOptions {
        gamma_lo,
        gamma_hi,
        peak_cap,
        alpha,
        violation_mode,
    } = *options;
    if !(0.0 <= gamma_lo && gamma_lo <= gamma_hi && gamma_hi.is_finite()) {
        return Err(Error::InvalidBounds(format!(
            "need 0 <= gamma_lo ({gamma_lo}) <= gamma_hi ({gamma_hi})"
        )));
    }
    if predicted.total() <= 0.0 {
        return Err(Error::ZeroPredictedTotal);
    }
    let cap = match peak_cap {
        None => f64::INFINITY,
        Some(PeakCap::Absolute(c)) => c,
        Some(PeakCap::FractionOfPeak(f)) => f * predicted.peak(),
    };
    if cap.is_nan() || cap <= 0.0 {
        return Err(Error::InvalidBounds(format!(
            "peak cap must be > 0, got {cap}"
        )));
    }

    let pred = predicted.values();
    let lower: [f64; HOURS] = std::array::from_fn(|h| gamma_lo * pred[h]);
    let upper: [f64; HOURS] = std::array::from_fn(|h| (gamma_hi * pred[h]).min(cap));
    if let Some(h) = (0..HOURS).find(|&h| lower[h] > upper[h]) {
        return Err(Error::InvalidBounds(format!(
            "hour {}: peak cap {cap} is below the lower bound {}",
            h + 1,
            lower[h]
        )));
    }

    let e_cmax = cost_of(&upper, prices.values());
    if e_cmax.is_nan() || e_cmax <= 0.0 {
        return Err(Error::InvalidConfig(
            "cost normalizer is zero (all prices or upper bounds are zero)".into(),
        ));
    }
    let mut l_shmax: f64 = (0..HOURS)
        .map(|h| (upper[h] - pred[h]).max(pred[h] - lower[h]))
        .sum();
    if l_shmax <= 0.0 {
        // Pinned box: the shift term is identically zero, any positive
        // normalizer works.
        l_shmax = predicted.total();
    }

    Ok(DrProblem::new(
        predicted.clone(),
        prices.clone(),
        lower,
        upper,
        w1,
        w2,
        alpha,
        e_cmax,
        l_shmax,
    )?
    .with_violation_mode(violation_mode))
}

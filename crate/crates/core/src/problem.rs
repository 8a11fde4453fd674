use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{HourlyProfile, ProfileKind, HOURS};

/// How the daily-total penalty treats under-consumption.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationMode {
    /// `max(L / L_pre - 1, 0)`: only exceeding the predicted total is penalized.
    #[default]
    OneSided,
    /// `|L / L_pre - 1|`: any deviation of the daily total is penalized.
    Symmetric,
}

/// One day's demand-response scheduling problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrProblem {
    predicted: HourlyProfile,
    prices: HourlyProfile,
    lower_bounds: [f64; HOURS],
    upper_bounds: [f64; HOURS],
    w1: f64,
    w2: f64,
    alpha: f64,
    e_cmax: f64,
    l_shmax: f64,
    #[serde(default)]
    violation_mode: ViolationMode,
}

#[allow(clippy::too_many_arguments)]
impl DrProblem {
    pub fn new(
        predicted: HourlyProfile,
        prices: HourlyProfile,
        lower_bounds: [f64; HOURS],
        upper_bounds: [f64; HOURS],
        w1: f64,
        w2: f64,
        alpha: f64,
        e_cmax: f64,
        l_shmax: f64,
    ) -> Result<Self> {
        if predicted.kind() != ProfileKind::Load || prices.kind() != ProfileKind::Price {
            return Err(Error::InvalidConfig(
                "predicted must be a load profile and prices a price profile".into(),
            ));
        }
        for h in 0..HOURS {
            let (lo, hi) = (lower_bounds[h], upper_bounds[h]);
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(Error::InvalidBounds(format!(
                    "hour {}: need 0 <= lower ({lo}) <= upper ({hi})",
                    h + 1
                )));
            }
        }
        if !(w1 >= 0.0 && w2 >= 0.0 && w1.is_finite() && w2.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "weights must be >= 0, got ({w1}, {w2})"
            )));
        }
        for (name, v) in [("e_cmax", e_cmax), ("l_shmax", l_shmax), ("alpha", alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self {
            predicted,
            prices,
            lower_bounds,
            upper_bounds,
            w1,
            w2,
            alpha,
            e_cmax,
            l_shmax,
            violation_mode: ViolationMode::OneSided,
        })
    }

    pub fn with_violation_mode(mut self, mode: ViolationMode) -> Self {
        self.violation_mode = mode;
        self
    }

    /// Same problem with different objective weights.
    pub fn with_weights(&self, w1: f64, w2: f64) -> Result<Self> {
        let mut p = Self::new(
            self.predicted.clone(),
            self.prices.clone(),
            self.lower_bounds,
            self.upper_bounds,
            w1,
            w2,
            self.alpha,
            self.e_cmax,
            self.l_shmax,
        )?;
        p.violation_mode = self.violation_mode;
        Ok(p)
    }

    /// Same problem with replaced box bounds; normalizers are kept as-is.
    pub fn with_bounds(&self, lower: [f64; HOURS], upper: [f64; HOURS]) -> Result<Self> {
        let mut p = Self::new(
            self.predicted.clone(),
            self.prices.clone(),
            lower,
            upper,
            self.w1,
            self.w2,
            self.alpha,
            self.e_cmax,
            self.l_shmax,
        )?;
        p.violation_mode = self.violation_mode;
        Ok(p)
    }

    pub fn predicted(&self) -> &HourlyProfile {
        &self.predicted
    }
    pub fn prices(&self) -> &HourlyProfile {
        &self.prices
    }
    pub fn lower_bounds(&self) -> &[f64; HOURS] {
        &self.lower_bounds
    }
    pub fn upper_bounds(&self) -> &[f64; HOURS] {
        &self.upper_bounds
    }
    pub fn w1(&self) -> f64 {
        self.w1
    }
    pub fn w2(&self) -> f64 {
        self.w2
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn e_cmax(&self) -> f64 {
        self.e_cmax
    }
    pub fn l_shmax(&self) -> f64 {
        self.l_shmax
    }
    pub fn violation_mode(&self) -> ViolationMode {
        self.violation_mode
    }

    /// Clamps `schedule` elementwise into the box.
    pub fn clamp(&self, schedule: &[f64]) -> [f64; HOURS] {
        std::array::from_fn(|h| schedule[h].clamp(self.lower_bounds[h], self.upper_bounds[h]))
    }

    pub fn contains(&self, schedule: &[f64]) -> bool {
        schedule.len() == HOURS
            && (0..HOURS)
                .all(|h| self.lower_bounds[h] <= schedule[h] && schedule[h] <= self.upper_bounds[h])
    }
}

/// Best-so-far snapshot after one optimizer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub best_objective: f64,
    pub best_cost: f64,
    pub best_shift: f64,
    pub violation: f64,
}

/// Outcome of a PSO or DE run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub algorithm: String,
    pub best_schedule: HourlyProfile,
    pub objective: f64,
    /// ¢
    pub cost: f64,
    /// kWh
    pub load_shift: f64,
    pub violation: f64,
    /// Set whenever the reported schedule exceeds the predicted daily total.
    pub violation_flagged: bool,
    pub peak_before: f64,
    pub peak_after: f64,
    /// Cost of the predicted (no-DR) schedule, ¢.
    pub baseline_cost: f64,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
    pub rng_seed: u64,
}

impl OptimizationResult {
    pub fn peak_reduction_pct(&self) -> f64 {
        100.0 * (self.peak_before - self.peak_after) / self.peak_before
    }

    pub fn cost_reduction_pct(&self) -> f64 {
        100.0 * (self.baseline_cost - self.cost) / self.baseline_cost
    }

    /// Writes the trace as `iteration,best_objective,best_cost,best_shift,violation`.
    pub fn write_trace_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for point in &self.trace {
            w.serialize(point)?;
        }
        w.flush().map_err(|e| Error::io("<trace>", e))?;
        Ok(())
    }
}

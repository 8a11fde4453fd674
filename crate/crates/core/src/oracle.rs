//! Exhaustive grid search over a few free hours, used as ground truth for
//! the stochastic optimizers. Hours that are not free stay at the predicted load.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::evaluate_slice;
use crate::problem::DrProblem;
use crate::profile::{HourlyProfile, HOURS};

pub const MAX_FREE_HOURS: usize = 4;
pub const MAX_GRID_POINTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedProblem {
    base: DrProblem,
    free_hours: Vec<usize>,
    grid_resolution: usize,
}

impl ReducedProblem {
    /// `free_hours` are 0-based and stored sorted.
    pub fn new(
        base: DrProblem,
        mut free_hours: Vec<usize>,
        grid_resolution: usize,
    ) -> Result<Self> {
        free_hours.sort_unstable();
        if free_hours.is_empty() || free_hours.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(
                "free hours must be non-empty and distinct".into(),
            ));
        }
        if let Some(&h) = free_hours.iter().find(|&&h| h >= HOURS) {
            return Err(Error::InvalidConfig(format!("hour index {h} out of range")));
        }
        if grid_resolution < 2 {
            return Err(Error::InvalidConfig("grid_resolution must be >= 2".into()));
        }
        let reduced = Self {
            base,
            free_hours,
            grid_resolution,
        };
        reduced.check_size()?;
        Ok(reduced)
    }

    fn check_size(&self) -> Result<()> {
        if self.free_hours.len() > MAX_FREE_HOURS {
            return Err(Error::GridTooLarge(format!(
                "{} free hours exceeds the limit of {MAX_FREE_HOURS}",
                self.free_hours.len()
            )));
        }
        let points = (self.grid_resolution as u64)
            .checked_pow(self.free_hours.len() as u32)
            .unwrap_or(u64::MAX);
        if points > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge(format!(
                "{points} grid points exceeds {MAX_GRID_POINTS}"
            )));
        }
        Ok(())
    }

    pub fn base(&self) -> &DrProblem {
        &self.base
    }

    pub fn free_hours(&self) -> &[usize] {
        &self.free_hours
    }

    pub fn grid_resolution(&self) -> usize {
        self.grid_resolution
    }

    pub fn grid_points(&self) -> u64 {
        (self.grid_resolution as u64).pow(self.free_hours.len() as u32)
    }

    /// Evenly spaced values from the hour's lower to upper bound.
    pub fn grid_values(&self, hour: usize) -> Vec<f64> {
        let lo = self.base.lower_bounds()[hour];
        let hi = self.base.upper_bounds()[hour];
        let steps = (self.grid_resolution - 1) as f64;
        (0..self.grid_resolution)
            .map(|k| {
                if k + 1 == self.grid_resolution {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / steps
                }
            })
            .collect()
    }

    /// The base problem with every non-free hour pinned to its predicted
    /// load, so continuous optimizers search the same space as the grid.
    pub fn as_problem(&self) -> Result<DrProblem> {
        let predicted = self.base.predicted().values();
        let mut lower = *predicted;
        let mut upper = *predicted;
        for &h in &self.free_hours {
            lower[h] = self.base.lower_bounds()[h];
            upper[h] = self.base.upper_bounds()[h];
        }
        self.base.with_bounds(lower, upper)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOptimum {
    pub schedule: HourlyProfile,
    pub objective: f64,
    pub points_evaluated: u64,
}

/// Evaluates every grid point; ties resolve to the lexicographically
/// smallest schedule.
pub fn grid_search(reduced: &ReducedProblem) -> Result<GridOptimum> {
    reduced.check_size()?;
    let axes: Vec<Vec<f64>> = reduced
        .free_hours
        .iter()
        .map(|&h| reduced.grid_values(h))
        .collect();
    let mut schedule = *reduced.base.predicted().values();
    let mut counter = vec![0usize; axes.len()];
    let mut best: Option<([f64; HOURS], f64)> = None;
    let mut evaluated = 0u64;
    // Odometer with the earliest free hour as the slowest digit visits points
    // in ascending lexicographic order, so keeping the first strict minimum
    // implements the tie-break.
    loop {
        for (axis, (&h, &k)) in reduced.free_hours.iter().zip(&counter).enumerate() {
            schedule[h] = axes[axis][k];
        }
        let f = evaluate_slice(&reduced.base, &schedule)?.objective;
        evaluated += 1;
        if best.is_none_or(|(_, b)| f < b) {
            best = Some((schedule, f));
        }
        let mut d = counter.len();
        loop {
            if d == 0 {
                let (s, objective) = best.expect("at least one grid point");
                return Ok(GridOptimum {
                    schedule: HourlyProfile::load(s)?,
                    objective,
                    points_evaluated: evaluated,
                });
            }
            d -= 1;
            counter[d] += 1;
            if counter[d] < reduced.grid_resolution {
                break;
            }
            counter[d] = 0;
        }
    }
}

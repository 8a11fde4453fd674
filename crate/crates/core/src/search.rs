//! Pieces shared by the population-based optimizers.

use rand::Rng as _;

use crate::error::Result;
use crate::objective::{evaluate_slice, ObjectiveBreakdown};
use crate::problem::{DrProblem, OptimizationResult, TracePoint};
use crate::profile::{HourlyProfile, HOURS};
use crate::seed::Rng;

pub(crate) fn random_in_box(problem: &DrProblem, rng: &mut Rng) -> Vec<f64> {
    let (lo, hi) = (problem.lower_bounds(), problem.upper_bounds());
    (0..HOURS)
        .map(|h| lo[h] + rng.gen::<f64>() * (hi[h] - lo[h]))
        .collect()
}

pub(crate) fn trace_point(iteration: usize, best: &ObjectiveBreakdown) -> TracePoint {
    TracePoint {
        iteration,
        best_objective: best.objective,
        best_cost: best.cost,
        best_shift: best.load_shift,
        violation: best.violation,
    }
}

pub(crate) fn build_result(
    algorithm: &str,
    problem: &DrProblem,
    best: &[f64],
    trace: Vec<TracePoint>,
    evaluations: usize,
    rng_seed: u64,
) -> Result<OptimizationResult> {
    let breakdown = evaluate_slice(problem, best)?;
    let best_schedule = HourlyProfile::from_slice(best, crate::profile::ProfileKind::Load)?;
    let predicted = problem.predicted();
    Ok(OptimizationResult {
        algorithm: algorithm.to_string(),
        peak_before: predicted.peak(),
        peak_after: best_schedule.peak(),
        baseline_cost: crate::objective::energy_cost(predicted, problem.prices()),
        best_schedule,
        objective: breakdown.objective,
        cost: breakdown.cost,
        load_shift: breakdown.load_shift,
        violation: breakdown.violation,
        violation_flagged: breakdown.violation > 0.0,
        evaluations,
        trace,
        rng_seed,
    })
}

//! DE/rand/1/bin baseline sharing the demand-response objective with PSO.
//!
//! Each generation, every member `x` gets a donor `y = a + β·(b − c)` from
//! three other distinct members (β drawn uniformly from `beta_range`), a
//! binomial crossover trial `z`, and is replaced by `z` if `z` scores
//! strictly better. Trials are built from the previous generation and
//! replacements are applied in member order.

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::evaluate_slice;
use crate::problem::{DrProblem, OptimizationResult};
use crate::search::{build_result, random_in_box, trace_point};
use crate::seed::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeConfig {
    pub population_size: usize,
    pub iterations: usize,
    pub beta_range: (f64, f64),
    pub crossover_probability: f64,
    pub seed: u64,
    pub seed_with_predicted: bool,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            iterations: 100,
            beta_range: (0.2, 0.8),
            crossover_probability: 0.7,
            seed: 0,
            seed_with_predicted: true,
        }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 {
            return Err(Error::InvalidConfig(
                "population_size must be >= 4 (three distinct donors per member)".into(),
            ));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return Err(Error::InvalidConfig(
                "crossover_probability must be in [0, 1]".into(),
            ));
        }
        let (lo, hi) = self.beta_range;
        if !(0.2 <= lo && lo <= hi && hi <= 0.8) {
            return Err(Error::InvalidConfig(format!(
                "beta_range must satisfy 0.2 <= lo <= hi <= 0.8, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    /// Objective evaluations consumed by a run.
    pub fn budget(&self) -> usize {
        self.population_size * (self.iterations + 1)
    }
}

/// Donor vector `a + β·(b − c)` clamped into `[lower, upper]`.
pub fn mutate(
    a: &[f64],
    b: &[f64],
    c: &[f64],
    beta: f64,
    lower: &[f64],
    upper: &[f64],
) -> Vec<f64> {
    (0..a.len())
        .map(|d| (a[d] + beta * (b[d] - c[d])).clamp(lower[d], upper[d]))
        .collect()
}

/// [`mutate`] on population members addressed by index.
pub fn mutate_members(
    population: &[Vec<f64>],
    parents: [usize; 3],
    beta: f64,
    lower: &[f64],
    upper: &[f64],
) -> Result<Vec<f64>> {
    let [a, b, c] = parents;
    if a == b || b == c || a == c {
        return Err(Error::NonDistinctParents(parents));
    }
    Ok(mutate(
        &population[a],
        &population[b],
        &population[c],
        beta,
        lower,
        upper,
    ))
}

/// Binomial crossover with explicit draws: `z[j] = y[j]` if `r[j] <= pcr` or
/// `j == j0`, else `x[j]`.
pub fn crossover_with(x: &[f64], y: &[f64], pcr: f64, r: &[f64], j0: usize) -> Vec<f64> {
    (0..x.len())
        .map(|j| if r[j] <= pcr || j == j0 { y[j] } else { x[j] })
        .collect()
}

/// Draws `j0` uniformly and `r[j]` uniformly in [0, 1), then applies [`crossover_with`].
pub fn crossover(x: &[f64], y: &[f64], pcr: f64, rng: &mut Rng) -> Vec<f64> {
    let j0 = rng.gen_range(0..x.len());
    let r: Vec<f64> = (0..x.len()).map(|_| rng.gen::<f64>()).collect();
    crossover_with(x, y, pcr, &r, j0)
}

/// Three distinct indices in `0..n`, none equal to `target`.
pub fn pick_parents(n: usize, target: usize, rng: &mut Rng) -> [usize; 3] {
    let picked = index::sample(rng, n - 1, 3);
    let skip = |i: usize| if i >= target { i + 1 } else { i };
    [
        skip(picked.index(0)),
        skip(picked.index(1)),
        skip(picked.index(2)),
    ]
}

#[derive(Debug)]
pub struct GenerationSnapshot<'a> {
    pub iteration: usize,
    pub population: &'a [Vec<f64>],
    pub objectives: &'a [f64],
    pub best_index: usize,
}

pub fn optimize(problem: &DrProblem, config: &DeConfig) -> Result<OptimizationResult> {
    optimize_observed(problem, config, |_| {})
}

pub fn optimize_observed(
    problem: &DrProblem,
    config: &DeConfig,
    mut observer: impl FnMut(&GenerationSnapshot<'_>),
) -> Result<OptimizationResult> {
    config.validate()?;
    let mut rng = seed::rng(config.seed);
    let (lower, upper) = (problem.lower_bounds(), problem.upper_bounds());
    let n = config.population_size;

    let mut population: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            if i == 0 && config.seed_with_predicted {
                problem.clamp(problem.predicted().values()).to_vec()
            } else {
                random_in_box(problem, &mut rng)
            }
        })
        .collect();
    let mut objectives = population
        .iter()
        .map(|x| evaluate_slice(problem, x).map(|b| b.objective))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = n;

    let argmin =
        |obj: &[f64]| (0..obj.len()).fold(0, |best, i| if obj[i] < obj[best] { i } else { best });
    let mut best = argmin(&objectives);
    let mut trace = vec![trace_point(0, &evaluate_slice(problem, &population[best])?)];
    observer(&GenerationSnapshot {
        iteration: 0,
        population: &population,
        objectives: &objectives,
        best_index: best,
    });

    let (beta_lo, beta_hi) = config.beta_range;
    for iteration in 1..=config.iterations {
        let mut trials = Vec::with_capacity(n);
        for i in 0..n {
            let parents = pick_parents(n, i, &mut rng);
            let beta = if beta_hi > beta_lo {
                rng.gen_range(beta_lo..=beta_hi)
            } else {
                beta_lo
            };
            let donor = mutate_members(&population, parents, beta, lower, upper)?;
            trials.push(crossover(
                &population[i],
                &donor,
                config.crossover_probability,
                &mut rng,
            ));
        }
        let trial_objectives = trials
            .iter()
            .map(|z| evaluate_slice(problem, z).map(|b| b.objective))
            .collect::<Result<Vec<_>>>()?;
        evaluations += n;

        for (i, (z, f)) in trials.into_iter().zip(trial_objectives).enumerate() {
            if f < objectives[i] {
                population[i] = z;
                objectives[i] = f;
            }
        }
        best = argmin(&objectives);
        trace.push(trace_point(
            iteration,
            &evaluate_slice(problem, &population[best])?,
        ));
        observer(&GenerationSnapshot {
            iteration,
            population: &population,
            objectives: &objectives,
            best_index: best,
        });
    }

    let schedule = population[best].clone();
    build_result("de", problem, &schedule, trace, evaluations, config.seed)
}

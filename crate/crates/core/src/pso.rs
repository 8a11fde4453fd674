//! Global-best particle swarm over the 24-hour schedule box.
//!
//! ```text
//! v ← w·v + c1·r1·(pbest − x) + c2·r2·(gbest − x)    clamped to ±v_max
//! x ← x + v                                           clamped into [lower, upper]
//! ```
//!
//! `r1`, `r2` are drawn per dimension. Iterations are synchronous: every
//! particle moves and is evaluated, then personal and global bests are
//! updated in particle order.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::evaluate_slice;
use crate::problem::{DrProblem, OptimizationResult};
use crate::profile::HOURS;
use crate::search::{build_result, random_in_box, trace_point};
use crate::seed::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    /// Inertia weight.
    pub w: f64,
    /// Personal (cognitive) coefficient.
    pub c1: f64,
    /// Global (social) coefficient.
    pub c2: f64,
    /// Velocity limit as a fraction of each hour's bound width.
    pub v_max_fraction: f64,
    pub seed: u64,
    /// Start one particle at the (clamped) predicted schedule.
    pub seed_with_predicted: bool,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            iterations: 100,
            w: 1.0,
            c1: 2.0,
            c2: 2.0,
            v_max_fraction: 0.10,
            seed: 0,
            seed_with_predicted: true,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::InvalidConfig("swarm_size must be >= 2".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be >= 1".into()));
        }
        if self.v_max_fraction.is_nan() || self.v_max_fraction <= 0.0 {
            return Err(Error::InvalidConfig("v_max_fraction must be > 0".into()));
        }
        if ![self.w, self.c1, self.c2].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("w, c1, c2 must be finite".into()));
        }
        Ok(())
    }

    /// Objective evaluations consumed by a run.
    pub fn budget(&self) -> usize {
        self.swarm_size * (self.iterations + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_objective: f64,
}

/// `v_max[h] = fraction · (upper[h] − lower[h])`.
pub fn velocity_limits(problem: &DrProblem, fraction: f64) -> [f64; HOURS] {
    let (lo, hi) = (problem.lower_bounds(), problem.upper_bounds());
    std::array::from_fn(|h| fraction * (hi[h] - lo[h]))
}

/// Velocity update with explicit random factors, then the ±`v_max` clamp.
#[allow(clippy::too_many_arguments)]
pub fn velocity_step(
    particle: &Particle,
    gbest: &[f64],
    w: f64,
    c1: f64,
    c2: f64,
    r1: &[f64],
    r2: &[f64],
    v_max: &[f64],
) -> Vec<f64> {
    (0..particle.position.len())
        .map(|d| {
            let x = particle.position[d];
            let v = w * particle.velocity[d]
                + c1 * r1[d] * (particle.best_position[d] - x)
                + c2 * r2[d] * (gbest[d] - x);
            v.clamp(-v_max[d], v_max[d])
        })
        .collect()
}

/// Draws `r1`, `r2` uniformly in [0, 1) per dimension and applies [`velocity_step`].
pub fn velocity_update(
    particle: &Particle,
    gbest: &[f64],
    config: &PsoConfig,
    v_max: &[f64],
    rng: &mut Rng,
) -> Vec<f64> {
    let dim = particle.position.len();
    let mut r1 = Vec::with_capacity(dim);
    let mut r2 = Vec::with_capacity(dim);
    for _ in 0..dim {
        r1.push(rng.gen::<f64>());
        r2.push(rng.gen::<f64>());
    }
    velocity_step(
        particle, gbest, config.w, config.c1, config.c2, &r1, &r2, v_max,
    )
}

/// `x + v` clamped into the box. Velocity components whose position hit a
/// bound are zeroed.
pub fn position_update(
    position: &[f64],
    velocity: &mut [f64],
    lower: &[f64],
    upper: &[f64],
) -> Vec<f64> {
    position
        .iter()
        .zip(velocity.iter_mut())
        .enumerate()
        .map(|(d, (&x, v))| {
            let moved = x + *v;
            let clamped = moved.clamp(lower[d], upper[d]);
            if clamped != moved {
                *v = 0.0;
            }
            clamped
        })
        .collect()
}

/// Swarm state handed to an observer after initialization (iteration 0) and
/// after every iteration.
#[derive(Debug)]
pub struct SwarmSnapshot<'a> {
    pub iteration: usize,
    pub particles: &'a [Particle],
    pub gbest: &'a [f64],
    pub gbest_objective: f64,
    pub v_max: &'a [f64; HOURS],
}

pub fn optimize(problem: &DrProblem, config: &PsoConfig) -> Result<OptimizationResult> {
    optimize_observed(problem, config, |_| {})
}

pub fn optimize_observed(
    problem: &DrProblem,
    config: &PsoConfig,
    mut observer: impl FnMut(&SwarmSnapshot<'_>),
) -> Result<OptimizationResult> {
    config.validate()?;
    let mut rng = seed::rng(config.seed);
    let v_max = velocity_limits(problem, config.v_max_fraction);
    let (lower, upper) = (problem.lower_bounds(), problem.upper_bounds());

    let mut particles = Vec::with_capacity(config.swarm_size);
    for i in 0..config.swarm_size {
        let position = if i == 0 && config.seed_with_predicted {
            problem.clamp(problem.predicted().values()).to_vec()
        } else {
            random_in_box(problem, &mut rng)
        };
        let velocity = (0..HOURS)
            .map(|h| (2.0 * rng.gen::<f64>() - 1.0) * v_max[h])
            .collect();
        let objective = evaluate_slice(problem, &position)?.objective;
        particles.push(Particle {
            best_position: position.clone(),
            position,
            velocity,
            best_objective: objective,
        });
    }
    let mut evaluations = particles.len();

    let mut g = 0;
    for (i, p) in particles.iter().enumerate() {
        if p.best_objective < particles[g].best_objective {
            g = i;
        }
    }
    let mut gbest = particles[g].best_position.clone();
    let mut gbest_breakdown = evaluate_slice(problem, &gbest)?;
    let mut trace = vec![trace_point(0, &gbest_breakdown)];
    observer(&SwarmSnapshot {
        iteration: 0,
        particles: &particles,
        gbest: &gbest,
        gbest_objective: gbest_breakdown.objective,
        v_max: &v_max,
    });

    let mut objectives = vec![0.0; particles.len()];
    for iteration in 1..=config.iterations {
        for p in particles.iter_mut() {
            let mut v = velocity_update(p, &gbest, config, &v_max, &mut rng);
            p.position = position_update(&p.position, &mut v, lower, upper);
            p.velocity = v;
        }
        for (o, p) in objectives.iter_mut().zip(&particles) {
            *o = evaluate_slice(problem, &p.position)?.objective;
        }
        evaluations += particles.len();

        let mut improved = false;
        for (p, &f) in particles.iter_mut().zip(&objectives) {
            if f < p.best_objective {
                p.best_objective = f;
                p.best_position.clone_from(&p.position);
                if f < gbest_breakdown.objective {
                    gbest.clone_from(&p.position);
                    gbest_breakdown.objective = f;
                    improved = true;
                }
            }
        }
        if improved {
            gbest_breakdown = evaluate_slice(problem, &gbest)?;
        }
        trace.push(trace_point(iteration, &gbest_breakdown));
        observer(&SwarmSnapshot {
            iteration,
            particles: &particles,
            gbest: &gbest,
            gbest_objective: gbest_breakdown.objective,
            v_max: &v_max,
        });
    }

    build_result("pso", problem, &gbest, trace, evaluations, config.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{build_problem, evaluate, PeakCap, ProblemOptions};
    use crate::profile::HourlyProfile;

    fn particle(x: &[f64], v: &[f64], pbest: &[f64]) -> Particle {
        Particle {
            position: x.to_vec(),
            velocity: v.to_vec(),
            best_position: pbest.to_vec(),
            best_objective: 0.0,
        }
    }

    #[test]
    fn inertia_only_keeps_velocity() {
        let p = particle(&[1.0, 2.0], &[0.3, -0.2], &[5.0, 5.0]);
        let v = velocity_step(
            &p,
            &[9.0, 9.0],
            1.0,
            0.0,
            0.0,
            &[0.7; 2],
            &[0.4; 2],
            &[10.0; 2],
        );
        assert_eq!(v, vec![0.3, -0.2]);
    }

    #[test]
    fn attraction_vanishes_at_bests() {
        let p = particle(&[1.0, 2.0], &[0.3, -0.2], &[1.0, 2.0]);
        let v = velocity_step(
            &p,
            &[1.0, 2.0],
            0.5,
            2.0,
            2.0,
            &[0.9; 2],
            &[0.9; 2],
            &[10.0; 2],
        );
        assert_eq!(v, vec![0.15, -0.1]);
    }

    #[test]
    fn social_pull_is_clamped() {
        // raw update: 2 * 1 * (1 - 0) = 2, limit 0.1 * (1 - 0)
        let p = particle(&[0.0], &[0.0], &[0.0]);
        let v = velocity_step(&p, &[1.0], 1.0, 2.0, 2.0, &[0.0], &[1.0], &[0.1]);
        assert_eq!(v, vec![0.1]);
    }

    #[test]
    fn position_update_examples() {
        let mut v = vec![0.0, 0.0];
        assert_eq!(
            position_update(&[3.0, 4.0], &mut v, &[0.0; 2], &[10.0; 2]),
            vec![3.0, 4.0]
        );

        let mut v = vec![5.0];
        assert_eq!(position_update(&[9.0], &mut v, &[0.0], &[10.0]), vec![10.0]);
        assert_eq!(v, vec![0.0]);

        let mut v = vec![0.5, -0.5];
        assert_eq!(
            position_update(&[1.0, 2.0], &mut v, &[-9.0; 2], &[9.0; 2]),
            vec![1.5, 1.5]
        );
        assert_eq!(v, vec![0.5, -0.5]);
    }

    fn day() -> (HourlyProfile, HourlyProfile) {
        let load = std::array::from_fn(|h| {
            let x = (h as f64 - 18.0) / 3.0;
            100.0 + 60.0 * (-x * x).exp()
        });
        let price = std::array::from_fn(|h| {
            let x = (h as f64 - 18.0) / 2.0;
            3.0 + 4.0 * (-x * x).exp()
        });
        (
            HourlyProfile::load(load).unwrap(),
            HourlyProfile::price(price).unwrap(),
        )
    }

    #[test]
    fn degenerate_box_returns_predicted() {
        let (load, price) = day();
        let opts = ProblemOptions {
            gamma_lo: 1.0,
            gamma_hi: 1.0,
            ..Default::default()
        };
        let problem = build_problem(&load, &price, 0.5, 0.5, &opts).unwrap();
        let r = optimize(
            &problem,
            &PsoConfig {
                iterations: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(&r.best_schedule, &load);
        let first = r.trace[0].best_objective;
        assert!(r.trace.iter().all(|t| t.best_objective == first));
    }

    #[test]
    fn never_worse_than_predicted() {
        let (load, price) = day();
        for (w1, w2) in [(1.0, 0.0), (0.4, 0.6), (0.0, 1.0)] {
            let problem = build_problem(&load, &price, w1, w2, &ProblemOptions::default()).unwrap();
            let baseline = evaluate(&problem, &load).unwrap();
            let r = optimize(&problem, &PsoConfig::default()).unwrap();
            assert!(r.objective <= baseline.objective);
            if w2 == 0.0 {
                assert!(r.cost <= baseline.cost);
            }
        }
    }

    #[test]
    fn same_seed_same_run() {
        let (load, price) = day();
        let problem = build_problem(&load, &price, 1.0, 0.0, &ProblemOptions::default()).unwrap();
        let cfg = PsoConfig {
            seed: 17,
            ..Default::default()
        };
        assert_eq!(
            optimize(&problem, &cfg).unwrap(),
            optimize(&problem, &cfg).unwrap()
        );
        let other = optimize(&problem, &PsoConfig { seed: 18, ..cfg }).unwrap();
        assert_ne!(other.trace, optimize(&problem, &cfg).unwrap().trace);
    }

    #[test]
    fn observer_sees_invariants() {
        let (load, price) = day();
        let opts = ProblemOptions {
            peak_cap: Some(PeakCap::FractionOfPeak(0.85)),
            ..Default::default()
        };
        let problem = build_problem(&load, &price, 0.7, 0.3, &opts).unwrap();
        let mut audited = 0;
        let mut last = f64::INFINITY;
        let r = optimize_observed(&problem, &PsoConfig::default(), |s| {
            audited += 1;
            assert!(s.gbest_objective <= last);
            last = s.gbest_objective;
            for p in s.particles {
                assert!(problem.contains(&p.position));
                for h in 0..HOURS {
                    assert!(p.velocity[h].abs() <= s.v_max[h]);
                }
            }
        })
        .unwrap();
        assert_eq!(audited, 101);
        assert_eq!(r.trace.len(), 101);
        assert_eq!(r.evaluations, PsoConfig::default().budget());
        assert!(r.peak_after <= 0.85 * load.peak() + 1e-9);
    }

    #[test]
    fn rejects_bad_config() {
        let (load, price) = day();
        let problem = build_problem(&load, &price, 0.5, 0.5, &ProblemOptions::default()).unwrap();
        for cfg in [
            PsoConfig {
                swarm_size: 1,
                ..Default::default()
            },
            PsoConfig {
                iterations: 0,
                ..Default::default()
            },
            PsoConfig {
                v_max_fraction: 0.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                optimize(&problem, &cfg),
                Err(Error::InvalidConfig(_))
            ));
        }
    }
}

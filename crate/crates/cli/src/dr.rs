use std::io::Write;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use gridshift_core::de::{self, DeConfig};
use gridshift_core::oracle::{grid_search, ReducedProblem, MAX_FREE_HOURS};
use gridshift_core::pso::{self, PsoConfig};
use gridshift_core::report::{
    compare_algorithms, render_comparison_table, render_sweep_table, standard_weight_grid,
    sweep_seed, weight_sweep, write_cost_comparison_csv, write_load_comparison_csv, write_rows_csv,
};
use gridshift_core::{build_problem, DrProblem, HourlyProfile, OptimizationResult, HOURS};
use serde::Serialize;

use crate::config::{ProblemArgs, ProblemParams};
use crate::inputs::{Day, DayInputs};
use crate::run::Run;
use crate::Globals;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pso,
    De,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    /// Iterations (PSO) or generations (DE)
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    /// Swarm or population size
    #[arg(long, default_value_t = 50)]
    pub population: usize,
    /// Start from random points only, without the predicted schedule
    #[arg(long)]
    pub no_seed_predicted: bool,
}

impl SearchArgs {
    fn pso(&self, seed: u64) -> PsoConfig {
        PsoConfig {
            swarm_size: self.population,
            iterations: self.iterations,
            seed,
            seed_with_predicted: !self.no_seed_predicted,
            ..Default::default()
        }
    }

    fn de(&self, seed: u64) -> DeConfig {
        DeConfig {
            population_size: self.population,
            iterations: self.iterations,
            seed,
            seed_with_predicted: !self.no_seed_predicted,
            ..Default::default()
        }
    }
}

fn setup(
    g: &Globals,
    inputs: &DayInputs,
    problem: &ProblemArgs,
) -> Result<(Day, ProblemParams, DrProblem)> {
    let day = inputs.load()?;
    let params = problem.resolve(&g.config)?;
    let p = build_problem(
        &day.predicted,
        &day.prices,
        params.w1,
        params.w2,
        &params.options,
    )?;
    Ok((day, params, p))
}

#[derive(Serialize)]
struct DrParams<'a, T: Serialize> {
    inputs: &'a DayInputs,
    problem: &'a ProblemParams,
    #[serde(flatten)]
    extra: T,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub inputs: DayInputs,
    #[command(flatten)]
    #[serde(skip)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = Algorithm::Pso)]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub search: SearchArgs,
}

fn write_day_csvs(run: &mut Run, day: &Day, optimized: &HourlyProfile) -> Result<()> {
    let mut w = run.create("load_comparison.csv")?;
    write_load_comparison_csv(&day.predicted, optimized, &mut w)?;
    w.flush()?;
    let mut w = run.create("cost_comparison.csv")?;
    write_cost_comparison_csv(&day.predicted, optimized, &day.prices, &mut w)?;
    w.flush()?;
    Ok(())
}

fn print_result(r: &OptimizationResult) {
    println!("algorithm       {}", r.algorithm);
    println!("objective       {:.6}", r.objective);
    println!(
        "cost            ${:.3} -> ${:.3} ({:.2}% reduction)",
        r.baseline_cost / 100.0,
        r.cost / 100.0,
        r.cost_reduction_pct()
    );
    println!(
        "peak            {:.3} -> {:.3} kWh ({:.2}% reduction)",
        r.peak_before,
        r.peak_after,
        r.peak_reduction_pct()
    );
    println!("load shift      {:.3} kWh", r.load_shift);
    if r.violation_flagged {
        println!(
            "violation       {:.6} (daily total exceeds the prediction)",
            r.violation
        );
    } else {
        println!("violation       0");
    }
    println!("evaluations     {}", r.evaluations);
}

pub fn optimize(g: &Globals, args: &OptimizeArgs) -> Result<()> {
    let (day, params, problem) = setup(g, &args.inputs, &args.problem)?;
    let mut run = Run::new("optimize", &g.out, g.seed)?;
    let result = match args.algorithm {
        Algorithm::Pso => pso::optimize(&problem, &args.search.pso(run.seed("pso", 0)))?,
        Algorithm::De => de::optimize(&problem, &args.search.de(run.seed("de", 0)))?,
    };
    run.write_json("result.json", &result)?;
    let mut w = run.create("trace.csv")?;
    result.write_trace_csv(&mut w)?;
    w.flush()?;
    write_day_csvs(&mut run, &day, &result.best_schedule)?;
    print_result(&result);
    run.finish(&DrParams {
        inputs: &args.inputs,
        problem: &params,
        extra: args,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub inputs: DayInputs,
    #[command(flatten)]
    #[serde(skip)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub search: SearchArgs,
}

pub fn sweep(g: &Globals, args: &SweepArgs) -> Result<()> {
    let day = args.inputs.load()?;
    let params = args.problem.resolve(&g.config)?;
    let mut run = Run::new("sweep", &g.out, g.seed)?;
    let weights = standard_weight_grid();
    for row in 0..weights.len() {
        run.record_seed(format!("sweep[{row}]"), sweep_seed(run.master_seed(), row));
    }
    let rows = weight_sweep(
        &day.predicted,
        &day.prices,
        &weights,
        &params.options,
        &args.search.pso(0),
        run.master_seed(),
    )?;
    run.write_json("sweep.json", &rows)?;
    let mut w = run.create("sweep.csv")?;
    write_rows_csv(&rows, &mut w)?;
    w.flush()?;
    print!("{}", render_sweep_table(&rows));
    run.finish(&DrParams {
        inputs: &args.inputs,
        problem: &params,
        extra: args,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub inputs: DayInputs,
    #[command(flatten)]
    #[serde(skip)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub search: SearchArgs,
}

pub fn compare(g: &Globals, args: &CompareArgs) -> Result<()> {
    let (_, params, problem) = setup(g, &args.inputs, &args.problem)?;
    let mut run = Run::new("compare", &g.out, g.seed)?;
    let pc = args.search.pso(run.seed("pso", 0));
    let dc = args.search.de(run.seed("de", 0));
    let cmp = compare_algorithms(&problem, &pc, &dc)?;
    run.write_json("comparison.json", &cmp)?;
    print!("{}", render_comparison_table(&cmp));
    run.finish(&DrParams {
        inputs: &args.inputs,
        problem: &params,
        extra: args,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub inputs: DayInputs,
    #[command(flatten)]
    #[serde(skip)]
    pub problem: ProblemArgs,
    /// Number of free hours; the most expensive hours are chosen
    #[arg(long, default_value_t = 2, conflicts_with = "hours")]
    pub free_hours: usize,
    /// Explicit free hours (1-24), comma separated
    #[arg(long, value_delimiter = ',')]
    pub hours: Vec<usize>,
    /// Grid points per free hour
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    /// Allowed PSO gap to the grid optimum, percent
    #[arg(long, default_value_t = 1.0)]
    pub pso_tolerance: f64,
    /// Allowed DE gap to the grid optimum, percent
    #[arg(long, default_value_t = 2.0)]
    pub de_tolerance: f64,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Serialize)]
struct Check {
    algorithm: &'static str,
    objective: f64,
    gap_pct: f64,
    tolerance_pct: f64,
    pass: bool,
}

#[derive(Serialize)]
struct Verification {
    free_hours: Vec<usize>,
    grid_points: u64,
    oracle_objective: f64,
    oracle_schedule: HourlyProfile,
    checks: Vec<Check>,
}

/// Zero-based indices of the `k` highest prices, earliest hour first on ties.
fn priciest_hours(prices: &HourlyProfile, k: usize) -> Vec<usize> {
    let mut hours: Vec<usize> = (0..HOURS).collect();
    hours.sort_by(|&a, &b| prices[b].total_cmp(&prices[a]).then(a.cmp(&b)));
    hours.truncate(k);
    hours.sort_unstable();
    hours
}

pub fn verify(g: &Globals, args: &VerifyArgs) -> Result<()> {
    let (day, params, problem) = setup(g, &args.inputs, &args.problem)?;
    let free = if args.hours.is_empty() {
        if !(1..=MAX_FREE_HOURS).contains(&args.free_hours) {
            bail!("--free-hours must be between 1 and {MAX_FREE_HOURS}");
        }
        priciest_hours(&day.prices, args.free_hours)
    } else {
        if let Some(h) = args.hours.iter().find(|&&h| !(1..=HOURS).contains(&h)) {
            bail!("hour {h} outside 1..=24");
        }
        args.hours.iter().map(|h| h - 1).collect()
    };
    let mut run = Run::new("verify", &g.out, g.seed)?;
    let reduced = ReducedProblem::new(problem, free, args.resolution)?;
    let optimum = grid_search(&reduced)?;
    let pinned = reduced.as_problem()?;
    let p = pso::optimize(&pinned, &args.search.pso(run.seed("pso", 0)))?;
    let d = de::optimize(&pinned, &args.search.de(run.seed("de", 0)))?;

    let check = |algorithm, objective: f64, tolerance_pct: f64| {
        let gap_pct = 100.0 * (objective - optimum.objective) / optimum.objective.abs();
        Check {
            algorithm,
            objective,
            gap_pct,
            tolerance_pct,
            pass: gap_pct <= tolerance_pct,
        }
    };
    let report = Verification {
        free_hours: reduced.free_hours().iter().map(|h| h + 1).collect(),
        grid_points: optimum.points_evaluated,
        oracle_objective: optimum.objective,
        oracle_schedule: optimum.schedule,
        checks: vec![
            check("pso", p.objective, args.pso_tolerance),
            check("de", d.objective, args.de_tolerance),
        ],
    };
    run.write_json("verify.json", &report)?;
    println!(
        "grid optimum {:.6} over {} points, free hours {:?}",
        report.oracle_objective, report.grid_points, report.free_hours
    );
    for c in &report.checks {
        println!(
            "{} {}: objective {:.6}, relative gap {:.4}% (tolerance {}%)",
            if c.pass { "PASS" } else { "FAIL" },
            c.algorithm,
            c.objective,
            c.gap_pct,
            c.tolerance_pct
        );
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    run.finish(&DrParams {
        inputs: &args.inputs,
        problem: &params,
        extra: args,
    })?;
    if failed > 0 {
        bail!("{failed} optimizer(s) outside tolerance of the grid optimum");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priciest_hours_breaks_ties_by_hour() {
        let mut v = [1.0; HOURS];
        v[20] = 9.0;
        v[3] = 5.0;
        v[7] = 5.0;
        let p = HourlyProfile::price(v).unwrap();
        assert_eq!(priciest_hours(&p, 2), vec![3, 20]);
        assert_eq!(priciest_hours(&p, 3), vec![3, 7, 20]);
    }
}

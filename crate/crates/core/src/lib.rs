//! Day-ahead demand response: forecast tomorrow's hourly load with a small
//! neural network, then reshape it against day-ahead prices with particle
//! swarm optimization (differential evolution as a baseline).
//!
//! Typical flow:
//!
//! 1. [`ingest::load_dataset`] reads hourly weather, load and prices.
//! 2. [`forecaster::train`] fits an [`forecaster::MlpModel`] and
//!    [`forecaster::MlpModel::predict_day`] produces a predicted
//!    [`HourlyProfile`].
//! 3. [`objective::build_problem`] turns prediction and prices into a
//!    [`DrProblem`], solved by [`pso::optimize`] or [`de::optimize`].
//! 4. [`report`] summarizes cost and peak reductions.

pub mod de;
pub mod error;
pub mod forecaster;
pub mod ingest;
pub mod objective;
pub mod oracle;
pub mod problem;
pub mod profile;
pub mod pso;
pub mod report;
mod search;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use objective::{build_problem, evaluate, ObjectiveBreakdown, PeakCap, ProblemOptions};
pub use problem::{DrProblem, OptimizationResult, TracePoint, ViolationMode};
pub use profile::{HourlyProfile, ProfileKind, HOURS};

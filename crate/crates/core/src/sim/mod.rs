//! Seeded Monte-Carlo simulation of strategy profiles.

mod batch;
mod engine;
mod rng;
mod strategy;

pub use batch::{
    estimate_deviation_gain, run_batch, BatchSummary, DeviationEstimate, RunRecord, Stats,
};
pub use engine::{
    simulate_once, simulate_with, validate_profile, Event, EventKind, SimOptions, SimResult,
};
pub use rng::Stream;
pub use strategy::Strategy;

//! Benchmark harness for the roadmap planners: fixture environments,
//! scenario files, single trials and cross-product suites.

pub mod fixtures;
pub mod scenario;
pub mod suite;
pub mod trial;

pub use scenario::{Scenario, ScenarioError};
pub use trial::{run_trial, QueryStats, RunStats, TrialError, TrialOutcome};

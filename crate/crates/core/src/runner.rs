//! Replication orchestration: run every replication of a scenario
//! (independently seeded, parallelizable) and reduce to a summary point.

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{run_simulation, SimError};
use crate::metrics::{summarize, RunResult, SummaryError, SummaryPoint};
use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Summary(#[from] SummaryError),
}

/// Run every replication of the scenario. Replications share no state and
/// derive their substreams independently, so the result vector is
/// identical however they are scheduled.
pub fn run_replications(scenario: &Scenario) -> Result<Vec<RunResult>, SimError> {
    (0..scenario.replications)
        .into_par_iter()
        .map(|rep| run_simulation(scenario, rep))
        .collect()
}

/// Run and summarize one scenario.
pub fn summarize_scenario(scenario: &Scenario) -> Result<SummaryPoint, RunnerError> {
    let results = run_replications(scenario)?;
    Ok(summarize(&results)?)
}

/// Run the scenario once per requested station count.
pub fn sweep(scenario: &Scenario, station_counts: &[u32]) -> Result<Vec<SummaryPoint>, RunnerError> {
    station_counts
        .iter()
        .map(|&n| {
            let mut s = scenario.clone();
            s.n_stations = n;
            summarize_scenario(&s)
        })
        .collect()
}

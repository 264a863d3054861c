//! Slotted discrete-event simulator of WLAN medium access.
//!
//! Two MAC protocol families contend on a shared, globally observable
//! channel: EDCA (four prioritized Access Categories, each a CSMA/CA
//! instance with its own contention window, AIFS, and TXOP) and a
//! deterministic-backoff QoS variant that converges to collision-free
//! schedules via post-success deterministic backoffs, with Hysteresis,
//! Fair Share aggregation, Schedule Reset, stickiness, and a smart
//! (constrained) backoff draw that keeps a station's own ACs from ever
//! colliding with each other.
//!
//! Runs are deterministic: every stochastic component draws from its own
//! counter-mode substream derived from the scenario seed, so a `(seed,
//! replication)` pair reproduces a run bit-exactly regardless of how many
//! replications execute in parallel.

pub mod config;
pub mod engine;
pub mod mac;
pub mod metrics;
pub mod phy;
pub mod report;
pub mod rng;
pub mod runner;
pub mod scenario;
pub mod station;
pub mod traffic;

pub use config::{parse_scenario, ParseError};
pub use engine::{run_simulation, SimClock, SimError, Simulation, SlotKind, SlotOutcome};
pub use mac::eca::EcaConfig;
pub use mac::params::{Ac, AcParams};
pub use mac::schedule_reset::{SrGamma, SrMode};
pub use metrics::{jfi, summarize, AcMetrics, RunResult, SlotCensus, SummaryPoint};
pub use phy::{AccessMode, ErrorModel, PhyParams};
pub use report::{emit, rows_from, OutputFormat, ResultRow};
pub use runner::{run_replications, summarize_scenario, sweep, RunnerError};
pub use scenario::{ProtocolMix, Scenario, TrafficProfile};
pub use station::{MacQueue, ProtocolId, Station, TransmissionUnit, UnitKind};

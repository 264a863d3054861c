//! Per-run metric records, Jain's fairness index, and replication
//! summaries.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mac::params::{Ac, ALL_ACS};
use crate::mac::state::DiagCounters;
use crate::station::ProtocolId;

/// Counters accumulated for one (station, AC) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcMetrics {
    pub delivered_bytes: u64,
    pub delivered_mpdus: u64,
    pub attempts: u64,
    pub successes: u64,
    pub failures: u64,
    /// Failures caused by a real on-air collision.
    pub collision_failures: u64,
    /// Failures caused by the channel error model.
    pub error_failures: u64,
    /// Failures caused by losing an in-station virtual collision.
    pub virtual_collisions: u64,
    /// MPDUs dropped at the retry limit.
    pub retry_drops: u64,
    /// Arrivals dropped on a full queue.
    pub queue_drops: u64,
    /// Sum of enqueue-to-delivery times over delivered MPDUs, µs.
    pub delay_sum_us: u64,
    pub delay_count: u64,
    /// Sum of gaps between consecutive successful transmissions, µs.
    pub gap_sum_us: u64,
    pub gap_count: u64,
}

impl AcMetrics {
    pub fn throughput_bps(&self, duration_us: u64) -> f64 {
        self.delivered_bytes as f64 * 8.0 / (duration_us as f64 / 1e6)
    }

    pub fn mean_delay_us(&self) -> Option<f64> {
        (self.delay_count > 0).then(|| self.delay_sum_us as f64 / self.delay_count as f64)
    }

    pub fn mean_gap_us(&self) -> Option<f64> {
        (self.gap_count > 0).then(|| self.gap_sum_us as f64 / self.gap_count as f64)
    }

    pub fn merge(&mut self, other: &AcMetrics) {
        self.delivered_bytes += other.delivered_bytes;
        self.delivered_mpdus += other.delivered_mpdus;
        self.attempts += other.attempts;
        self.successes += other.successes;
        self.failures += other.failures;
        self.collision_failures += other.collision_failures;
        self.error_failures += other.error_failures;
        self.virtual_collisions += other.virtual_collisions;
        self.retry_drops += other.retry_drops;
        self.queue_drops += other.queue_drops;
        self.delay_sum_us += other.delay_sum_us;
        self.delay_count += other.delay_count;
        self.gap_sum_us += other.gap_sum_us;
        self.gap_count += other.gap_count;
    }
}

/// Classification counts of every channel slot in a run. The collision
/// bucket covers every failed slot, including a lone transmission lost to
/// channel errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotCensus {
    pub empty: u64,
    pub success: u64,
    pub collision: u64,
}

impl SlotCensus {
    pub fn total(&self) -> u64 {
        self.empty + self.success + self.collision
    }
}

/// Per-station metric record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationMetrics {
    pub protocol: ProtocolId,
    pub acs: [AcMetrics; 4],
}

impl StationMetrics {
    pub fn throughput_bps(&self, duration_us: u64) -> f64 {
        self.acs.iter().map(|m| m.throughput_bps(duration_us)).sum()
    }

    pub fn attempts(&self) -> u64 {
        self.acs.iter().map(|m| m.attempts).sum()
    }

    pub fn collision_failures(&self) -> u64 {
        self.acs.iter().map(|m| m.collision_failures).sum()
    }
}

/// Complete record of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub fingerprint: String,
    pub seed: u64,
    pub replication: u32,
    pub n_stations: u32,
    /// Virtual time actually simulated (sum of all slot durations), µs.
    pub duration_us: u64,
    pub census: SlotCensus,
    pub stations: Vec<StationMetrics>,
    /// End of the last slot that recorded any failure, if any.
    pub last_failure_us: Option<u64>,
    /// End of the last real collision slot, if any.
    pub last_collision_us: Option<u64>,
    /// Longest stretch of virtual time without a real collision slot.
    pub max_collision_free_gap_us: u64,
    pub diag: DiagCounters,
}

impl RunResult {
    /// Network totals for one AC.
    pub fn ac_total(&self, ac: Ac) -> AcMetrics {
        let mut total = AcMetrics::default();
        for st in &self.stations {
            total.merge(&st.acs[ac.index()]);
        }
        total
    }

    /// Aggregate delivered throughput across all stations and ACs.
    pub fn aggregate_throughput_bps(&self) -> f64 {
        self.stations.iter().map(|s| s.throughput_bps(self.duration_us)).sum()
    }

    /// Per-station delivered throughput, in station-id order.
    pub fn station_throughputs_bps(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.throughput_bps(self.duration_us)).collect()
    }

    /// Virtual collisions across all stations' ACs.
    pub fn total_virtual_collisions(&self) -> u64 {
        self.stations
            .iter()
            .map(|s| s.acs.iter().map(|a| a.virtual_collisions).sum::<u64>())
            .sum()
    }

    /// Virtual time without a real collision at the end of the run.
    pub fn tail_collision_free_us(&self) -> u64 {
        self.duration_us - self.last_collision_us.unwrap_or(0)
    }

    /// Failures per attempt over the whole network.
    pub fn failure_fraction(&self) -> f64 {
        let mut attempts = 0u64;
        let mut failures = 0u64;
        for st in &self.stations {
            for m in &st.acs {
                attempts += m.attempts;
                failures += m.failures;
            }
        }
        if attempts == 0 {
            0.0
        } else {
            failures as f64 / attempts as f64
        }
    }
}

/// Jain's fairness index: `(sum x)^2 / (n * sum x^2)`.
///
/// Equals 1 for any equal allocation; `1/n` when one entity takes
/// everything. Undefined (None) for an empty or all-zero input.
pub fn jfi(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    debug_assert!(values.iter().all(|&v| v >= 0.0));
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        return None;
    }
    Some(sum * sum / (values.len() as f64 * sum_sq))
}

/// Scope column of an emitted metric row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AcScope {
    One(Ac),
    All,
}

impl AcScope {
    pub fn label(&self) -> &'static str {
        match self {
            AcScope::One(ac) => ac.label(),
            AcScope::All => "all",
        }
    }
}

/// Mean and sample standard deviation of one metric over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub ac: AcScope,
    pub metric: String,
    pub mean: f64,
    pub stddev: f64,
}

/// Summary of a batch of replications of one scenario shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryPoint {
    pub fingerprint: String,
    pub seed: u64,
    pub n_stations: u32,
    pub replications: u32,
    pub metrics: Vec<MetricSummary>,
}

impl SummaryPoint {
    pub fn get(&self, ac: AcScope, metric: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|m| m.ac == ac && m.metric == metric)
            .map(|m| m.mean)
    }
}

#[derive(Debug, Error)]
pub enum SummaryError {
    #[error("cannot summarize an empty result set")]
    Empty,
    #[error("mixed scenarios in one summary: {0} vs {1}")]
    MixedScenarios(String, String),
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    // Identical replications must report exactly zero spread.
    if values.windows(2).all(|w| w[0] == w[1]) {
        return (values[0], 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Ordered list of per-AC metric names emitted for every summary.
pub const AC_METRICS: &[&str] = &[
    "throughput_bps",
    "per_node_throughput_bps",
    "attempts",
    "failures",
    "failure_fraction",
    "collision_fraction",
    "virtual_collisions",
    "drops",
    "mean_queueing_delay_us",
    "mean_time_between_success_us",
    "starved",
];

/// Ordered list of network-wide metric names.
pub const GLOBAL_METRICS: &[&str] = &[
    "aggregate_throughput_bps",
    "jfi_station",
    "slot_fraction_empty",
    "slot_fraction_success",
    "slot_fraction_collision",
    "virtual_collisions",
    "last_failure_s",
    "max_collision_free_gap_s",
];

/// Reduce replications of one scenario shape to means and sample
/// standard deviations, one row per (AC, metric) plus the network-wide
/// rows. Metrics that are undefined in every replication (an AC that
/// never carried traffic, a run with no failures) are omitted.
pub fn summarize(results: &[RunResult]) -> Result<SummaryPoint, SummaryError> {
    let first = results.first().ok_or(SummaryError::Empty)?;
    for r in results {
        if r.fingerprint != first.fingerprint {
            return Err(SummaryError::MixedScenarios(
                first.fingerprint.clone(),
                r.fingerprint.clone(),
            ));
        }
    }

    let mut metrics: Vec<MetricSummary> = Vec::new();
    let mut push = |ac: AcScope, name: &str, values: Vec<Option<f64>>| {
        let defined: Vec<f64> = values.into_iter().flatten().collect();
        if defined.is_empty() {
            return;
        }
        let (mean, stddev) = mean_std(&defined);
        metrics.push(MetricSummary { ac, metric: name.to_string(), mean, stddev });
    };

    // Starvation reference: VO per-node throughput per replication.
    let vo_per_node: Vec<f64> = results
        .iter()
        .map(|r| r.ac_total(Ac::Vo).throughput_bps(r.duration_us) / r.n_stations as f64)
        .collect();

    for ac in ALL_ACS {
        let totals: Vec<AcMetrics> = results.iter().map(|r| r.ac_total(ac)).collect();
        for &name in AC_METRICS {
            let values: Vec<Option<f64>> = totals
                .iter()
                .zip(results)
                .zip(&vo_per_node)
                .map(|((m, r), &vo)| match name {
                    "throughput_bps" => Some(m.throughput_bps(r.duration_us)),
                    "per_node_throughput_bps" => {
                        Some(m.throughput_bps(r.duration_us) / r.n_stations as f64)
                    }
                    "attempts" => Some(m.attempts as f64),
                    "failures" => Some(m.failures as f64),
                    "failure_fraction" => {
                        (m.attempts > 0).then(|| m.failures as f64 / m.attempts as f64)
                    }
                    "collision_fraction" => {
                        (m.attempts > 0).then(|| m.collision_failures as f64 / m.attempts as f64)
                    }
                    "virtual_collisions" => Some(m.virtual_collisions as f64),
                    "drops" => Some((m.retry_drops + m.queue_drops) as f64),
                    "mean_queueing_delay_us" => m.mean_delay_us(),
                    "mean_time_between_success_us" => m.mean_gap_us(),
                    "starved" => {
                        let per_node = m.throughput_bps(r.duration_us) / r.n_stations as f64;
                        Some(if per_node < 0.01 * vo || m.delivered_bytes == 0 {
                            1.0
                        } else {
                            0.0
                        })
                    }
                    _ => unreachable!(),
                })
                .collect();
            push(AcScope::One(ac), name, values);
        }
    }

    for &name in GLOBAL_METRICS {
        let values: Vec<Option<f64>> = results
            .iter()
            .map(|r| match name {
                "aggregate_throughput_bps" => Some(r.aggregate_throughput_bps()),
                "jfi_station" => jfi(&r.station_throughputs_bps()),
                "slot_fraction_empty" => {
                    let t = r.census.total();
                    (t > 0).then(|| r.census.empty as f64 / t as f64)
                }
                "slot_fraction_success" => {
                    let t = r.census.total();
                    (t > 0).then(|| r.census.success as f64 / t as f64)
                }
                "slot_fraction_collision" => {
                    let t = r.census.total();
                    (t > 0).then(|| r.census.collision as f64 / t as f64)
                }
                "virtual_collisions" => Some(r.total_virtual_collisions() as f64),
                "last_failure_s" => r.last_failure_us.map(|t| t as f64 / 1e6),
                "max_collision_free_gap_s" => Some(r.max_collision_free_gap_us as f64 / 1e6),
                _ => unreachable!(),
            })
            .collect();
        push(AcScope::All, name, values);
    }

    Ok(SummaryPoint {
        fingerprint: first.fingerprint.clone(),
        seed: first.seed,
        n_stations: first.n_stations,
        replications: results.len() as u32,
        metrics,
    })
}

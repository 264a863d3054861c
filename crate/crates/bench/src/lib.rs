//! Benchmark helpers: prebuilt scenarios exercised by the criterion
//! targets in `benches/`.

use ecasim_core::scenario::Scenario;
use ecasim_core::station::ProtocolId;

/// Saturated scenario of the given protocol, sized for benchmarking.
pub fn bench_scenario(n: u32, protocol: ProtocolId, seconds: f64) -> Scenario {
    let mut s = Scenario::baseline(n, protocol);
    s.duration_s = seconds;
    s.seed = 0xB_EEF;
    s
}

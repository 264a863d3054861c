//! Property tests over the simulator's algebraic pieces and small
//! randomized scenarios.

use proptest::prelude::*;

use ecasim_core::engine::{run_simulation, SlotKind};
use ecasim_core::metrics::jfi;
use ecasim_core::phy::tx_time;
use ecasim_core::scenario::{Scenario, TrafficProfile};
use ecasim_core::station::ProtocolId;
use ecasim_core::traffic::packetize;
use ecasim_core::Simulation;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jfi_stays_in_unit_interval_and_scales(values in prop::collection::vec(0.0f64..1e9, 1..24)) {
        if let Some(j) = jfi(&values) {
            prop_assert!(j > 0.0 && j <= 1.0 + 1e-12);
            let scaled: Vec<f64> = values.iter().map(|v| v * 3.5).collect();
            let js = jfi(&scaled).unwrap();
            prop_assert!((j - js).abs() < 1e-9);
        } else {
            prop_assert!(values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn jfi_of_equal_values_is_one(v in 1e-6f64..1e9, n in 1usize..32) {
        let j = jfi(&vec![v; n]).unwrap();
        prop_assert!((j - 1.0).abs() < 1e-12);
    }

    #[test]
    fn packetize_conserves_bytes(frame in 1u32..200_000, max in 1u32..4000) {
        let parts = packetize(frame, max);
        prop_assert_eq!(parts.iter().sum::<u32>(), frame);
        prop_assert!(parts.iter().all(|&p| p >= 1 && p <= max));
        // All full-size except a final remainder.
        if parts.len() > 1 {
            prop_assert!(parts[..parts.len() - 1].iter().all(|&p| p == max));
        }
        prop_assert_eq!(parts.len() as u64, u64::from(frame).div_ceil(u64::from(max)));
    }

    #[test]
    fn tx_time_is_monotone_and_symbol_aligned(bytes in 1u32..100_000) {
        let t = tx_time(bytes, 65_000_000);
        prop_assert_eq!(t % 4, 0);
        prop_assert!(t >= 4);
        prop_assert!(tx_time(bytes + 1, 65_000_000) >= t);
    }
}

proptest! {
    // Whole-run invariants are slower; keep the case count small.
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn short_runs_conserve_census_and_time(
        n in 1u32..8,
        seed in 0u64..1000,
        protocol_pick in 0u8..3,
        saturated in any::<bool>(),
    ) {
        let protocol = match protocol_pick {
            0 => ProtocolId::Edca,
            1 => ProtocolId::EcaQosFairShare,
            _ => ProtocolId::EcaQosTxop,
        };
        let mut s = Scenario::baseline(n, protocol);
        s.seed = seed;
        s.duration_s = 0.5;
        if !saturated {
            s.traffic = TrafficProfile::NonSaturated;
            s.p_e = 0.05;
        }
        let mut sim = Simulation::new(&s, 0).unwrap();
        let mut time = 0u64;
        let mut slots = 0u64;
        while !sim.done() {
            let o = sim.step();
            match o.kind {
                SlotKind::Empty => prop_assert!(o.participants.is_empty()),
                SlotKind::Success => {
                    prop_assert_eq!(o.participants.len(), 1);
                    prop_assert!(o.winner.is_some());
                }
                SlotKind::Collision => prop_assert!(!o.participants.is_empty()),
            }
            time += o.duration_us;
            slots += 1;
        }
        let r = sim.finish();
        prop_assert_eq!(r.duration_us, time);
        prop_assert_eq!(r.census.total(), slots);
        if protocol.is_eca() {
            prop_assert_eq!(r.total_virtual_collisions(), 0);
        }
        // Determinism: the same replication reruns identically.
        let again = run_simulation(&s, 0).unwrap();
        prop_assert_eq!(r, again);
    }
}

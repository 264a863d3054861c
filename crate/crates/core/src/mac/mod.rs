//! Per-AC contention state machines: EDCA and the deterministic-backoff
//! QoS protocol, plus the constrained backoff draw and the schedule
//! observation machinery they share.

pub mod eca;
pub mod edca;
pub mod params;
pub mod schedule_reset;
pub mod smart;
pub mod state;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use params::AcParams;

/// Retransmission attempts tolerated before the head-of-line unit drops.
pub const MAX_RETRIES: u8 = 7;

/// AIFSN value whose waiting period equals DIFS; ACs above it owe extra
/// idle slots after every busy period.
pub const DIFS_EQUIVALENT_AIFSN: u8 = 3;

/// Uniform backoff over `[0, 2^stage * cw_min - 1]`.
pub fn draw_random_backoff(params: &AcParams, stage: u8, rng: &mut ChaCha12Rng) -> u32 {
    let window = params.cw_at(stage);
    if window <= 1 {
        return 0;
    }
    rng.random_range(0..window)
}

/// AIFS waiting period: `SIFS + slot * (AIFSN - 1)`.
pub fn aifs_duration_us(params: &AcParams, sifs_us: u64, slot_us: u64) -> u64 {
    assert!(params.aifsn >= 1);
    sifs_us + slot_us * u64::from(params.aifsn - 1)
}

/// Extra idle slots owed after each busy period relative to the
/// DIFS-equivalent waiting requirement.
pub fn aifs_surplus_slots(params: &AcParams) -> u8 {
    params.aifsn.saturating_sub(DIFS_EQUIVALENT_AIFSN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::params::{edca_defaults, Ac, AcParams};
    use crate::rng::{substream, StreamRole};

    #[test]
    fn aifs_duration_examples() {
        let mk = |aifsn| AcParams { cw_min: 32, cw_max: 1024, max_stage: 5, aifsn, txop_limit_us: 0 };
        assert_eq!(aifs_duration_us(&mk(3), 16, 9), 34);
        assert_eq!(aifs_duration_us(&mk(1), 16, 9), 16);
        assert_eq!(aifs_duration_us(&mk(8), 16, 9), 79);
    }

    #[test]
    fn aifs_surplus_matches_defaults() {
        assert_eq!(aifs_surplus_slots(&edca_defaults(Ac::Vo)), 0);
        assert_eq!(aifs_surplus_slots(&edca_defaults(Ac::Vi)), 0);
        assert_eq!(aifs_surplus_slots(&edca_defaults(Ac::Be)), 1);
        assert_eq!(aifs_surplus_slots(&edca_defaults(Ac::Bk)), 5);
    }

    #[test]
    fn random_backoff_stays_in_window() {
        let mut rng = substream(1, 0, 0, 0, StreamRole::Backoff);
        let p = AcParams { cw_min: 8, cw_max: 256, max_stage: 5, aifsn: 3, txop_limit_us: 0 };
        for _ in 0..10_000 {
            assert!(draw_random_backoff(&p, 5, &mut rng) < 256);
        }
    }

    #[test]
    fn random_backoff_degenerate_window_is_zero() {
        let mut rng = substream(2, 0, 0, 0, StreamRole::Backoff);
        let p = AcParams { cw_min: 1, cw_max: 1, max_stage: 0, aifsn: 3, txop_limit_us: 0 };
        for _ in 0..100 {
            assert_eq!(draw_random_backoff(&p, 0, &mut rng), 0);
        }
    }

    #[test]
    fn random_backoff_is_uniform_over_cw_min() {
        // Chi-square goodness of fit over 10^5 draws in [0, 31]:
        // 31 degrees of freedom, critical value 52.19 at p = 0.01.
        let mut rng = substream(3, 0, 0, 0, StreamRole::Backoff);
        let p = AcParams { cw_min: 32, cw_max: 1024, max_stage: 5, aifsn: 3, txop_limit_us: 0 };
        let draws = 100_000usize;
        let mut counts = [0u64; 32];
        for _ in 0..draws {
            counts[draw_random_backoff(&p, 0, &mut rng) as usize] += 1;
        }
        let expected = draws as f64 / 32.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 52.19, "chi-square statistic too large: {chi2}");
    }
}

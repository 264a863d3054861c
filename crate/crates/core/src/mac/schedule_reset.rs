//! Schedule Reset: bitmap observation of the slots between an AC's own
//! transmissions and the search for a smaller collision-free schedule.

use serde::{Deserialize, Serialize};

use crate::mac::params::AcParams;

/// How eagerly the bitmap is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SrGamma {
    /// Evaluate after every fully observed cycle.
    Aggressive,
    /// Evaluate after `2^((m - k) + 1)` consecutive successes, enough to
    /// have seen every contender's slot in the largest schedule.
    Conservative,
}

/// Which reductions an evaluation may propose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SrMode {
    /// Only halve the current deterministic backoff.
    Half,
    /// Allow any smaller stage whose schedule length divides the current
    /// one.
    Smaller,
    /// Schedule Reset disabled.
    Off,
}

/// Consecutive successes required before evaluating the bitmap.
pub fn gamma(policy: SrGamma, max_stage: u8, stage: u8) -> u32 {
    match policy {
        SrGamma::Aggressive => 1,
        SrGamma::Conservative => 1u32
            .checked_shl(u32::from(max_stage.saturating_sub(stage)) + 1)
            .unwrap_or(u32::MAX),
    }
}

/// Fresh observation bitmap for a schedule of deterministic backoff `bd`.
/// Position 0 is the AC's own transmission slot and is always marked.
pub fn init_bitmap(bd: u32) -> Vec<bool> {
    let mut b = vec![false; bd as usize + 1];
    b[0] = true;
    b
}

/// Re-index an accumulated bitmap onto a smaller schedule whose length
/// divides the old one: each new position ORs every old position it
/// aliases with. Contenders observed on the old schedule stay visible, so
/// an evaluation right after the change cannot walk into their slots.
pub fn fold_bitmap(old: &[bool], new_bd: u32) -> Vec<bool> {
    let new_len = new_bd as usize + 1;
    debug_assert!(new_len <= old.len() && old.len() % new_len == 0);
    let mut b = vec![false; new_len];
    for (i, &busy) in old.iter().enumerate() {
        if busy {
            b[i % new_len] = true;
        }
    }
    b[0] = true;
    b
}

/// Fold one observed slot into the bitmap. `backoff` is the counter value
/// after this slot's countdown, so the slot sits `bd - backoff` positions
/// after the AC's own transmission slot.
pub fn observe(bitmap: &mut [bool], bd: u32, backoff: u32, busy: bool) {
    debug_assert_eq!(bitmap.len(), bd as usize + 1);
    debug_assert!(backoff <= bd);
    let pos = (bd - backoff) as usize;
    bitmap[pos] |= busy;
}

/// Evaluate the bitmap for a possible stage reduction.
///
/// `Half` proposes `stage - 1` when every non-zero multiple of half the
/// current schedule length is idle. `Smaller` proposes the smallest stage
/// whose schedule length divides the current one and whose non-zero
/// multiples are all idle. The caller clears the bitmap and the success
/// counter after any evaluation.
pub fn evaluate(bitmap: &[bool], params: &AcParams, stage: u8, mode: SrMode) -> Option<u8> {
    let bd = params.deterministic_backoff(stage);
    debug_assert_eq!(bitmap.len(), bd as usize + 1);
    let cycle = bd as usize + 1;
    let idle_multiples = |len: usize| -> bool {
        (1..)
            .map(|c| c * len)
            .take_while(|&p| p < cycle)
            .all(|p| !bitmap[p])
    };
    match mode {
        SrMode::Off => None,
        SrMode::Half => {
            if stage == 0 {
                return None;
            }
            let half = cycle.div_ceil(2);
            idle_multiples(half).then_some(stage - 1)
        }
        SrMode::Smaller => {
            for k_star in 0..stage {
                let len = params.deterministic_backoff(k_star) as usize + 1;
                if cycle % len == 0 && idle_multiples(len) {
                    return Some(k_star);
                }
            }
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vi_like() -> AcParams {
        AcParams { cw_min: 16, cw_max: 512, max_stage: 5, aifsn: 3, txop_limit_us: 0 }
    }

    /// Busy everywhere except the offsets that are multiples of `period`.
    fn pattern(bd: u32, period: usize) -> Vec<bool> {
        let mut b = vec![true; bd as usize + 1];
        for p in (period..b.len()).step_by(period) {
            b[p] = false;
        }
        b
    }

    #[test]
    fn idle_every_eighth_slot_reduces_stage_two_to_zero() {
        // Schedule of 32 slots (bd 31, stage 2 at cw_min 16): idle slots
        // at 8, 16, 24 admit the 8-slot schedule, i.e. stage 0 with bd 7.
        let params = vi_like();
        let bitmap = pattern(31, 8);
        assert_eq!(evaluate(&bitmap, &params, 2, SrMode::Smaller), Some(0));
        // Half mode only proposes one step down.
        assert_eq!(evaluate(&bitmap, &params, 2, SrMode::Half), Some(1));
    }

    #[test]
    fn all_busy_bitmap_yields_no_reduction() {
        let params = vi_like();
        let bitmap = vec![true; 32];
        assert_eq!(evaluate(&bitmap, &params, 2, SrMode::Smaller), None);
        assert_eq!(evaluate(&bitmap, &params, 2, SrMode::Half), None);
    }

    #[test]
    fn half_requires_only_the_midpoint_to_be_idle() {
        let params = vi_like();
        let mut bitmap = vec![true; 32];
        bitmap[16] = false;
        assert_eq!(evaluate(&bitmap, &params, 2, SrMode::Half), Some(1));
        assert_eq!(evaluate(&bitmap, &params, 2, SrMode::Smaller), Some(1));
    }

    #[test]
    fn stage_zero_cannot_reduce() {
        let params = vi_like();
        let bitmap = init_bitmap(params.deterministic_backoff(0));
        assert_eq!(evaluate(&bitmap, &params, 0, SrMode::Half), None);
        assert_eq!(evaluate(&bitmap, &params, 0, SrMode::Smaller), None);
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(SrGamma::Aggressive, 5, 3), 1);
        assert_eq!(gamma(SrGamma::Conservative, 5, 2), 16);
        assert_eq!(gamma(SrGamma::Conservative, 5, 5), 2);
    }

    #[test]
    fn observation_or_semantics() {
        let bd = 7;
        let mut bitmap = init_bitmap(bd);
        assert!(bitmap[0]);
        // Empty slot at offset 3 leaves the bit clear.
        observe(&mut bitmap, bd, 4, false);
        assert!(!bitmap[3]);
        // Busy slot sets it; a later empty observation cannot clear it.
        observe(&mut bitmap, bd, 4, true);
        assert!(bitmap[3]);
        observe(&mut bitmap, bd, 4, false);
        assert!(bitmap[3]);
    }
}

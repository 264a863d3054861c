//! Deterministic-backoff QoS contention transitions: hysteresis,
//! stickiness, Fair Share sizing, and Schedule Reset bookkeeping.

use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::mac::params::AcParams;
use crate::mac::schedule_reset::{evaluate, fold_bitmap, gamma, init_bitmap, SrGamma, SrMode};
use crate::mac::smart::{arm_safe, smart_backoff, SiblingView};
use crate::mac::state::{AcState, DiagCounters};
use crate::mac::MAX_RETRIES;

/// Protocol-level configuration shared by all ACs of a station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EcaConfig {
    pub sr_gamma: SrGamma,
    pub sr_mode: SrMode,
    /// Stickiness refilled on every success.
    pub stickiness_base: u8,
    /// Stickiness refilled after an applied schedule reduction.
    pub stickiness_cap: u8,
}

impl Default for EcaConfig {
    fn default() -> Self {
        EcaConfig {
            sr_gamma: SrGamma::Aggressive,
            sr_mode: SrMode::Half,
            stickiness_base: 1,
            stickiness_cap: 2,
        }
    }
}

/// MPDUs granted to a Fair Share access at backoff stage `k`, before the
/// queue-occupancy clamp.
pub fn fair_share_count(stage: u8) -> u32 {
    (1u32 << stage).min(32)
}

/// Acknowledged transmission. The backoff stage is retained (hysteresis)
/// and the next backoff is the deterministic one for that stage; a
/// pending schedule reduction is applied first when it cannot put this AC
/// on a backlogged sibling's schedule.
pub fn on_success(
    state: &mut AcState,
    params: &AcParams,
    cfg: &EcaConfig,
    sr_enabled: bool,
    siblings: &[SiblingView],
    diag: &mut DiagCounters,
) {
    state.retries = 0;
    if let Some(k_star) = state.pending_stage.take() {
        let bd = params.deterministic_backoff(k_star);
        if arm_safe(bd, u64::from(bd) + 1, siblings) {
            if sr_enabled
                && !state.sr_bitmap.is_empty()
                && state.sr_bitmap.len() % (bd as usize + 1) == 0
            {
                // Re-index the accumulated observations onto the smaller
                // schedule so contenders seen on the old one stay visible;
                // each old cycle covers several of the new ones.
                let ratio = state.sr_bitmap.len() as u32 / (bd + 1);
                state.sr_bitmap = fold_bitmap(&state.sr_bitmap, bd);
                state.sr_age = state.sr_age.saturating_mul(ratio.max(1));
            } else if sr_enabled {
                state.sr_bitmap = init_bitmap(bd);
                state.sr_age = 0;
            }
            state.stage = k_star;
            state.backoff = bd;
            state.deterministic = true;
            state.stickiness_left = cfg.stickiness_cap;
            state.sr_successes = 0;
            diag.sr_applied += 1;
            return;
        }
        diag.sr_vetoes += 1;
    }

    let entering = !state.deterministic;
    let bd = params.deterministic_backoff(state.stage);
    state.backoff = bd;
    state.deterministic = true;
    state.stickiness_left = cfg.stickiness_base;
    if sr_enabled {
        if entering || state.sr_bitmap.len() != bd as usize + 1 {
            state.sr_bitmap = init_bitmap(bd);
            state.sr_successes = 0;
            state.sr_age = 0;
        } else {
            state.sr_successes += 1;
            state.sr_age += 1;
            // The bitmap keeps accumulating across evaluations: a
            // contender on a schedule 2 or 4 times this length appears in
            // it only every second or fourth cycle, so no evaluation runs
            // until the bitmap has covered four full cycles, and finding
            // nothing leaves the observations in place.
            if state.sr_age >= 4
                && state.sr_successes >= gamma(cfg.sr_gamma, params.max_stage, state.stage)
            {
                state.pending_stage = evaluate(&state.sr_bitmap, params, state.stage, cfg.sr_mode);
                state.sr_successes = 0;
            }
        }
    }
}

/// Failed transmission. A deterministic AC with stickiness left re-arms
/// the same backoff; otherwise the stage climbs and a Smart Backoff is
/// drawn. Returns true when the retry limit drops the head-of-line unit.
pub fn on_failure(
    state: &mut AcState,
    params: &AcParams,
    siblings: &[SiblingView],
    rng: &mut ChaCha12Rng,
    diag: &mut DiagCounters,
) -> bool {
    if state.deterministic && state.stickiness_left > 0 {
        state.stickiness_left -= 1;
        state.backoff = params.deterministic_backoff(state.stage);
        state.sr_successes = 0;
        return false;
    }
    state.stage = state.stage.saturating_add(1).min(params.max_stage);
    state.retries += 1;
    state.deterministic = false;
    state.sr_bitmap.clear();
    state.sr_successes = 0;
    state.sr_age = 0;
    state.pending_stage = None;
    if state.retries > MAX_RETRIES {
        state.stage = 0;
        state.retries = 0;
        state.backoff = smart_backoff(params, 0, siblings, rng, diag);
        true
    } else {
        state.backoff = smart_backoff(params, state.stage, siblings, rng, diag);
        false
    }
}

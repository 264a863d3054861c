//! Dynamic per-AC contention state shared by both protocols.

use serde::{Deserialize, Serialize};

use crate::mac::params::AcParams;

/// Mutable contention state of one Access Category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcState {
    /// AC is in contention: backlogged with a drawn backoff counter.
    pub armed: bool,
    /// Backoff counter in slots.
    pub backoff: u32,
    /// Backoff stage `k`.
    pub stage: u8,
    /// Current contention window (EDCA doubling ladder).
    pub cw_curr: u32,
    /// Current backoff was chosen deterministically.
    pub deterministic: bool,
    /// Failed transmissions still tolerated before abandoning the
    /// deterministic backoff.
    pub stickiness_left: u8,
    /// Retransmission attempts for the head-of-line unit.
    pub retries: u8,
    /// Extra idle slots owed after a busy period (AIFSN surplus).
    pub aifs_wait: u8,
    /// Schedule observation bitmap; empty when inactive. Index 0 is the
    /// AC's own transmission slot.
    pub sr_bitmap: Vec<bool>,
    /// Consecutive successful transmissions since the last evaluation.
    pub sr_successes: u32,
    /// Full schedule cycles the bitmap has covered since it was (re)built.
    pub sr_age: u32,
    /// Schedule reduction awaiting application at the next success.
    pub pending_stage: Option<u8>,
}

impl AcState {
    pub fn new(params: &AcParams) -> Self {
        AcState {
            armed: false,
            backoff: 0,
            stage: 0,
            cw_curr: params.cw_min,
            deterministic: false,
            stickiness_left: 0,
            retries: 0,
            aifs_wait: 0,
            sr_bitmap: Vec::new(),
            sr_successes: 0,
            sr_age: 0,
            pending_stage: None,
        }
    }

    /// Reset contention after the queue drains: the AC withdraws until the
    /// next arrival and forgets its ladder position and schedule.
    pub fn reset_on_empty_queue(&mut self, params: &AcParams) {
        self.armed = false;
        self.backoff = 0;
        self.stage = 0;
        self.cw_curr = params.cw_min;
        self.deterministic = false;
        self.stickiness_left = 0;
        self.retries = 0;
        self.aifs_wait = 0;
        self.sr_bitmap.clear();
        self.sr_successes = 0;
        self.sr_age = 0;
        self.pending_stage = None;
    }
}

/// Lightweight diagnostics accumulated per run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagCounters {
    /// Smart draws that exhausted the constrained window and fell back.
    pub smart_fallbacks: u64,
    /// Schedule reductions discarded because applying them would have put
    /// two sibling ACs on a colliding schedule.
    pub sr_vetoes: u64,
    /// Schedule reductions applied.
    pub sr_applied: u64,
    /// Deterministic re-arms that required a sibling redraw to keep the
    /// station free of virtual collisions.
    pub reset_defuses: u64,
}

impl DiagCounters {
    pub fn merge(&mut self, other: &DiagCounters) {
        self.smart_fallbacks += other.smart_fallbacks;
        self.sr_vetoes += other.sr_vetoes;
        self.sr_applied += other.sr_applied;
        self.reset_defuses += other.reset_defuses;
    }
}
